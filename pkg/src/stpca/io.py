"""CSV ingestion and output.

Numbers are written with 17 significant digits so that every float64
survives a write/read cycle exactly.
"""

import csv
import io
import sys
from pathlib import Path

import numpy as np

from .errors import InvalidArgumentError, ParseError
from .geometry import wrap
from .simulate import lagged

ANGLE_UNITS = ("radians", "degrees")
FLOAT_FORMAT = "{:.17g}"


def _open_text(path):
    if str(path) == "-":
        return io.StringIO(sys.stdin.read())
    try:
        return open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise InvalidArgumentError(f"cannot read {path}: {exc.strerror or exc}") from exc


def read_table(path, delimiter=",", header=False):
    """Parse a rectangular numeric CSV into a float array.

    Returns ``(values, column_names)``; names are None without a header.
    Rows and columns in error messages are 1-based and count the header line.
    """
    with _open_text(path) as fh:
        rows = list(csv.reader(fh, delimiter=delimiter))
    names = None
    start = 0
    if header:
        if not rows:
            raise ParseError("input is empty", row=1)
        names = [c.strip() for c in rows[0]]
        start = 1
    data = []
    width = None
    for lineno, row in enumerate(rows[start:], start=start + 1):
        if not row or all(not c.strip() for c in row):
            continue
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ParseError(f"expected {width} fields, found {len(row)}", row=lineno)
        vals = []
        for col, cell in enumerate(row, start=1):
            try:
                v = float(cell)
            except ValueError:
                raise ParseError(f"not a number: {cell.strip()!r}", row=lineno, column=col) from None
            if not np.isfinite(v):
                raise ParseError("non-finite value", row=lineno, column=col)
            vals.append(v)
        data.append(vals)
    if not data:
        raise ParseError("input has no data rows", row=start + 1)
    if names is not None and len(names) != width:
        raise ParseError(f"header has {len(names)} fields but rows have {width}", row=1)
    return np.array(data, dtype=np.float64), names


def to_radians(values, unit):
    if unit not in ANGLE_UNITS:
        raise InvalidArgumentError(f"angle unit must be one of {ANGLE_UNITS}")
    return np.deg2rad(values) if unit == "degrees" else values


def read_angles(path, delimiter=",", header=False, angle_unit="radians", lag=0):
    """Read torus data: one row per observation, one column per angle.

    With ``lag > 0`` the file must hold a single series, which is expanded
    into rows ``(t_i, t_{i+1}, ..., t_{i+lag})``.
    """
    values, _ = read_table(path, delimiter, header)
    values = wrap(to_radians(values, angle_unit))
    if lag:
        if values.shape[1] != 1:
            raise InvalidArgumentError("--lag needs a single-column series")
        values = lagged(values[:, 0], lag)
    return values


def format_row(row):
    out = []
    for v in row:
        if isinstance(v, (bool, np.bool_)):
            out.append("1" if v else "0")
        elif isinstance(v, (int, np.integer)):
            out.append(str(int(v)))
        elif isinstance(v, str):
            out.append(v)
        else:
            out.append(FLOAT_FORMAT.format(float(v)))
    return out


def write_table(path, header, rows, delimiter=","):
    """Write rows (any iterable of sequences) to ``path``, or stdout for ``-``/None."""
    if path is None or str(path) == "-":
        _write(sys.stdout, header, rows, delimiter)
        return
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        _write(fh, header, rows, delimiter)


def _write(fh, header, rows, delimiter):
    w = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
    if header:
        w.writerow(header)
    for row in rows:
        w.writerow(format_row(row))


def write_matrix(path, M, names, delimiter=","):
    write_table(path, names, np.atleast_2d(M), delimiter)

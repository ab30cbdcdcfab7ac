"""Command-line interface: ``stpca <command> [options]``.

Exit codes: 0 on success, 2 for bad input or usage, 3 for numerical failure.
Set ``STPCA_LOG`` (e.g. ``INFO``, ``DEBUG``) to see progress logs on stderr.
"""

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import _accel
from .analysis import circular_kde, classification_rate, mode_cluster, watson_uniformity_test
from .embedding import check_spherical_embeddability, pairwise_torus_distances
from .errors import InvalidArgumentError, NumericalFailureError
from .io import read_angles, read_table, to_radians, write_table
from .model import (
    CurveOptions,
    IoOptions,
    RadiusOptions,
    RunConfig,
    SmdsOptions,
    fit,
    load_model,
    write_artifacts,
)
from .pns import pns_inverse
from .radius import RadiusSelectionConfig, select_radius
from .simulate import DEFAULT_CLUSTER_SD, SCENARIOS, simulate
from .torus_map import predict

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERICAL = 3

log = logging.getLogger("stpca")


def _configure_logging():
    level = os.environ.get("STPCA_LOG", "WARNING").strip().upper()
    if not isinstance(logging.getLevelName(level), int):
        level = "WARNING"
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def _emit_json(obj):
    json.dump(obj, sys.stdout, indent=1, sort_keys=True)
    sys.stdout.write("\n")


def _input_options(p, lag=True):
    p.add_argument("--input", required=True, help="CSV file, or - for stdin")
    p.add_argument("--delimiter", default=",", help="field separator (default ',')")
    p.add_argument("--header", action="store_true", help="first line is a header")
    p.add_argument("--angle-unit", choices=["radians", "degrees"], default="radians")
    if lag:
        p.add_argument("--lag", type=int, default=0, help="expand a single series into lagged rows")


def _read(args):
    return read_angles(
        args.input,
        delimiter=args.delimiter,
        header=args.header,
        angle_unit=args.angle_unit,
        lag=getattr(args, "lag", 0),
    )


def cmd_fit(args):
    config = RunConfig(
        seed=args.seed,
        radius=RadiusOptions(
            mode=args.radius_mode,
            value=args.radius,
            M=args.mc_replicates,
            n_mc=args.mc_size,
        ),
        smds=SmdsOptions(tolerance=args.tolerance, joint_radius=not args.fixed_radius),
        curve=CurveOptions(m=args.grid_m, restarts=args.restarts),
        io=IoOptions(
            input=None if args.input == "-" else Path(args.input).name,
            output_dir=None,
            delimiter=args.delimiter,
            header=args.header,
            angle_unit=args.angle_unit,
            lag=args.lag,
        ),
    )
    if args.radius is not None and args.radius_mode == "auto":
        raise InvalidArgumentError("--radius needs --radius-mode fixed")
    X = _read(args)
    model = fit(X, config)
    out = write_artifacts(model, args.output_dir)
    _emit_json(
        {
            "output_dir": str(out),
            "n": model.n,
            "d": model.d,
            "r_star": model.r_star,
            "r_hat": model.r_hat,
            "stress": model.smds.stress,
            "torus_proportions": model.variance.proportions.tolist(),
            "sphere_proportions": model.pns.proportions.tolist(),
            "curve_closed": model.curve.closed,
        }
    )


def cmd_simulate(args):
    X, labels = simulate(args.scenario, seed=args.seed, sd=args.sd, n=args.n)
    names = [f"theta_{k + 1}" for k in range(X.shape[1])]
    if args.output_dir is None:
        write_table(None, names if args.header else None, X)
        return
    out = Path(args.output_dir)
    write_table(out / f"{args.scenario}.csv", names if args.header else None, X)
    if labels is not None:
        write_table(out / f"{args.scenario}_labels.csv", ["label"] if args.header else None, labels[:, None])


def cmd_predict(args):
    model = load_model(args.model)
    values, _ = read_table(args.input, args.delimiter, args.header)
    d = model.d
    if args.kind == "scores":
        if values.shape[1] != d:
            raise InvalidArgumentError(f"scores need {d} columns, got {values.shape[1]}")
        Y = model.r_hat * np.atleast_2d(pns_inverse(values, model.pns))
    else:
        if values.shape[1] != d + 1:
            raise InvalidArgumentError(f"sphere points need {d + 1} columns, got {values.shape[1]}")
        norms = np.linalg.norm(values, axis=1)
        if np.any(norms == 0):
            raise InvalidArgumentError("sphere points must be nonzero")
        Y = model.r_hat * values / norms[:, None]
    paired = model.paired()
    rows = []
    for y in Y:
        p = predict(y, paired, restarts=model.config.curve.restarts)
        rows.append([*p.x, p.objective])
    names = [f"theta_{k + 1}" for k in range(d)] + ["objective"]
    target = None if args.output_dir is None else Path(args.output_dir) / "predictions.csv"
    write_table(target, names, rows)


def cmd_radius(args):
    cfg = RadiusSelectionConfig(
        d=args.dim,
        n=args.mc_size,
        M=args.mc_replicates,
        seed=args.seed,
        tolerance=args.tolerance,
    )
    est = select_radius(cfg)
    if args.output_dir is not None:
        write_table(Path(args.output_dir) / "radius_trace.csv", ["r", "objective"], est.evaluations)
    _emit_json(
        {
            "d": args.dim,
            "r_star": est.r_star,
            "objective": est.objective_value,
            "evaluations": len(est.evaluations),
        }
    )


def cmd_embed_check(args):
    X = _read(args)
    report = check_spherical_embeddability(pairwise_torus_distances(X), args.radius)
    _emit_json(report.to_dict())


def _column(values, col):
    if not 1 <= col <= values.shape[1]:
        raise InvalidArgumentError(f"--column {col} is outside 1..{values.shape[1]}")
    return values[:, col - 1]


def _bandwidth(text):
    if text is None or text == "rule":
        return text
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError("bandwidth must be a number or 'rule'") from None


def cmd_cluster(args):
    values, _ = read_table(args.input, args.delimiter, args.header)
    angles = to_radians(_column(values, args.column), args.angle_unit)
    kde = circular_kde(angles, args.bandwidth)
    res = mode_cluster(kde, grid=args.grid)
    summary = {
        "bandwidth": res.bandwidth,
        "n_clusters": res.n_clusters,
        "modes": res.modes.tolist(),
        "antimodes": res.basin_boundaries.tolist(),
        "degenerate": res.degenerate,
    }
    if args.truth is not None:
        truth, _ = read_table(args.truth, args.delimiter, args.truth_header)
        if truth.shape[0] != res.labels.size:
            raise InvalidArgumentError("truth labels and input differ in length")
        summary["classification_rate"] = classification_rate(res.labels, truth[:, 0])
    if args.output_dir is not None:
        out = Path(args.output_dir)
        write_table(out / "labels.csv", ["label"], res.labels[:, None])
        (out / "modes.json").write_text(json.dumps(summary, indent=1, sort_keys=True) + "\n")
    _emit_json(summary)


def cmd_uniformity(args):
    values, _ = read_table(args.input, args.delimiter, args.header)
    angles = to_radians(_column(values, args.column), args.angle_unit)
    u2, p = watson_uniformity_test(angles)
    _emit_json({"test": "watson", "n": int(angles.size), "statistic": u2, "p_value": p})


def build_parser():
    parser = argparse.ArgumentParser(prog="stpca", description="Scaled torus PCA")
    parser.add_argument("--threads", type=int, default=None, help="cap on worker threads")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit a model to torus data")
    _input_options(p)
    p.add_argument("--output-dir", default=".")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--radius-mode", choices=["auto", "fixed"], default="auto")
    p.add_argument("--radius", type=float, default=None, help="starting radius for --radius-mode fixed")
    p.add_argument("--fixed-radius", action="store_true", help="keep the radius fixed during spherical MDS")
    p.add_argument("--tolerance", type=float, default=SmdsOptions.tolerance, help="relative stress tolerance")
    p.add_argument("--grid-m", type=int, default=CurveOptions.m, help="principal curve grid size")
    p.add_argument("--restarts", type=int, default=CurveOptions.restarts)
    p.add_argument("--mc-replicates", type=int, default=RadiusOptions.M)
    p.add_argument("--mc-size", type=int, default=RadiusOptions.n_mc)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("simulate", help="generate a synthetic data set")
    p.add_argument("--scenario", required=True, choices=SCENARIOS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sd", type=float, default=DEFAULT_CLUSTER_SD, help="cluster standard deviation")
    p.add_argument("--n", type=int, default=None, help="size override")
    p.add_argument("--output-dir", default=None, help="directory for the CSV (stdout if omitted)")
    p.add_argument("--header", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("predict", help="map sphere points or scores to the torus")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--kind", choices=["scores", "sphere"], default="scores")
    p.add_argument("--delimiter", default=",")
    p.add_argument("--header", action="store_true")
    p.add_argument("--output-dir", default=None)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("radius", help="select the sphere radius for dimension d")
    p.add_argument("--dim", "-d", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mc-replicates", type=int, default=RadiusOptions.M)
    p.add_argument("--mc-size", type=int, default=RadiusOptions.n_mc)
    p.add_argument("--tolerance", type=float, default=RadiusOptions.tolerance)
    p.add_argument("--output-dir", default=None, help="write radius_trace.csv here")
    p.set_defaults(func=cmd_radius)

    p = sub.add_parser("embed-check", help="spherical embeddability diagnostics")
    _input_options(p)
    p.add_argument("--radius", type=float, required=True)
    p.set_defaults(func=cmd_embed_check)

    p = sub.add_parser("cluster", help="KDE mode clustering of one angle column")
    _input_options(p, lag=False)
    p.add_argument("--column", type=int, default=1, help="1-based column (default 1)")
    p.add_argument("--bandwidth", type=_bandwidth, default=None, help="radians, or 'rule'")
    p.add_argument("--grid", type=int, default=2048)
    p.add_argument("--truth", default=None, help="CSV of reference labels")
    p.add_argument("--truth-header", action="store_true", help="truth file has a header line")
    p.add_argument("--output-dir", default=None)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("uniformity", help="Watson test of circular uniformity")
    _input_options(p, lag=False)
    p.add_argument("--column", type=int, default=1)
    p.set_defaults(func=cmd_uniformity)
    return parser


def main(argv=None):
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads is not None:
        if args.threads < 1:
            parser.error("--threads must be >= 1")
        _accel.set_num_threads(args.threads)
    try:
        args.func(args)
    except InvalidArgumentError as exc:
        print(f"stpca: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalFailureError as exc:
        print(f"stpca: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

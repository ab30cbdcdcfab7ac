"""Backend selection for the compiled kernels.

Setting ``STPCA_DISABLE_NUMBA=1`` (or having numba unavailable) routes every
hot kernel through the pure-numpy implementations instead.
"""

import os
import warnings

_FALSEY = {"", "0", "false", "no", "off"}


def numba_requested():
    return os.environ.get("STPCA_DISABLE_NUMBA", "").strip().lower() in _FALSEY


# numba probes TBB first and warns when the system copy is too old; it then
# falls back to another threading layer on its own
warnings.filterwarnings("ignore", message=".*TBB threading layer.*")

try:
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and numba_requested()


def set_num_threads(n):
    """Cap the numba worker pool; a no-op on the numpy backend."""
    if not USE_NUMBA or n is None:
        return
    import numba

    numba.set_num_threads(max(1, min(int(n), numba.config.NUMBA_NUM_THREADS)))

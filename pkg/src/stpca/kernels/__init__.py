"""Hot numeric kernels, dispatched to numba or numpy at import time.

The backend is fixed per process by ``STPCA_DISABLE_NUMBA`` (see
``stpca._accel``). Both implementations stay importable as
``stpca.kernels._numpy`` and ``stpca.kernels._numba`` for comparison.
"""

from .._accel import USE_NUMBA
from ._numpy import COS_CLAMP, GRAD_CUTOFF, signed_wrap

if USE_NUMBA:
    from ._numba import (
        interp_objective,
        predict_objective,
        stress,
        stress_grad,
        torus_pairwise,
    )

    BACKEND = "numba"
else:
    from ._numpy import (
        interp_objective,
        predict_objective,
        stress,
        stress_grad,
        torus_pairwise,
    )

    BACKEND = "numpy"

__all__ = [
    "BACKEND",
    "COS_CLAMP",
    "GRAD_CUTOFF",
    "interp_objective",
    "predict_objective",
    "signed_wrap",
    "stress",
    "stress_grad",
    "torus_pairwise",
]

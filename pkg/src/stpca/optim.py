"""Dense BFGS with a backtracking Armijo line search.

The stopping rule is relative objective improvement per accepted step,
which is what the SMDS solver exposes as its tolerance knob. Problem sizes
here are a few thousand parameters at most, so the dense inverse Hessian is
fine.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NumericalFailureError

ARMIJO_C1 = 1e-4
SHRINK = 0.5
MAX_BACKTRACKS = 50


@dataclass
class OptimizeResult:
    x: np.ndarray
    fun: float
    grad: np.ndarray
    nit: int
    nfev: int
    converged: bool
    message: str


def minimize_bfgs(
    fun_grad,
    x0,
    rel_tol=1e-8,
    max_evals=10_000,
    max_iter=None,
    gtol=1e-12,
    ftol_abs=0.0,
    restart_on_stall=False,
    retract=None,
):
    """Minimise ``fun_grad(x) -> (f, g)`` starting at ``x0``.

    Stops when an accepted step improves ``f`` by at most ``rel_tol * |f|``,
    when ``|g|_inf <= gtol``, when ``f <= ftol_abs``, or when the evaluation
    or iteration budget runs out (``converged=False`` in the latter case).
    Trial points with non-finite objective are treated as failed steps.

    With ``restart_on_stall`` a low-progress step first resets the inverse
    Hessian to a scaled identity; the run only stops when a step taken
    straight after such a reset also stalls.

    ``retract(x, g) -> (x, g)`` is applied to every accepted point. It must
    leave ``f`` unchanged; it exists for objectives with a scale symmetry,
    where plain steps let the redundant coordinates drift and the
    conditioning degrade.
    """
    x = np.array(x0, dtype=np.float64, copy=True)
    f, g = fun_grad(x)
    nfev = 1
    if not np.isfinite(f) or not np.all(np.isfinite(g)):
        raise NumericalFailureError("non-finite objective at the starting point", last_iterate=x)
    n = x.size
    H = None
    nit = 0
    max_iter = max_iter if max_iter is not None else np.inf

    def done(msg, ok=True):
        return OptimizeResult(x, float(f), g, nit, nfev, ok, msg)

    while True:
        if np.max(np.abs(g)) <= gtol:
            return done("gradient below tolerance")
        if f <= ftol_abs:
            return done("objective below absolute floor")
        if nit >= max_iter:
            return done("iteration limit reached", ok=False)
        if nfev >= max_evals:
            return done("evaluation limit reached", ok=False)

        first = H is None
        if first:
            direction = -g / max(1.0, np.linalg.norm(g))
        else:
            direction = -H @ g
        slope = float(g @ direction)
        if slope >= 0:
            # lost positive definiteness; restart from steepest descent
            H = None
            direction = -g / max(1.0, np.linalg.norm(g))
            slope = float(g @ direction)
            first = True

        step = 1.0
        accepted = False
        f_new = g_new = None
        for _ in range(MAX_BACKTRACKS):
            if nfev >= max_evals:
                break
            trial = x + step * direction
            f_try, g_try = fun_grad(trial)
            nfev += 1
            if np.isfinite(f_try) and f_try <= f + ARMIJO_C1 * step * slope:
                accepted = True
                f_new, g_new, x_new = f_try, g_try, trial
                break
            step *= SHRINK
        if accepted and first and step == 1.0:
            # unscaled first step: expand while the objective keeps dropping
            for _ in range(60):
                if nfev >= max_evals:
                    break
                trial = x + 2.0 * step * direction
                f_try, g_try = fun_grad(trial)
                nfev += 1
                if not np.isfinite(f_try) or f_try >= f_new:
                    break
                step *= 2.0
                f_new, g_new, x_new = f_try, g_try, trial

        if not accepted:
            if H is not None:
                H = None
                continue
            return done("line search made no progress", ok=bool(np.max(np.abs(g)) <= 1e-6))
        if not np.all(np.isfinite(g_new)):
            raise NumericalFailureError("non-finite gradient", last_iterate=x_new)
        if retract is not None:
            x_new, g_new = retract(x_new, g_new)

        s = x_new - x
        y = g_new - g
        sy = float(s @ y)
        if H is None:
            H = np.eye(n)
            yy = float(y @ y)
            if sy > 0 and yy > 0:
                H *= sy / yy
        if sy > 1e-12 * np.linalg.norm(s) * np.linalg.norm(y):
            rho = 1.0 / sy
            Hy = H @ y
            H += ((sy + y @ Hy) * rho * rho) * np.outer(s, s) - rho * (
                np.outer(Hy, s) + np.outer(s, Hy)
            )
        improvement = f - f_new
        f_old = f
        x, f, g = x_new, f_new, g_new
        nit += 1
        if improvement <= rel_tol * abs(f_old):
            if restart_on_stall and not first:
                H = None
                continue
            return done("relative improvement below tolerance")

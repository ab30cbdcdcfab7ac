"""Spherical MDS of torus distances by unconstrained quasi-Newton search.

Points are parametrised as free vectors ``z_i`` in R^(d+1); only their
directions matter. The first point is pinned to the positive last axis
(``z_1 = (0, ..., 0, exp(u))``) to remove the rotational gauge freedom, and in
joint mode the sphere radius is optimised alongside the directions.
"""

import logging
from dataclasses import dataclass

import numpy as np

from . import kernels
from .embedding import classical_mds, project_to_sphere, validate_distance_matrix
from .errors import InvalidArgumentError, NumericalFailureError
from .geometry import rotation_to_north_pole
from .optim import minimize_bfgs

log = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 5e-2


@dataclass
class SmdsConfig:
    tolerance: float = DEFAULT_TOLERANCE
    # None means 500 * n * (d + 1)
    max_evals: int | None = None
    joint_radius: bool = True


@dataclass
class SmdsSolution:
    configuration: np.ndarray
    fitted_radius: float
    stress: float
    iterations: int
    evaluations: int
    converged: bool
    initial_radius: float
    initial_stress: float
    message: str = ""


def _check_config(Z):
    Z = np.ascontiguousarray(Z, dtype=np.float64)
    if np.any(np.linalg.norm(Z, axis=1) == 0.0):
        raise InvalidArgumentError("stress: configuration contains a point at the origin")
    return Z


def stress(Z, r, D):
    """Normalised geodesic stress between ``D`` and the directions of ``Z``.

    Sums over ordered pairs ``i != j`` divided by ``n (n - 1)``.
    """
    Z = _check_config(Z)
    return kernels.stress(Z, float(r), np.ascontiguousarray(D, dtype=np.float64))


def stress_gradient(Z, r, D):
    """Return ``(stress, dstress/dZ, dstress/dr)``."""
    Z = _check_config(Z)
    return kernels.stress_grad(Z, float(r), np.ascontiguousarray(D, dtype=np.float64))


def gauge_fix(Y):
    """Rotate the whole configuration so the first point sits on the +last axis."""
    Y = np.asarray(Y, dtype=np.float64)
    norms = np.linalg.norm(Y, axis=1)
    M = rotation_to_north_pole(Y[0] / norms[0])
    out = Y @ M.T
    out[0] = 0.0
    out[0, -1] = norms[0]
    return out


def initial_configuration(D, d, r, rng=None):
    """Classical MDS into R^(d+1), projected radially onto the sphere of radius r."""
    return project_to_sphere(classical_mds(D, d + 1), r, rng=rng)


def _pack(Z, r, joint):
    u = np.log(np.linalg.norm(Z[0]))
    parts = [[u], Z[1:].ravel()]
    if joint:
        parts.append([r])
    return np.concatenate(parts)


def _unpack(theta, n, p, r_fixed, joint):
    Z = np.empty((n, p))
    Z[0] = 0.0
    Z[0, -1] = np.exp(theta[0])
    Z[1:] = theta[1 : 1 + (n - 1) * p].reshape(n - 1, p)
    r = theta[-1] if joint else r_fixed
    return Z, r


def solve_smds(D, d, radius, init=None, config=None, rng=None):
    """Fit points on the d-sphere whose geodesic distances match ``D``.

    Args:
        D: (n, n) torus distance matrix.
        d: torus dimension; the configuration lives in R^(d+1).
        radius: fixed radius, or the starting radius in joint mode.
        init: optional (n, d+1) starting configuration; defaults to the
            projected classical MDS solution.
        config: ``SmdsConfig``.

    Returns:
        ``SmdsSolution`` whose configuration lies exactly on the sphere of the
        fitted radius, with the first point at ``(0, ..., 0, r)`` and the
        stress recomputed after that projection.
    """
    config = config or SmdsConfig()
    D = np.ascontiguousarray(validate_distance_matrix(D))
    n = D.shape[0]
    p = d + 1
    if n < d + 2:
        raise InvalidArgumentError(f"solve_smds: need n >= d + 2 points, got n={n}, d={d}")
    if not radius > 0:
        raise InvalidArgumentError("solve_smds: radius must be positive")
    if init is None:
        init = initial_configuration(D, d, radius, rng=rng)
    init = np.asarray(init, dtype=np.float64)
    if init.shape != (n, p):
        raise InvalidArgumentError(f"solve_smds: init must have shape {(n, p)}")

    Z0 = gauge_fix(init / np.linalg.norm(init, axis=1, keepdims=True))
    joint = config.joint_radius
    theta0 = _pack(Z0, radius, joint)
    max_evals = config.max_evals or 500 * n * p
    r_fixed = float(radius)

    def fun_grad(theta):
        Z, r = _unpack(theta, n, p, r_fixed, joint)
        if not r > 0:
            return np.inf, np.zeros_like(theta)
        f, G, dr = kernels.stress_grad(Z, r, D)
        grad = np.empty_like(theta)
        # only the last coordinate of z_1 is free, through s = exp(u)
        grad[0] = G[0, -1] * Z[0, -1]
        grad[1 : 1 + (n - 1) * p] = G[1:].ravel()
        if joint:
            grad[-1] = dr
        if not np.isfinite(f):
            raise NumericalFailureError("non-finite stress", last_iterate=Z, stage="smds")
        return f, grad

    rows = slice(1, 1 + (n - 1) * p)

    def retract(theta, grad):
        # stress ignores row norms, but every tangential step lengthens the
        # rows and shrinks their gradients; pull them back to the unit sphere
        theta, grad = theta.copy(), grad.copy()
        Z = theta[rows].reshape(n - 1, p)
        norms = np.linalg.norm(Z, axis=1, keepdims=True)
        theta[rows] = (Z / norms).ravel()
        grad[rows] = (grad[rows].reshape(n - 1, p) * norms).ravel()
        return theta, grad

    f0 = kernels.stress(Z0, float(radius), D)
    res = minimize_bfgs(
        fun_grad, theta0, rel_tol=config.tolerance, max_evals=max_evals, ftol_abs=1e-28, retract=retract
    )
    Z, r_hat = _unpack(res.x, n, p, r_fixed, joint)
    r_hat = float(r_hat)
    Y = r_hat * Z / np.linalg.norm(Z, axis=1, keepdims=True)
    Y[0] = 0.0
    Y[0, -1] = r_hat
    final = kernels.stress(np.ascontiguousarray(Y), r_hat, D)
    log.info(
        "smds: n=%d d=%d r0=%.4f r_hat=%.4f stress %.5f -> %.5f in %d iterations (%s)",
        n, d, radius, r_hat, f0, final, res.nit, res.message,
    )
    return SmdsSolution(
        configuration=Y,
        fitted_radius=r_hat,
        stress=float(final),
        iterations=res.nit,
        evaluations=res.nfev,
        converged=res.converged,
        initial_radius=float(radius),
        initial_stress=float(f0),
        message=res.message,
    )

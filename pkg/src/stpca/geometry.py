"""Distances, wrapping, rotations and sampling on the torus and the sphere.

Torus points are arrays whose last axis holds ``d`` angles in [-pi, pi).
Sphere points are arrays whose last axis holds ``d + 1`` Cartesian
coordinates with a common norm ``r``.
"""

import numpy as np

from .errors import InvalidArgumentError

TWO_PI = 2.0 * np.pi

# Below this distance from the south pole the geodesic rotation is replaced
# by the Householder fallback.
SOUTH_POLE_TOL = 1e-12


def wrap(angles):
    """Map angles into [-pi, pi), identifying pi with -pi."""
    a = np.asarray(angles, dtype=np.float64)
    if not np.all(np.isfinite(a)):
        raise InvalidArgumentError("wrap: angles must be finite")
    out = np.mod(a + np.pi, TWO_PI) - np.pi
    # np.mod can return the divisor itself for tiny negative inputs
    out = np.where(out >= np.pi, out - TWO_PI, out)
    return out


def circle_distance(phi, psi):
    """Arc length between angles on the unit circle, in [0, pi]."""
    diff = np.mod(np.abs(np.asarray(phi, float) - np.asarray(psi, float)), TWO_PI)
    return np.minimum(diff, TWO_PI - diff)


def torus_distance(x, y):
    """Geodesic distance on the flat torus (broadcasts over leading axes)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape[-1] != y.shape[-1]:
        raise InvalidArgumentError(
            f"torus_distance: dimension mismatch {x.shape[-1]} vs {y.shape[-1]}"
        )
    return np.sqrt(np.sum(circle_distance(x, y) ** 2, axis=-1))


def sphere_distance(x, y, r=None):
    """Great-circle distance ``r * arccos(x'y / r^2)`` on the sphere of radius r.

    When ``r`` is omitted it is read off the norm of ``x``; the two points must
    then share that radius to within 1e-9 relative.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape[-1] != y.shape[-1]:
        raise InvalidArgumentError("sphere_distance: dimension mismatch")
    rx = np.linalg.norm(x, axis=-1)
    ry = np.linalg.norm(y, axis=-1)
    if r is None:
        r = rx
    if not np.allclose(rx, r, rtol=1e-9, atol=0) or not np.allclose(ry, r, rtol=1e-9, atol=0):
        raise InvalidArgumentError("sphere_distance: points do not share the radius")
    cos = np.clip(np.sum(x * y, axis=-1) / (r * r), -1.0, 1.0)
    return r * np.arccos(cos)


def north_pole(dim):
    e = np.zeros(dim)
    e[-1] = 1.0
    return e


def rotation_to_north_pole(v):
    """Proper rotation matrix ``M`` with ``M @ v = (0, ..., 0, 1)``.

    Uses the minimal rotation in the plane spanned by ``v`` and the pole, so
    the identity is returned when ``v`` already is the pole. Within 1e-12 of
    the south pole that plane is ill-defined; there a Householder reflection
    sending ``v`` to the pole is composed with a sign flip of the first
    coordinate, which keeps the determinant at +1.
    """
    v = np.asarray(v, dtype=np.float64)
    if abs(np.linalg.norm(v) - 1.0) > 1e-9:
        raise InvalidArgumentError("rotation_to_north_pole: v must be a unit vector")
    p = v.shape[0]
    b = north_pole(p)
    cos_a = float(np.clip(v[-1], -1.0, 1.0))
    if np.linalg.norm(v + b) < SOUTH_POLE_TOL:
        u = v - b
        u /= np.linalg.norm(u)
        M = np.eye(p) - 2.0 * np.outer(u, u)
        M[0] *= -1.0
        return M
    c = v - b * cos_a
    nc = np.linalg.norm(c)
    if nc == 0.0:
        return np.eye(p)
    c /= nc
    sin_a = nc
    # rotation by angle a in the (c, b) plane taking v -> b
    M = (
        np.eye(p)
        + sin_a * (np.outer(b, c) - np.outer(c, b))
        + (cos_a - 1.0) * (np.outer(b, b) + np.outer(c, c))
    )
    return M


def sample_uniform_torus(n, d, rng):
    if n < 1 or d < 1:
        raise InvalidArgumentError("sample_uniform_torus: need n >= 1 and d >= 1")
    return wrap(rng.uniform(-np.pi, np.pi, size=(n, d)))


def sample_uniform_sphere(n, d, r, rng):
    """Uniform draws on the d-sphere of radius r in R^(d+1)."""
    if n < 1 or d < 1 or not r > 0:
        raise InvalidArgumentError("sample_uniform_sphere: need n, d >= 1 and r > 0")
    z = rng.standard_normal((n, d + 1))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    return r * z


def _psd_factor(cov):
    cov = np.atleast_2d(np.asarray(cov, dtype=np.float64))
    if cov.shape[0] != cov.shape[1] or not np.allclose(cov, cov.T, atol=1e-12):
        raise InvalidArgumentError("covariance must be a symmetric square matrix")
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        pass
    evals, evecs = np.linalg.eigh(cov)
    if evals.min() < -1e-10 * max(1.0, np.abs(evals).max()):
        raise InvalidArgumentError("covariance is not positive semidefinite")
    return evecs * np.sqrt(np.clip(evals, 0.0, None))


def sample_wrapped_normal(n, mean, cov, rng):
    """Draw from N(mean, cov) in R^d and wrap each coordinate."""
    mean = np.atleast_1d(np.asarray(mean, dtype=np.float64))
    L = _psd_factor(cov)
    if L.shape[0] != mean.shape[0]:
        raise InvalidArgumentError("sample_wrapped_normal: mean/covariance dimension mismatch")
    z = rng.standard_normal((n, mean.shape[0]))
    return wrap(mean + z @ L.T)


def frechet_mean_circle(angles, weights=None):
    """Global minimiser of the (weighted) sum of squared arc lengths.

    The objective is piecewise quadratic; each arrangement of the sample
    relative to the cut point has its own Euclidean mean, and the global
    minimiser is one of those n candidates. All are evaluated and the best
    kept, ties going to the smallest angle.
    """
    a = wrap(np.atleast_1d(angles))
    n = a.shape[0]
    if n == 0:
        raise InvalidArgumentError("frechet_mean_circle: empty input")
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=np.float64)
    if w.shape != a.shape or np.any(w < 0) or w.sum() <= 0:
        raise InvalidArgumentError("frechet_mean_circle: invalid weights")
    order = np.argsort(a, kind="stable")
    a_s, w_s = a[order], w[order]
    W = w_s.sum()
    base = np.dot(w_s, a_s)
    # candidate k lifts the k smallest angles by 2*pi
    shift = np.concatenate([[0.0], np.cumsum(w_s)[:-1]])
    cands = wrap((base + TWO_PI * shift) / W)

    best_val = np.inf
    best = None
    tol = 1e-12
    for lo in range(0, n, 256):
        c = cands[lo : lo + 256]
        obj = circle_distance(c[:, None], a[None, :]) ** 2 @ w
        for ci, oi in zip(c, obj):
            if best is None or oi < best_val - tol * max(1.0, abs(best_val)):
                best_val, best = oi, ci
            elif abs(oi - best_val) <= tol * max(1.0, abs(best_val)) and ci < best:
                best = ci
    return float(best)


def circle_objective(theta, angles, weights=None):
    angles = np.atleast_1d(angles)
    w = np.ones(angles.shape[0]) if weights is None else np.asarray(weights)
    return float(circle_distance(theta, angles) ** 2 @ w)


def unit_angle(x, y):
    """Angle between the directions of ``x`` and ``y``, accurate near 0 and pi."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    xu = x / np.linalg.norm(x, axis=-1, keepdims=True)
    yu = y / np.linalg.norm(y, axis=-1, keepdims=True)
    chord = np.linalg.norm(xu - yu, axis=-1)
    return 2.0 * np.arcsin(np.clip(chord / 2.0, 0.0, 1.0))

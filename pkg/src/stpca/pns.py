"""Principal nested spheres on the unit sphere.

Starting from data on S^d, a best-fitting (possibly small) subsphere is
found, the data are projected onto it and mapped to a unit S^(d-1), and the
step is repeated down to S^1, where the backwards mean is the Frechet mean
of the circular angles.

Score layout: column 0 is the signed angle on the final circle measured
from the backwards mean, in [-pi, pi); column j >= 1 is the signed residual
(in radians, unscaled) from the subsphere fitted at level j + 1, i.e. the
outermost residual sits in the last column. Zeroing columns k.. of a score
vector and mapping back gives the projection onto the k-dimensional nested
sphere.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DegenerateSubsphereError, InvalidArgumentError
from .geometry import frechet_mean_circle, rotation_to_north_pole, wrap
from .optim import minimize_bfgs

log = logging.getLogger(__name__)

MIN_SIN_RADIUS = 1e-6
FIT_REL_TOL = 1e-10
FIT_MAX_ROUNDS = 200


@dataclass
class Subsphere:
    center: np.ndarray
    geodesic_radius: float
    level: int
    rotation: np.ndarray = field(repr=False)

    @classmethod
    def from_center(cls, center, radius):
        center = np.asarray(center, dtype=np.float64)
        center = center / np.linalg.norm(center)
        return cls(center, float(radius), center.shape[0] - 1, rotation_to_north_pole(center))


@dataclass
class PnsModel:
    subspheres: list
    circle_mean: float
    backwards_mean: np.ndarray
    scores: np.ndarray
    sphere_variances: np.ndarray
    projections: Optional[list] = field(default=None, repr=False)

    @property
    def dim(self):
        return self.backwards_mean.shape[0] - 1

    @property
    def proportions(self):
        total = self.sphere_variances.sum()
        if total <= 0:
            return np.full_like(self.sphere_variances, np.nan)
        return self.sphere_variances / total

    @property
    def degenerate(self):
        return not self.sphere_variances.sum() > 0

    @property
    def sin_factors(self):
        """Ambient radius of each nested sphere, outermost first (S^(d-1), ..., S^1)."""
        return np.cumprod([np.sin(s.geodesic_radius) for s in self.subspheres])

    def inverse(self, xi):
        return pns_inverse(xi, self)


def _rotated(Y, s):
    return Y @ s.rotation.T


def _polar(Q):
    """Angle from the pole and unit direction in the orthogonal complement."""
    k = Q.shape[1] - 1
    tangent = Q[:, :k]
    tnorm = np.linalg.norm(tangent, axis=1)
    theta = np.arctan2(tnorm, Q[:, k])
    U = np.empty_like(tangent)
    ok = tnorm > 1e-12
    U[ok] = tangent[ok] / tnorm[ok, None]
    # at the centre or its antipode every direction is equally near; fixed meridian
    U[~ok] = 0.0
    U[~ok, 0] = 1.0
    return theta, U


def _profile_objective(w, Y):
    nw = np.linalg.norm(w)
    v = w / nw
    craw = Y @ v
    c = np.clip(craw, -1.0 + 1e-12, 1.0 - 1e-12)
    theta = np.arccos(c)
    dev = theta - theta.mean()
    f = float(dev @ dev)
    active = np.abs(craw) < 1.0 - 1e-10
    coef = np.zeros_like(c)
    coef[active] = -2.0 * dev[active] / np.sqrt(1.0 - c[active] ** 2)
    gv = coef @ Y
    g = (gv - (gv @ v) * v) / nw
    return f, g


def subsphere_objective(v, rho, Y):
    theta = np.arccos(np.clip(Y @ v, -1.0, 1.0))
    return float(np.sum((theta - rho) ** 2))


def _initial_centers(Y):
    second = Y.T @ Y
    cov = np.cov(Y, rowvar=False, bias=True)
    cands = [np.linalg.eigh(second)[1][:, 0], np.linalg.eigh(cov)[1][:, 0]]
    m = Y.mean(axis=0)
    if np.linalg.norm(m) > 1e-8:
        cands.append(m / np.linalg.norm(m))
    return cands


def fit_subsphere(Y, rel_tol=FIT_REL_TOL, max_rounds=FIT_MAX_ROUNDS):
    """Least-squares small subsphere ``{x : angle(x, v) = rho}`` for unit rows of ``Y``.

    The radius is profiled out (its optimum is the mean angle), leaving a
    smooth objective in the centre, which is minimised by BFGS from several
    starts. The result is normalised to ``rho <= pi/2`` via ``(v, rho) ->
    (-v, pi - rho)``.
    """
    Y = np.asarray(Y, dtype=np.float64)
    n, p = Y.shape
    k = p - 1
    if n < k + 2:
        raise InvalidArgumentError(f"fit_subsphere: need at least {k + 2} points on S^{k}, got {n}")
    if np.allclose(Y, Y[0], atol=1e-12):
        raise InvalidArgumentError("fit_subsphere: all points coincide")

    best = None
    for v0 in _initial_centers(Y):
        res = minimize_bfgs(
            lambda w: _profile_objective(w, Y),
            v0,
            rel_tol=rel_tol,
            max_iter=max_rounds,
            ftol_abs=1e-30,
        )
        if best is None or res.fun < best.fun:
            best = res
    v = best.x / np.linalg.norm(best.x)
    rho = float(np.mean(np.arccos(np.clip(Y @ v, -1.0, 1.0))))
    if rho > np.pi / 2:
        v, rho = -v, np.pi - rho
    if np.sin(rho) < MIN_SIN_RADIUS:
        raise DegenerateSubsphereError(
            f"subsphere radius {rho:.3g} is degenerate", last_iterate=(v, rho), stage="pns"
        )
    return Subsphere.from_center(v, rho)


def project_to_subsphere(y, s):
    """Nearest point of subsphere ``s`` to ``y`` and the signed residual.

    The residual is ``angle(y, v) - rho``: positive when ``y`` lies farther
    from the centre than the subsphere does.
    """
    y = np.atleast_2d(np.asarray(y, dtype=np.float64))
    theta, U = _polar(_rotated(y, s))
    rho = s.geodesic_radius
    Q = np.column_stack([np.sin(rho) * U, np.full(len(U), np.cos(rho))])
    proj = Q @ s.rotation
    return proj.squeeze(), (theta - rho).squeeze()


def descend(Y, s):
    """Map points of S^k onto the unit S^(k-1) through subsphere ``s``."""
    if np.sin(s.geodesic_radius) < MIN_SIN_RADIUS:
        raise DegenerateSubsphereError("cannot descend through a point-like subsphere", stage="pns")
    _, U = _polar(_rotated(np.atleast_2d(Y), s))
    return U


def _lift(U, xi_col, s):
    """Inverse of descend: place unit directions at angle rho + xi from the centre."""
    ang = s.geodesic_radius + xi_col
    Q = np.column_stack([np.sin(ang)[:, None] * U, np.cos(ang)])
    return Q @ s.rotation


def _residuals(Y, s):
    theta, _ = _polar(_rotated(Y, s))
    return theta - s.geodesic_radius


def fit_pns(Y, rel_tol=FIT_REL_TOL, max_rounds=FIT_MAX_ROUNDS):
    """Fit the nested sequence to unit vectors ``Y`` of shape (n, d + 1)."""
    Y = np.asarray(Y, dtype=np.float64)
    n, p = Y.shape
    d = p - 1
    if d < 1:
        raise InvalidArgumentError("fit_pns: need points on S^d with d >= 1")
    if d >= 2 and n < d + 2:
        raise InvalidArgumentError(f"fit_pns: need n >= d + 2, got n={n}, d={d}")
    Y = Y / np.linalg.norm(Y, axis=1, keepdims=True)

    subs, resid = [], []
    cur = Y
    for level in range(d, 1, -1):
        s = fit_subsphere(cur, rel_tol, max_rounds)
        resid.append(_residuals(cur, s))
        cur = descend(cur, s)
        subs.append(s)
        log.debug("pns level %d: rho=%.4f", level, s.geodesic_radius)

    alpha = np.arctan2(cur[:, 1], cur[:, 0])
    mu = frechet_mean_circle(alpha)
    scores = np.column_stack([wrap(alpha - mu)] + resid[::-1])
    model = PnsModel(
        subspheres=subs,
        circle_mean=float(mu),
        backwards_mean=np.zeros(p),
        scores=scores,
        sphere_variances=np.zeros(d),
    )
    model.backwards_mean = pns_inverse(np.zeros(d), model)
    model.projections = nested_projections(model, Y)
    model.sphere_variances = _variances(model.projections)
    return model


def _check_scores(xi, model):
    xi = np.asarray(xi, dtype=np.float64)
    d = model.dim
    if xi.shape[-1] != d:
        raise InvalidArgumentError(f"score vectors must have {d} entries")
    X = np.atleast_2d(xi)
    if not np.all(np.isfinite(X)) or np.any(np.abs(X[:, 0]) > np.pi + 1e-12):
        raise InvalidArgumentError("first score must lie in [-pi, pi)")
    # column j pairs with subsphere fitted at level j + 1, stored at index d - 1 - j
    for j in range(1, d):
        s = model.subspheres[d - 1 - j]
        ang = s.geodesic_radius + X[:, j]
        if np.any(ang < -1e-12) or np.any(ang > np.pi + 1e-12):
            raise InvalidArgumentError(f"score column {j} lies outside the score space")
    return X


def pns_inverse(xi, model):
    """Map score vectors (shape (d,) or (m, d)) back to unit vectors on S^d."""
    X = _check_scores(xi, model)
    d = model.dim
    ang = model.circle_mean + X[:, 0]
    U = np.column_stack([np.cos(ang), np.sin(ang)])
    for j in range(1, d):
        U = _lift(U, X[:, j], model.subspheres[d - 1 - j])
    return U.squeeze() if np.ndim(xi) == 1 else U


def pns_forward(Y, model):
    """Scores of arbitrary unit vectors under a fitted model."""
    Y = np.atleast_2d(np.asarray(Y, dtype=np.float64))
    Y = Y / np.linalg.norm(Y, axis=1, keepdims=True)
    resid = []
    cur = Y
    for s in model.subspheres:
        resid.append(_residuals(cur, s))
        cur = descend(cur, s)
    alpha = np.arctan2(cur[:, 1], cur[:, 0])
    return np.column_stack([wrap(alpha - model.circle_mean)] + resid[::-1])


def nested_projections(model, Y):
    """Projections of ``Y`` onto every nested sphere, innermost (the mean) first.

    Entry k is the projection onto the k-dimensional nested sphere; entry 0 is
    the backwards mean repeated and entry d is ``Y`` itself.
    """
    Y = np.atleast_2d(Y)
    d = model.dim
    xi = pns_forward(Y, model)
    out = [np.tile(model.backwards_mean, (Y.shape[0], 1))]
    for k in range(1, d):
        trunc = xi.copy()
        trunc[:, k:] = 0.0
        out.append(pns_inverse(trunc, model).reshape(Y.shape))
    out.append(Y / np.linalg.norm(Y, axis=1, keepdims=True))
    return out


def _variances(projections):
    var = []
    for lo, hi in zip(projections[:-1], projections[1:]):
        cos = np.clip(np.sum(lo * hi, axis=1), -1.0, 1.0)
        var.append(float(np.sum(np.arccos(cos) ** 2)))
    return np.array(var)


def sphere_variance_decomposition(model, Y=None):
    """Per-component variances and their proportions.

    Returns ``(variances, proportions, degenerate)``; proportions are NaN when
    the total variance is zero.
    """
    proj = model.projections if Y is None else nested_projections(model, Y)
    var = _variances(proj)
    total = var.sum()
    if total > 0:
        return var, var / total, False
    return var, np.full_like(var, np.nan), True

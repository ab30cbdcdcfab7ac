"""Maps between the fitted sphere and the torus, the principal curve, and torus variances.

Prediction sends a sphere point to the torus point whose distances to the
data best reproduce the sphere point's distances to the embedded data, using
the same squared-mismatch kernel as the SMDS stress. Interpolation is the
reverse problem.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import InvalidArgumentError, NumericalFailureError
from .geometry import torus_distance, wrap
from .optim import minimize_bfgs
from .pns import pns_inverse

log = logging.getLogger(__name__)

DEFAULT_RESTARTS = 3
LOCAL_REL_TOL = 1e-12
LOCAL_MAX_ITER = 500


@dataclass
class PairedConfiguration:
    torus_points: np.ndarray
    sphere_points: np.ndarray
    radius: float
    unit_points: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.torus_points = np.ascontiguousarray(self.torus_points, dtype=np.float64)
        self.sphere_points = np.ascontiguousarray(self.sphere_points, dtype=np.float64)
        if self.torus_points.shape[0] != self.sphere_points.shape[0]:
            raise InvalidArgumentError("paired configuration: point counts differ")
        if self.sphere_points.shape[1] != self.torus_points.shape[1] + 1:
            raise InvalidArgumentError("paired configuration: sphere dimension must be d + 1")
        self.radius = float(self.radius)
        self.unit_points = np.ascontiguousarray(self.sphere_points / self.radius)

    @property
    def dim(self):
        return self.torus_points.shape[1]

    def sphere_targets(self, y):
        """Geodesic distances from sphere point ``y`` to the embedded data."""
        u = np.asarray(y, dtype=np.float64)
        u = u / np.linalg.norm(u)
        return self.radius * np.arccos(np.clip(self.unit_points @ u, -1.0, 1.0))

    def torus_targets(self, x):
        return torus_distance(np.asarray(x, dtype=np.float64)[None, :], self.torus_points)


@dataclass
class Prediction:
    x: np.ndarray
    objective: float
    start_index: int


def prediction_objective(x, y, paired):
    """Mean squared mismatch of torus distances from ``x`` vs sphere distances from ``y``."""
    s = paired.sphere_targets(y)
    return kernels.predict_objective(np.asarray(x, dtype=np.float64), paired.torus_points, s)[0]


def interpolation_objective(y, x, paired):
    t = paired.torus_targets(x)
    return kernels.interp_objective(
        np.asarray(y, dtype=np.float64), paired.unit_points, t, paired.radius
    )[0]


def _nearest_order(y, paired):
    u = np.asarray(y, dtype=np.float64)
    return np.argsort(-(paired.unit_points @ (u / np.linalg.norm(u))), kind="stable")


def _local_predict(start, s, paired):
    X = paired.torus_points
    res = minimize_bfgs(
        lambda a: kernels.predict_objective(a, X, s),
        np.asarray(start, dtype=np.float64),
        rel_tol=LOCAL_REL_TOL,
        max_iter=LOCAL_MAX_ITER,
        gtol=1e-13,
    )
    if not np.isfinite(res.fun):
        raise NumericalFailureError("prediction objective is not finite", last_iterate=res.x, stage="predict")
    return wrap(res.x), res.fun


def predict_from(y, paired, starts):
    """Best local solution of the prediction problem over the given starts.

    Ties keep the earliest start, so callers can favour a warm start by
    listing it first.
    """
    s = paired.sphere_targets(y)
    best = None
    for idx, start in enumerate(starts):
        x, f = _local_predict(start, s, paired)
        if best is None or f < best.objective:
            best = Prediction(x, float(f), idx)
    return best


def default_starts(y, paired, restarts=DEFAULT_RESTARTS):
    order = _nearest_order(y, paired)
    return [paired.torus_points[i] for i in order[: 1 + restarts]]


def predict(y, paired, init=None, restarts=DEFAULT_RESTARTS):
    """Torus point best matching the distance profile of sphere point ``y``.

    Starts from the data point whose embedding is nearest to ``y`` plus the
    ``restarts`` next-nearest ones; when ``init`` is given it replaces the
    nearest one and the ``restarts`` nearest data points follow it.
    """
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (paired.dim + 1,):
        raise InvalidArgumentError(f"predict: y must have {paired.dim + 1} coordinates")
    if init is None:
        starts = default_starts(y, paired, restarts)
    else:
        starts = [wrap(np.asarray(init, dtype=np.float64))] + default_starts(y, paired, restarts - 1)
    return predict_from(y, paired, starts)


def interpolate(x, paired):
    """Sphere point (radius r) whose distance profile best matches torus point ``x``.

    Returns ``(y, objective)``.
    """
    x = wrap(np.asarray(x, dtype=np.float64))
    if x.shape != (paired.dim,):
        raise InvalidArgumentError(f"interpolate: x must have {paired.dim} coordinates")
    t = paired.torus_targets(x)
    start = paired.unit_points[int(np.argmin(t))]
    U = paired.unit_points
    res = minimize_bfgs(
        lambda z: kernels.interp_objective(z, U, t, paired.radius),
        start,
        rel_tol=LOCAL_REL_TOL,
        max_iter=LOCAL_MAX_ITER,
        gtol=1e-13,
    )
    if not np.isfinite(res.fun):
        raise NumericalFailureError("interpolation objective is not finite", stage="interpolate")
    y = paired.radius * res.x / np.linalg.norm(res.x)
    return y, float(res.fun)


@dataclass
class PrincipalCurve:
    samples: np.ndarray
    grid: np.ndarray
    objectives: np.ndarray
    warm_start_used: np.ndarray
    closed: bool
    discontinuities: list = field(default_factory=list)

    def segment_points(self, per_segment=10):
        """Dense torus-adapted polyline through the samples (closing segment included if closed)."""
        return densify(self.samples, per_segment, closed=self.closed)


def shortest_step(a, b):
    """Per-coordinate signed step from ``a`` to ``b`` along the shorter arc."""
    return wrap(np.asarray(b) - np.asarray(a))


def densify(samples, per_segment=10, closed=False):
    pts = np.asarray(samples)
    ends = np.vstack([pts[1:], pts[:1]]) if closed else pts[1:]
    t = np.arange(per_segment)[:, None] / per_segment
    out = []
    for a, b in zip(pts, ends):
        out.append(wrap(a + t * shortest_step(a, b)))
    if not closed:
        out.append(pts[-1:])
    return np.vstack(out)


def lift_curve(samples):
    """Unwrap a torus polyline into R^d by accumulating shortest-arc steps."""
    pts = np.asarray(samples)
    steps = shortest_step(pts[:-1], pts[1:])
    return np.vstack([pts[:1], pts[0] + np.cumsum(steps, axis=0)])


def curve_linearity(samples):
    """R^2 of the best straight line through the unwrapped curve samples.

    The line is the total-least-squares fit, so R^2 is the share of the
    lifted samples' variance along their first principal direction.
    """
    L = lift_curve(samples)
    L = L - L.mean(axis=0)
    sv = np.linalg.svd(L, compute_uv=False)
    total = float(np.sum(sv**2))
    return float(sv[0] ** 2 / total) if total > 0 else 1.0


def principal_curve(model, paired, m=100, restarts=DEFAULT_RESTARTS):
    """Predict the first nested circle onto the torus on an m-point grid.

    Each grid point is solved from the previous prediction (listed first, so it
    wins ties) together with the usual nearest-sample starts.
    """
    if m < 2:
        raise InvalidArgumentError("principal_curve: need m >= 2")
    d = paired.dim
    grid = -np.pi + 2.0 * np.pi * np.arange(m) / m
    xi = np.zeros((m, d))
    xi[:, 0] = grid
    psi = paired.radius * np.atleast_2d(pns_inverse(xi, model))

    samples = np.empty((m, d))
    objectives = np.empty(m)
    warm = np.zeros(m, dtype=bool)
    prev = None
    for j in range(m):
        starts = default_starts(psi[j], paired, restarts)
        if prev is not None:
            starts = [prev] + starts
        best = predict_from(psi[j], paired, starts)
        samples[j] = best.x
        objectives[j] = best.objective
        warm[j] = prev is not None and best.start_index == 0
        prev = best.x

    gaps = torus_distance(samples[:-1], samples[1:])
    closing = float(torus_distance(samples[-1], samples[0]))
    closed = bool(closing <= np.percentile(gaps, 95))
    threshold = np.sqrt(d) * np.pi / 4.0
    jumps = [int(j) for j in np.flatnonzero(gaps > threshold)]
    if jumps:
        log.warning("principal curve: %d discontinuities above %.3f rad at %s", len(jumps), threshold, jumps)
    return PrincipalCurve(samples, grid, objectives, warm, closed, jumps)


@dataclass
class TorusVarianceTable:
    variances: np.ndarray
    proportions: np.ndarray
    projections: list = field(repr=False)
    degenerate: bool = False


def torus_variance(model, paired, restarts=DEFAULT_RESTARTS):
    """Torus variance decomposition from predicted nested-sphere projections.

    ``projections[k]`` holds the predicted projection of every data point
    onto the k-th nested sphere; entry 0 is the predicted backwards mean,
    computed once and shared by all points.
    """
    sphere_proj = model.projections
    if sphere_proj is None:
        raise InvalidArgumentError("torus_variance: model carries no stored projections")
    n, d = paired.torus_points.shape
    r = paired.radius
    mean_x = predict(r * model.backwards_mean, paired, restarts=restarts).x
    proj = [np.tile(mean_x, (n, 1))]
    for k in range(1, d + 1):
        level = np.empty((n, d))
        for i in range(n):
            level[i] = predict(r * sphere_proj[k][i], paired, restarts=restarts).x
        proj.append(level)
    var = np.array([np.sum(torus_distance(a, b) ** 2) for a, b in zip(proj[:-1], proj[1:])])
    total = var.sum()
    if total > 0:
        return TorusVarianceTable(var, var / total, proj, False)
    return TorusVarianceTable(var, np.full(d, np.nan), proj, True)

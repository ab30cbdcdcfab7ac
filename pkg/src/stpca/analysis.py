"""Circular KDE mode clustering and Watson's uniformity test for score angles."""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment, minimize_scalar

from .errors import InvalidArgumentError
from .geometry import TWO_PI, wrap

log = logging.getLogger(__name__)

WINDINGS = 3
GRID_SIZE = 2048
FLAT_TOL = 1e-12
WATSON_TERMS = 10
LCV_RANGE = (0.01, np.pi)
LCV_GRID = 60


def circular_sd(angles):
    """``sqrt(-2 log R)`` with R the mean resultant length (inf when R = 0)."""
    a = np.asarray(angles, dtype=np.float64)
    R = np.hypot(np.mean(np.cos(a)), np.mean(np.sin(a)))
    return float(np.sqrt(-2.0 * np.log(R))) if R > 0 else np.inf


def rule_of_thumb_bandwidth(angles):
    """Circular standard deviation times ``n**(-1/7)``.

    Only sensible for unimodal samples: several separated groups push the
    mean resultant length towards zero and the rule then merges them.
    """
    return float(circular_sd(angles) * len(angles) ** (-1.0 / 7.0))


def _wrapped_diffs(a):
    d = a[:, None] - a[None, :]
    return d[..., None] + TWO_PI * np.arange(-WINDINGS, WINDINGS + 1)


def _lcv_score(log_h, diffs):
    h = np.exp(log_h)
    n = diffs.shape[0]
    k = np.exp(-0.5 * (diffs / h) ** 2).sum(axis=2)
    np.fill_diagonal(k, 0.0)
    loo = k.sum(axis=1) / ((n - 1) * h * np.sqrt(TWO_PI))
    with np.errstate(divide="ignore"):
        return float(np.sum(np.log(loo)))


def lcv_bandwidth(angles):
    """Bandwidth maximising the leave-one-out log likelihood.

    A log-spaced grid over ``LCV_RANGE`` locates the best cell, which is then
    refined by bounded scalar search.
    """
    a = wrap(np.ravel(np.asarray(angles, dtype=np.float64)))
    if a.size < 2:
        raise InvalidArgumentError("lcv_bandwidth: need at least 2 angles")
    diffs = _wrapped_diffs(a)
    grid = np.linspace(np.log(LCV_RANGE[0]), np.log(LCV_RANGE[1]), LCV_GRID)
    scores = np.array([_lcv_score(g, diffs) for g in grid])
    i = int(np.argmax(scores))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, LCV_GRID - 1)]
    res = minimize_scalar(lambda g: -_lcv_score(g, diffs), bounds=(lo, hi), method="bounded", options={"xatol": 1e-6})
    best = res.x if -res.fun >= scores[i] else grid[i]
    return float(np.exp(best))


def default_bandwidth(angles):
    """Likelihood cross-validated bandwidth rescaled for mode finding.

    Cross-validation targets the density itself and undersmooths its slope,
    which is what separates modes. The normal-reference ratio between the
    optimal first-derivative and density bandwidths converts one into the
    other, which also moves the rate from n^(-1/5) to n^(-1/7).
    """
    n = np.size(angles)
    ratio = (4.0 / 5.0) ** (1.0 / 7.0) / (4.0 / 3.0) ** (1.0 / 5.0) * n ** (1.0 / 5.0 - 1.0 / 7.0)
    return lcv_bandwidth(angles) * ratio


@dataclass
class CircularKde:
    sample: np.ndarray
    bandwidth: float

    def __call__(self, theta):
        return self.density(theta)

    def density(self, theta):
        """Wrapped Gaussian density, truncated at three windings either side."""
        t = np.atleast_1d(np.asarray(theta, dtype=np.float64))
        h = self.bandwidth
        out = np.zeros(t.shape)
        shifts = TWO_PI * np.arange(-WINDINGS, WINDINGS + 1)
        # chunk the sample to keep the (len(t), chunk, windings) block small
        for lo in range(0, self.sample.size, 512):
            diff = t[:, None, None] - self.sample[None, lo : lo + 512, None] + shifts
            out += np.exp(-0.5 * (diff / h) ** 2).sum(axis=(1, 2))
        out /= self.sample.size * h * np.sqrt(TWO_PI)
        return out if np.ndim(theta) else float(out[0])


def circular_kde(angles, bandwidth=None):
    a = wrap(np.ravel(np.asarray(angles, dtype=np.float64)))
    if a.size < 2:
        raise InvalidArgumentError("circular_kde: need at least 2 angles")
    if bandwidth is None:
        bandwidth = default_bandwidth(a)
    elif bandwidth == "rule":
        bandwidth = rule_of_thumb_bandwidth(a)
    if not (np.isfinite(bandwidth) and bandwidth > 0):
        raise InvalidArgumentError("circular_kde: bandwidth must be positive and finite")
    return CircularKde(a, float(bandwidth))


@dataclass
class ClusterAssignment:
    labels: np.ndarray
    modes: np.ndarray
    basin_boundaries: np.ndarray
    bandwidth: float
    degenerate: bool = False
    mode_densities: np.ndarray = field(default_factory=lambda: np.empty(0))

    @property
    def n_clusters(self):
        return max(1, len(self.modes))


def _turning_points(values):
    """Indices where the circular grid sequence turns from rising to falling and back.

    Flat steps inherit the previous nonzero direction, so maxima and minima
    strictly alternate.
    """
    step = np.sign(np.roll(values, -1) - values)
    if not np.any(step):
        return np.empty(0, int), np.empty(0, int)
    # carry the last nonzero sign forward around the circle
    nz = np.flatnonzero(step)
    idx = np.arange(step.size)
    pos = np.searchsorted(nz, idx, side="right") - 1
    filled = step[nz[pos % nz.size]]
    prev = np.roll(filled, 1)
    maxima = np.flatnonzero((prev > 0) & (filled < 0))
    minima = np.flatnonzero((prev < 0) & (filled > 0))
    return maxima, minima


def _refine(kde, center, width, sign):
    res = minimize_scalar(
        lambda t: -sign * kde.density(t),
        bounds=(center - width, center + width),
        method="bounded",
        options={"xatol": 1e-10},
    )
    return float(wrap(res.x))


def mode_cluster(kde, grid=GRID_SIZE):
    """Split the circle into the basins of attraction of the density modes.

    On the circle each basin is the arc between two consecutive antimodes, so
    a sample is labelled by the arc it falls in. Modes come out sorted by
    angle and labels index into them.
    """
    if grid < 8:
        raise InvalidArgumentError("mode_cluster: grid must have at least 8 points")
    t = -np.pi + TWO_PI * np.arange(grid) / grid
    f = kde.density(t)
    n = kde.sample.size
    if f.max() - f.min() < FLAT_TOL:
        return ClusterAssignment(np.zeros(n, int), np.empty(0), np.empty(0), kde.bandwidth, True)

    hi, lo = _turning_points(f)
    width = TWO_PI / grid
    modes = np.array([_refine(kde, t[i], width, +1) for i in hi])
    anti = np.array([_refine(kde, t[i], width, -1) for i in lo])
    modes.sort()
    anti.sort()
    if len(modes) <= 1:
        return ClusterAssignment(np.zeros(n, int), modes, anti, kde.bandwidth, False, kde.density(modes))

    # arc k runs from anti[k] to anti[k+1] (the last one wraps past pi)
    arc_of_mode = (np.searchsorted(anti, modes, side="right") - 1) % len(anti)
    mode_of_arc = np.empty(len(anti), int)
    mode_of_arc[arc_of_mode] = np.arange(len(modes))
    arc = (np.searchsorted(anti, kde.sample, side="right") - 1) % len(anti)
    labels = mode_of_arc[arc]
    return ClusterAssignment(labels, modes, anti, kde.bandwidth, False, kde.density(modes))


def classification_rate(labels, truth):
    """Share of points whose cluster matches the truth under the best label matching."""
    labels = np.asarray(labels)
    truth = np.asarray(truth)
    if labels.shape != truth.shape or labels.size == 0:
        raise InvalidArgumentError("classification_rate: label arrays must be non-empty and aligned")
    la, li = np.unique(labels, return_inverse=True)
    ta, ti = np.unique(truth, return_inverse=True)
    confusion = np.zeros((la.size, ta.size), dtype=np.int64)
    np.add.at(confusion, (li, ti), 1)
    rows, cols = linear_sum_assignment(-confusion)
    return float(confusion[rows, cols].sum() / labels.size)


def watson_u2(angles):
    a = np.ravel(np.asarray(angles, dtype=np.float64))
    if a.size < 10:
        raise InvalidArgumentError("watson test: need at least 10 angles")
    if not np.all(np.isfinite(a)):
        raise InvalidArgumentError("watson test: angles must be finite")
    n = a.size
    u = np.sort(np.mod(a, TWO_PI) / TWO_PI)
    i = np.arange(1, n + 1)
    return float(np.sum((u - (2 * i - 1) / (2 * n)) ** 2) - n * (u.mean() - 0.5) ** 2 + 1.0 / (12 * n))


def watson_p_value(u2):
    k = np.arange(1, WATSON_TERMS + 1)
    p = 2.0 * np.sum((-1.0) ** (k - 1) * np.exp(-2.0 * k**2 * np.pi**2 * u2))
    return float(np.clip(p, 0.0, 1.0))


def watson_uniformity_test(angles):
    """Watson's U^2 with its asymptotic null p-value. Returns ``(U2, p)``."""
    u2 = watson_u2(angles)
    return u2, watson_p_value(u2)

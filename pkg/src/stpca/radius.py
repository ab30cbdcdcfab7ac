"""Data-independent choice of the sphere radius.

The radius is chosen so that pairwise distances of uniform samples on the
sphere best match (in expected 1-Wasserstein distance) those of uniform
samples on the torus. Monte Carlo replicates use common random numbers
across radii: a uniform sample on the sphere of radius r is r times a
uniform sample on the unit sphere, so each replicate's sorted unit-sphere
distances are drawn once and rescaled.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from .embedding import pairwise_sphere_distances, pairwise_torus_distances
from .errors import InvalidArgumentError, NumericalFailureError
from .geometry import sample_uniform_sphere, sample_uniform_torus

log = logging.getLogger(__name__)


@dataclass
class RadiusSelectionConfig:
    d: int
    n: int = 100
    M: int = 100
    seed: int = 0
    search_interval: tuple | None = None
    tolerance: float = 1e-3

    def __post_init__(self):
        if self.d < 1 or self.n < 2 or self.M < 1:
            raise InvalidArgumentError("radius selection needs d >= 1, n >= 2, M >= 1")
        if self.search_interval is None:
            root = np.sqrt(self.d)
            self.search_interval = (0.5 * root, 2.0 * root)
        lo, hi = self.search_interval
        if not 0 < lo < hi:
            raise InvalidArgumentError("search interval must satisfy 0 < lo < hi")
        self.search_interval = (float(lo), float(hi))


@dataclass
class RadiusEstimate:
    r_star: float
    objective_value: float
    evaluations: list = field(default_factory=list)


def wasserstein_1_sorted(a, b):
    """W1 between two equal-size empirical samples: mean gap of order statistics."""
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape or a.size == 0:
        raise InvalidArgumentError("wasserstein_1_sorted: samples must have equal nonzero length")
    return float(np.mean(np.abs(np.sort(a) - np.sort(b))))


def _upper(D):
    return D[np.triu_indices(D.shape[0], 1)]


class _ReplicateBank:
    """Sorted torus and unit-sphere pairwise distances, one row per replicate."""

    def __init__(self, cfg):
        seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.M)
        torus, sphere = [], []
        for ss in seeds:
            rng = np.random.default_rng(ss)
            u = sample_uniform_torus(cfg.n, cfg.d, rng)
            v = sample_uniform_sphere(cfg.n, cfg.d, 1.0, rng)
            torus.append(np.sort(_upper(pairwise_torus_distances(u))))
            sphere.append(np.sort(_upper(pairwise_sphere_distances(v, 1.0))))
        self.torus = np.array(torus)
        self.sphere = np.array(sphere)

    def objective(self, r):
        per_rep = np.mean(np.abs(self.torus - r * self.sphere), axis=1)
        return float(np.mean(per_rep))


_BANKS = {}


def _bank(cfg):
    key = (cfg.d, cfg.n, cfg.M, cfg.seed)
    if key not in _BANKS:
        _BANKS[key] = _ReplicateBank(cfg)
    return _BANKS[key]


def expected_wasserstein(r, cfg):
    """Monte Carlo estimate of the expected W1 between pairwise-distance laws."""
    if not r > 0:
        raise InvalidArgumentError("radius must be positive")
    return _bank(cfg).objective(float(r))


def select_radius(cfg):
    """Golden-section search for the radius minimising ``expected_wasserstein``."""
    bank = _bank(cfg)
    trace = []

    def f(r):
        val = bank.objective(r)
        if not np.isfinite(val):
            raise NumericalFailureError(f"non-finite objective at r={r}", stage="radius")
        trace.append((float(r), val))
        return val

    lo, hi = cfg.search_interval
    r_star, value = golden_section(f, lo, hi, cfg.tolerance)
    log.info("radius: d=%d r*=%.6f objective=%.6g after %d evaluations", cfg.d, r_star, value, len(trace))
    return RadiusEstimate(r_star=r_star, objective_value=value, evaluations=trace)


INV_PHI = (np.sqrt(5.0) - 1.0) / 2.0


def golden_section(f, lo, hi, tol):
    """Minimise a unimodal ``f`` on [lo, hi] until the bracket is shorter than ``tol``."""
    a, b = float(lo), float(hi)
    c = b - INV_PHI * (b - a)
    e = a + INV_PHI * (b - a)
    fc, fe = f(c), f(e)
    while b - a > tol:
        if fc <= fe:
            b, e, fe = e, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, e, fe
            e = a + INV_PHI * (b - a)
            fe = f(e)
    if fc <= fe:
        return float(c), float(fc)
    return float(e), float(fe)

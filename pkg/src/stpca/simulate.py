"""Synthetic torus datasets used for demos and acceptance fixtures."""

import numpy as np

from .errors import InvalidArgumentError
from .geometry import sample_uniform_torus, sample_wrapped_normal, wrap

DEFAULT_CLUSTER_SD = 0.4

T2_CLUSTER_MEANS = np.array([[-1.0, -2.0], [3.0, 0.5], [-0.8, 2.5]])
T3_CLUSTER_MEANS = np.array([[-1.0, -2.0, 0.0], [1.0, 1.0, -1.0], [0.0, -1.0, 3.0]])
T2_WRAPPED_MEAN = np.array([-1.0, 0.0])
T2_WRAPPED_COV = np.array([[2.0, 2.0], [2.0, 3.0]])

SCENARIOS = ("t2-clusters", "t3-clusters", "t2-wrapped", "t3-diagonal", "t1-circle")


def cluster_mixture(means, per_cluster, sd, rng):
    """Isotropic wrapped-normal clusters, returned in cluster order with labels."""
    means = np.atleast_2d(means)
    d = means.shape[1]
    cov = (sd**2) * np.eye(d)
    X = np.vstack([sample_wrapped_normal(per_cluster, mu, cov, rng) for mu in means])
    labels = np.repeat(np.arange(means.shape[0]), per_cluster)
    return X, labels


def lagged(series, lag):
    """Stack a circular series with its lagged copies: rows (t_i, ..., t_{i+lag})."""
    series = np.asarray(series, dtype=np.float64).ravel()
    m = series.size - lag
    if lag < 0 or m < 1:
        raise InvalidArgumentError("lag must be nonnegative and shorter than the series")
    return np.column_stack([series[k : k + m] for k in range(lag + 1)])


def diagonal_series(n, step_sd, rng, drift=0.1):
    """Drifting angular random walk.

    Consecutive values are close, so the lagged embedding concentrates near
    the wrapped diagonal, and the drift makes the walk wind around the circle.
    """
    steps = rng.normal(drift, step_sd, size=n)
    steps[0] = rng.uniform(-np.pi, np.pi)
    return wrap(np.cumsum(steps))


def simulate(scenario, seed=0, sd=DEFAULT_CLUSTER_SD, n=None):
    """Generate one of the named scenarios.

    Returns ``(angles, labels)``; ``labels`` is None for unlabelled scenarios.
    """
    rng = np.random.default_rng(seed)
    if scenario == "t2-clusters":
        return cluster_mixture(T2_CLUSTER_MEANS, n or 100, sd, rng)
    if scenario == "t3-clusters":
        return cluster_mixture(T3_CLUSTER_MEANS, n or 100, sd, rng)
    if scenario == "t2-wrapped":
        return sample_wrapped_normal(n or 500, T2_WRAPPED_MEAN, T2_WRAPPED_COV, rng), None
    if scenario == "t3-diagonal":
        size = n or 300
        return lagged(diagonal_series(size + 2, 0.15, rng), 2), None
    if scenario == "t1-circle":
        return sample_uniform_torus(n or 60, 1, rng), None
    raise InvalidArgumentError(f"unknown scenario {scenario!r}; expected one of {SCENARIOS}")

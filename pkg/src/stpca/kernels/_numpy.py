"""Pure-numpy reference implementations of the hot kernels.

Every function here has a compiled twin in ``_numba`` with the same
signature and return values; ``tests/test_kernels.py`` keeps them in sync.
"""

import numpy as np

# Cosines are clamped to [-COS_CLAMP, COS_CLAMP] before arccos in the objectives.
COS_CLAMP = 1.0 - 1e-12
# Pairs whose |cosine| exceeds this contribute nothing to the gradient.
GRAD_CUTOFF = 1.0 - 1e-10

TWO_PI = 2.0 * np.pi


def signed_wrap(a):
    """Wrapped difference in (-pi, pi]; the cut locus maps to +pi."""
    return np.pi - np.mod(np.pi - a, TWO_PI)


def torus_pairwise(X):
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    out = np.empty((n, n))
    for i in range(n):
        diff = np.abs(X[i] - X)
        diff = np.mod(diff, TWO_PI)
        diff = np.minimum(diff, TWO_PI - diff)
        out[i] = np.sqrt(np.sum(diff * diff, axis=1))
    np.fill_diagonal(out, 0.0)
    return out


def _unit_rows(Z):
    norms = np.sqrt(np.sum(Z * Z, axis=1))
    return Z / norms[:, None], norms


def stress(Z, r, D):
    n = Z.shape[0]
    U, _ = _unit_rows(Z)
    C = np.clip(U @ U.T, -COS_CLAMP, COS_CLAMP)
    R = D - r * np.arccos(C)
    np.fill_diagonal(R, 0.0)
    return float(np.sum(R * R) / (n * (n - 1)))


def stress_grad(Z, r, D):
    """Stress, its gradient with respect to the raw rows of ``Z`` and d/dr."""
    n = Z.shape[0]
    U, norms = _unit_rows(Z)
    Craw = U @ U.T
    C = np.clip(Craw, -COS_CLAMP, COS_CLAMP)
    A = np.arccos(C)
    R = D - r * A
    np.fill_diagonal(R, 0.0)
    norm = 1.0 / (n * (n - 1))
    f = float(np.sum(R * R) * norm)

    active = np.abs(Craw) < GRAD_CUTOFF
    np.fill_diagonal(active, False)
    K = np.zeros_like(C)
    K[active] = 4.0 * r * R[active] / np.sqrt(1.0 - C[active] ** 2) * norm
    G = (K @ U - np.sum(K * C, axis=1)[:, None] * U) / norms[:, None]
    dr = float(-2.0 * np.sum(R * A) * norm)
    return f, G, dr


def predict_objective(x, X, s):
    """Mean squared mismatch between torus distances from ``x`` and targets ``s``."""
    W = signed_wrap(x[None, :] - X)
    t = np.sqrt(np.sum(W * W, axis=1))
    res = t - s
    n = X.shape[0]
    f = float(np.sum(res * res) / n)
    safe = t > 0.0
    coef = np.zeros_like(t)
    coef[safe] = 2.0 * res[safe] / (t[safe] * n)
    g = coef @ W
    return f, g


def interp_objective(z, U, t, r):
    """Mean squared mismatch between sphere distances from ``z/|z|`` and targets ``t``.

    ``U`` holds the fitted configuration scaled to the unit sphere.
    """
    nz = np.sqrt(np.sum(z * z))
    u = z / nz
    craw = U @ u
    c = np.clip(craw, -COS_CLAMP, COS_CLAMP)
    a = np.arccos(c)
    res = t - r * a
    n = U.shape[0]
    f = float(np.sum(res * res) / n)
    active = np.abs(craw) < GRAD_CUTOFF
    coef = np.zeros_like(c)
    coef[active] = 2.0 * r * res[active] / (np.sqrt(1.0 - c[active] ** 2) * n)
    g = (coef @ U - np.sum(coef * c) * u) / nz
    return f, g

"""numba-compiled twins of ``_numpy``.

Row-parallel loops write only to their own row, and row partial sums are
reduced in index order afterwards, so results do not depend on thread count.
"""

import math

import numpy as np
from numba import njit, prange

from ._numpy import COS_CLAMP, GRAD_CUTOFF

TWO_PI = 2.0 * math.pi


@njit(cache=True, inline="always")
def _signed_wrap(a):
    m = (math.pi - a) % TWO_PI
    return math.pi - m


@njit(cache=True, parallel=True)
def torus_pairwise(X):
    n, d = X.shape
    out = np.zeros((n, n))
    for i in prange(n):
        for j in range(n):
            if j == i:
                continue
            acc = 0.0
            for k in range(d):
                a = abs(X[i, k] - X[j, k]) % TWO_PI
                b = TWO_PI - a
                if b < a:
                    a = b
                acc += a * a
            out[i, j] = math.sqrt(acc)
    return out


@njit(cache=True, parallel=True)
def _stress_rows(U, norms, Craw, A, r, D, want_grad):
    n, p = U.shape
    norm = 1.0 / (n * (n - 1))
    row_f = np.zeros(n)
    row_dr = np.zeros(n)
    G = np.zeros((n, p))
    for i in prange(n):
        fi = 0.0
        dri = 0.0
        kc = 0.0
        gi = np.zeros(p)
        for j in range(n):
            if j == i:
                continue
            a = A[i, j]
            res = D[i, j] - r * a
            fi += res * res
            if want_grad:
                dri += res * a
                craw = Craw[i, j]
                if abs(craw) < GRAD_CUTOFF:
                    c = min(max(craw, -COS_CLAMP), COS_CLAMP)
                    kij = 4.0 * r * res / math.sqrt(1.0 - c * c) * norm
                    kc += kij * c
                    for k in range(p):
                        gi[k] += kij * U[j, k]
        row_f[i] = fi
        row_dr[i] = dri
        if want_grad:
            for k in range(p):
                G[i, k] = (gi[k] - kc * U[i, k]) / norms[i]
    f = 0.0
    dr = 0.0
    for i in range(n):
        f += row_f[i]
        dr += row_dr[i]
    return f * norm, G, -2.0 * dr * norm


def _angles(Z):
    # libm acos inside compiled loops is ~10x slower than numpy's vectorised
    # arccos, so the angle matrix is built here and only the sums are compiled
    norms = np.sqrt(np.einsum("ij,ij->i", Z, Z))
    U = Z / norms[:, None]
    Craw = U @ U.T
    return U, norms, Craw, np.arccos(np.clip(Craw, -COS_CLAMP, COS_CLAMP))


def stress(Z, r, D):
    U, norms, Craw, A = _angles(Z)
    return float(_stress_rows(U, norms, Craw, A, float(r), D, False)[0])


def stress_grad(Z, r, D):
    U, norms, Craw, A = _angles(Z)
    f, G, dr = _stress_rows(U, norms, Craw, A, float(r), D, True)
    return float(f), G, float(dr)


@njit(cache=True)
def _predict_objective(x, X, s):
    n, d = X.shape
    f = 0.0
    g = np.zeros(d)
    w = np.empty(d)
    for i in range(n):
        acc = 0.0
        for k in range(d):
            w[k] = _signed_wrap(x[k] - X[i, k])
            acc += w[k] * w[k]
        t = math.sqrt(acc)
        res = t - s[i]
        f += res * res
        if t > 0.0:
            coef = 2.0 * res / (t * n)
            for k in range(d):
                g[k] += coef * w[k]
    return f / n, g


def predict_objective(x, X, s):
    f, g = _predict_objective(x, X, s)
    return float(f), g


@njit(cache=True)
def _interp_objective(z, U, t, r):
    n, p = U.shape
    nz = 0.0
    for k in range(p):
        nz += z[k] * z[k]
    nz = math.sqrt(nz)
    u = z / nz
    f = 0.0
    acc = np.zeros(p)
    cc = 0.0
    for i in range(n):
        craw = 0.0
        for k in range(p):
            craw += U[i, k] * u[k]
        c = craw
        if c > COS_CLAMP:
            c = COS_CLAMP
        elif c < -COS_CLAMP:
            c = -COS_CLAMP
        a = math.acos(c)
        res = t[i] - r * a
        f += res * res
        if abs(craw) < GRAD_CUTOFF:
            coef = 2.0 * r * res / (math.sqrt(1.0 - c * c) * n)
            cc += coef * c
            for k in range(p):
                acc[k] += coef * U[i, k]
    g = (acc - cc * u) / nz
    return f / n, g


def interp_objective(z, U, t, r):
    f, g = _interp_objective(z, U, t, float(r))
    return float(f), g

"""Distance matrices, classical MDS and spherical-embeddability diagnostics."""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .errors import InvalidArgumentError

log = logging.getLogger(__name__)

RANK_TOL = 1e-8


def validate_distance_matrix(D):
    D = np.asarray(D, dtype=np.float64)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise InvalidArgumentError("distance matrix must be square")
    if not np.all(np.isfinite(D)) or np.any(D < 0):
        raise InvalidArgumentError("distance matrix must be finite and nonnegative")
    if np.any(np.diag(D) != 0):
        raise InvalidArgumentError("distance matrix must have a zero diagonal")
    if not np.array_equal(D, D.T):
        raise InvalidArgumentError("distance matrix must be symmetric")
    return D


def pairwise_torus_distances(points):
    """All pairwise torus distances of an ``(n, d)`` array of angles."""
    X = np.ascontiguousarray(points, dtype=np.float64)
    if X.ndim != 2:
        raise InvalidArgumentError("points must be an (n, d) array")
    if X.shape[0] < 2:
        raise InvalidArgumentError("need at least two points")
    D = kernels.torus_pairwise(X)
    # enforce exact symmetry regardless of floating-point evaluation order
    D = np.triu(D, 1)
    return D + D.T


def pairwise_sphere_distances(Y, r):
    Y = np.asarray(Y, dtype=np.float64)
    cos = np.clip(Y @ Y.T / (r * r), -1.0, 1.0)
    D = r * np.arccos(cos)
    D = np.triu(D, 1)
    return D + D.T


@dataclass
class EmbeddabilityReport:
    feasible_bound: bool
    gram_min_eigenvalue: float
    psd: bool
    rank: int
    intrinsic_dim: Optional[int]
    radius_tested: float

    def to_dict(self):
        return {
            "feasible_bound": bool(self.feasible_bound),
            "gram_min_eigenvalue": float(self.gram_min_eigenvalue),
            "psd": bool(self.psd),
            "rank": int(self.rank),
            "intrinsic_dim": None if self.intrinsic_dim is None else int(self.intrinsic_dim),
            "radius_tested": float(self.radius_tested),
        }


def check_spherical_embeddability(D, r):
    """Check whether ``D`` embeds isometrically in a sphere of radius ``r``.

    Embeddability holds iff every entry is at most ``pi * r`` and the Gram
    matrix ``cos(D / r)`` is positive semidefinite; the smallest such sphere
    has dimension ``rank(G) - 1`` (undefined for rank one). Informational only.
    """
    D = validate_distance_matrix(D)
    if not r > 0:
        raise InvalidArgumentError("radius must be positive")
    feasible = bool(np.all(D <= np.pi * r))
    G = np.cos(D / r)
    evals = np.linalg.eigvalsh(G)
    tol = RANK_TOL * np.abs(G).max()
    min_eval = float(evals[0])
    rank = int(np.sum(evals > RANK_TOL * max(evals[-1], 0.0)))
    return EmbeddabilityReport(
        feasible_bound=feasible,
        gram_min_eigenvalue=min_eval,
        psd=min_eval >= -tol,
        rank=rank,
        intrinsic_dim=rank - 1 if rank > 1 else None,
        radius_tested=float(r),
    )


def classical_mds(D, p):
    """Torgerson scaling of ``D`` into R^p.

    Negative eigenvalues of the double-centred matrix are clamped to zero.
    Each eigenvector is oriented so that its largest-magnitude entry is
    positive, which makes the output deterministic.
    """
    D = np.asarray(D, dtype=np.float64)
    n = D.shape[0]
    if p > n - 1 or p < 1:
        raise InvalidArgumentError(f"classical_mds: need 1 <= p <= n - 1, got p={p}, n={n}")
    J = np.eye(n) - np.full((n, n), 1.0 / n)
    B = -0.5 * J @ (D * D) @ J
    B = 0.5 * (B + B.T)
    evals, evecs = np.linalg.eigh(B)
    idx = np.argsort(evals)[::-1][:p]
    evals = np.clip(evals[idx], 0.0, None)
    evecs = evecs[:, idx]
    pivot = np.argmax(np.abs(evecs), axis=0)
    signs = np.sign(evecs[pivot, np.arange(p)])
    signs[signs == 0] = 1.0
    evecs = evecs * signs
    X = evecs * np.sqrt(evals)
    return X - X.mean(axis=0)


def mds_stress(D, X):
    """Normalised Euclidean stress of a configuration against ``D``."""
    n = D.shape[0]
    E = np.sqrt(np.sum((X[:, None, :] - X[None, :, :]) ** 2, axis=-1))
    return float(np.sum((D - E) ** 2) / (n * (n - 1)))


def project_to_sphere(points, r, rng=None):
    """Radially project rows onto the sphere of radius ``r``.

    Rows within 1e-12 of the origin have no direction; they get a random unit
    direction from ``rng`` (seed 0 when not given).
    """
    Z = np.array(points, dtype=np.float64, copy=True)
    norms = np.linalg.norm(Z, axis=1)
    bad = norms < 1e-12
    if np.any(bad):
        rng = np.random.default_rng(0) if rng is None else rng
        log.warning("project_to_sphere: %d point(s) at the origin given random directions", bad.sum())
        repl = rng.standard_normal((int(bad.sum()), Z.shape[1]))
        Z[bad] = repl
        norms[bad] = np.linalg.norm(repl, axis=1)
    return r * Z / norms[:, None]

"""Dense real symmetric linear algebra used for every rank-sensitive decision.

Eigendecompositions here go through the cyclic Jacobi kernel (compiled when
available) so that spectra are deterministic and independent of the LAPACK
build. The interior-point solver uses numpy/LAPACK internally for speed; any
verdict-relevant rank, nullspace or factorization is recomputed here.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from contextacert import kernels
from contextacert.errors import (
    AsymmetricCirculant,
    ConvergenceFailure,
    NonFinite,
    NotPSD,
    NotSymmetric,
)

DEFAULT_RANK_TOL = 1e-6


@dataclass(frozen=True)
class SymSpectrum:
    """Spectral decomposition ``S = V diag(eigenvalues) V^T``.

    Attributes:
        eigenvalues: sorted descending.
        eigenvectors: orthonormal columns matching ``eigenvalues``.
        rank_tol: relative tolerance used for ``rank``.
        rank: number of eigenvalues with ``|lambda| > rank_tol * max(1, max|lambda|)``.
        sweeps: Jacobi sweeps used.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    rank_tol: float
    rank: int
    sweeps: int = 0

    @property
    def threshold(self) -> float:
        return _threshold(self.eigenvalues, self.rank_tol)

    def gap_report(self) -> dict:
        """Smallest retained and largest discarded |eigenvalue| around the threshold."""
        mags = np.sort(np.abs(self.eigenvalues))[::-1]
        kept = float(mags[self.rank - 1]) if self.rank > 0 else None
        dropped = float(mags[self.rank]) if self.rank < len(mags) else None
        return {"threshold": self.threshold, "smallest_kept": kept, "largest_dropped": dropped}


def _threshold(eigenvalues, tol):
    scale = float(np.max(np.abs(eigenvalues))) if len(eigenvalues) else 0.0
    return tol * max(1.0, scale)


def as_symmetric(s, *, check=True) -> np.ndarray:
    a = np.asarray(s, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotSymmetric(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NonFinite("matrix has non-finite entries")
    if check and not np.array_equal(a, a.T):
        raise NotSymmetric("matrix is not exactly symmetric")
    return a


def symmetrize(s) -> np.ndarray:
    a = np.asarray(s, dtype=np.float64)
    return 0.5 * (a + a.T)


def eigh(s, rank_tol: float = DEFAULT_RANK_TOL, max_sweeps: int = 60) -> SymSpectrum:
    """Full eigendecomposition of a symmetric matrix by cyclic Jacobi.

    Raises:
        NonFinite: on NaN/inf input.
        ConvergenceFailure: if ``max_sweeps`` sweeps do not converge.
    """
    a = as_symmetric(s)
    w, v, sweeps = kernels.jacobi_eigh(a, 1e-15, max_sweeps)
    if sweeps < 0:
        raise ConvergenceFailure(f"Jacobi did not converge in {max_sweeps} sweeps")
    order = np.argsort(-w, kind="stable")
    w = w[order]
    v = v[:, order]
    # deterministic sign: largest-magnitude component of each eigenvector positive
    for k in range(v.shape[1]):
        idx = int(np.argmax(np.abs(v[:, k])))
        if v[idx, k] < 0:
            v[:, k] = -v[:, k]
    thr = _threshold(w, rank_tol)
    return SymSpectrum(w, v, rank_tol, int(np.sum(np.abs(w) > thr)), sweeps)


def eigenvalues(s) -> np.ndarray:
    return eigh(s).eigenvalues


def rank(s, tol: float = DEFAULT_RANK_TOL) -> int:
    """Numerical rank: eigenvalues above ``tol * max(1, max|lambda|)``."""
    if tol <= 0:
        raise ValueError("rank tolerance must be positive")
    return eigh(s, rank_tol=tol).rank


def min_eigenvalue(s) -> float:
    return float(eigh(s).eigenvalues[-1])


def nullspace(a, tol: float = 1e-6) -> np.ndarray:
    """Orthonormal basis (as columns) of the numerical nullspace of ``a``.

    Computed from the normal equations ``a^T a`` with the Jacobi kernel. A unit
    vector ``b`` belongs to the basis when ``||a b|| <= tol * ||a||_2``. Squaring
    loses half the digits, so ``tol`` is floored at about ``sqrt(cols * eps)``.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError("nullspace expects a 2-D matrix")
    if not np.all(np.isfinite(a)):
        raise NonFinite("matrix has non-finite entries")
    cols = a.shape[1]
    if cols == 0:
        return np.zeros((0, 0))
    gram = a.T @ a
    gram = 0.5 * (gram + gram.T)
    spec = eigh(gram)
    norm2 = max(float(spec.eigenvalues[0]), 0.0)
    if norm2 == 0.0:
        return np.eye(cols)
    cutoff = norm2 * max(tol * tol, 16.0 * cols * np.finfo(float).eps)
    keep = spec.eigenvalues <= cutoff
    basis = spec.eigenvectors[:, keep]
    return basis


def gram_factor(s, tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Rows ``v_i`` with ``<v_i, v_j> = S_ij`` in dimension ``rank(S)``.

    Uses the spectral square root on eigenvalues above the rank threshold;
    eigenvalues in ``[-threshold, 0)`` are treated as zero.

    Raises:
        NotPSD: if an eigenvalue is below ``-tol * max(1, lambda_max)``.
    """
    spec = eigh(s, rank_tol=tol)
    lam = spec.eigenvalues
    thr = tol * max(1.0, float(lam[0]) if len(lam) else 0.0)
    if len(lam) and lam[-1] < -thr:
        raise NotPSD(f"minimum eigenvalue {lam[-1]:.3e} below -{thr:.3e}")
    keep = lam > thr
    return spec.eigenvectors[:, keep] * np.sqrt(lam[keep])


def gram(vectors) -> np.ndarray:
    v = np.asarray(vectors, dtype=np.float64)
    return v @ v.T


def circulant(u) -> np.ndarray:
    """Symmetric circulant whose row ``i`` is ``u`` right-shifted ``i`` places."""
    u = _check_circulant_vector(u)
    n = len(u)
    idx = (np.arange(n)[None, :] - np.arange(n)[:, None]) % n
    return u[idx]


def circulant_eigenvalues(u) -> np.ndarray:
    """``lambda_j = sum_k u_k cos(2 pi j k / n)`` for ``j = 0..n-1``."""
    u = _check_circulant_vector(u)
    n = len(u)
    jk = np.outer(np.arange(n), np.arange(n)) % n
    return np.cos(2.0 * np.pi * jk / n) @ u


def _check_circulant_vector(u) -> np.ndarray:
    u = np.asarray(u, dtype=np.float64).ravel()
    if len(u) == 0:
        raise ValueError("empty circulant vector")
    if not np.all(np.isfinite(u)):
        raise NonFinite("circulant vector has non-finite entries")
    mirrored = np.concatenate([u[:1], u[1:][::-1]])
    scale = max(1.0, float(np.max(np.abs(u))))
    if np.max(np.abs(u - mirrored)) > 1e-12 * scale:
        raise AsymmetricCirculant("u_k must equal u_(n-k) for a symmetric circulant")
    return u


def matrix_to_json(s) -> dict:
    a = np.asarray(s, dtype=np.float64)
    return {"dim": int(a.shape[0]), "rows": [[float(f"{x:.17g}") for x in row] for row in a]}


def matrix_from_json(obj) -> np.ndarray:
    if isinstance(obj, str):
        obj = json.loads(obj)
    a = np.asarray(obj["rows"], dtype=np.float64)
    if a.shape != (obj["dim"], obj["dim"]):
        raise ValueError("matrix rows do not match 'dim'")
    return a

"""Dense complex linear algebra used throughout the toolkit.

Thin, contract-checked wrappers around LAPACK (via numpy/scipy) for singular
values, eigenvalues of non-Hermitian matrices and Hermitian square roots,
plus a Takagi factorization of complex symmetric matrices built from them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import DimensionError, NotSymmetric, NumericError

__all__ = [
    "TakagiFactors",
    "singular_values",
    "eig_general",
    "herm_sqrt",
    "takagi",
    "haar_unitary",
]


def _as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise DimensionError(f"expected a matrix, got array of ndim {a.ndim}")
    return a


def singular_values(m) -> np.ndarray:
    """All singular values of a complex matrix, descending and nonnegative."""
    a = _as_matrix(m)
    if not np.all(np.isfinite(a)):
        raise NumericError("matrix has non-finite entries")
    return np.linalg.svd(a, compute_uv=False)


def eig_general(m) -> np.ndarray:
    """Eigenvalues (with multiplicity, unordered) of a general square matrix."""
    a = _as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"eigenvalues need a square matrix, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NumericError("matrix has non-finite entries")
    return np.linalg.eigvals(a)


def herm_sqrt(m, neg_tol: float = 1e-8) -> np.ndarray:
    """Hermitian PSD square root of a Hermitian PSD matrix.

    Eigenvalues in (-neg_tol, 0) are clipped to zero (floating-point partial
    traces routinely produce them); anything below -neg_tol raises
    NumericError instead of being silently repaired.
    """
    a = _as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"square matrix required, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NumericError("matrix has non-finite entries")
    scale = max(1.0, float(np.abs(a).max()))
    if np.abs(a - a.conj().T).max() > 1e-10 * scale:
        raise NumericError("matrix is not Hermitian within tolerance")
    w, v = np.linalg.eigh(0.5 * (a + a.conj().T))
    if w.min() < -neg_tol:
        raise NumericError(f"matrix is not PSD: smallest eigenvalue {w.min():.3e}")
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


@dataclass(frozen=True, eq=False)
class TakagiFactors:
    """Factorization m = u @ diag(lam) @ u.T with u unitary, lam >= 0 descending."""

    u: np.ndarray
    lam: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.u * self.lam) @ self.u.T


def takagi(m, sym_tol: float = 1e-10) -> TakagiFactors:
    """Takagi factorization of a complex symmetric matrix.

    Writes m = U diag(s) U^T with U unitary and s the singular values of m.
    Construction: take the SVD m = V S W^H; the coupling matrix Z = V^H
    conj(W) is unitary and satisfies Z S = S Z^T, so its principal square
    root F (computed spectrally, Z being normal) satisfies F S F^T = Z S,
    and U = V F reconstructs m.  This holds identity-by-identity, so
    degenerate and zero singular values need no special casing.

    Note:
        U is not unique when singular values repeat; the contract is the
        reconstruction, not a canonical U.  The function is a deterministic
        map of its input bits.
    """
    a = _as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"Takagi needs a square matrix, got {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NumericError("matrix has non-finite entries")
    scale = max(1.0, float(np.abs(a).max()))
    if np.abs(a - a.T).max() > sym_tol * scale:
        raise NotSymmetric("matrix is not complex symmetric within tolerance")
    a = 0.5 * (a + a.T)

    v, s, wh = np.linalg.svd(a)
    z = v.conj().T @ wh.T  # V^H conj(W), unitary coupling of the two SVD bases
    t, q = sla.schur(z, output="complex")
    phases = np.diag(t)
    phases = phases / np.abs(phases)  # Z is unitary: renormalize Schur diagonal
    root = (q * np.sqrt(phases)) @ q.conj().T
    return TakagiFactors(u=v @ root, lam=s)


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))

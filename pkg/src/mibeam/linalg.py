"""Dense complex linear-algebra kernels shared by the whole package.

All heavy decompositions are delegated to LAPACK through numpy; this module
adds the Hermitian/PSD semantics the optimizers rely on (symmetrization,
relative rank thresholds, descending eigenvalue order) and validates them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Relative eigenvalue threshold separating numerical rank from noise.
RANK_TOL = 1e-10
# Hermitian-asymmetry tolerance, relative to 1 + maxabs of the matrix.
HERM_TOL = 1e-12


def maxabs(a: np.ndarray) -> float:
    """Largest entry magnitude; 0.0 for empty input."""
    return float(np.max(np.abs(a))) if a.size else 0.0


def hermitianize(a: np.ndarray) -> np.ndarray:
    """Hermitian part (A + A^H) / 2."""
    return 0.5 * (a + a.conj().T)


def is_hermitian(a: np.ndarray, tol: float = HERM_TOL) -> bool:
    """Check A = A^H within tol * (1 + maxabs(A))."""
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    return maxabs(a - a.conj().T) <= tol * (1.0 + maxabs(a))


def check_hermitian(a: np.ndarray, name: str = "matrix") -> np.ndarray:
    """Validate Hermitian-ness, then return the symmetrized matrix.

    Symmetrization is always applied before decompositions: products like
    G W G^H accumulate O(eps) asymmetry that would otherwise leak into the
    LAPACK drivers.
    """
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    if not is_hermitian(a):
        raise ValueError(f"{name} is not Hermitian within tolerance")
    return hermitianize(a)


@dataclass(frozen=True)
class EigDecomp:
    """Eigendecomposition A = U diag(lambdas) U^H, eigenvalues descending."""

    U: np.ndarray
    lambdas: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.U * self.lambdas) @ self.U.conj().T


def herm_eig(a: np.ndarray) -> EigDecomp:
    """Eigendecomposition of a Hermitian matrix, eigenvalues sorted descending.

    Raises ValueError if the input violates the Hermitian tolerance.
    """
    a = check_hermitian(a, "herm_eig input")
    lam, u = np.linalg.eigh(a)
    return EigDecomp(U=u[:, ::-1].copy(), lambdas=lam[::-1].copy())


def psd_eig(a: np.ndarray, tol: float = RANK_TOL, name: str = "matrix") -> EigDecomp:
    """Like herm_eig but additionally rejects indefinite input.

    Eigenvalues below -tol * maxeig raise; small negatives within the
    tolerance are clipped to zero.
    """
    dec = herm_eig(a)
    lam = dec.lambdas
    top = max(float(lam[0]), 0.0)
    if lam[-1] < -tol * max(top, 1e-300):
        raise ValueError(f"{name} is not PSD: min eigenvalue {lam[-1]:.3e}")
    return EigDecomp(U=dec.U, lambdas=np.maximum(lam, 0.0))


def pinv_psd(a: np.ndarray, tol: float = RANK_TOL) -> np.ndarray:
    """Moore-Penrose pseudoinverse of a PSD matrix.

    Eigenvalues below tol * maxeig are treated as exact zeros; indefinite
    input (eigenvalue < -tol * maxeig) raises ValueError.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    dec = psd_eig(a, tol, "pinv_psd input")
    lam = dec.lambdas
    cut = tol * (lam[0] if lam.size else 0.0)
    inv = np.where(lam > cut, 1.0 / np.where(lam > cut, lam, 1.0), 0.0)
    return hermitianize((dec.U * inv) @ dec.U.conj().T)


def sqrt_psd(a: np.ndarray) -> np.ndarray:
    """Principal square root S with S @ S = A, for PSD A."""
    dec = psd_eig(a, RANK_TOL, "sqrt_psd input")
    return hermitianize((dec.U * np.sqrt(dec.lambdas)) @ dec.U.conj().T)


def inv_sqrt_pd(a: np.ndarray) -> np.ndarray:
    """Inverse square root S with S @ A @ S = I, for PD A (mineig > 0)."""
    dec = herm_eig(a)
    lam = dec.lambdas
    if lam[-1] <= 0:
        raise ValueError(f"inv_sqrt_pd input is not PD: min eigenvalue {lam[-1]:.3e}")
    return hermitianize((dec.U * (1.0 / np.sqrt(lam))) @ dec.U.conj().T)


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product (thin wrapper, kept for a uniform kernel surface)."""
    return np.kron(a, b)


def vec(a: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization: vec([[1,3],[2,4]]) = (1,2,3,4)."""
    return np.asarray(a).reshape(-1, order="F")


def unvec(v: np.ndarray, rows: int, cols: int) -> np.ndarray:
    """Inverse of vec for a rows x cols matrix."""
    return np.asarray(v).reshape(rows, cols, order="F")


def block_diag(blocks) -> np.ndarray:
    """Block-diagonal assembly of square complex blocks; off-blocks exact zero."""
    blocks = [np.atleast_2d(np.asarray(b)) for b in blocks]
    for b in blocks:
        if b.shape[0] != b.shape[1]:
            raise ValueError("block_diag blocks must be square")
    n = sum(b.shape[0] for b in blocks)
    out = np.zeros((n, n), dtype=complex)
    k = 0
    for b in blocks:
        m = b.shape[0]
        out[k : k + m, k : k + m] = b
        k += m
    return out


def logdet_pd(a: np.ndarray) -> float:
    """log det of a PD Hermitian matrix via Cholesky (conditioning-friendly)."""
    a = hermitianize(a)
    try:
        chol = np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise ValueError("logdet_pd input is not positive definite") from exc
    return float(2.0 * np.sum(np.log(np.real(np.diag(chol)))))

"""Dense complex-matrix kernels with explicit tolerance contracts.

Everything is double-precision complex and backed by LAPACK through
numpy/scipy; the functions here pin down the conventions the rest of the
package relies on (full right singular basis, descending singular values,
Cholesky-based Hermitian solves with an optional Tikhonov shift).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg


class NumericsError(RuntimeError):
    """Numerical kernel breakdown (SVD non-convergence, indefinite solve)."""


@dataclass(frozen=True, eq=False)
class SvdResult:
    """Full SVD A = U @ diag(S) @ V^H with numerical rank q.

    U is rows x rows, V is cols x cols (full bases; the projector
    construction needs every right singular vector).  S has min(rows, cols)
    non-negative entries in descending order.  q counts singular values
    above rank_tol.
    """

    U: np.ndarray
    S: np.ndarray
    V: np.ndarray
    q: int

    def reconstruct(self) -> np.ndarray:
        k = self.S.shape[0]
        return (self.U[:, :k] * self.S) @ self.V[:, :k].conj().T


def svd(A: np.ndarray, rank_tol: float | None = None) -> SvdResult:
    """Full SVD of a finite complex matrix.

    rank_tol defaults to 1e-10 * S[0] * max(rows, cols), the usual numerical
    rank convention.  Raises NumericsError if the LAPACK kernel fails to
    converge.
    """
    A = np.asarray(A, dtype=np.complex128)
    if not np.all(np.isfinite(A.real)) or not np.all(np.isfinite(A.imag)):
        raise NumericsError("svd input contains non-finite entries")
    try:
        U, S, Vh = np.linalg.svd(A, full_matrices=True)
    except np.linalg.LinAlgError as exc:
        raise NumericsError(f"SVD did not converge for {A.shape} matrix: {exc}") from exc
    if rank_tol is None:
        top = S[0] if S.size else 0.0
        rank_tol = 1e-10 * top * max(A.shape)
    q = int(np.count_nonzero(S > rank_tol))
    return SvdResult(U=U, S=S, V=Vh.conj().T, q=q)


def solve_hermitian(A: np.ndarray, B: np.ndarray, epsilon: float = 0.0) -> np.ndarray:
    """Solve (A + epsilon*I) X = B for Hermitian positive-definite A + epsilon*I.

    Uses a Cholesky factorization; raises NumericsError (reporting the
    smallest eigenvalue) when the shifted matrix is numerically indefinite.
    """
    A = np.asarray(A, dtype=np.complex128)
    B = np.asarray(B, dtype=np.complex128)
    scale = max(1.0, float(np.linalg.norm(A)))
    if np.linalg.norm(A - A.conj().T) > 1e-10 * scale:
        raise NumericsError("solve_hermitian: matrix is not Hermitian within 1e-10")
    M = (A + A.conj().T) / 2.0
    if epsilon:
        M = M + epsilon * np.eye(A.shape[0])
    try:
        c, low = scipy.linalg.cho_factor(M, lower=True, check_finite=False)
    except (scipy.linalg.LinAlgError, np.linalg.LinAlgError):
        smallest = float(np.linalg.eigvalsh(M)[0]) if M.size else 0.0
        raise NumericsError(
            f"solve_hermitian: matrix numerically indefinite (smallest pivot {smallest:.3e})"
        )
    return scipy.linalg.cho_solve((c, low), B, check_finite=False)


def spectral_norm(A: np.ndarray) -> float:
    """Largest singular value (consistent with svd().S[0])."""
    A = np.asarray(A, dtype=np.complex128)
    if A.size == 0:
        return 0.0
    return float(np.linalg.norm(A, 2))


def herm(A: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return A.conj().T

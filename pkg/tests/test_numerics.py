import numpy as np
import pytest

from radarcoex.numerics import NumericsError, solve_hermitian, spectral_norm, svd
from conftest import complex_matrix


def reconstruction_error(A, dec):
    return np.linalg.norm(A - dec.reconstruct())


def test_svd_diagonal_oracle():
    A = np.diag([3.0, 0.5]).astype(complex)
    dec = svd(A)
    assert np.allclose(dec.S, [3.0, 0.5])
    # U, V equal identity up to a per-column phase
    assert np.allclose(np.abs(dec.U), np.eye(2), atol=1e-12)
    assert np.allclose(np.abs(dec.V), np.eye(2), atol=1e-12)
    assert reconstruction_error(A, dec) < 1e-12
    assert dec.q == 2


def test_svd_zero_matrix():
    dec = svd(np.zeros((2, 3), dtype=complex))
    assert np.allclose(dec.S, 0.0)
    assert dec.q == 0
    assert dec.V.shape == (3, 3)
    assert np.linalg.norm(dec.V.conj().T @ dec.V - np.eye(3)) < 1e-10


def test_svd_identity():
    dec = svd(np.eye(3, dtype=complex))
    assert np.allclose(dec.S, 1.0)
    assert dec.q == 3


def test_svd_rejects_nonfinite():
    A = np.array([[np.nan, 0.0], [0.0, 1.0]], dtype=complex)
    with pytest.raises(NumericsError, match="non-finite"):
        svd(A)


def test_svd_invariants_random(rng):
    # 1000 random matrices, dims <= 8, mixed scales
    for _ in range(1000):
        rows = int(rng.integers(1, 9))
        cols = int(rng.integers(1, 9))
        scale = 10.0 ** rng.integers(-2, 3)
        A = complex_matrix(rng, rows, cols, scale)
        dec = svd(A)
        assert reconstruction_error(A, dec) <= 1e-10 * max(1.0, np.linalg.norm(A))
        assert np.linalg.norm(dec.U.conj().T @ dec.U - np.eye(rows)) <= 1e-10
        assert np.linalg.norm(dec.V.conj().T @ dec.V - np.eye(cols)) <= 1e-10
        assert np.all(np.diff(dec.S) <= 0)
        assert np.all(dec.S >= 0)


def test_solve_identity():
    X = solve_hermitian(np.eye(2, dtype=complex), np.eye(2, dtype=complex))
    assert np.allclose(X, np.eye(2))


def test_solve_diagonal_oracle():
    A = np.diag([2.0, 4.0]).astype(complex)
    B = np.array([[1.0], [1.0]], dtype=complex)
    X = solve_hermitian(A, B)
    assert np.allclose(X, [[0.5], [0.25]])


def test_solve_regularizer_only():
    X = solve_hermitian(np.zeros((1, 1), dtype=complex), np.array([[1.0]]), epsilon=1e-10)
    assert X[0, 0] == pytest.approx(1e10)


def test_solve_recovers_rhs_random(rng):
    for _ in range(200):
        n = int(rng.integers(1, 9))
        M = complex_matrix(rng, n, n + 2)
        A = M @ M.conj().T + 1e-3 * np.eye(n)
        B = complex_matrix(rng, n, int(rng.integers(1, 4)))
        X = solve_hermitian(A, B)
        assert np.linalg.norm(A @ X - B) <= 1e-8 * max(1.0, np.linalg.norm(B))


def test_solve_rejects_non_hermitian():
    A = np.array([[1.0, 2.0], [0.0, 1.0]], dtype=complex)
    with pytest.raises(NumericsError, match="not Hermitian"):
        solve_hermitian(A, np.eye(2, dtype=complex))


def test_solve_indefinite_reports_pivot():
    A = np.diag([1.0, -1.0]).astype(complex)
    with pytest.raises(NumericsError, match="pivot"):
        solve_hermitian(A, np.eye(2, dtype=complex))


def test_spectral_norm_diagonal():
    assert spectral_norm(np.diag([3.0, 0.5])) == pytest.approx(3.0)


def test_spectral_norm_zero():
    assert spectral_norm(np.zeros((3, 2))) == 0.0


def test_spectral_norm_unitary(rng):
    Q, _ = np.linalg.qr(complex_matrix(rng, 4, 4))
    assert spectral_norm(Q) == pytest.approx(1.0, abs=1e-10)


def test_spectral_norm_matches_svd(rng):
    for _ in range(50):
        A = complex_matrix(rng, int(rng.integers(1, 7)), int(rng.integers(1, 7)))
        top = svd(A).S[0]
        assert abs(spectral_norm(A) - top) <= 1e-10

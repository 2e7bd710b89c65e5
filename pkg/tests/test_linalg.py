import math

import numpy as np
import pytest

from dissipativity.errors import (
    ConvergenceError,
    DefinitenessError,
    DimensionError,
    SpectralCompatibilityError,
    StabilizabilityError,
    UnsupportedCaseError,
)
from dissipativity.linalg import (
    PsdCertificate,
    care_residual,
    check_psd,
    hermitian,
    hermitian_sqrt,
    is_stabilizable,
    lyapunov_residual,
    rank_revealing_factor,
    solve_care,
    solve_lyapunov,
    spectral_abscissa,
)
from helpers import crandn, random_psd


def random_hurwitz(rng, n):
    X = crandn(rng, n, n)
    return X - (spectral_abscissa(X) + rng.uniform(0.1, 1.0)) * np.eye(n)


class TestCheckPsd:
    def test_identity(self):
        c = check_psd(np.eye(2), 1e-9)
        assert c.is_psd and c.min_eigenvalue == pytest.approx(1.0)

    def test_indefinite(self):
        c = check_psd([[1, 2], [2, 1]], 1e-9)
        assert not c.is_psd
        assert c.min_eigenvalue == pytest.approx(-1.0)

    def test_zero(self):
        c = check_psd(np.zeros((3, 3)), 1e-9)
        assert c.is_psd and c.min_eigenvalue == 0.0

    def test_invariant_matches_threshold(self):
        c = check_psd(np.diag([1.0, -1e-12]), 1e-9)
        assert c.is_psd == (c.min_eigenvalue >= -c.tolerance_used)

    def test_rejects_non_hermitian(self):
        with pytest.raises(DimensionError):
            check_psd([[1.0, 2.0], [0.0, 1.0]])

    def test_rejects_non_square(self):
        with pytest.raises(DimensionError):
            check_psd(np.ones((2, 3)))

    def test_brute_force_agreement(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            n = int(rng.integers(1, 7))
            M = random_psd(rng, n, int(rng.integers(0, n + 1)))
            c = check_psd(M)
            assert c.is_psd
            X = crandn(rng, 1000, n)
            X /= np.linalg.norm(X, axis=1, keepdims=True)
            forms = np.einsum("ki,ij,kj->k", X.conj(), M, X).real
            assert forms.min() >= -c.tolerance_used

    def test_certificate_round_trip(self):
        c = check_psd(np.diag([2.0, 0.5]))
        assert PsdCertificate.from_dict(c.to_dict()) == c


def test_hermitian_symmetrizes_roundoff():
    M = np.array([[1.0, 2.0 + 1e-14], [2.0, 1.0]])
    H = hermitian(M)
    assert np.array_equal(H, H.conj().T)


class TestHermitianSqrt:
    def test_diagonal(self):
        assert np.allclose(hermitian_sqrt(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]), atol=1e-14)

    def test_identity(self):
        assert np.allclose(hermitian_sqrt(np.eye(3)), np.eye(3), atol=1e-14)

    def test_spectral(self):
        R = hermitian_sqrt([[2.0, 1.0], [1.0, 2.0]])
        v1 = np.array([1.0, 1.0]) / math.sqrt(2)
        v2 = np.array([1.0, -1.0]) / math.sqrt(2)
        assert np.allclose(R @ v1, math.sqrt(3) * v1, atol=1e-13)
        assert np.allclose(R @ v2, v2, atol=1e-13)

    def test_random_reconstruction(self):
        rng = np.random.default_rng(5)
        for n in range(1, 9):
            M = random_psd(rng, n, n)
            R = hermitian_sqrt(M)
            assert np.allclose(R, R.conj().T)
            assert np.linalg.eigvalsh(R).min() >= -1e-12
            assert np.linalg.norm(R @ R - M) <= 1e-10 * (1 + np.linalg.norm(M))

    def test_indefinite_raises(self):
        with pytest.raises(DefinitenessError) as exc:
            hermitian_sqrt([[1.0, 2.0], [2.0, 1.0]])
        assert exc.value.min_eigenvalue == pytest.approx(-1.0)


class TestRankRevealingFactor:
    def test_diagonal_rank_one(self):
        fc = rank_revealing_factor(np.diag([2.0, 0.0]))
        assert fc.rank == 1
        assert np.allclose(fc.factor, [[math.sqrt(2), 0.0]])

    def test_zero(self):
        fc = rank_revealing_factor(np.zeros((3, 3)))
        assert fc.rank == 0 and fc.factor.shape == (0, 3)

    def test_lqr_block(self):
        k = math.sqrt(2) - 1
        fc = rank_revealing_factor([[k * k, k], [k, 1.0]])
        assert fc.rank == 1
        row = fc.factor[0]
        assert abs(row[0] * 1.0 - row[1] * k) < 1e-14

    def test_deterministic_phase_and_order(self):
        rng = np.random.default_rng(8)
        M = random_psd(rng, 4, 3)
        fc = rank_revealing_factor(M)
        norms = np.linalg.norm(fc.factor, axis=1)
        assert np.all(np.diff(norms) <= 1e-12)
        for row in fc.factor:
            lead = row[np.flatnonzero(np.abs(row) > 1e-12 * np.abs(row).max())[0]]
            assert abs(lead.imag) < 1e-14 and lead.real > 0
        G = fc.factor @ fc.factor.conj().T
        assert np.allclose(G - np.diag(np.diag(G)), 0, atol=1e-12)

    def test_random_property(self):
        rng = np.random.default_rng(9)
        for _ in range(40):
            n = int(rng.integers(1, 9))
            r = int(rng.integers(0, n + 1))
            M = random_psd(rng, n, r)
            fc = rank_revealing_factor(M)
            eig = np.linalg.eigvalsh(M)
            oracle = int(np.sum(eig > 1e-9 * max(eig.max(), 0.0))) if r else 0
            assert fc.rank == oracle == r
            assert fc.reconstruction_residual <= 1e-10 * (1 + np.linalg.norm(M))
            recon = np.linalg.norm(M - fc.factor.conj().T @ fc.factor)
            assert recon == pytest.approx(fc.reconstruction_residual, abs=1e-15)

    def test_indefinite_raises(self):
        with pytest.raises(DefinitenessError):
            rank_revealing_factor([[1.0, 2.0], [2.0, 1.0]])


class TestLyapunov:
    @pytest.mark.parametrize("method", ["kronecker", "schur", "auto"])
    def test_scalar(self, method):
        assert np.allclose(solve_lyapunov([[-1.0]], [[1.0]], method), [[0.5]], atol=1e-15)

    def test_zero_rhs(self):
        assert np.allclose(solve_lyapunov(-np.eye(2), np.zeros((2, 2))), 0)

    def test_decoupled(self):
        W = solve_lyapunov(np.diag([-1.0, -2.0]), np.eye(2))
        assert np.allclose(W, np.diag([0.5, 0.25]), atol=1e-14)

    def test_random_residual(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            n = int(rng.integers(1, 21))
            A = random_hurwitz(rng, n)
            G = crandn(rng, n, n)
            Qr = G.conj().T @ G
            W = solve_lyapunov(A, Qr)
            assert lyapunov_residual(A, W, Qr) <= 1e-9 * (1 + np.linalg.norm(Qr))

    def test_methods_agree(self):
        rng = np.random.default_rng(12)
        A = random_hurwitz(rng, 7)
        Qr = random_psd(rng, 7, 7)
        assert np.allclose(solve_lyapunov(A, Qr, "kronecker"), solve_lyapunov(A, Qr, "schur"), atol=1e-10)

    def test_real_data_gives_real_solution(self):
        rng = np.random.default_rng(13)
        A = rng.standard_normal((5, 5)) - 4 * np.eye(5)
        W = solve_lyapunov(A, np.eye(5))
        assert np.max(np.abs(W.imag)) == 0.0

    def test_singular_operator(self):
        # eigenvalues 1 and -1 give conj(l_i) + l_j = 0
        with pytest.raises(SpectralCompatibilityError):
            solve_lyapunov(np.diag([1.0, -1.0]), np.eye(2))

    def test_kronecker_cap(self):
        with pytest.raises(SpectralCompatibilityError):
            solve_lyapunov(-np.eye(101), np.eye(101), method="kronecker")

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            solve_lyapunov(-np.eye(2), np.eye(2), method="magic")


class TestStabilizable:
    def test_hurwitz_no_input(self):
        assert is_stabilizable(-np.eye(2), np.zeros((2, 0)))

    def test_uncontrollable_unstable(self):
        r = is_stabilizable([[1.0]], [[0.0]])
        assert not r
        assert r.offending == (pytest.approx(1.0),)

    def test_controllable(self):
        assert is_stabilizable([[1.0]], [[1.0]])

    def test_marginal_mode_counts_as_unstable(self):
        assert not is_stabilizable(np.diag([0.0, -1.0]), np.array([[0.0], [1.0]]))


class TestCare:
    def test_scalar_lqr(self):
        P = solve_care([[-1.0]], [[1.0]], [[1.0]], [[1.0]], [[0.0]])
        assert P[0, 0].real == pytest.approx(math.sqrt(2) - 1, abs=1e-12)

    def test_no_input_reduces_to_lyapunov(self):
        rng = np.random.default_rng(14)
        A = random_hurwitz(rng, 4)
        C = crandn(rng, 2, 4)
        Qc = C.conj().T @ C
        P = solve_care(A, np.zeros((4, 0)), Qc, np.zeros((0, 0)))
        assert np.allclose(P, solve_lyapunov(A, Qc), atol=1e-12)

    def test_integrator(self):
        P = solve_care([[0.0]], [[1.0]], [[1.0]], [[1.0]], [[0.0]])
        assert P[0, 0].real == pytest.approx(1.0, abs=1e-12)

    def test_unstable_scalar(self):
        P = solve_care([[1.0]], [[1.0]], [[1.0]], [[1.0]])
        assert P[0, 0].real == pytest.approx(1 + math.sqrt(2), abs=1e-10)

    def test_random_closed_loop_hurwitz(self):
        rng = np.random.default_rng(15)
        for _ in range(25):
            n = int(rng.integers(1, 7))
            m = int(rng.integers(1, 4))
            A = crandn(rng, n, n)
            B = crandn(rng, n, m)
            G = crandn(rng, n + m, n + m)
            W = G.conj().T @ G + 0.1 * np.eye(n + m)
            Qc, Sc, R = W[:n, :n], W[:n, n:], W[n:, n:]
            P = solve_care(A, B, Qc, R, Sc)
            assert care_residual(A, B, Qc, R, Sc, P) <= 1e-8 * (1 + np.linalg.norm(P))
            F = -np.linalg.solve(R, (P @ B + Sc).conj().T)
            assert spectral_abscissa(A + B @ F) < 0

    def test_matches_scipy(self):
        import scipy.linalg as spla

        rng = np.random.default_rng(16)
        A = rng.standard_normal((5, 5))
        B = rng.standard_normal((5, 2))
        Qc = np.eye(5)
        R = np.eye(2)
        assert np.allclose(solve_care(A, B, Qc, R), spla.solve_continuous_are(A, B, Qc, R), atol=1e-9)

    def test_not_stabilizable(self):
        with pytest.raises(StabilizabilityError) as exc:
            solve_care([[1.0]], [[0.0]], [[1.0]], [[1.0]])
        assert exc.value.offending[0] == pytest.approx(1.0)

    def test_singular_r(self):
        with pytest.raises(UnsupportedCaseError):
            solve_care([[-1.0]], [[1.0]], [[1.0]], [[0.0]])

    def test_iteration_budget(self):
        rng = np.random.default_rng(17)
        A = rng.standard_normal((4, 4)) + 3 * np.eye(4)
        with pytest.raises(ConvergenceError) as exc:
            solve_care(A, rng.standard_normal((4, 1)), np.eye(4), np.eye(1), max_iter=1)
        assert len(exc.value.history) >= 1

"""Dense Hermitian linear algebra: definiteness, square roots, factorizations,
Lyapunov and Riccati solvers.

All routines work over the complex numbers. Real input is embedded with zero
imaginary part; where it pays off (the Kronecker Lyapunov solve) real data is
kept real internally.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg as spla

from .errors import (
    ConvergenceError,
    DefinitenessError,
    DimensionError,
    EigensolverError,
    SpectralCompatibilityError,
    StabilizabilityError,
    UnsupportedCaseError,
)

DEFAULT_TOL = 1e-9
HERMITIAN_TOL = 1e-12

#: largest state dimension for which the Kronecker system (n^2 x n^2) is assembled
KRONECKER_MAX_N = 100
#: ``method="auto"`` switches to Bartels-Stewart above this dimension
KRONECKER_AUTO_N = 64


def as_matrix(M, rows=None, cols=None, name="matrix"):
    """Coerce ``M`` to a 2-D complex array, checking the shape if requested."""
    M = np.asarray(M, dtype=complex)
    if M.ndim == 0 or (M.ndim == 1 and M.size == 1):
        M = M.reshape(1, 1)
    if M.ndim != 2:
        raise DimensionError(f"{name} must be two-dimensional, got shape {M.shape}")
    if rows is not None and M.shape[0] != rows:
        raise DimensionError(f"{name} has {M.shape[0]} rows, expected {rows}")
    if cols is not None and M.shape[1] != cols:
        raise DimensionError(f"{name} has {M.shape[1]} columns, expected {cols}")
    return M


def hermitian(M, tol=HERMITIAN_TOL, name="matrix"):
    """Return the Hermitian part of ``M`` after checking it is Hermitian to ``tol``.

    The asymmetry test is relative to the largest entry (absolute below 1).
    """
    M = as_matrix(M, name=name)
    if M.shape[0] != M.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {M.shape}")
    if M.size == 0:
        return M
    asym = np.max(np.abs(M - M.conj().T))
    if asym > tol * max(1.0, np.max(np.abs(M))):
        raise DimensionError(f"{name} is not Hermitian (asymmetry {asym:.3g})")
    return 0.5 * (M + M.conj().T)


def _eigh(M):
    try:
        return np.linalg.eigh(M)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(M.shape[0]) from exc


@dataclass(frozen=True)
class PsdCertificate:
    is_psd: bool
    min_eigenvalue: float
    tolerance_used: float

    def to_dict(self):
        return {
            "is_psd": self.is_psd,
            "min_eigenvalue": self.min_eigenvalue,
            "tolerance_used": self.tolerance_used,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(bool(d["is_psd"]), float(d["min_eigenvalue"]), float(d["tolerance_used"]))


@dataclass(frozen=True, eq=False)
class FactorCertificate:
    """``factor`` (q x n) with ``factor^* factor`` reproducing the input matrix."""

    factor: np.ndarray
    rank: int
    reconstruction_residual: float


def _reference_scale(eigenvalues, scale):
    if scale is not None:
        return float(scale)
    return float(np.max(np.abs(eigenvalues))) if eigenvalues.size else 0.0


def check_psd(M, tol=DEFAULT_TOL, scale=None):
    """Certify positive semidefiniteness of a Hermitian matrix.

    The matrix passes when its smallest eigenvalue is at least
    ``-tol * scale``. ``scale`` defaults to the spectral norm of ``M``; callers
    whose matrix arises from cancelling terms pass the magnitude of those terms
    instead, otherwise roundoff in an exactly-zero matrix would be judged
    against its own noise.
    """
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    M = hermitian(M)
    if M.size == 0:
        return PsdCertificate(True, 0.0, 0.0)
    w = _eigh(M)[0]
    tol_used = tol * _reference_scale(w, scale)
    lam_min = float(w[0])
    return PsdCertificate(lam_min >= -tol_used, lam_min, tol_used)


def hermitian_sqrt(M, tol=DEFAULT_TOL):
    """Hermitian PSD square root; eigenvalues in ``[-tol*||M||, 0)`` are clamped."""
    M = hermitian(M)
    if M.size == 0:
        return M
    w, V = _eigh(M)
    tol_used = tol * _reference_scale(w, None)
    if w[0] < -tol_used:
        raise DefinitenessError("matrix square root requires a PSD matrix", float(w[0]))
    R = (V * np.sqrt(np.clip(w, 0.0, None))) @ V.conj().T
    return 0.5 * (R + R.conj().T)


def _normalize_phase(rows):
    for row in rows:
        big = np.max(np.abs(row))
        if big == 0:
            continue
        k = int(np.argmax(np.abs(row) > 1e-8 * big))
        row *= np.conj(row[k]) / abs(row[k])
    return rows


def rank_revealing_factor(M, tol=DEFAULT_TOL, scale=None):
    """Factor a PSD matrix as ``F^* F`` with ``F`` of full row rank.

    Rows are scaled eigenvectors ``sqrt(lam_k) v_k^*`` ordered by decreasing
    eigenvalue, each with its first significant entry made real positive, so
    the otherwise unitary-ambiguous factor is deterministic. Eigenvalues at or
    below ``tol * scale`` count as zero.
    """
    M = hermitian(M)
    n = M.shape[0]
    if n == 0:
        return FactorCertificate(np.zeros((0, 0), dtype=complex), 0, 0.0)
    w, V = _eigh(M)
    thresh = tol * _reference_scale(w, scale)
    if w[0] < -thresh:
        raise DefinitenessError("rank-revealing factorization requires a PSD matrix", float(w[0]))
    keep = np.flatnonzero(w > thresh)[::-1]
    F = np.sqrt(w[keep])[:, None] * V[:, keep].conj().T
    F = _normalize_phase(np.ascontiguousarray(F))
    residual = float(np.linalg.norm(M - F.conj().T @ F, "fro"))
    return FactorCertificate(F, int(keep.size), residual)


def _lyapunov_kronecker(A, Qrhs):
    n = A.shape[0]
    real = not (np.iscomplexobj(A) and np.any(A.imag)) and not (
        np.iscomplexobj(Qrhs) and np.any(Qrhs.imag)
    )
    if real:
        A, Qrhs = A.real, Qrhs.real
    Ah = A.conj().T
    # row-major vec: vec(A^H W) = (A^H kron I) vec(W), vec(W A) = (I kron A^T) vec(W)
    K = np.kron(Ah, np.eye(n, dtype=A.dtype))
    At = A.T
    for i in range(n):
        K[i * n:(i + 1) * n, i * n:(i + 1) * n] += At
    try:
        w = spla.solve(K, -Qrhs.reshape(-1), overwrite_a=True, check_finite=False)
    except (np.linalg.LinAlgError, spla.LinAlgError) as exc:
        raise SpectralCompatibilityError("singular Kronecker Lyapunov system") from exc
    return w.reshape(n, n).astype(complex)


def solve_lyapunov(A, Qrhs, method="auto"):
    """Solve ``A^* W + W A + Qrhs = 0`` for Hermitian ``W``.

    ``method`` is ``"kronecker"`` (vectorized dense solve, n <= 100),
    ``"schur"`` (Bartels-Stewart) or ``"auto"``, which uses the Kronecker
    system up to n = 64.
    """
    A = as_matrix(A, name="A")
    n = A.shape[0]
    Qrhs = hermitian(as_matrix(Qrhs, n, n, name="Qrhs"), tol=1e-10, name="Qrhs")
    if A.shape != (n, n):
        raise DimensionError(f"A must be square, got shape {A.shape}")
    if n == 0:
        return np.zeros((0, 0), dtype=complex)
    lam = np.linalg.eigvals(A)
    gap = np.min(np.abs(lam.conj()[:, None] + lam[None, :]))
    if gap <= 1e-13 * max(1.0, np.max(np.abs(lam))):
        raise SpectralCompatibilityError(
            f"A and -A^* share an eigenvalue (min |conj(l_i) + l_j| = {gap:.3g})"
        )
    if method == "auto":
        method = "kronecker" if n <= KRONECKER_AUTO_N else "schur"
    if method == "kronecker":
        if n > KRONECKER_MAX_N:
            raise SpectralCompatibilityError(
                f"Kronecker Lyapunov solve is capped at n = {KRONECKER_MAX_N}, got n = {n}"
            )
        W = _lyapunov_kronecker(A, Qrhs)
    elif method == "schur":
        # scipy solves a X + X a^H = q
        W = spla.solve_continuous_lyapunov(A.conj().T, -Qrhs).astype(complex)
    else:
        raise ValueError(f"unknown Lyapunov method {method!r}")
    return 0.5 * (W + W.conj().T)


def lyapunov_residual(A, W, Qrhs):
    A = as_matrix(A)
    return float(np.linalg.norm(A.conj().T @ W + W @ A + Qrhs, "fro"))


class Stabilizability(NamedTuple):
    stabilizable: bool
    offending: tuple

    def __bool__(self):
        return self.stabilizable


def is_stabilizable(A, B, tol=DEFAULT_TOL):
    """PBH test: every eigenvalue with ``Re >= -tol`` must be controllable."""
    A = as_matrix(A, name="A")
    n = A.shape[0]
    B = as_matrix(np.reshape(B, (n, -1)) if np.size(B) else np.zeros((n, 0)), n, name="B")
    offending = []
    for lam in np.linalg.eigvals(A) if n else ():
        if lam.real < -tol:
            continue
        sv = np.linalg.svd(np.hstack([A - lam * np.eye(n), B]), compute_uv=False)
        rank = int(np.sum(sv > tol * sv[0])) if sv.size and sv[0] > 0 else 0
        if rank < n:
            offending.append(complex(lam))
    return Stabilizability(not offending, tuple(offending))


def spectral_abscissa(A):
    A = as_matrix(A)
    return float(np.max(np.linalg.eigvals(A).real)) if A.size else -np.inf


def care_residual(A, B, Qc, R, Sc, P):
    G = P @ B + Sc
    Res = A.conj().T @ P + P @ A + Qc - G @ np.linalg.solve(R, G.conj().T)
    return float(np.linalg.norm(Res, "fro"))


def _initial_feedback(A, B):
    """Stabilizing gain for Newton-Kleinman (zero when A is already Hurwitz).

    Bass' construction: with sigma > max(0, max Re eig A) solve
    (A + sigma I) X + X (A + sigma I)^* = 2 B B^*; then F0 = -B^* X^{-1}
    gives (A + B F0) X + X (A + B F0)^* = -2 sigma X.
    """
    n, m = B.shape
    alpha = spectral_abscissa(A)
    if alpha < 0:
        return np.zeros((m, n), dtype=complex)
    sigma = alpha + 1.0
    As = A + sigma * np.eye(n)
    X = solve_lyapunov(-As.conj().T, 2 * B @ B.conj().T)
    F0 = -B.conj().T @ np.linalg.pinv(X, hermitian=True)
    if spectral_abscissa(A + B @ F0) >= 0:
        raise ConvergenceError("could not construct a stabilizing initial feedback")
    return F0


def solve_care(A, B, Qc, R, Sc=None, tol=DEFAULT_TOL, max_iter=100):
    """Stabilizing solution of ``A^*P + PA + Qc - (PB + Sc) R^{-1} (PB + Sc)^* = 0``.

    Newton-Kleinman iteration: each step solves the Lyapunov equation of the
    cost of the current feedback ``u = F x`` and updates
    ``F = -R^{-1} (PB + Sc)^*``.
    """
    A = as_matrix(A, name="A")
    n = A.shape[0]
    B = as_matrix(B, n, name="B") if np.size(B) else np.zeros((n, 0), dtype=complex)
    m = B.shape[1]
    Qc = hermitian(as_matrix(Qc, n, n, name="Qc"), tol=1e-10, name="Qc")
    R = hermitian(as_matrix(R, m, m, name="R"), tol=1e-10, name="R") if m else np.zeros((0, 0), complex)
    Sc = np.zeros((n, m), dtype=complex) if Sc is None or np.size(Sc) == 0 else as_matrix(Sc, n, m, name="Sc")

    if m:
        r_min = float(np.linalg.eigvalsh(R)[0])
        if r_min <= 1e-9 * max(1.0, float(np.linalg.norm(R, 2))):
            raise UnsupportedCaseError(
                f"Riccati weight R must be positive definite (min eigenvalue {r_min:.3g})"
            )
    stab = is_stabilizable(A, B, tol)
    if not stab:
        raise StabilizabilityError(stab.offending)

    F = _initial_feedback(A, B)
    history = []
    P = None
    for _ in range(max_iter):
        Acl = A + B @ F
        Qf = Qc + Sc @ F + F.conj().T @ Sc.conj().T + F.conj().T @ R @ F
        try:
            P_new = solve_lyapunov(Acl, 0.5 * (Qf + Qf.conj().T))
        except SpectralCompatibilityError as exc:
            raise ConvergenceError("Newton-Kleinman iterate lost stability", history) from exc
        F = -np.linalg.solve(R, (P_new @ B + Sc).conj().T) if m else F
        res = care_residual(A, B, Qc, R, Sc, P_new) if m else lyapunov_residual(A, P_new, Qc)
        history.append(res)
        step = np.inf if P is None else float(np.linalg.norm(P_new - P, "fro"))
        P = P_new
        scale = 1.0 + float(np.linalg.norm(P, "fro"))
        if res <= 1e-13 * scale or step <= 1e-14 * scale or m == 0:
            break
    if not np.isfinite(history[-1]) or history[-1] > 1e-8 * (1.0 + np.linalg.norm(P, "fro")):
        raise ConvergenceError(
            f"Newton-Kleinman did not converge in {max_iter} iterations", history
        )
    return P

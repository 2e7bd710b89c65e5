"""KYP matrix assembly, dissipativity certification and Lur'e factorization."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DefinitenessError, DimensionError
from .linalg import DEFAULT_TOL, PsdCertificate, check_psd, rank_revealing_factor
from .systems import as_vector, check_compatible


def _kyp_terms(sys, sr, st):
    """Return the storage part and the supply part of the KYP matrix separately."""
    check_compatible(sys, sr, st)
    n, m = sys.n, sys.m
    A, B, P = sys.A, sys.B, st.P
    PA = P @ A
    PB = P @ B
    storage_part = np.block([
        [PA + PA.conj().T, PB],
        [PB.conj().T, np.zeros((m, m), dtype=complex)],
    ])
    N = np.block([[sys.C, sys.D], [np.zeros((m, n), dtype=complex), np.eye(m)]])
    supply_part = N.conj().T @ sr.block() @ N
    return storage_part, supply_part


def _symmetrize(M):
    return 0.5 * (M + M.conj().T)


def kyp_matrix(sys, sr, st):
    """The block matrix

        [[A^*P + PA + C^*QC,       PB + C^*QD + C^*S        ],
         [B^*P + D^*QC + S^*C,     D^*QD + D^*S + S^*D + R  ]]

    of size n + m; for ``m = 0`` only the upper-left block remains.
    """
    storage_part, supply_part = _kyp_terms(sys, sr, st)
    return _symmetrize(storage_part + supply_part)


def kyp_scale(sys, sr, st):
    """Magnitude of the summands of the KYP matrix; tolerances are relative to it.

    Using the assembled matrix's own norm would make an exactly cancelling KYP
    matrix (heat example) look like full-rank noise.
    """
    storage_part, supply_part = _kyp_terms(sys, sr, st)
    return float(np.linalg.norm(storage_part, 2) + np.linalg.norm(supply_part, 2)) if storage_part.size else 0.0


@dataclass(frozen=True, eq=False)
class LurePair:
    """Lur'e factors with ``kyp_matrix = [K L]^* [K L]``."""

    K: np.ndarray
    L: np.ndarray
    q: int
    residual: float = 0.0

    def stacked(self):
        return np.hstack([self.K, self.L])

    def to_dict(self):
        from .serialization import encode_matrix

        return {
            "K": encode_matrix(self.K),
            "L": encode_matrix(self.L),
            "q": self.q,
            "n": self.K.shape[1],
            "m": self.L.shape[1],
            "residual": self.residual,
        }

    @classmethod
    def from_dict(cls, d):
        from .serialization import decode_matrix

        q = int(d["q"])
        K = decode_matrix(d["K"], rows=q, cols=d.get("n"))
        L = decode_matrix(d["L"], rows=q, cols=d.get("m"))
        return cls(K, L, q, float(d["residual"]))


@dataclass(frozen=True, eq=False)
class KypReport:
    kyp_matrix: np.ndarray
    certificate: PsdCertificate
    lure: LurePair | None = None

    def to_dict(self):
        from .serialization import encode_matrix

        return {
            "kyp_matrix": encode_matrix(self.kyp_matrix),
            "certificate": self.certificate.to_dict(),
            "lure": None if self.lure is None else self.lure.to_dict(),
        }

    @classmethod
    def from_dict(cls, d):
        from .serialization import decode_matrix

        lure = None if d.get("lure") is None else LurePair.from_dict(d["lure"])
        M = decode_matrix(d["kyp_matrix"])
        return cls(M, PsdCertificate.from_dict(d["certificate"]), lure)


def check_dissipative(sys, sr, st, tol=DEFAULT_TOL):
    """Certify the KYP inequality for the storage ``x^* P x``."""
    M = kyp_matrix(sys, sr, st)
    cert = check_psd(M, tol, scale=kyp_scale(sys, sr, st))
    return KypReport(M, cert)


def lure_factor(sys, sr, st, tol=DEFAULT_TOL):
    """Factor the KYP matrix as ``[K L]^* [K L]`` with ``[K L]`` of full row rank.

    Raises ``DefinitenessError`` if the KYP inequality fails.
    """
    report = check_dissipative(sys, sr, st, tol)
    if not report.certificate.is_psd:
        raise DefinitenessError("KYP matrix is indefinite", report.certificate.min_eigenvalue)
    fc = rank_revealing_factor(report.kyp_matrix, tol, scale=kyp_scale(sys, sr, st))
    n = sys.n
    F = fc.factor.reshape(fc.rank, n + sys.m)
    lure = LurePair(F[:, :n], F[:, n:], fc.rank, fc.reconstruction_residual)
    return KypReport(report.kyp_matrix, report.certificate, lure)


def dissipation_rate(lp, x, u):
    """``||K x + L u||^2``."""
    x = as_vector(x, lp.K.shape[1], "x")
    u = as_vector(u, lp.L.shape[1], "u")
    if lp.q == 0:
        return 0.0
    r = lp.K @ x + lp.L @ u
    return float(np.vdot(r, r).real)


def dissipation_rate_many(lp, X, U):
    X = np.asarray(X, dtype=complex).reshape(-1, lp.K.shape[1])
    U = np.asarray(U, dtype=complex).reshape(X.shape[0], lp.L.shape[1])
    if lp.q == 0:
        return np.zeros(X.shape[0])
    r = X @ lp.K.T + U @ lp.L.T
    return np.sum(np.abs(r) ** 2, axis=1)


def pointwise_kyp_residual(sys, sr, st, x, u):
    """``2 Re(x^* P (A x + B u)) + s(C x + D u, u)`` evaluated directly."""
    check_compatible(sys, sr, st)
    x = as_vector(x, sys.n, "x")
    u = as_vector(u, sys.m, "u")
    if sys.n and st.P.shape != (sys.n, sys.n):
        raise DimensionError("storage and system dimensions differ")
    flow = 2.0 * np.vdot(st.P @ x, sys.A @ x + sys.B @ u).real
    y = sys.output(x, u)
    return float(flow + sr.evaluate_many(y[None, :], u[None, :])[0])

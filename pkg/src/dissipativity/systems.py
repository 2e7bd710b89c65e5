"""State-space systems, quadratic supply rates and quadratic storage functions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError
from .linalg import DEFAULT_TOL, as_matrix, check_psd, hermitian


def _frozen(M):
    M = np.array(M, dtype=complex)
    M.setflags(write=False)
    return M


def as_vector(v, size, name="vector"):
    v = np.asarray(v, dtype=complex).reshape(-1)
    if v.size != size:
        raise DimensionError(f"{name} has length {v.size}, expected {size}")
    return v


@dataclass(frozen=True, eq=False)
class StateSpaceSystem:
    """``x' = A x + B u``, ``y = C x + D u`` with complex matrices.

    Missing ``B``/``C``/``D`` are empty, so ``m = 0`` or ``p = 0`` systems are
    first-class.
    """

    A: np.ndarray
    B: np.ndarray = None
    C: np.ndarray = None
    D: np.ndarray = None

    def __post_init__(self):
        A = as_matrix(self.A, name="A")
        n = A.shape[0]
        if A.shape != (n, n):
            raise DimensionError(f"A must be square, got shape {A.shape}")
        B = np.zeros((n, 0)) if self.B is None or np.size(self.B) == 0 else self.B
        B = as_matrix(np.reshape(B, (n, -1)) if np.ndim(B) < 2 else B, n, name="B")
        m = B.shape[1]
        C = np.zeros((0, n)) if self.C is None or np.size(self.C) == 0 else self.C
        C = as_matrix(np.reshape(C, (-1, n)) if np.ndim(C) < 2 else C, cols=n, name="C")
        p = C.shape[0]
        D = np.zeros((p, m)) if self.D is None or np.size(self.D) == 0 else self.D
        D = as_matrix(np.reshape(D, (p, m)) if np.ndim(D) < 2 else D, p, m, name="D")
        for name, M in zip("ABCD", (A, B, C, D)):
            object.__setattr__(self, name, _frozen(M))

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def m(self):
        return self.B.shape[1]

    @property
    def p(self):
        return self.C.shape[0]

    def output(self, x, u):
        return self.C @ x + self.D @ u


@dataclass(frozen=True, eq=False)
class SupplyRate:
    """``s(y, u) = [y; u]^* [[Q, S], [S^*, R]] [y; u]``."""

    Q: np.ndarray
    S: np.ndarray
    R: np.ndarray

    def __post_init__(self):
        Q = np.zeros((0, 0)) if np.size(self.Q) == 0 else self.Q
        R = np.zeros((0, 0)) if np.size(self.R) == 0 else self.R
        Q = hermitian(Q, tol=1e-10, name="Q")
        R = hermitian(R, tol=1e-10, name="R")
        p, m = Q.shape[0], R.shape[0]
        S = np.zeros((p, m)) if np.size(self.S) == 0 else self.S
        S = as_matrix(np.reshape(S, (p, m)) if np.ndim(S) < 2 else S, p, m, name="S")
        object.__setattr__(self, "Q", _frozen(Q))
        object.__setattr__(self, "S", _frozen(S))
        object.__setattr__(self, "R", _frozen(R))

    @property
    def p(self):
        return self.Q.shape[0]

    @property
    def m(self):
        return self.R.shape[0]

    def block(self):
        return np.block([[self.Q, self.S], [self.S.conj().T, self.R]])

    def evaluate_many(self, Y, U):
        """Supply values for stacked samples ``Y`` (k x p) and ``U`` (k x m)."""
        Y = np.atleast_2d(np.asarray(Y, dtype=complex))
        U = np.atleast_2d(np.asarray(U, dtype=complex))
        k = max(Y.shape[0], U.shape[0])
        Y = Y.reshape(k, self.p)
        U = U.reshape(k, self.m)
        val = (
            np.einsum("ki,ij,kj->k", Y.conj(), self.Q, Y)
            + 2 * np.einsum("ki,ij,kj->k", Y.conj(), self.S, U).real
            + np.einsum("ki,ij,kj->k", U.conj(), self.R, U)
        )
        return val.real


@dataclass(frozen=True, eq=False)
class QuadraticStorage:
    """``S(x) = x^* P x`` for Hermitian ``P``."""

    P: np.ndarray

    def __post_init__(self):
        P = np.zeros((0, 0)) if np.size(self.P) == 0 else self.P
        object.__setattr__(self, "P", _frozen(hermitian(P, tol=1e-10, name="P")))

    @property
    def n(self):
        return self.P.shape[0]

    def __call__(self, x):
        x = as_vector(x, self.n, "x")
        return float(np.real(np.vdot(x, self.P @ x)))

    def evaluate_many(self, X):
        X = np.asarray(X, dtype=complex).reshape(-1, self.n)
        return np.einsum("ki,ij,kj->k", X.conj(), self.P, X).real


def supply_eval(sr, y, u):
    """Evaluate the supply rate at one output/input pair."""
    y = as_vector(y, sr.p, "y")
    u = as_vector(u, sr.m, "u")
    w = np.concatenate([y, u])
    val = np.vdot(w, sr.block() @ w)
    if abs(val.imag) > 1e-10 * max(1.0, float(np.vdot(w, w).real)) * max(1.0, np.abs(sr.block()).max(initial=0)):
        raise ArithmeticError(f"supply value has imaginary part {val.imag:.3g}")
    return float(val.real)


def make_scattering_supply(p, m):
    """``s(y, u) = ||u||^2 - ||y||^2``."""
    return SupplyRate(-np.eye(p), np.zeros((p, m)), np.eye(m))


def make_impedance_supply(m):
    """``s(y, u) = 2 Re(y^* u)``; the Riesz map of C^m is the identity."""
    return SupplyRate(np.zeros((m, m)), np.eye(m), np.zeros((m, m)))


def supply_is_nonneg(sr, tol=DEFAULT_TOL):
    return check_psd(sr.block(), tol)


def internal_passivity_storage(n):
    """Storage ``S(x) = -||x||^2`` belonging to internal passivity."""
    return QuadraticStorage(-np.eye(n))


def check_compatible(sys, sr=None, st=None):
    if sr is not None and (sr.p, sr.m) != (sys.p, sys.m):
        raise DimensionError(
            f"supply rate is for (p, m) = ({sr.p}, {sr.m}), system has ({sys.p}, {sys.m})"
        )
    if st is not None and st.n != sys.n:
        raise DimensionError(f"storage has dimension {st.n}, system has n = {sys.n}")

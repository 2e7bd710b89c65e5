"""Discretized boundary-control examples: a transport equation and a heat equation.

Transport on [0, 1] with inflow ``u(t) = x(t, 0)`` and output
``y = alpha x(t, 0) + x(t, 1)``: nodes ``x_i ~ x(t, i h)``, i = 1..n, h = 1/n,
first-order upwind in space. An exact CFL-1 shift propagator serves as the
continuum oracle.

Heat on (0, 1) with homogeneous Dirichlet conditions, no input, and the outward
normal derivatives at both ends as output: interior nodes ``i h``, i = 1..n,
h = 1/(n + 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import AlignmentError, DomainError
from .linalg import solve_lyapunov
from .systems import QuadraticStorage, StateSpaceSystem, SupplyRate
from .trajectories import Trajectory, ZeroInput, dissipation_balance, simulate


@dataclass(frozen=True)
class TransportConfig:
    """Grid size and the parameters of the supply ``[y; u]^* [[q, s], [conj s, r]] [y; u]``.

    ``s`` and ``r`` default to the equality case ``s = -alpha``, ``r = |alpha|^2 - 1``.
    """

    n: int
    alpha: complex = 0.0
    q: float = 1.0
    s: complex | None = None
    r: float | None = None

    def __post_init__(self):
        if self.n < 2:
            raise DomainError("transport grid needs n >= 2")
        alpha = complex(self.alpha)
        object.__setattr__(self, "alpha", alpha)
        if self.s is None:
            object.__setattr__(self, "s", -alpha)
        if self.r is None:
            object.__setattr__(self, "r", abs(alpha) ** 2 - 1.0)
        object.__setattr__(self, "s", complex(self.s))
        object.__setattr__(self, "r", float(self.r))

    @property
    def h(self):
        return 1.0 / self.n

    @property
    def nodes(self):
        return self.h * np.arange(1, self.n + 1)


@dataclass(frozen=True)
class HeatConfig:
    """``output_weight`` scales the output norm in the supply and Gramian; default h."""

    n: int
    output_weight: float | None = None

    def __post_init__(self):
        if self.n < 2:
            raise DomainError("heat grid needs n >= 2")

    @property
    def h(self):
        return 1.0 / (self.n + 1)

    @property
    def weight(self):
        return self.h if self.output_weight is None else float(self.output_weight)

    @property
    def nodes(self):
        return self.h * np.arange(1, self.n + 1)


def transport_system(cfg):
    n, h = cfg.n, cfg.h
    A = (np.eye(n, k=-1) - np.eye(n)) / h
    B = np.zeros((n, 1))
    B[0, 0] = 1.0 / h
    C = np.zeros((1, n))
    C[0, -1] = 1.0
    return StateSpaceSystem(A, B, C, [[cfg.alpha]])


def transport_supply(cfg):
    return SupplyRate([[cfg.q]], [[cfg.s]], [[cfg.r]])


def transport_M(cfg):
    """Matrix whose semidefiniteness is equivalent to ``s(y, u) >= |y - alpha u|^2 - |u|^2``."""
    a = cfg.alpha
    off = cfg.s + a
    return np.array([[cfg.q - 1.0, off], [np.conj(off), cfg.r + 1.0 - abs(a) ** 2]], dtype=complex)


def transport_storage_continuum(cfg):
    """Discrete L^2 energy ``h ||x||^2``."""
    return QuadraticStorage(cfg.h * np.eye(cfg.n))


def _samples(f, points):
    if callable(f):
        return np.array([f(t) for t in points], dtype=complex)
    return np.asarray(f, dtype=complex).reshape(-1)


def transport_exact_shift(cfg, x0_samples, u_samples, T):
    """Propagate ``x_i <- x_{i-1}`` with ``x_0 = u`` once per time step ``h``.

    ``x0_samples`` are node values (or a function of xi); ``u_samples`` are the
    inflow values at ``t_k = k h`` (or a function of t).
    """
    h = cfg.h
    steps = T / h
    K = int(round(steps))
    if K < 1 or abs(steps - K) > 1e-9 * max(1.0, steps):
        raise AlignmentError(f"T = {T} is not a positive multiple of h = {h}")
    x = _samples(x0_samples, cfg.nodes)
    if x.size != cfg.n:
        raise AlignmentError(f"expected {cfg.n} initial samples, got {x.size}")
    u = _samples(u_samples, h * np.arange(K + 1))
    if u.size != K + 1:
        raise AlignmentError(f"expected {K + 1} inflow samples on the time grid, got {u.size}")
    X = np.empty((K + 1, cfg.n), dtype=complex)
    X[0] = x
    for k in range(K):
        X[k + 1, 0] = u[k]
        X[k + 1, 1:] = X[k, :-1]
    return Trajectory(transport_system(cfg), h, "exact_transport_shift", X, u[:, None])


class UpwindPair(NamedTuple):
    """Supply and storage for which the upwind scheme is exactly dissipative.

    ``K`` and ``L`` are the expected Lur'e factors: ``K x + L u`` is the vector
    of first differences ``x_i - x_{i-1}`` with ``x_0 = u``.
    """

    supply: SupplyRate
    storage: QuadraticStorage
    K: np.ndarray
    L: np.ndarray


def transport_upwind_dissipative_pair(cfg):
    a = cfg.alpha
    supply = SupplyRate([[-1.0]], [[a]], [[1.0 - abs(a) ** 2]])
    storage = QuadraticStorage(-cfg.h * np.eye(cfg.n))
    K = np.eye(cfg.n) - np.eye(cfg.n, k=-1)
    L = np.zeros((cfg.n, 1))
    L[0, 0] = -1.0
    return UpwindPair(supply, storage, K.astype(complex), L.astype(complex))


def transport_continuum_balance(cfg, x0_samples, u_samples, T):
    """Balance of ``h ||x||^2`` against the configured supply on the exact-shift oracle."""
    traj = transport_exact_shift(cfg, x0_samples, u_samples, T)
    return dissipation_balance(traj, transport_storage_continuum(cfg), transport_supply(cfg))


def heat_system(cfg):
    """Dirichlet Laplacian ``tridiag(1, -2, 1) / h^2`` with outward one-sided Neumann traces."""
    n, h = cfg.n, cfg.h
    A = (np.eye(n, k=-1) - 2 * np.eye(n) + np.eye(n, k=1)) / h**2
    C = np.zeros((2, n))
    C[0, 0] = -1.0 / h
    C[1, -1] = -1.0 / h
    return StateSpaceSystem(A, None, C, None)


def heat_supply(cfg):
    """``s(y) = -w ||y||^2`` on the two-point trace, ``w = cfg.weight``."""
    return SupplyRate(-cfg.weight * np.eye(2), np.zeros((2, 0)), np.zeros((0, 0)))


def heat_gramian(cfg, method="auto"):
    """Observability Gramian ``W``: ``A^* W + W A + w C^* C = 0``."""
    sys = heat_system(cfg)
    return solve_lyapunov(sys.A, cfg.weight * sys.C.conj().T @ sys.C, method=method).real


def heat_storage(cfg, method="auto"):
    """Nonpositive storage ``S(x) = -x^* W x = -w int_0^inf ||y(t)||^2 dt``."""
    return QuadraticStorage(-heat_gramian(cfg, method))


def heat_eigenvalues(n):
    """Closed-form Dirichlet spectrum ``-(4/h^2) sin^2(k pi h / 2)``, k = 1..n."""
    h = 1.0 / (n + 1)
    k = np.arange(1, n + 1)
    return -(4.0 / h**2) * np.sin(k * np.pi * h / 2) ** 2


def sine_profile(cfg):
    """Samples of ``sin(pi xi)`` scaled to unit discrete L^2 norm ``h ||x||^2 = 1``."""
    x = np.sin(np.pi * cfg.nodes)
    return x / math.sqrt(cfg.h * np.sum(x**2))


def heat_decay_balance(cfg, T=0.5, dt=None, storage=None):
    """Dissipation balance along the free decay from the sine profile.

    Returns the report and the reference value ``|S(x0)|`` for relative checks.
    RK4 needs ``|lambda_max| dt < 2.78``. The default step ``min(T / 8192, 0.5 h^2)``
    also keeps the trapezoid error of the supply integral, about
    ``(2 pi^2 dt)^2 / 12`` relative, near 1e-7.
    """
    sys = heat_system(cfg)
    st = heat_storage(cfg) if storage is None else storage
    if dt is None:
        dt = min(T / 8192, 0.5 * cfg.h**2)
    x0 = sine_profile(cfg)
    traj = simulate(sys, x0, ZeroInput(0), T, dt)
    return dissipation_balance(traj, st, heat_supply(cfg)), abs(st(x0))


@dataclass(frozen=True)
class StudyRow:
    """One refinement level.

    ``gram_norm`` is the norm of the storage form as an operator on discrete
    L^2(0, 1), i.e. ``||W||_2 / h``; ``form_value`` is ``S_n`` at the
    normalized sine profile. ``gram_norm_euclidean`` is the plain ``||W||_2``.
    """

    n: int
    h: float
    gram_norm: float
    form_value: float
    gram_norm_euclidean: float


def gramian_refinement_study(ns, output_weight=1.0, method="auto"):
    """Gramian norms and form values under mesh refinement.

    With a unit output weight the limiting storage form is unbounded on L^2
    while its value on a smooth state converges, which is what the growing
    ``gram_norm`` and settling ``form_value`` columns display.
    """
    ns = [int(n) for n in ns]
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise DomainError("grid sizes must be strictly increasing")
    rows = []
    for n in ns:
        cfg = HeatConfig(n, output_weight)
        W = heat_gramian(cfg, method)
        x = sine_profile(cfg)
        norm2 = float(np.linalg.norm(W, 2))
        rows.append(StudyRow(n, cfg.h, norm2 / cfg.h, -float(x @ W @ x), norm2))
    return rows


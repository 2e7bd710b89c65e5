"""Simulated trajectories, integrated supply and the dissipation balance.

Time integrals use the composite trapezoid rule on the simulation grid, so
balances over sub-windows telescope exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, DivergenceError, DomainError
from .kyp import dissipation_rate_many
from .linalg import as_matrix
from .systems import as_vector, check_compatible

DEFAULT_STEPS = 2048


class InputSignal:
    """Input ``u(t)``; feedback signals additionally read the current state."""

    m: int

    def __call__(self, t, x):
        raise NotImplementedError

    def to_dict(self):
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class ZeroInput(InputSignal):
    m: int

    def __call__(self, t, x):
        return np.zeros(self.m, dtype=complex)

    def to_dict(self):
        return {"zero": self.m}


@dataclass(frozen=True, eq=False)
class ConstantInput(InputSignal):
    u0: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "u0", np.asarray(self.u0, dtype=complex).reshape(-1))

    @property
    def m(self):
        return self.u0.size

    def __call__(self, t, x):
        return self.u0

    def to_dict(self):
        from .serialization import encode_vector

        return {"constant": encode_vector(self.u0)}


@dataclass(frozen=True, eq=False)
class SineInput(InputSignal):
    """``amplitude * sin(frequency * t + phase)``, frequency in rad/s."""

    amplitude: np.ndarray
    frequency: float
    phase: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "amplitude", np.asarray(self.amplitude, dtype=complex).reshape(-1))

    @property
    def m(self):
        return self.amplitude.size

    def __call__(self, t, x):
        return self.amplitude * math.sin(self.frequency * t + self.phase)

    def to_dict(self):
        from .serialization import encode_vector

        return {"sine": {"amplitude": encode_vector(self.amplitude),
                         "frequency": self.frequency, "phase": self.phase}}


@dataclass(frozen=True, eq=False)
class SampledInput(InputSignal):
    """Piecewise-linear interpolation of samples; held constant outside the range."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float).reshape(-1)
        values = np.asarray(self.values, dtype=complex)
        values = values.reshape(times.size, -1)
        if times.size < 1 or np.any(np.diff(times) <= 0):
            raise DimensionError("sampled input times must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    @property
    def m(self):
        return self.values.shape[1]

    def __call__(self, t, x):
        return np.array([
            np.interp(t, self.times, col.real) + 1j * np.interp(t, self.times, col.imag)
            for col in self.values.T
        ])

    def to_dict(self):
        from .serialization import encode_matrix

        return {"sampled": {"times": self.times.tolist(), "values": encode_matrix(self.values)}}


@dataclass(frozen=True, eq=False)
class FeedbackInput(InputSignal):
    """Closed loop ``u = F x + v(t)``."""

    F: np.ndarray
    v: InputSignal = None

    def __post_init__(self):
        F = as_matrix(self.F, name="F")
        object.__setattr__(self, "F", F)
        if self.v is None:
            object.__setattr__(self, "v", ZeroInput(F.shape[0]))

    @property
    def m(self):
        return self.F.shape[0]

    def __call__(self, t, x):
        return self.F @ x + self.v(t, x)

    def to_dict(self):
        from .serialization import encode_matrix

        return {"feedback": {"F": encode_matrix(self.F), "v": self.v.to_dict()}}


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sampled trajectory on ``t_k = k dt``; outputs are recomputed from the system."""

    system: object
    dt: float
    scheme: str
    states: np.ndarray
    inputs: np.ndarray
    t0: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        X = np.asarray(self.states, dtype=complex).reshape(-1, self.system.n)
        U = np.asarray(self.inputs, dtype=complex).reshape(X.shape[0], self.system.m)
        object.__setattr__(self, "states", X)
        object.__setattr__(self, "inputs", U)

    def __len__(self):
        return self.states.shape[0]

    @property
    def times(self):
        return self.t0 + self.dt * np.arange(len(self))

    @property
    def T(self):
        return self.dt * (len(self) - 1)

    @property
    def outputs(self):
        return self.states @ self.system.C.T + self.inputs @ self.system.D.T

    def window(self, k0, k1):
        """Sub-trajectory on grid indices ``k0..k1`` inclusive."""
        if not 0 <= k0 < k1 < len(self):
            raise DomainError(f"window ({k0}, {k1}) outside 0..{len(self) - 1}")
        return Trajectory(self.system, self.dt, self.scheme, self.states[k0:k1 + 1],
                          self.inputs[k0:k1 + 1], self.t0 + k0 * self.dt, dict(self.meta))


def _grid(T, dt):
    if not T > 0:
        raise DomainError("horizon T must be positive")
    if dt is None:
        dt = T / DEFAULT_STEPS
    if not 0 < dt <= T * (1 + 1e-12):
        raise DomainError("step size must satisfy 0 < dt <= T")
    steps = max(1, math.ceil(T / dt - 1e-9))
    return steps, T / steps


def simulate(sys, x0, u_signal, T, dt=None):
    """Classical RK4 for ``x' = A x + B u(t, x)``.

    The input is evaluated at every stage time (and stage state, for feedback
    inputs). If ``T / dt`` is not an integer the step is shrunk to fit.
    """
    steps, dt = _grid(T, dt)
    x = as_vector(x0, sys.n, "x0").copy()
    if u_signal is None:
        u_signal = ZeroInput(sys.m)
    if u_signal.m != sys.m:
        raise DimensionError(f"input signal has dimension {u_signal.m}, system has m = {sys.m}")
    A, B = sys.A, sys.B

    def u_at(t, z):
        return np.asarray(u_signal(t, z), dtype=complex).reshape(sys.m)

    def f(t, z):
        return A @ z + B @ u_at(t, z)

    X = np.empty((steps + 1, sys.n), dtype=complex)
    U = np.empty((steps + 1, sys.m), dtype=complex)
    X[0] = x
    # overflow is reported as DivergenceError below, not as a numpy warning
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(steps):
            t = k * dt
            U[k] = u_at(t, x)
            k1 = A @ x + B @ U[k]
            k2 = f(t + 0.5 * dt, x + 0.5 * dt * k1)
            k3 = f(t + 0.5 * dt, x + 0.5 * dt * k2)
            k4 = f(t + dt, x + dt * k3)
            x = x + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
            if not np.all(np.isfinite(x)):
                raise DivergenceError(k)
            X[k + 1] = x
    U[steps] = u_at(steps * dt, x)
    return Trajectory(sys, dt, "rk4", X, U)


def supply_integral(traj, sr):
    check_compatible(traj.system, sr)
    s = sr.evaluate_many(traj.outputs, traj.inputs)
    return float(np.trapezoid(s, dx=traj.dt))


@dataclass(frozen=True)
class BalanceReport:
    """``lhs = S(x(T)) - S(x(0)) + int s``; ``residual = lhs - int ||Kx + Lu||^2``."""

    delta_storage: float
    supply_integral: float
    lhs: float
    rate_integral: float | None = None
    residual: float | None = None

    def to_dict(self):
        return {
            "delta_storage": self.delta_storage,
            "supply_integral": self.supply_integral,
            "rate_integral": self.rate_integral,
            "lhs": self.lhs,
            "residual": self.residual,
        }

    @classmethod
    def from_dict(cls, d):
        opt = lambda v: None if v is None else float(v)  # noqa: E731
        return cls(float(d["delta_storage"]), float(d["supply_integral"]), float(d["lhs"]),
                   opt(d.get("rate_integral")), opt(d.get("residual")))


def dissipation_balance(traj, st, sr, lure=None):
    check_compatible(traj.system, sr, st)
    delta = st(traj.states[-1]) - st(traj.states[0])
    integral = supply_integral(traj, sr)
    lhs = delta + integral
    if lure is None:
        return BalanceReport(delta, integral, lhs)
    rate = dissipation_rate_many(lure, traj.states, traj.inputs)
    rate_integral = float(np.trapezoid(rate, dx=traj.dt))
    return BalanceReport(delta, integral, lhs, rate_integral, lhs - rate_integral)


def _bump(t, n):
    t = np.asarray(t, dtype=float)
    z = 2.0 * n * t + 1.0
    out = np.zeros_like(t)
    inside = np.abs(z) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - z[inside] ** 2))
    return out


@dataclass(frozen=True, eq=False)
class MollifierKernel:
    """Smooth bump of unit mass supported in ``(-1/n, 0)``, sampled at ``tau_j = -j dt``.

    The mass is normalized with the trapezoid rule on the sampling grid, which
    is exactly the quadrature used by :func:`mollify`.
    """

    n: int
    dt: float
    times: np.ndarray
    values: np.ndarray
    mass: float

    def __call__(self, t):
        return _bump(t, self.n) / self.mass

    @property
    def first_moment(self):
        return float(np.trapezoid(self.values * self.times, self.times))


def mollifier_kernel(n, dt=None):
    if int(n) != n or n < 1:
        raise DomainError("mollifier index n must be a positive integer")
    n = int(n)
    if dt is None:
        dt = 1.0 / (256 * n)
    J = math.ceil(1.0 / (n * dt) - 1e-12)
    times = -dt * np.arange(J, -1, -1, dtype=float)
    raw = _bump(times, n)
    mass = float(np.trapezoid(raw, times))
    if mass <= 0:
        raise DomainError(f"step {dt} too coarse to resolve a kernel of width 1/{n}")
    return MollifierKernel(n, dt, times, raw / mass, mass)


def mollify(traj, n):
    """Convolve states and inputs with the kernel of index ``n``.

    Realizes ``x_n(t) = int alpha_n(tau) x(t - tau) dtau`` on the trajectory
    grid; the result lives on ``[0, T - 1/n]``. The output map is linear, so
    the mollified outputs coincide with the mollified original outputs.
    """
    if 1.0 / n >= traj.T:
        raise DomainError(f"kernel width 1/{n} must be shorter than the horizon {traj.T}")
    ker = mollifier_kernel(n, traj.dt)
    # weights for x(t_k + j dt), j = 0..J (kernel values at tau = -j dt)
    w = ker.values[::-1] * traj.dt
    w[0] *= 0.5
    w[-1] *= 0.5
    span = np.flatnonzero(w)[-1]
    count = int(math.floor((traj.T - 1.0 / n) / traj.dt + 1e-9)) + 1
    count = min(count, len(traj) - span)
    w = w[:span + 1]

    def conv(Z):
        out = np.zeros((count, Z.shape[1]), dtype=complex)
        for j, wj in enumerate(w):
            if wj:
                out += wj * Z[j:j + count]
        return out

    meta = dict(traj.meta, mollified=n)
    return Trajectory(traj.system, traj.dt, traj.scheme, conv(traj.states), conv(traj.inputs),
                      traj.t0, meta)

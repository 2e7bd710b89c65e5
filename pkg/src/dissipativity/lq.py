"""Infinite-horizon LQ problem with nonnegative supply as cost.

The value function ``Val(x0) = x0^* P x0`` is the stabilizing Riccati solution.
:func:`value_oracle` estimates it independently by direct search over
piecewise-constant controls, with segment costs from matrix exponentials.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
import scipy.linalg as spla

from .errors import (
    DegenerateRateError,
    PreconditionError,
    SizeError,
    StabilizabilityError,
    UnsupportedCaseError,
)
from .kyp import check_dissipative, lure_factor
from .linalg import (
    DEFAULT_TOL,
    PsdCertificate,
    check_psd,
    is_stabilizable,
    solve_care,
    spectral_abscissa,
    care_residual,
)
from .systems import QuadraticStorage, as_vector, check_compatible, supply_is_nonneg
from .trajectories import FeedbackInput, simulate

MAX_SEARCH = 10**6
EXHAUSTIVE_MAX = 10**6


def effective_weights(sys, sr):
    """State/input weights of ``s(Cx + Du, u)``: returns ``(Qc, Sc, Rc)``."""
    C, D = sys.C, sys.D
    Q, S, R = sr.Q, sr.S, sr.R
    Qc = C.conj().T @ Q @ C
    Sc = C.conj().T @ Q @ D + C.conj().T @ S
    Rc = D.conj().T @ Q @ D + D.conj().T @ S + S.conj().T @ D + R
    return 0.5 * (Qc + Qc.conj().T), Sc, 0.5 * (Rc + Rc.conj().T)


@dataclass(frozen=True, eq=False)
class ValueFunction:
    P_val: np.ndarray
    care_residual: float
    closed_loop_spectral_abscissa: float

    def __call__(self, x):
        return QuadraticStorage(self.P_val)(x)

    @property
    def storage(self):
        return QuadraticStorage(self.P_val)

    def to_dict(self):
        from .serialization import encode_matrix

        return {
            "P_val": encode_matrix(self.P_val),
            "care_residual": self.care_residual,
            "closed_loop_spectral_abscissa": self.closed_loop_spectral_abscissa,
        }

    @classmethod
    def from_dict(cls, d):
        from .serialization import decode_matrix

        return cls(decode_matrix(d["P_val"]), float(d["care_residual"]),
                   float(d["closed_loop_spectral_abscissa"]))


@dataclass(frozen=True, eq=False)
class OracleEstimate:
    """Best cost found over a restricted control class (an upper bound on Val)."""

    x0: np.ndarray
    horizon: float
    estimate: float
    control_class: str
    estimate_no_tail: float = float("nan")

    def to_dict(self):
        from .serialization import encode_vector

        return {
            "x0": encode_vector(self.x0),
            "horizon": self.horizon,
            "estimate": self.estimate,
            "estimate_no_tail": self.estimate_no_tail,
            "control_class": self.control_class,
        }

    @classmethod
    def from_dict(cls, d):
        from .serialization import decode_vector

        return cls(decode_vector(d["x0"]), float(d["horizon"]), float(d["estimate"]),
                   d["control_class"], float(d["estimate_no_tail"]))


def value_function(sys, sr, tol=DEFAULT_TOL):
    check_compatible(sys, sr)
    nonneg = supply_is_nonneg(sr, tol)
    if not nonneg.is_psd:
        raise UnsupportedCaseError(
            f"supply rate must be nonnegative (block min eigenvalue {nonneg.min_eigenvalue:.6g})"
        )
    Qc, Sc, Rc = effective_weights(sys, sr)
    if sys.m:
        r_min = float(np.linalg.eigvalsh(Rc)[0])
        if r_min <= 1e-9 * max(1.0, float(np.linalg.norm(Rc, 2))):
            raise UnsupportedCaseError(
                "only full input weighting is supported: D^*QD + D^*S + S^*D + R must be "
                f"positive definite (min eigenvalue {r_min:.6g})"
            )
    stab = is_stabilizable(sys.A, sys.B, tol)
    if not stab:
        raise StabilizabilityError(stab.offending)
    P = solve_care(sys.A, sys.B, Qc, Rc, Sc, tol=tol)
    if sys.m:
        res = care_residual(sys.A, sys.B, Qc, Rc, Sc, P)
        F = -np.linalg.solve(Rc, (P @ sys.B + Sc).conj().T)
        abscissa = spectral_abscissa(sys.A + sys.B @ F)
    else:
        res = float(np.linalg.norm(sys.A.conj().T @ P + P @ sys.A + Qc, "fro"))
        abscissa = spectral_abscissa(sys.A)
    return ValueFunction(P, res, abscissa)


def optimal_feedback(sys, sr, vf, tol=DEFAULT_TOL):
    """``F = -L^{-1} K`` from the Lur'e factors of the KYP matrix at ``P_val``."""
    report = lure_factor(sys, sr, vf.storage, tol)
    lp = report.lure
    if lp.q != sys.m:
        raise DegenerateRateError(
            f"Lur'e factor has rank q = {lp.q} but m = {sys.m}; no feedback law can be read off"
        )
    if sys.m == 0:
        return np.zeros((0, sys.n), dtype=complex)
    sv = np.linalg.svd(lp.L, compute_uv=False)
    if sv[-1] <= tol * max(1.0, sv[0]):
        raise DegenerateRateError(f"Lur'e factor L is singular (min singular value {sv[-1]:.3g})")
    F = -np.linalg.solve(lp.L, lp.K)
    if spectral_abscissa(sys.A + sys.B @ F) >= 0:
        raise DegenerateRateError("feedback from the Lur'e factors is not stabilizing")
    return F


def _segment_maps(sys, sr, tau):
    """Exact one-segment propagation and cost for a constant control.

    With z = [x; u] and z' = [[A, B], [0, 0]] z, the segment cost
    int_0^tau z^* W z dt equals z0^* G z0 with G from Van Loan's block
    exponential.
    """
    n, m = sys.n, sys.m
    Qc, Sc, Rc = effective_weights(sys, sr)
    Wz = np.block([[Qc, Sc], [Sc.conj().T, Rc]])
    Az = np.zeros((n + m, n + m), dtype=complex)
    Az[:n, :n] = sys.A
    Az[:n, n:] = sys.B
    big = np.block([[-Az.conj().T, Wz], [np.zeros_like(Az), Az]])
    E = spla.expm(big * tau)
    Ez = E[n + m:, n + m:]
    G = Ez.conj().T @ E[:n + m, n + m:]
    return Ez[:n, :n], Ez[:n, n:], 0.5 * (G + G.conj().T)


def _quadratic_cost(sys, sr, P_tail, x0, horizon, segments):
    """Cost as a quadratic in the stacked control vector U (segments*m).

    Returns ``(H, g, c, H0, g0, c0)`` so that J(U) = U^*HU + 2 Re(g^*U) + c with
    the tail x(H)^* P x(H) included, and the same without the tail.
    """
    n, m = sys.n, sys.m
    Phi, Gam, G = _segment_maps(sys, sr, horizon / segments)
    N = segments
    # x_k = Ox[k] x0 + Tx[k] U
    Ox = [np.eye(n, dtype=complex)]
    Tx = [np.zeros((n, N * m), dtype=complex)]
    for k in range(N):
        Ox.append(Phi @ Ox[-1])
        Tk = Phi @ Tx[-1]
        Tk[:, k * m:(k + 1) * m] += Gam
        Tx.append(Tk)
    H = np.zeros((N * m, N * m), dtype=complex)
    g = np.zeros(N * m, dtype=complex)
    c = 0.0
    for k in range(N):
        # z_k = [x_k; u_k] = Mz_x x0 + Mz_u U
        Zu = np.vstack([Tx[k], np.zeros((m, N * m), dtype=complex)])
        Zu[n:, k * m:(k + 1) * m] = np.eye(m)
        zx = np.concatenate([Ox[k] @ x0, np.zeros(m, dtype=complex)])
        H += Zu.conj().T @ G @ Zu
        g += Zu.conj().T @ (G @ zx)
        c += float(np.vdot(zx, G @ zx).real)
    xN = Ox[N] @ x0
    H_tail = Tx[N].conj().T @ P_tail @ Tx[N]
    g_tail = Tx[N].conj().T @ (P_tail @ xN)
    c_tail = float(np.vdot(xN, P_tail @ xN).real)
    return H + H_tail, g + g_tail, c + c_tail, H, g, c


def value_oracle(sys, sr, x0, horizon, grid, vf=None, tol=DEFAULT_TOL):
    """Minimize the finite-horizon cost plus tail ``x(H)^* P_val x(H)`` on a control grid.

    ``grid`` holds ``segments``, ``amplitude_levels`` and ``amplitude_bound``.
    Each real control coordinate (real and imaginary parts separately when the
    data are complex) takes one of the uniformly spaced levels. The full
    product of levels is enumerated when it has at most 10^6 members;
    otherwise coordinate descent, each update scanning every level, starts
    from the quantized samples of ``u = F x``.
    """
    check_compatible(sys, sr)
    segments = int(grid["segments"])
    levels = int(grid["amplitude_levels"])
    bound = float(grid["amplitude_bound"])
    if sys.m < 1 or segments < 1 or levels < 1:
        raise PreconditionError("value_oracle needs m >= 1 and positive grid sizes")
    x0 = as_vector(x0, sys.n, "x0")
    if vf is None:
        vf = value_function(sys, sr, tol)
    complex_data = any(np.any(M.imag) for M in (sys.A, sys.B, sys.C, sys.D, sr.Q, sr.S, sr.R)) \
        or bool(np.any(x0.imag))
    parts = 2 if complex_data else 1
    ncoord = segments * sys.m * parts
    if ncoord * levels > MAX_SEARCH:
        raise SizeError(
            f"control grid too large: {ncoord} coordinates x {levels} levels > {MAX_SEARCH}"
        )
    H, g, c, H0, g0, c0 = _quadratic_cost(sys, sr, vf.P_val, x0, horizon, segments)
    # real coordinates w: U = E w
    E = np.eye(segments * sys.m, dtype=complex)
    if parts == 2:
        E = np.hstack([E, 1j * E])
    Hr = (E.conj().T @ H @ E).real
    gr = (E.conj().T @ g).real
    grid_vals = np.linspace(-bound, bound, levels) if levels > 1 else np.zeros(1)

    def cost(w, Hm=Hr, gm=gr, cm=c):
        return float(w @ Hm @ w + 2 * gm @ w + cm)

    if levels ** ncoord <= EXHAUSTIVE_MAX:
        best, best_w = np.inf, None
        combos = itertools.product(range(levels), repeat=ncoord)
        while chunk := list(itertools.islice(combos, 8192)):
            Wc = grid_vals[np.array(chunk)]
            vals = np.einsum("ki,ij,kj->k", Wc, Hr, Wc) + 2 * Wc @ gr + c
            j = int(np.argmin(vals))
            # strict improvement keeps the lexicographically first minimizer
            if vals[j] < best:
                best, best_w = float(vals[j]), Wc[j]
        how = "exhaustive"
    else:
        best_w = _feedback_start(sys, sr, vf, x0, horizon, segments, parts, grid_vals, tol)
        best_w = _coordinate_descent(Hr, gr, best_w, grid_vals)
        best = cost(best_w)
        how = "coordinate descent"
    label = (f"piecewise-constant, {segments} segments, {levels} levels in "
             f"[-{bound:g}, {bound:g}] per {'real/imag part' if parts == 2 else 'component'}; {how}")
    H0r = (E.conj().T @ H0 @ E).real
    g0r = (E.conj().T @ g0).real
    return OracleEstimate(x0, float(horizon), best, label, cost(best_w, H0r, g0r, c0))


def _feedback_start(sys, sr, vf, x0, horizon, segments, parts, grid_vals, tol):
    try:
        F = optimal_feedback(sys, sr, vf, tol)
    except DegenerateRateError:
        F = np.zeros((sys.m, sys.n), dtype=complex)
    tau = horizon / segments
    traj = simulate(sys, x0, FeedbackInput(F), horizon, tau / 8)
    u = traj.inputs[: 8 * segments: 8].reshape(-1)
    raw = np.concatenate([u.real, u.imag]) if parts == 2 else u.real
    idx = np.abs(raw[:, None] - grid_vals[None, :]).argmin(axis=1)
    return grid_vals[idx]


def _coordinate_descent(Hr, gr, w, grid_vals, max_sweeps=200):
    w = w.copy()
    Hw = Hr @ w
    for _ in range(max_sweeps):
        changed = False
        for i in range(w.size):
            # J(w + (v - w_i) e_i) - J(w) as a function of v
            old = w[i]
            d = grid_vals - old
            delta = Hr[i, i] * d ** 2 + 2 * d * (Hw[i] + gr[i])
            j = int(np.argmin(delta))
            if delta[j] < -1e-15 * (1 + abs(Hw[i] + gr[i])):
                w[i] = grid_vals[j]
                Hw += Hr[:, i] * (w[i] - old)
                changed = True
        if not changed:
            break
    return w


def storage_dominance_check(sys, sr, st, vf, tol=DEFAULT_TOL):
    """Certify ``P_val - P >= 0`` for a nonnegative storage ``P``."""
    if not check_psd(st.P, tol).is_psd:
        raise PreconditionError("storage is not nonnegative (P is not PSD)")
    if not check_dissipative(sys, sr, st, tol).certificate.is_psd:
        raise PreconditionError("storage does not satisfy the KYP inequality")
    return check_psd(vf.P_val - st.P, tol, scale=max(np.linalg.norm(vf.P_val, 2), np.linalg.norm(st.P, 2)))


def value_decay_check(sys, sr, vf, x0, T, dt=None, tol=DEFAULT_TOL):
    """``Val(x(T))`` along the optimal closed loop started at ``x0``."""
    F = optimal_feedback(sys, sr, vf, tol)
    traj = simulate(sys, x0, FeedbackInput(F), T, dt)
    return vf(traj.states[-1])


__all__ = [
    "OracleEstimate",
    "PsdCertificate",
    "ValueFunction",
    "effective_weights",
    "optimal_feedback",
    "storage_dominance_check",
    "value_decay_check",
    "value_function",
    "value_oracle",
]

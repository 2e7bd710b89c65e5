"""Command-line front end.

Every subcommand writes a JSON report (or CSV plot data) to stdout or to
``--out`` and signals its verdict through the exit code:

0 success or certified, 1 analysis negative, 2 input error, 3 numerical
divergence or non-convergence, 4 outside the supported restrictions.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys as _sys

import numpy as np

from . import lq, pde
from .errors import (
    AlignmentError,
    ConfigError,
    ConvergenceError,
    DefinitenessError,
    DimensionError,
    DivergenceError,
    DomainError,
    EigensolverError,
    PreconditionError,
    SizeError,
    SpectralCompatibilityError,
    StabilizabilityError,
    UnsupportedCaseError,
)
from .kyp import check_dissipative, lure_factor
from .linalg import DEFAULT_TOL, check_psd
from .serialization import (
    dumps,
    encode_matrix,
    encode_vector,
    load_config,
    parse_input,
    storage_to_dict,
    supply_to_dict,
    system_to_dict,
    write_study_csv,
    write_trajectory_csv,
)
from .trajectories import FeedbackInput, dissipation_balance, simulate

EXIT_OK, EXIT_NEGATIVE, EXIT_INPUT, EXIT_NUMERIC, EXIT_UNSUPPORTED = range(5)


class _Output:
    """Collects stdout text, or writes it to ``--out`` when given."""

    def __init__(self, args):
        self.path = getattr(args, "out", None)

    def emit(self, text):
        if not text.endswith("\n"):
            text += "\n"
        if self.path:
            with open(self.path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            _sys.stdout.write(text)


def _tol(args, cfg=None):
    if args.tol is not None:
        return args.tol
    if cfg is not None and "tol" in cfg.options:
        return float(cfg.options["tol"])
    return DEFAULT_TOL


def _require(cfg, *fields):
    for f in fields:
        if getattr(cfg, f) is None:
            raise ConfigError(f"config: '{f}' is required for this command")


def cmd_check_kyp(args):
    cfg = load_config(args.config)
    _require(cfg, "supply", "storage")
    report = check_dissipative(cfg.system, cfg.supply, cfg.storage, _tol(args, cfg))
    _Output(args).emit(dumps(report.to_dict()))
    return EXIT_OK if report.certificate.is_psd else EXIT_NEGATIVE


def cmd_lure(args):
    cfg = load_config(args.config)
    _require(cfg, "supply", "storage")
    report = lure_factor(cfg.system, cfg.supply, cfg.storage, _tol(args, cfg))
    _Output(args).emit(dumps(report.lure.to_dict()))
    return EXIT_OK


def _optimal_feedback_input(cfg, tol):
    _require(cfg, "supply")
    vf = lq.value_function(cfg.system, cfg.supply, tol)
    return FeedbackInput(lq.optimal_feedback(cfg.system, cfg.supply, vf, tol)), vf


def cmd_simulate(args):
    cfg = load_config(args.config)
    sys, tol = cfg.system, _tol(args, cfg)
    T = args.T if args.T is not None else float(cfg.options.get("T", 1.0))
    dt = args.dt if args.dt is not None else cfg.options.get("dt")
    if args.input is not None:
        try:
            raw_input = json.loads(args.input)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"--input: invalid JSON at column {exc.colno}: {exc.msg}") from exc
    else:
        raw_input = cfg.options.get("input")
    signal = parse_input(raw_input, sys.m)
    storage = cfg.storage
    if isinstance(signal, str):
        signal, vf = _optimal_feedback_input(cfg, tol)
        # along the optimal closed loop the value function is the natural storage
        if storage is None:
            storage = vf.storage
    x0 = cfg.options.get("x0", np.zeros(sys.n))
    traj = simulate(sys, x0, signal, T, None if dt is None else float(dt))

    balance = None
    if cfg.supply is not None and storage is not None:
        lure = None
        if check_dissipative(sys, cfg.supply, storage, tol).certificate.is_psd:
            lure = lure_factor(sys, cfg.supply, storage, tol).lure
        balance = dissipation_balance(traj, storage, cfg.supply, lure).to_dict()
    summary = {"steps": len(traj) - 1, "dt": traj.dt, "T": traj.T, "scheme": traj.scheme,
               "final_state": encode_vector(traj.states[-1]), "balance": balance}

    buf = io.StringIO()
    write_trajectory_csv(traj, buf)
    if args.out and args.format == "csv":
        _Output(args).emit(buf.getvalue())
        _sys.stdout.write(dumps(summary) + "\n")
    elif args.format == "csv":
        _sys.stdout.write(buf.getvalue())
        _sys.stdout.write("# balance " + json.dumps(balance) + "\n")
    else:
        _Output(args).emit(dumps(summary))
    return EXIT_OK


def _default_bound(F, x0):
    if F is None or F.size == 0:
        return 1.0
    return max(1e-3, 1.5 * float(np.max(np.abs(F @ x0))))


def cmd_lqr(args):
    cfg = load_config(args.config)
    _require(cfg, "supply")
    sys, sr, tol = cfg.system, cfg.supply, _tol(args, cfg)
    vf = lq.value_function(sys, sr, tol)
    F = lq.optimal_feedback(sys, sr, vf, tol)
    report = {"value_function": vf.to_dict(), "feedback": encode_matrix(F), "oracle": None}
    if not args.no_oracle and sys.m:
        x0 = cfg.options.get("x0")
        if x0 is None:
            x0 = np.zeros(sys.n, dtype=complex)
            x0[0] = 1.0
        bound = args.bound if args.bound is not None else _default_bound(F, x0)
        grid = {"segments": args.segments, "amplitude_levels": args.levels, "amplitude_bound": bound}
        est = lq.value_oracle(sys, sr, x0, args.horizon, grid, vf, tol)
        value = vf(x0)
        report["oracle"] = {
            **est.to_dict(),
            "grid": grid,
            "value": value,
            "relative_gap": (est.estimate - value) / abs(value) if value else est.estimate,
        }
    _Output(args).emit(dumps(report))
    return EXIT_OK


def _parse_complex(text):
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise ConfigError(f"cannot parse complex number {text!r}") from exc


def _parse_ns(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"--study: expected comma-separated integers, got {text!r}") from exc


def _example_transport(args):
    cfg = pde.TransportConfig(
        args.n if args.n is not None else 64,
        _parse_complex(args.alpha) if args.alpha else 0.0,
        args.q,
        None if args.s is None else _parse_complex(args.s),
        args.r,
    )
    tol = _tol(args)
    check = args.check or "upwind"
    out = _Output(args)
    if check == "upwind":
        pair = pde.transport_upwind_dissipative_pair(cfg)
        sys = pde.transport_system(cfg)
        report = check_dissipative(sys, pair.supply, pair.storage, tol)
        if report.certificate.is_psd:
            report = lure_factor(sys, pair.supply, pair.storage, tol)
        out.emit(dumps(report.to_dict()))
        return EXIT_OK if report.certificate.is_psd else EXIT_NEGATIVE
    mcert = check_psd(pde.transport_M(cfg), tol)
    if check == "M":
        out.emit(dumps({"M": encode_matrix(pde.transport_M(cfg)), "certificate": mcert.to_dict()}))
        return EXIT_OK if mcert.is_psd else EXIT_NEGATIVE
    if check != "continuum":
        raise ConfigError(f"transport: unknown check {check!r} (upwind, continuum, M)")
    T = args.T if args.T is not None else 1.0

    def bump(xi):
        z = 4.0 * (xi - 0.5)
        return math.exp(-1.0 / (1.0 - z * z)) if abs(z) < 1 else 0.0

    def inflow(t):
        return math.sin(2 * math.pi * t + math.pi / 4)

    rows = []
    for level in (cfg, pde.TransportConfig(2 * cfg.n, cfg.alpha, cfg.q, cfg.s, cfg.r)):
        bal = pde.transport_continuum_balance(level, bump, inflow, T)
        rows.append({"n": level.n, "h": level.h, "balance": bal.to_dict()})
    e0, e1 = (abs(r["balance"]["lhs"]) for r in rows)
    out.emit(dumps({"M_certificate": mcert.to_dict(), "levels": rows,
                    "halving_ratio": e0 / e1 if e1 else None}))
    return EXIT_OK if mcert.is_psd else EXIT_NEGATIVE


def _example_heat(args):
    out = _Output(args)
    if args.study:
        rows = pde.gramian_refinement_study(_parse_ns(args.study),
                                            1.0 if args.output_weight is None else args.output_weight)
        if args.format == "json":
            out.emit(dumps([{"n": r.n, "h": r.h, "gram_norm": r.gram_norm, "form_value": r.form_value,
                             "gram_norm_euclidean": r.gram_norm_euclidean} for r in rows]))
        else:
            buf = io.StringIO()
            write_study_csv(rows, buf)
            out.emit(buf.getvalue())
        return EXIT_OK
    cfg = pde.HeatConfig(args.n if args.n is not None else 50, args.output_weight)
    tol = _tol(args)
    check = args.check or "gramian"
    if check == "gramian":
        sys, sr, st = pde.heat_system(cfg), pde.heat_supply(cfg), pde.heat_storage(cfg)
        report = check_dissipative(sys, sr, st, tol)
        if report.certificate.is_psd:
            report = lure_factor(sys, sr, st, tol)
        payload = report.to_dict()
        payload["kyp_frobenius_norm"] = float(np.linalg.norm(report.kyp_matrix, "fro"))
        payload["gramian_frobenius_norm"] = float(np.linalg.norm(st.P, "fro"))
        out.emit(dumps(payload))
        return EXIT_OK if report.certificate.is_psd else EXIT_NEGATIVE
    if check == "decay":
        T = args.T if args.T is not None else 0.5
        bal, ref = pde.heat_decay_balance(cfg, T)
        out.emit(dumps({"balance": bal.to_dict(), "reference": ref,
                        "relative_lhs": abs(bal.lhs) / ref if ref else None}))
        return EXIT_OK
    raise ConfigError(f"heat: unknown check {check!r} (gramian, decay)")


def cmd_example(args):
    if args.name == "transport":
        return _example_transport(args)
    return _example_heat(args)


def cmd_show(args):
    """Echo the parsed config in canonical encoding."""
    cfg = load_config(args.config)
    payload = {"system": system_to_dict(cfg.system),
               "supply": None if cfg.supply is None else supply_to_dict(cfg.supply),
               "storage": None if cfg.storage is None else storage_to_dict(cfg.storage)}
    _Output(args).emit(dumps(payload))
    return EXIT_OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=None, help="PSD/rank tolerance (relative)")
    common.add_argument("--format", choices=("json", "csv"), default=None,
                        help="default csv for the refinement study, json otherwise")
    common.add_argument("--out", default=None, help="write the report here instead of stdout")
    with_config = argparse.ArgumentParser(add_help=False, parents=[common])
    with_config.add_argument("--config", required=True, help="JSON analysis config")

    parser = argparse.ArgumentParser(prog="dissipativity",
                                     description="Dissipativity analysis of linear systems.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-kyp", parents=[with_config], help="certify the KYP inequality")
    p.set_defaults(func=cmd_check_kyp)
    p = sub.add_parser("lure", parents=[with_config], help="Lur'e factors K, L of the KYP matrix")
    p.set_defaults(func=cmd_lure)
    p = sub.add_parser("show", parents=[with_config], help="print the parsed config")
    p.set_defaults(func=cmd_show)

    p = sub.add_parser("simulate", parents=[with_config], help="simulate and check the balance")
    p.add_argument("--T", type=float, default=None)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--input", default=None, help="input signal as JSON, overrides options.input")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("lqr", parents=[with_config], help="value function, feedback and oracle")
    p.add_argument("--no-oracle", action="store_true")
    p.add_argument("--horizon", type=float, default=5.0)
    p.add_argument("--segments", type=int, default=8)
    p.add_argument("--levels", type=int, default=41)
    p.add_argument("--bound", type=float, default=None)
    p.set_defaults(func=cmd_lqr)

    p = sub.add_parser("example", parents=[common], help="built-in PDE discretizations")
    p.add_argument("name", choices=("transport", "heat"))
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--alpha", default=None, help="complex, e.g. 0.3+0.4j")
    p.add_argument("--q", type=float, default=1.0)
    p.add_argument("--s", default=None)
    p.add_argument("--r", type=float, default=None)
    p.add_argument("--output-weight", type=float, default=None)
    p.add_argument("--check", default=None,
                   help="transport: upwind, continuum, M; heat: gramian, decay")
    p.add_argument("--study", default=None, help="heat refinement grid sizes, e.g. 25,50,100,200")
    p.add_argument("--T", type=float, default=None)
    p.set_defaults(func=cmd_example)
    return parser


_EXIT_FOR = (
    ((DefinitenessError,), EXIT_NEGATIVE),
    ((StabilizabilityError, UnsupportedCaseError), EXIT_UNSUPPORTED),
    ((DivergenceError, ConvergenceError, EigensolverError, SpectralCompatibilityError), EXIT_NUMERIC),
    ((ConfigError, DimensionError, DomainError, AlignmentError, SizeError, PreconditionError), EXIT_INPUT),
)


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except Exception as exc:
        for types, code in _EXIT_FOR:
            if isinstance(exc, types):
                payload = {"error": type(exc).__name__, "message": str(exc)}
                for attr in ("min_eigenvalue", "offending", "last_finite_index"):
                    if hasattr(exc, attr):
                        val = getattr(exc, attr)
                        payload[attr] = [encode_vector([z])[0] for z in val] if attr == "offending" else val
                _sys.stderr.write(f"dissipativity: {exc}\n")
                _sys.stdout.write(dumps(payload) + "\n")
                return code
        raise


if __name__ == "__main__":
    _sys.exit(main())

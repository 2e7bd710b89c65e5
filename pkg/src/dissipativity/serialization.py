"""JSON encoding of matrices and model objects, analysis configs, CSV output.

Matrices are row-major nested arrays whose entries are ``[re, im]`` pairs; on
input a bare number is accepted for a real entry and for a 1x1 matrix. Floats
go through :mod:`json`, which writes the shortest round-trip representation.
"""

from __future__ import annotations

import csv
import json
import numbers
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DimensionError
from .systems import (
    QuadraticStorage,
    StateSpaceSystem,
    SupplyRate,
    internal_passivity_storage,
    make_impedance_supply,
    make_scattering_supply,
)


def encode_complex(z):
    z = complex(z)
    return [z.real, z.imag]


def encode_matrix(M):
    M = np.asarray(M, dtype=complex)
    return [[encode_complex(z) for z in row] for row in M]


def encode_vector(v):
    return [encode_complex(z) for z in np.asarray(v, dtype=complex).reshape(-1)]


def _decode_entry(e, where):
    if isinstance(e, bool):
        raise ConfigError(f"{where}: expected a number or [re, im], got {e!r}")
    if isinstance(e, numbers.Real):
        return complex(e)
    if isinstance(e, (list, tuple)) and len(e) == 2 and all(
        isinstance(v, numbers.Real) and not isinstance(v, bool) for v in e
    ):
        return complex(e[0], e[1])
    raise ConfigError(f"{where}: expected a number or [re, im], got {e!r}")


def decode_matrix(obj, rows=None, cols=None, name="matrix"):
    if isinstance(obj, numbers.Real) and not isinstance(obj, bool):
        M = np.array([[complex(obj)]])
    elif isinstance(obj, list):
        if not all(isinstance(r, list) for r in obj):
            raise ConfigError(f"{name}: a matrix is a list of rows")
        widths = {len(r) for r in obj}
        if len(widths) > 1:
            raise ConfigError(f"{name}: rows have different lengths {sorted(widths)}")
        width = widths.pop() if widths else (cols or 0)
        M = np.array(
            [[_decode_entry(e, f"{name}[{i}][{j}]") for j, e in enumerate(r)] for i, r in enumerate(obj)],
            dtype=complex,
        ).reshape(len(obj), width)
    else:
        raise ConfigError(f"{name}: expected a matrix, got {type(obj).__name__}")
    if rows is not None and M.shape[0] != rows:
        raise ConfigError(f"{name}: has {M.shape[0]} rows, expected {rows}")
    if cols is not None and M.shape[1] != cols:
        raise ConfigError(f"{name}: has {M.shape[1]} columns, expected {cols}")
    return M


def decode_vector(obj, size=None, name="vector"):
    if isinstance(obj, numbers.Real) and not isinstance(obj, bool):
        obj = [obj]
    if not isinstance(obj, list):
        raise ConfigError(f"{name}: expected a list of entries")
    v = np.array([_decode_entry(e, f"{name}[{i}]") for i, e in enumerate(obj)], dtype=complex)
    if size is not None and v.size != size:
        raise ConfigError(f"{name}: has length {v.size}, expected {size}")
    return v


def system_to_dict(sys):
    return {"n": sys.n, "m": sys.m, "p": sys.p,
            **{k: encode_matrix(getattr(sys, k)) for k in "ABCD"}}


def system_from_dict(d, name="system"):
    if not isinstance(d, dict) or "A" not in d:
        raise ConfigError(f"{name}: expected an object with at least 'A'")
    A = decode_matrix(d["A"], name=f"{name}.A")
    n = A.shape[0]
    if A.shape[1] != n:
        raise ConfigError(f"{name}.A: must be square, got {A.shape[0]}x{A.shape[1]}")
    B = decode_matrix(d["B"], rows=n, name=f"{name}.B") if d.get("B") is not None else None
    m = d.get("m", 0 if B is None else B.shape[1])
    if B is not None and B.shape[1] != m:
        raise ConfigError(f"{name}.B: has {B.shape[1]} columns, expected m = {m}")
    C = decode_matrix(d["C"], cols=n, name=f"{name}.C") if d.get("C") is not None else None
    p = d.get("p", 0 if C is None else C.shape[0])
    D = decode_matrix(d["D"], rows=p, cols=m, name=f"{name}.D") if d.get("D") is not None else None
    try:
        return StateSpaceSystem(A, B if B is not None else np.zeros((n, m)),
                                C if C is not None else np.zeros((p, n)),
                                D if D is not None else np.zeros((p, m)))
    except DimensionError as exc:
        raise ConfigError(f"{name}: {exc}") from exc


def supply_to_dict(sr):
    return {"p": sr.p, "m": sr.m, "Q": encode_matrix(sr.Q), "S": encode_matrix(sr.S), "R": encode_matrix(sr.R)}


def supply_from_dict(d, p=None, m=None, name="supply"):
    if d == "scattering":
        return make_scattering_supply(p, m)
    if d == "impedance":
        if p != m:
            raise ConfigError(f"{name}: impedance supply needs p = m, got p = {p}, m = {m}")
        return make_impedance_supply(m)
    if not isinstance(d, dict):
        raise ConfigError(f"{name}: expected an object with Q, S, R or a preset name")
    p = d.get("p", p)
    m = d.get("m", m)
    Q = decode_matrix(d["Q"], p, p, f"{name}.Q") if d.get("Q") is not None else np.zeros((p or 0, p or 0))
    R = decode_matrix(d["R"], m, m, f"{name}.R") if d.get("R") is not None else np.zeros((m or 0, m or 0))
    S = (decode_matrix(d["S"], Q.shape[0], R.shape[0], f"{name}.S") if d.get("S") is not None
         else np.zeros((Q.shape[0], R.shape[0])))
    try:
        return SupplyRate(Q, S, R)
    except DimensionError as exc:
        raise ConfigError(f"{name}: {exc}") from exc


def storage_to_dict(st):
    return {"n": st.n, "P": encode_matrix(st.P)}


def storage_from_dict(d, n=None, name="storage"):
    if d == "internal_passivity":
        return internal_passivity_storage(n)
    if not isinstance(d, dict) or "P" not in d:
        raise ConfigError(f"{name}: expected an object with 'P'")
    n = d.get("n", n)
    try:
        return QuadraticStorage(decode_matrix(d["P"], n, n, f"{name}.P"))
    except DimensionError as exc:
        raise ConfigError(f"{name}: {exc}") from exc


def dumps(obj):
    return json.dumps(obj, indent=2, allow_nan=True)


@dataclass
class AnalysisConfig:
    system: StateSpaceSystem
    supply: SupplyRate | None = None
    storage: QuadraticStorage | None = None
    options: dict = field(default_factory=dict)
    example: dict | None = None


OPTION_KEYS = {"tol", "dt", "T", "x0", "input"}


def parse_config(text, source="<config>"):
    """Parse and cross-check an analysis config; errors carry line or field."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{source}: top level must be an object")
    unknown = set(raw) - {"system", "example", "supply", "storage", "options"}
    if unknown:
        raise ConfigError(f"{source}: unknown top-level keys {sorted(unknown)}")
    if ("system" in raw) == ("example" in raw):
        raise ConfigError(f"{source}: exactly one of 'system' or 'example' is required")
    if "system" in raw:
        sys = system_from_dict(raw["system"])
        example = None
    else:
        example = raw["example"]
        sys = build_example_system(example)
    supply = storage = None
    if raw.get("supply") is not None:
        supply = supply_from_dict(raw["supply"], sys.p, sys.m)
        if (supply.p, supply.m) != (sys.p, sys.m):
            raise ConfigError(
                f"supply: dimensions (p, m) = ({supply.p}, {supply.m}) do not match system ({sys.p}, {sys.m})"
            )
    if raw.get("storage") is not None:
        storage = storage_from_dict(raw["storage"], sys.n)
        if storage.n != sys.n:
            raise ConfigError(f"storage: dimension {storage.n} does not match n = {sys.n}")
    options = raw.get("options", {}) or {}
    if not isinstance(options, dict):
        raise ConfigError("options: expected an object")
    bad = set(options) - OPTION_KEYS
    if bad:
        raise ConfigError(f"options: unknown keys {sorted(bad)}")
    if "x0" in options:
        options = dict(options, x0=decode_vector(options["x0"], sys.n, "options.x0"))
    return AnalysisConfig(sys, supply, storage, options, example)


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from exc
    return parse_config(text, str(path))


def _complex_param(v, name):
    if v is None:
        return None
    return _decode_entry(v, name)


def build_example_system(ex):
    from . import pde

    if not isinstance(ex, dict) or ex.get("name") not in ("transport", "heat"):
        raise ConfigError("example: expected {'name': 'transport' | 'heat', ...}")
    try:
        if ex["name"] == "transport":
            return pde.transport_system(transport_config_from_dict(ex))
        return pde.heat_system(pde.HeatConfig(int(ex.get("n", 50)), ex.get("output_weight")))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"example: {exc}") from exc


def transport_config_from_dict(ex):
    from . import pde

    return pde.TransportConfig(
        int(ex.get("n", 64)),
        _complex_param(ex.get("alpha", 0.0), "example.alpha"),
        float(ex.get("q", 1.0)),
        _complex_param(ex.get("s"), "example.s"),
        None if ex.get("r") is None else float(ex["r"]),
    )


def parse_input(obj, m, name="input"):
    """Build an input signal; ``{"feedback": "optimal"}`` is returned as the string ``"optimal"``."""
    from . import trajectories as tr

    if obj is None or obj == "zero" or (isinstance(obj, dict) and "zero" in obj):
        return tr.ZeroInput(m)
    if not isinstance(obj, dict) or len(obj) != 1:
        raise ConfigError(f"{name}: expected one of zero, constant, sine, sampled, feedback")
    (kind, val), = obj.items()
    if kind == "constant":
        return tr.ConstantInput(decode_vector(val, m, f"{name}.constant"))
    if kind == "sine":
        if not isinstance(val, dict) or "frequency" not in val:
            raise ConfigError(f"{name}.sine: needs amplitude and frequency")
        return tr.SineInput(decode_vector(val.get("amplitude", [1.0] * m), m, f"{name}.sine.amplitude"),
                            float(val["frequency"]), float(val.get("phase", 0.0)))
    if kind == "sampled":
        if not isinstance(val, dict) or "times" not in val or "values" not in val:
            raise ConfigError(f"{name}.sampled: needs times and values")
        vals = decode_matrix(val["values"], cols=m, name=f"{name}.sampled.values")
        try:
            return tr.SampledInput(np.asarray(val["times"], dtype=float), vals)
        except (DimensionError, ValueError) as exc:
            raise ConfigError(f"{name}.sampled: {exc}") from exc
    if kind == "feedback":
        if val == "optimal":
            return "optimal"
        if not isinstance(val, dict) or "F" not in val:
            raise ConfigError(f"{name}.feedback: expected 'optimal' or {{F, v}}")
        F = decode_matrix(val["F"], rows=m, name=f"{name}.feedback.F")
        return tr.FeedbackInput(F, parse_input(val.get("v"), m, f"{name}.feedback.v"))
    raise ConfigError(f"{name}: unknown input kind {kind!r}")


def trajectory_header(traj):
    sys = traj.system
    cols = ["t"]
    for prefix, k in (("x", sys.n), ("u", sys.m), ("y", sys.p)):
        for i in range(k):
            cols += [f"{prefix}_{i}re", f"{prefix}_{i}im"]
    return cols


def write_trajectory_csv(traj, fh):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(trajectory_header(traj))
    Y = traj.outputs
    for k, t in enumerate(traj.times):
        row = [repr(float(t))]
        for Z in (traj.states, traj.inputs, Y):
            for z in Z[k]:
                row += [repr(float(z.real)), repr(float(z.imag))]
        w.writerow(row)


def write_study_csv(rows, fh):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["n", "gram_norm", "form_value"])
    for r in rows:
        w.writerow([r.n, repr(r.gram_norm), repr(r.form_value)])

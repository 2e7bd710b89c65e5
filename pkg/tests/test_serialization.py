import io
import json

import numpy as np
import pytest

from dissipativity.errors import ConfigError
from dissipativity.serialization import (
    decode_matrix,
    decode_vector,
    encode_matrix,
    encode_vector,
    parse_config,
    parse_input,
    storage_from_dict,
    storage_to_dict,
    supply_from_dict,
    supply_to_dict,
    system_from_dict,
    system_to_dict,
    write_study_csv,
    write_trajectory_csv,
)
from dissipativity.pde import gramian_refinement_study
from dissipativity.systems import QuadraticStorage, StateSpaceSystem, SupplyRate
from dissipativity.trajectories import ConstantInput, FeedbackInput, SampledInput, SineInput, ZeroInput, simulate
from helpers import crandn, random_hermitian


def through_json(obj):
    return json.loads(json.dumps(obj))


class TestCodecs:
    def test_matrix_round_trip_bit_exact(self):
        rng = np.random.default_rng(0)
        M = crandn(rng, 3, 4) / 3.0
        back = decode_matrix(through_json(encode_matrix(M)))
        assert np.array_equal(back, M)

    def test_real_shorthand(self):
        assert np.array_equal(decode_matrix([[1, 2.5], [[0, 1], -3]]), [[1, 2.5], [1j, -3]])
        assert np.array_equal(decode_matrix(2.0), [[2.0]])

    def test_empty_shapes(self):
        assert decode_matrix([], cols=3).shape == (0, 3)
        assert decode_matrix([[], []]).shape == (2, 0)

    def test_vector(self):
        v = np.array([1.0, -2j, 0.1 + 0.2j])
        assert np.array_equal(decode_vector(through_json(encode_vector(v))), v)
        assert np.array_equal(decode_vector(4.0), [4.0])

    @pytest.mark.parametrize("bad", [[[1, 2], [3]], [["a"]], [[True]], [[[1, 2, 3]]], "x", [1, 2]])
    def test_malformed(self, bad):
        with pytest.raises(ConfigError):
            decode_matrix(bad, name="Q")

    def test_shape_check_names_field(self):
        with pytest.raises(ConfigError, match="system.B"):
            system_from_dict({"A": [[0, 0], [0, 0]], "B": [[1]]})


class TestModelDicts:
    def test_system(self):
        rng = np.random.default_rng(1)
        s = StateSpaceSystem(crandn(rng, 3, 3), crandn(rng, 3, 2), crandn(rng, 1, 3), crandn(rng, 1, 2))
        back = system_from_dict(through_json(system_to_dict(s)))
        for k in "ABCD":
            assert np.array_equal(getattr(back, k), getattr(s, k))

    def test_system_without_input(self):
        s = StateSpaceSystem(-np.eye(2), None, np.eye(2), None)
        back = system_from_dict(through_json(system_to_dict(s)))
        assert (back.m, back.p, back.B.shape) == (0, 2, (2, 0))

    def test_supply(self):
        rng = np.random.default_rng(2)
        sr = SupplyRate(random_hermitian(rng, 2), crandn(rng, 2, 1), random_hermitian(rng, 1))
        back = supply_from_dict(through_json(supply_to_dict(sr)))
        assert np.array_equal(back.block(), sr.block())

    def test_supply_presets(self):
        assert np.array_equal(supply_from_dict("scattering", 1, 1).block(), np.diag([-1.0, 1.0]))
        assert np.array_equal(supply_from_dict("impedance", 2, 2).S, np.eye(2))
        with pytest.raises(ConfigError):
            supply_from_dict("impedance", 1, 2)

    def test_storage(self):
        rng = np.random.default_rng(3)
        st = QuadraticStorage(random_hermitian(rng, 3))
        assert np.array_equal(storage_from_dict(through_json(storage_to_dict(st))).P, st.P)
        assert np.array_equal(storage_from_dict("internal_passivity", 2).P, -np.eye(2))


LQR = {"system": {"A": -1, "B": 1, "C": 1, "D": 0}, "supply": {"Q": 1, "S": 0, "R": 1}, "storage": {"P": 0.2}}


class TestConfig:
    def test_inline(self):
        cfg = parse_config(json.dumps(dict(LQR, options={"x0": [1.0], "T": 2})))
        assert cfg.system.n == 1 and cfg.storage.P[0, 0] == 0.2
        assert cfg.options["T"] == 2 and np.array_equal(cfg.options["x0"], [1.0])

    def test_example(self):
        cfg = parse_config(json.dumps({"example": {"name": "transport", "n": 8, "alpha": [0.3, 0.4]},
                                       "supply": {"Q": 1, "S": [[[-0.3, -0.4]]], "R": -0.75}}))
        assert cfg.system.n == 8 and cfg.system.D[0, 0] == 0.3 + 0.4j
        heat = parse_config(json.dumps({"example": {"name": "heat", "n": 12}}))
        assert (heat.system.n, heat.system.m, heat.system.p) == (12, 0, 2)

    def test_json_error_has_position(self):
        with pytest.raises(ConfigError, match=r"cfg:2:\d+"):
            parse_config('{"system":\n  {"A": [1,}', "cfg")

    @pytest.mark.parametrize("raw,field", [
        ({"supply": {"Q": 1}}, "exactly one"),
        (dict(LQR, example={"name": "heat"}), "exactly one"),
        (dict(LQR, extra=1), "unknown top-level"),
        (dict(LQR, storage={"P": [[1, 0], [0, 1]]}), "storage.P"),
        (dict(LQR, supply={"Q": [[1, 0], [0, 1]], "S": 0, "R": 1}), "supply"),
        (dict(LQR, options={"x0": [1, 2]}), "options.x0"),
        (dict(LQR, options={"speed": 3}), "options"),
        ({"example": {"name": "wave"}}, "example"),
    ])
    def test_validation(self, raw, field):
        with pytest.raises(ConfigError, match=field):
            parse_config(json.dumps(raw))


class TestInputs:
    def test_kinds(self):
        assert isinstance(parse_input(None, 1), ZeroInput)
        assert isinstance(parse_input({"constant": [1.0]}, 1), ConstantInput)
        s = parse_input({"sine": {"amplitude": [2.0], "frequency": 3.0, "phase": 0.1}}, 1)
        assert isinstance(s, SineInput) and s.frequency == 3.0
        d = parse_input({"sampled": {"times": [0, 1], "values": [[0], [1]]}}, 1)
        assert isinstance(d, SampledInput)
        f = parse_input({"feedback": {"F": [[-1.0]], "v": {"constant": [1.0]}}}, 1)
        assert isinstance(f, FeedbackInput) and isinstance(f.v, ConstantInput)
        assert parse_input({"feedback": "optimal"}, 1) == "optimal"

    def test_round_trip_through_to_dict(self):
        for sig in (ConstantInput([1 + 1j]), SineInput([2.0], 1.5, 0.3),
                    SampledInput([0.0, 1.0], [[0.0], [2.0]]), FeedbackInput([[-0.5]], ConstantInput([1.0]))):
            back = parse_input(through_json(sig.to_dict()), 1)
            for t in (0.0, 0.3, 0.7):
                assert np.allclose(back(t, np.array([1.0])), sig(t, np.array([1.0])))

    def test_errors(self):
        with pytest.raises(ConfigError):
            parse_input({"constant": [1.0, 2.0]}, 1)
        with pytest.raises(ConfigError):
            parse_input({"sawtooth": 1}, 1)
        with pytest.raises(ConfigError):
            parse_input({"sampled": {"times": [1, 0], "values": [[0], [1]]}}, 1)


class TestCsv:
    def test_trajectory(self):
        sys = StateSpaceSystem([[-1.0]], [[1.0]], [[1.0]], [[0.5]])
        tr = simulate(sys, [1.0], ConstantInput([1j]), 1.0, 0.25)
        buf = io.StringIO()
        write_trajectory_csv(tr, buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == "t,x_0re,x_0im,u_0re,u_0im,y_0re,y_0im"
        assert len(lines) == 6
        row = [float(v) for v in lines[-1].split(",")]
        assert row[0] == 1.0 and row[1] == tr.states[-1, 0].real and row[6] == tr.outputs[-1, 0].imag

    def test_study(self):
        buf = io.StringIO()
        write_study_csv(gramian_refinement_study([5, 10]), buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == "n,gram_norm,form_value" and lines[1].startswith("5,")

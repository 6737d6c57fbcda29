import json
import struct

import numpy as np
import pytest

from linboltz import io as lio
from linboltz.cross_sections import MixBounded, PolyHardSphere
from linboltz.gas_models import MixtureSpec, PolyatomicGas


def test_matrix_round_trip(tmp_path, rng):
    A = rng.normal(size=(7, 7))
    p = tmp_path / "m.pklo"
    lio.write_matrix(p, A, {"note": "x"})
    assert np.array_equal(lio.read_matrix(p), A)
    assert lio.read_sidecar(p) == {"note": "x"}
    raw = p.read_bytes()
    assert raw[:4] == b"PKLO"
    assert struct.unpack("<II", raw[4:12]) == (1, 7)
    assert len(raw) == 12 + 8 * 49


def test_matrix_rejects_non_square(tmp_path):
    with pytest.raises(ValueError):
        lio.write_matrix(tmp_path / "m", np.zeros((2, 3)))


@pytest.mark.parametrize("mutate,msg", [
    (lambda b: b"XXXX" + b[4:], "magic"),
    (lambda b: b[:4] + struct.pack("<I", 9) + b[8:], "version"),
    (lambda b: b[:-8], "expected"),
    (lambda b: b[:6], "too short"),
])
def test_matrix_corruption_detected(tmp_path, mutate, msg):
    p = tmp_path / "m.pklo"
    lio.write_matrix(p, np.eye(3))
    p.write_bytes(mutate(p.read_bytes()))
    with pytest.raises(lio.FormatError, match=msg):
        lio.read_matrix(p)


def test_missing_sidecar_is_empty(tmp_path):
    p = tmp_path / "m.pklo"
    lio.write_matrix(p, np.eye(2))
    assert lio.read_sidecar(p) == {}


def test_model_round_trip_and_hash():
    gas = PolyatomicGas(1.0, (0.0, 1.0), (1.0, 2.0))
    d = lio.model_to_dict(gas, PolyHardSphere(1.0))
    spec, model = lio.model_from_dict(d)
    assert spec == gas and model == PolyHardSphere(1.0)
    h = lio.model_hash(gas, PolyHardSphere(1.0))
    assert h == lio.model_hash(*lio.model_from_dict(json.loads(json.dumps(d))))
    assert h != lio.model_hash(gas, PolyHardSphere(2.0))
    mix = MixtureSpec((1.0, 2.0), (1.0, 0.5))
    spec, model = lio.model_from_dict(lio.model_to_dict(mix, MixBounded(1.0, 0.3)))
    assert spec == mix and model == MixBounded(1.0, 0.3)


def test_model_defaults_to_hard_sphere():
    spec, model = lio.model_from_dict({"kind": "polyatomic", "m": 1, "I": [0], "phi": [1]})
    assert model == PolyHardSphere(1.0)


@pytest.mark.parametrize("d", [
    {"kind": "gas"},
    {"kind": "polyatomic", "m": 1.0, "I": [0.0]},
    {"kind": "mixture", "m": [1.0], "n": [1.0],
     "cross_section": {"variant": "PolyHardSphere"}},
])
def test_model_errors(d):
    with pytest.raises(lio.FormatError):
        lio.model_from_dict(d)


def test_load_model_bad_json(tmp_path):
    p = tmp_path / "m.json"
    p.write_text("{not json")
    with pytest.raises(lio.FormatError):
        lio.load_model(p)


def test_nu_csv_round_trip(tmp_path):
    x = np.linspace(0, 10, 5)
    nu = 3.0 + x
    p = tmp_path / "nu.csv"
    lio.write_nu_csv(p, x, nu)
    assert p.read_text().splitlines()[0] == "xi_norm,nu,nu_over_1plus"
    x2, nu2 = lio.read_nu_csv(p)
    assert np.array_equal(x2, x) and np.array_equal(nu2, nu)
    p.write_text("a,b\n1,2\n")
    with pytest.raises(lio.FormatError):
        lio.read_nu_csv(p)

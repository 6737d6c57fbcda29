import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from linboltz import io as lio
from linboltz.cli import main
from linboltz.cross_sections import PolyHardSphere
from linboltz.gas_models import PolyatomicGas
from linboltz.kernels import k_poly


def write_json(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


@pytest.fixture
def mono_model(tmp_path):
    return write_json(tmp_path / "mono.json", {"kind": "polyatomic", "m": 1.0, "I": [0.0],
                                               "phi": [1.0]})


@pytest.fixture
def poly_model(tmp_path):
    return write_json(tmp_path / "poly.json", {
        "kind": "polyatomic", "m": 1.0, "I": [0.0, 1.0], "phi": [1.0, 1.0],
        "cross_section": {"variant": "PolyHardSphere", "C": 1.0}})


@pytest.fixture
def mix_model(tmp_path):
    return write_json(tmp_path / "mix.json", {
        "kind": "mixture", "m": [1.0, 2.0], "n": [1.0, 1.0],
        "cross_section": {"variant": "MixHardSphere", "C": 1.0}})


def test_assemble_writes_matrix_and_sidecar(tmp_path, mono_model, capsys):
    out = tmp_path / "run"
    assert main(["assemble", "--model", mono_model, "--N", "4", "--R", "3", "--out",
                 str(out)]) == 0
    path = out / "operator.pklo"
    L = lio.read_matrix(path)
    assert L.shape == (64, 64)
    meta = lio.read_sidecar(path)
    spec, model = lio.load_model(mono_model)
    assert meta["model_hash"] == lio.model_hash(spec, model)
    assert meta["rows"] == 64 and meta["n_components"] == 1
    first = path.read_bytes()
    assert main(["assemble", "--model", mono_model, "--N", "4", "--R", "3", "--out",
                 str(out)]) == 0
    assert path.read_bytes() == first
    assert "64x64" in capsys.readouterr().out


def test_assemble_rejects_odd_N(tmp_path, mono_model, capsys):
    assert main(["assemble", "--model", mono_model, "--N", "5", "--out", str(tmp_path)]) == 2
    assert "N must be" in capsys.readouterr().err


def test_assemble_size_cap(tmp_path, poly_model, capsys):
    code = main(["assemble", "--model", poly_model, "--N", "8", "--size-cap", "100", "--out",
                 str(tmp_path)])
    assert code == 2
    assert "size cap" in capsys.readouterr().err


def test_assemble_requires_model(tmp_path, capsys):
    assert main(["assemble", "--out", str(tmp_path)]) == 2


def test_spectrum_on_synthetic_matrix(tmp_path, capsys):
    path = tmp_path / "diag.pklo"
    lio.write_matrix(path, 2.0 * np.diag([3.0, 1.0, 2.0, 5.0]))
    assert main(["spectrum", str(path), "--k", "3", "--out", str(tmp_path)]) == 0
    rows = list(csv.reader(open(tmp_path / "eigenvalues.csv")))
    assert [float(r[1]) for r in rows[1:]] == [2.0, 4.0, 6.0]
    rep = json.loads((tmp_path / "spectrum.json").read_text())
    assert rep["lambda_min"] == 2.0 and rep["lambda_max"] == 10.0 and rep["k"] == 3


def test_spectrum_clamps_k(tmp_path, capsys):
    path = tmp_path / "eye.pklo"
    lio.write_matrix(path, np.eye(3))
    assert main(["spectrum", str(path), "--k", "10", "--out", str(tmp_path)]) == 0
    assert "exceeds the dimension" in capsys.readouterr().err
    assert len((tmp_path / "eigenvalues.csv").read_text().splitlines()) == 4


def test_spectrum_rejects_corrupt_file(tmp_path, capsys):
    path = tmp_path / "bad.pklo"
    path.write_bytes(b"NOPE" + bytes(20))
    assert main(["spectrum", str(path), "--out", str(tmp_path)]) == 2
    assert "magic" in capsys.readouterr().err


def test_spectrum_of_assembled_monatomic_operator(tmp_path, mono_model, capsys):
    out = tmp_path / "run"
    assert main(["assemble", "--model", mono_model, "--N", "8", "--R", "5", "--out",
                 str(out)]) == 0
    main(["spectrum", str(out / "operator.pklo"), "--k", "8", "--out", str(out)])
    ev = np.loadtxt(out / "eigenvalues.csv", delimiter=",", skiprows=1)[:, 1]
    mag = np.sort(np.abs(ev))
    assert mag[4] < 0.1 * mag[5]
    rep = json.loads((out / "spectrum.json").read_text())
    assert rep["nullspace"]["expected"] == 5


def test_nu_profiles(tmp_path, mix_model, capsys):
    assert main(["nu", "--model", mix_model, "--samples", "50", "--out", str(tmp_path)]) == 0
    for c in (0, 1):
        lines = (tmp_path / f"nu_{c}.csv").read_text().splitlines()
        assert lines[0] == "xi_norm,nu,nu_over_1plus" and len(lines) == 51
        x, nu = lio.read_nu_csv(tmp_path / f"nu_{c}.csv")
        assert np.all(np.diff(nu) >= 0)
    assert "c_minus=" in capsys.readouterr().out


def test_nu_component_out_of_range(tmp_path, poly_model):
    assert main(["nu", "--model", poly_model, "--component", "5", "--out",
                 str(tmp_path)]) == 2


def test_rho_command(capsys):
    assert main(["rho", "--m-alpha", "4", "--m-beta", "1", "--n", "20000"]) == 0
    out = capsys.readouterr().out
    assert "rho=0.1111111111111111" in out and "violations=0" in out
    assert main(["rho", "--m-alpha", "1", "--m-beta", "1", "--n", "10"]) == 2


def test_kernel_eval_single(poly_model, capsys):
    assert main(["kernel", "eval", "--model", poly_model, "--part", "k", "--i", "0", "--j",
                 "1", "--xi", "0.1,0.2,0.3", "--xi-star=-0.4,0.5,0.0"]) == 0
    got = float(capsys.readouterr().out.strip())
    gas = PolyatomicGas(1.0, (0.0, 1.0), (1.0, 1.0))
    assert got == k_poly(gas, PolyHardSphere(1.0), 0, 1, [0.1, 0.2, 0.3], [-0.4, 0.5, 0.0])


def test_kernel_eval_batch(tmp_path, mix_model):
    src = tmp_path / "pairs.csv"
    src.write_text("i,j,xi_x,xi_y,xi_z,xs_x,xs_y,xs_z\n0,1,0.1,0,0,0,0.5,0\n1,1,1,1,0,0,0,1\n")
    dest = tmp_path / "vals.csv"
    assert main(["kernel", "eval", "--model", mix_model, "--part", "gain", "--batch", str(src),
                 "--output", str(dest)]) == 0
    rows = list(csv.DictReader(open(dest)))
    assert len(rows) == 2 and all(float(r["gain"]) > 0 for r in rows)


def test_kernel_eval_errors(tmp_path, poly_model, capsys):
    base = ["kernel", "eval", "--model", poly_model]
    assert main(base + ["--part", "gain", "--i", "0", "--j", "0", "--xi", "0,0,0",
                        "--xi-star", "1,0,0"]) == 2
    assert main(base + ["--i", "0", "--j", "0", "--xi", "0,0", "--xi-star", "1,0,0"]) == 2
    assert main(base + ["--i", "0", "--j", "0", "--xi", "1,0,0", "--xi-star", "1,0,0"]) == 2
    assert main(base + ["--i", "0"]) == 2
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n")
    assert main(base + ["--batch", str(bad)]) == 2


def verify_args(tmp_path, out, *extra):
    return ["verify", "--suites", "kernels,nu,rho", "--rho-samples", "2000", "--seed", "5",
            "--out", str(out), *extra]


def test_verify_deterministic(tmp_path, capsys):
    assert main(verify_args(tmp_path, tmp_path / "a")) == 0
    assert main(verify_args(tmp_path, tmp_path / "b")) == 0
    a = (tmp_path / "a" / "report.json").read_bytes()
    assert a == (tmp_path / "b" / "report.json").read_bytes()
    assert json.loads(a)["seed"] == 5
    assert (tmp_path / "a" / "timings.json").exists()
    assert "checks passed" in capsys.readouterr().out


def test_verify_fails_on_corrupted_cross_section(tmp_path, capsys):
    model = write_json(tmp_path / "skew.json", {
        "kind": "polyatomic", "m": 1.0, "I": [0.0, 1.0], "phi": [1.0, 1.0],
        "cross_section": {"variant": "PolyHardSphere", "C": 1.0, "skew": 0.2}})
    assert main(verify_args(tmp_path, tmp_path / "o", "--model", model)) == 1
    assert "FAIL kernel_symmetry_poly" in capsys.readouterr().out


def test_verify_config_file(tmp_path):
    cfg = write_json(tmp_path / "cfg.json", {"suites": ["rho"], "rho_samples": 1000,
                                             "seed": 3, "out": str(tmp_path / "o")})
    assert main(["verify", "--config", cfg]) == 0
    rep = json.loads((tmp_path / "o" / "report.json").read_text())
    assert rep["seed"] == 3 and [c["name"] for c in rep["checks"]] == ["rho_lemma"]


@pytest.mark.parametrize("cfg", [{"nonsense": 1}, {"N": 7}, {"seed": -1},
                                 {"suites": ["nope"]}, {"kernel_rules": {"sphere_order": 0}}])
def test_verify_config_errors(tmp_path, cfg, capsys):
    path = write_json(tmp_path / "cfg.json", cfg)
    assert main(["verify", "--config", path, "--out", str(tmp_path)]) == 2


def test_backend_flag(tmp_path, capsys):
    assert main(["--backend", "numpy", "rho", "--m-alpha", "2", "--m-beta", "1", "--n",
                 "100"]) == 0


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "linboltz", "--version"], capture_output=True,
                         text=True, check=True)
    assert out.stdout.strip()

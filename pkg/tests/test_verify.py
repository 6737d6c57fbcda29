import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from linboltz import verify as vf
from linboltz.cross_sections import CrossSectionModel
from linboltz.gas_models import PolyatomicGas
from linboltz.operator import nu_poly

mass = st.floats(0.05, 50.0)


def rho_closed_form(ma, mb):
    """``1 - 2 / (1 + sqrt(1 + (m_a - m_b)^2 / (4 m_a m_b)))``."""
    return 1.0 - 2.0 / (1.0 + math.sqrt(1.0 + (ma - mb) ** 2 / (4.0 * ma * mb)))


@given(mass, mass)
def test_rho_matches_closed_form(ma, mb):
    rho = vf.rho_formula(ma, mb).rho
    assert rho == pytest.approx(rho_closed_form(ma, mb), rel=1e-9, abs=1e-15)
    assert 0.0 <= rho < 1.0
    assert rho == pytest.approx(vf.rho_formula(mb, ma).rho, rel=1e-12, abs=0)


def test_rho_special_values():
    assert vf.rho_formula(4.0, 1.0).rho == 1.0 / 9.0
    assert vf.rho_formula(3.0, 3.0).rho == 0.0
    with pytest.raises(ValueError):
        vf.rho_formula(0.0, 1.0)


@pytest.mark.parametrize("ma,mb", [(4.0, 1.0), (2.0, 1.0), (10.0, 3.0)])
def test_rho_sample_check_no_violations(ma, mb):
    res = vf.rho_sample_check(ma, mb, 50_000, seed=3, chunk=20_000)
    assert res.n_samples == 50_000
    assert res.violations == 0
    assert res.max_energy_residual <= 1e-12
    assert res.rho <= res.min_ratio < res.rho + 1e-4


def test_rho_sample_check_validation():
    with pytest.raises(ValueError):
        vf.rho_sample_check(1.0, 1.0, 10)
    with pytest.raises(ValueError):
        vf.rho_sample_check(2.0, 1.0, 0)


vec = st.tuples(*[st.floats(-5, 5, allow_nan=False)] * 3).map(np.array)


@given(ma=mass, mb=mass, q=st.floats(0, 10), r=st.floats(-10, 10), w=vec, wt=vec,
       eta=vec.filter(lambda v: np.linalg.norm(v) > 1e-2))
def test_parametrization_energy_identity(ma, mb, q, r, w, wt, eta):
    eta = (eta / np.linalg.norm(eta))[None]
    w = w[None] - np.dot(w, eta[0]) * eta
    wt = wt[None] - np.dot(wt, eta[0]) * eta
    xi, xs, xi_p, xs_p = vf.collision_parametrization(ma, mb, eta, np.array([q]), np.array([r]),
                                                      w, wt)
    lhs = ma * xi @ xi.T + mb * xi_p @ xi_p.T
    rhs = ma * xs_p @ xs_p.T + mb * xs @ xs.T
    assert lhs[0, 0] == pytest.approx(rhs[0, 0], rel=1e-11, abs=1e-9)


def test_zero_transfer_gives_unit_ratio():
    eta = np.array([[0.0, 0.0, 1.0]])
    w = np.array([[0.3, 0.1, 0.0]])
    xi, xs, xi_p, xs_p = vf.collision_parametrization(2.0, 1.0, eta, np.array([0.0]),
                                                      np.array([0.7]), w, w)
    num = 1.0 * xi_p @ xi_p.T + 2.0 * xs_p @ xs_p.T
    den = 2.0 * xi @ xi.T + 1.0 * xs @ xs.T
    assert num[0, 0] / den[0, 0] == pytest.approx(1.0, rel=1e-15)


def test_nullspace_analysis_on_synthetic_operator(rng):
    n, k = 40, 3
    Q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    lam = np.concatenate([[1e-6, -2e-6, 3e-6], np.linspace(5.0, 50.0, n - k)])
    L = (Q * lam) @ Q.T
    L = 0.5 * (L + L.T)
    res = vf.nullspace_analysis(L, Q[:, :k].T, names=("a", "b", "c"), seed=1)
    assert res.count_below == 3 and res.expected == 3
    assert res.gap_ratio >= 10 and res.passed
    assert res.random_residual >= 100 * max(res.residuals)
    assert res.lambda_min == pytest.approx(-2e-6, abs=1e-10)


def test_nullspace_analysis_detects_missing_mode(rng):
    n = 30
    Q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    lam = np.concatenate([[1e-6], np.linspace(1.0, 2.0, n - 1)])
    L = (Q * lam) @ Q.T
    res = vf.nullspace_analysis(L, Q[:, :2].T)
    assert not res.passed


def test_spectrum_ascending():
    L = np.diag([3.0, 1.0, 2.0])
    assert np.array_equal(vf.spectrum(L), [1.0, 2.0, 3.0])


def test_ball_sample_deterministic_and_inside():
    a = vf.ball_sample(64, 4.0)
    assert a.shape == (64, 3)
    assert np.all(np.linalg.norm(a, axis=1) <= 4.0 + 1e-12)
    assert np.array_equal(a, vf.ball_sample(64, 4.0))


def test_nu_envelope_hard_sphere(gas2, poly_hs):
    x = np.linspace(0.0, 10.0, 50)
    env = vf.nu_envelope(x, nu_poly(gas2, poly_hs, 0, x))
    assert env.passed and env.monotone and env.c_minus > 0


def test_nu_envelope_flags_bad_profile():
    x = np.linspace(0.0, 10.0, 50)
    env = vf.nu_envelope(x, 1.0 + x**2)
    assert not env.passed


def test_fit_envelope_negative_control():
    sampler = vf._gauss_sampler(1.0)

    def kernel(xa, xb):
        return np.exp(np.linalg.norm(xa - xb, axis=1))

    def envelope(xa, xb):
        return np.ones(len(xa))

    res = vf.fit_envelope("grows", kernel, envelope, sampler, n_fit=50, n_check=5000)
    assert not res.passed and res.worst_ratio > 1
    ok = vf.fit_envelope("bounded", lambda a, b: np.exp(-np.sum(a * a, axis=1)), envelope,
                         sampler, n_fit=200, n_check=2000)
    assert ok.passed and ok.C_fit == pytest.approx(2.0, rel=0.05)


def test_kernel_symmetry_detects_skew(gas2):
    good = vf.kernel_symmetry_poly(gas2, CrossSectionModel("PolyHardSphere"), 20, 0)
    bad = vf.kernel_symmetry_poly(gas2, CrossSectionModel("PolyHardSphere", skew=0.3), 20, 0)
    assert max(good.values()) <= 1e-12
    assert max(bad.values()) > 1e-3


def test_truncation_decay_small(gas2, poly_hs):
    S = vf.test_truncation_decay(gas2, poly_hs, N_list=(2, 4), n_xi=8)
    assert len(S) == 2 and S[1] < S[0]
    with pytest.raises(ValueError):
        vf.test_truncation_decay(gas2, poly_hs, N_list=(4, 2))


def test_report_round_trip():
    rep = vf.VerificationReport(vf.SCHEMA_VERSION, 7, {"N": 8})
    rep.add(vf.CheckResult("a", {"x": 1.0}, {"x": 2.0}, True, "1"), seconds=0.5)
    rep.add(vf.CheckResult("b", {"y": [1.0, 2.0]}, {}, False))
    with pytest.raises(ValueError):
        rep.add(vf.CheckResult("a", {}, {}, True))
    text = rep.to_json()
    assert "0.5" not in text  # timings stay out of the report
    back = vf.VerificationReport.from_json(text)
    assert back.to_json() == text
    assert not back.passed and back.get("b").measured == {"y": [1.0, 2.0]}
    assert "FAIL b" in rep.summary() and "1/2 checks passed" in rep.summary()
    bad = json.loads(text)
    bad["schema_version"] = 99
    with pytest.raises(ValueError):
        vf.VerificationReport.from_json(json.dumps(bad))


def test_jsonable_handles_numpy_and_nonfinite():
    out = vf._jsonable({"a": np.float64(1.5), "b": np.int32(2), "c": np.array([1, 2]),
                        "d": math.inf, "e": np.bool_(True)})
    assert out == {"a": 1.5, "b": 2, "c": [1, 2], "d": "inf", "e": True}
    json.dumps(out)


def cheap_config(**kw):
    base = dict(suites=("kernels", "nu", "rho"), rho_samples=2000, seed=11)
    base.update(kw)
    return vf.SuiteConfig(**base)


def test_run_suite_is_deterministic():
    a = vf.run_suite(cheap_config())
    b = vf.run_suite(cheap_config())
    assert a.to_json() == b.to_json()
    assert a.passed
    names = [c.name for c in a.checks]
    assert "kernel_symmetry_poly" in names and "rho_lemma" in names


def test_run_suite_names_corrupted_symmetry():
    cfg = cheap_config(suites=("kernels",),
                       poly_model=CrossSectionModel("PolyHardSphere", skew=0.2))
    rep = vf.run_suite(cfg)
    assert not rep.passed
    failed = [c.name for c in rep.checks if not c.passed]
    assert "kernel_symmetry_poly" in failed
    assert "FAIL kernel_symmetry_poly" in rep.summary()


def test_run_suite_rejects_unknown_suite():
    with pytest.raises(ValueError):
        vf.run_suite(cheap_config(suites=("kernels", "magic")))


def test_stream_seeds_differ_by_name():
    assert vf._stream(0, "a") != vf._stream(0, "b")
    assert vf._stream(0, "a") == vf._stream(0, "a")
    assert vf._stream(0, "a") != vf._stream(1, "a")


def test_random_fields_positive(gas2, rng):
    x = rng.normal(size=(50, 3)) * 3
    assert np.all(vf.random_positive_field(gas2, rng).values(x) > 0)
    assert np.all(vf.perturbed_maxwellian(gas2, rng).values(x) > 0)


def test_isotropic_bump_rejected_if_shifted(gas2, poly_hs):
    from linboltz.gas_models import DistributionField
    from linboltz.operator import assemble_poly
    from linboltz.quadrature import build_grid
    op = assemble_poly(gas2, poly_hs, build_grid(2, 2.0))
    h = DistributionField.gaussian(2, [0], 1.0, 0.5, center=(0.1, 0.0, 0.0))
    with pytest.raises(ValueError):
        vf.oracle_equivalence_poly(op, gas2, poly_hs, h)
    assert vf.isotropic_bump(2).n_terms == 2

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from linboltz import _backend
from linboltz import kernels as kn
from linboltz.cross_sections import MixHardSphere, PolyBounded, PolyHardSphere, post_speed
from linboltz.gas_models import MixtureSpec, PolyatomicGas, maxwellian_mix, maxwellian_poly
from linboltz.quadrature import sphere_rule

coord = st.floats(-3, 3, allow_nan=False)
vec = st.tuples(coord, coord, coord).map(np.array)


def distinct_pair(a, b):
    return np.linalg.norm(a - b) > 1e-2


def hs_loss_poly(gas, C, i, j, xi, xs):
    """``(M_i M_j*)^{1/2} 4 pi C sum_kl |g'|_kl / (phi_i phi_j)`` over open channels."""
    g = np.linalg.norm(xi - xs)
    total = 0.0
    for k in range(gas.r):
        for l in range(gas.r):
            total += float(post_speed(gas, gas.energy_defect(i, j, k, l), g))
    pref = np.sqrt(maxwellian_poly(gas, i, xi[None])[0] * maxwellian_poly(gas, j, xs[None])[0])
    return pref * 4 * np.pi * C * total / (gas.phi[i] * gas.phi[j])


def monatomic_gain(m, C, xi, xs):
    """Hard-sphere gain kernel ``8 C / |g| (m / 2 pi)^{3/2} (2 pi / m) exp(...)``."""
    g = xi - xs
    n = g / np.linalg.norm(g)
    s = 0.5 * (xi + xs)
    u = s - np.dot(s, n) * n
    return (8 * C / np.linalg.norm(g) * (m / (2 * np.pi)) ** 1.5 * (2 * np.pi / m)
            * np.exp(-0.25 * m * (xi @ xi + xs @ xs - 2 * u @ u)))


@given(vec, vec)
def test_k1_hard_sphere_closed_form(xi, xs):
    if not distinct_pair(xi, xs):
        return
    gas = PolyatomicGas(1.0, (0.0, 1.0), (1.0, 2.0))
    for i in range(2):
        for j in range(2):
            got = kn.k1_poly(gas, PolyHardSphere(1.5), i, j, xi, xs)
            assert got == pytest.approx(hs_loss_poly(gas, 1.5, i, j, xi, xs), rel=1e-12)


@given(vec, vec)
def test_monatomic_gain_closed_form(xi, xs):
    if not distinct_pair(xi, xs):
        return
    gas = PolyatomicGas(1.0, (0.0,), (1.0,))
    got = kn.k2_poly(gas, PolyHardSphere(1.0), 0, 0, xi, xs)
    assert got == pytest.approx(monatomic_gain(1.0, 1.0, xi, xs), rel=1e-9, abs=1e-14)


@given(vec, vec)
def test_mixture_loss_closed_form(xi, xs):
    if not distinct_pair(xi, xs):
        return
    mix = MixtureSpec((1.0, 2.0), (1.0, 0.5))
    g = np.linalg.norm(xi - xs)
    for a in range(2):
        for b in range(2):
            pref = np.sqrt(maxwellian_mix(mix, a, xi[None])[0] * maxwellian_mix(mix, b, xs[None])[0])
            got = kn.k_mix_loss(mix, MixHardSphere(2.0), a, b, xi, xs)
            assert got == pytest.approx(pref * g * 4 * np.pi * 2.0, rel=1e-12)


def test_single_species_mixture_matches_monatomic_gas(rng):
    gas = PolyatomicGas(1.0, (0.0,), (1.0,))
    mix = MixtureSpec((1.0,), (1.0,))
    xa, xb = rng.normal(size=(2, 20, 3))
    kp = kn.poly_kernel(gas, PolyHardSphere(1.0), xa, xb)
    km = kn.mix_kernel(mix, MixHardSphere(1.0), xa, xb)
    assert np.allclose(kp, km, rtol=1e-12)


def test_compose_mix():
    rng = np.random.default_rng(0)
    loss, same, gain = rng.normal(size=(3, 4, 2, 2))
    k = kn.compose_mix(loss, same, gain)
    assert np.allclose(k[:, 0, 1], gain[:, 0, 1] - loss[:, 0, 1])
    assert np.allclose(k[:, 1, 1], gain[:, 1, 1] - loss[:, 1, 1] + same[:, 1, 0] + same[:, 1, 1])


@pytest.mark.parametrize("model", [PolyHardSphere(1.0), PolyBounded(1.0, 0.5)])
def test_poly_swap_symmetry(gas2, model, rng):
    xa, xb = rng.normal(size=(2, 50, 3)) * 1.5
    k1, k2 = kn.poly_kernel_table(gas2, model, xa, xb)
    s1, s2 = kn.poly_kernel_table(gas2, model, xb, xa)
    assert np.allclose(k1, np.swapaxes(s1, 1, 2), rtol=1e-13, atol=0)
    assert np.allclose(k2, np.swapaxes(s2, 1, 2), rtol=1e-12, atol=1e-300)


def test_mix_swap_symmetry(mix41, mix_hs, rng):
    xa, xb = rng.normal(size=(2, 50, 3))
    k = kn.mix_kernel(mix41, mix_hs, xa, xb)
    kt = kn.mix_kernel(mix41, mix_hs, xb, xa)
    assert np.allclose(k, np.swapaxes(kt, 1, 2), rtol=1e-12, atol=1e-300)


def test_octahedral_invariance(gas2, poly_hs, rng):
    xa, xb = rng.normal(size=(2, 10, 3))
    base = kn.poly_kernel(gas2, poly_hs, xa, xb)
    for perm, sg in [((1, 0, 2), (1, 1, 1)), ((2, 0, 1), (-1, 1, -1)), ((0, 1, 2), (1, 1, -1))]:
        got = kn.poly_kernel(gas2, poly_hs, xa[:, perm] * sg, xb[:, perm] * sg)
        assert np.allclose(got, base, rtol=1e-12)


def test_coincident_velocities_rejected(gas2, poly_hs, mix12, mix_hs):
    x = np.array([0.1, 0.2, 0.3])
    with pytest.raises(ValueError, match="coincident"):
        kn.k_poly(gas2, poly_hs, 0, 0, x, x)
    with pytest.raises(ValueError, match="coincident"):
        kn.mix_kernel(mix12, mix_hs, x[None], x[None])


def test_model_family_checked(gas2, mix12, poly_hs, mix_hs):
    x, y = np.zeros(3), np.ones(3)
    with pytest.raises(ValueError):
        kn.k_poly(gas2, mix_hs, 0, 0, x, y)
    with pytest.raises(ValueError):
        kn.k_mix(mix12, poly_hs, 0, 0, x, y)
    with pytest.raises(IndexError):
        kn.k_poly(gas2, poly_hs, 2, 0, x, y)


def test_k_poly_is_gain_minus_loss(gas2, poly_hs):
    x, y = np.array([0.4, -0.3, 1.0]), np.array([-0.5, 0.6, 0.1])
    full = kn.k_poly(gas2, poly_hs, 1, 0, x, y)
    assert full == pytest.approx(kn.k2_poly(gas2, poly_hs, 1, 0, x, y)
                                 - kn.k1_poly(gas2, poly_hs, 1, 0, x, y), rel=1e-12)


@pytest.mark.parametrize("kind", ["poly", "mix"])
def test_backends_agree(kind, gas2, poly_bounded, mix41, mix_hs, rng):
    if not _backend.HAVE_NUMBA:
        pytest.skip("numba not installed")
    xa, xb = rng.normal(size=(2, 30, 3))
    if kind == "poly":
        fn = lambda: np.stack(kn.poly_kernel_table(gas2, poly_bounded, xa, xb))  # noqa: E731
    else:
        fn = lambda: np.stack(kn.mix_kernel_table(mix41, mix_hs, xa, xb))  # noqa: E731
    with _backend.use_backend("numba"):
        a = fn()
    with _backend.use_backend("numpy"):
        b = fn()
    assert np.allclose(a, b, rtol=1e-11, atol=1e-300)


@given(vec, vec)
def test_gain_nodes_respect_energy_ratio(xi, xs):
    if not distinct_pair(xi, xs):
        return
    mix = MixtureSpec((4.0, 1.0), (1.0, 1.0))
    kn.assert_gain_nodes_lemma(mix, 0, 1, xi, xs)
    kn.assert_gain_nodes_lemma(mix, 1, 0, xi, xs)


def test_gain_post_velocities_conserve_momentum_and_energy():
    mix = MixtureSpec((4.0, 1.0), (1.0, 1.0))
    xi, xs = np.array([0.5, -0.2, 0.3]), np.array([-1.0, 0.4, 0.8])
    om, xp, xsp = kn.gain_post_velocities(mix, 0, 1, xi, xs, order=6)
    assert np.allclose(np.linalg.norm(om, axis=1), 1.0)
    # the parametrization keeps m_a xi*' - m_b xi' and m_a |xi*'|^2 - m_b |xi'|^2 fixed
    ma, mb = 4.0, 1.0
    assert np.allclose(ma * xsp - mb * xp, ma * xi - mb * xs, atol=1e-12)
    e = ma * np.sum(xsp**2, axis=1) - mb * np.sum(xp**2, axis=1)
    assert np.allclose(e, ma * xi @ xi - mb * xs @ xs, rtol=1e-12)
    with pytest.raises(ValueError):
        kn.gain_post_velocities(MixtureSpec((1.0, 1.0), (1.0, 1.0)), 0, 1, xi, xs)


def test_debug_mode_runs_lemma_assertion(monkeypatch, mix41, mix_hs):
    monkeypatch.setenv(_backend.DEBUG_ENV, "1")
    v = kn.k_mix_gain(mix41, mix_hs, 0, 1, [0.5, 0.1, 0.0], [-0.3, 0.2, 0.4])
    assert v > 0


def test_gain_converges_in_sphere_order(mix41, mix_hs):
    x, y = np.array([0.7, -0.1, 0.2]), np.array([-0.4, 0.5, 0.3])
    lo = kn.k_mix_gain(mix41, mix_hs, 0, 1, x, y, sphere=sphere_rule(12))
    hi = kn.k_mix_gain(mix41, mix_hs, 0, 1, x, y, sphere=sphere_rule(24))
    assert lo == pytest.approx(hi, rel=1e-8)


def test_rules_validation_and_dict():
    rules = kn.make_rules(sphere_order=4, n_radial=8, n_angular=4)
    d = rules.to_dict()
    assert d["sphere_order"] == 4 and d["plane_radial"] == 8 and d["gain_order"] == 12
    with pytest.raises(ValueError):
        kn.make_rules(gain_order=0)

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from linboltz.gas_models import (DistributionField, MixtureSpec, PolyatomicGas,
                                 general_maxwellian_poly, invariants_mix, invariants_poly,
                                 linearized_kernel_basis_mix, linearized_kernel_basis_poly,
                                 maxwellian_field_mix, maxwellian_field_poly, maxwellian_mix,
                                 maxwellian_poly, sqrt_maxwellian_field_poly)
from linboltz.quadrature import gauss_hermite_3d


@pytest.mark.parametrize("kwargs", [
    dict(m=0.0, I=(0.0,), phi=(1.0,)),
    dict(m=1.0, I=(0.0, 1.0), phi=(1.0,)),
    dict(m=1.0, I=(-1.0,), phi=(1.0,)),
    dict(m=1.0, I=(0.0,), phi=(0.0,)),
    dict(m=1.0, I=(), phi=()),
])
def test_polyatomic_gas_validation(kwargs):
    with pytest.raises(ValueError):
        PolyatomicGas(**kwargs)


@pytest.mark.parametrize("masses,dens", [((1.0,), (1.0, 2.0)), ((0.0,), (1.0,)),
                                         ((1.0,), (-1.0,)), ((), ())])
def test_mixture_validation(masses, dens):
    with pytest.raises(ValueError):
        MixtureSpec(masses, dens)


def test_energy_defect_and_reduced_mass(gas2):
    assert gas2.energy_defect(0, 0, 1, 1) == 2.0
    assert gas2.energy_defect(1, 0, 0, 0) == -1.0
    mix = MixtureSpec((1.0, 3.0), (1.0, 1.0))
    assert mix.reduced_mass(0, 1) == 0.75


def test_maxwellian_normalization(gas2):
    pts, w = gauss_hermite_3d(4, 1.0 / np.sqrt(0.5 * gas2.m))
    for i in range(gas2.r):
        mass = np.dot(w, maxwellian_poly(gas2, i, pts))
        assert mass == pytest.approx(gas2.phi[i] * np.exp(-gas2.I[i]), rel=1e-12)


def test_mixture_maxwellian_normalization(mix41):
    for a in range(mix41.s):
        pts, w = gauss_hermite_3d(4, 1.0 / np.sqrt(0.5 * mix41.masses[a]))
        assert np.dot(w, maxwellian_mix(mix41, a, pts)) == pytest.approx(mix41.densities[a],
                                                                          rel=1e-12)


def test_maxwellian_index_checks(gas2):
    with pytest.raises(IndexError):
        maxwellian_poly(gas2, 2, np.zeros(3))
    with pytest.raises(TypeError):
        maxwellian_poly(gas2, 0.5, np.zeros(3))


def test_maxwellian_fields_match_functions(gas2, mix12, rng):
    x = rng.normal(size=(10, 3))
    M = maxwellian_field_poly(gas2).values(x)
    for i in range(gas2.r):
        assert np.allclose(M[i], maxwellian_poly(gas2, i, x), rtol=1e-14)
    Mm = maxwellian_field_mix(mix12).values(x)
    for a in range(mix12.s):
        assert np.allclose(Mm[a], maxwellian_mix(mix12, a, x), rtol=1e-14)
    S = sqrt_maxwellian_field_poly(gas2).values(x)
    assert np.allclose(S**2, M, rtol=1e-13)


def test_general_maxwellian_moments(gas2):
    f = general_maxwellian_poly(gas2, n=1.7, u=(0.3, -0.2, 0.1), T=1.3)
    pts, w = gauss_hermite_3d(6, np.sqrt(2 * 1.3 / gas2.m), center=(0.3, -0.2, 0.1))
    vals = f.values(pts)
    assert np.sum(vals @ w) == pytest.approx(1.7, rel=1e-12)
    momentum = np.sum(vals, axis=0) @ (w[:, None] * pts) / 1.7
    assert np.allclose(momentum, [0.3, -0.2, 0.1], atol=1e-12)
    with pytest.raises(ValueError):
        general_maxwellian_poly(gas2, n=-1.0)


coef = st.floats(-2, 2, allow_nan=False)


@given(a=st.tuples(coef, coef), alpha=st.floats(0.1, 2.0), beta=st.floats(0.0, 1.0),
       sc=st.floats(0.1, 3.0), shift=st.floats(-1, 1))
def test_field_algebra_pointwise(a, alpha, beta, sc, shift):
    x = np.array([[0.1, 0.2, -0.3], [1.0, -0.5, 0.7], [0.0, 0.0, 0.0]])
    f = DistributionField.gaussian(2, [0, 1], list(a), alpha, center=(shift, 0.0, 0.2),
                                   p1=(0.5, 0.0, -1.0), p2=0.3)
    g = DistributionField.gaussian(2, [1], 0.7, 0.4)
    assert np.allclose((f + g).values(x), f.values(x) + g.values(x), atol=1e-14)
    assert np.allclose((2.5 * f - g).values(x), 2.5 * f.values(x) - g.values(x), atol=1e-14)
    prod = f.times_gaussian(sc, beta).values(x)
    expect = f.values(x) * sc * np.exp(-beta * np.sum(x * x, axis=1))[None, :]
    assert np.allclose(prod, expect, rtol=1e-12, atol=1e-14)


def test_field_validation():
    with pytest.raises(ValueError):
        DistributionField.gaussian(2, [2], 1.0, 1.0)
    with pytest.raises(ValueError):
        DistributionField.gaussian(1, [0], 1.0, -1.0)
    with pytest.raises(ValueError):
        DistributionField.gaussian(1, [0], np.nan, 1.0)
    with pytest.raises(ValueError):
        DistributionField.gaussian(1, [0], 1.0, 1.0) + DistributionField.zeros(2)
    z = DistributionField.zeros(3)
    assert z.n_terms == 0 and np.all(z.values(np.ones((2, 3))) == 0)


def test_invariants_poly(gas2, rng):
    basis = invariants_poly(gas2)
    assert basis.names == ("mass", "momentum_x", "momentum_y", "momentum_z", "energy")
    x = rng.normal(size=(5, 3))
    vals = basis.sample(x)
    assert vals.shape == (5, 2, 5)
    assert np.allclose(vals[1, 0], x[:, 0])
    assert np.allclose(vals[4, 1], np.sum(x * x, axis=1) + 2.0)


def test_invariants_mix(mix12, rng):
    basis = invariants_mix(mix12)
    assert len(basis) == mix12.s + 4
    x = rng.normal(size=(4, 3))
    vals = basis.sample(x)
    assert np.allclose(vals[0], [[1.0] * 4, [0.0] * 4])
    assert np.allclose(vals[mix12.s + 1, 1], 2.0 * x[:, 1])
    assert np.allclose(vals[-1, 1], 2.0 * np.sum(x * x, axis=1))


def test_kernel_basis_is_sqrt_maxwellian_times_invariant(gas2, mix41, rng):
    x = rng.normal(size=(6, 3))
    sq = sqrt_maxwellian_field_poly(gas2).values(x)
    kb = linearized_kernel_basis_poly(gas2).sample(x)
    inv = invariants_poly(gas2).sample(x)
    assert np.allclose(kb, inv * sq[None], rtol=1e-13)
    sqm = np.sqrt(maxwellian_field_mix(mix41).values(x))
    assert np.allclose(linearized_kernel_basis_mix(mix41).sample(x),
                       invariants_mix(mix41).sample(x) * sqm[None], rtol=1e-12)

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import gamma as gamma_fn

from linboltz.quadrature import (build_grid, composite_gauss_legendre, gauss_hermite_3d,
                                 gauss_legendre, orthonormal_frame, plane_rule, sphere_rule)


def sphere_monomial(a, b, c):
    """Closed form of the surface integral of ``x^a y^b z^c`` over the unit sphere."""
    if a % 2 or b % 2 or c % 2:
        return 0.0
    ba, bb, bc = (a + 1) / 2, (b + 1) / 2, (c + 1) / 2
    return 2.0 * gamma_fn(ba) * gamma_fn(bb) * gamma_fn(bc) / gamma_fn(ba + bb + bc)


def test_gauss_legendre_interval():
    x, w = gauss_legendre(5, 1.0, 3.0)
    assert w.sum() == pytest.approx(2.0, rel=1e-14)
    assert np.dot(w, x**9) == pytest.approx((3.0**10 - 1.0) / 10.0, rel=1e-13)


def test_composite_rule_skips_empty_panels():
    x, w = composite_gauss_legendre([0.0, 1.0, 1.0, 2.5], 4)
    assert len(x) == 8
    assert np.dot(w, x**3) == pytest.approx(2.5**4 / 4, rel=1e-13)
    x, w = composite_gauss_legendre([1.0, 1.0], 4)
    assert x.size == 0 and w.size == 0


@given(order=st.integers(1, 10), a=st.integers(0, 6), b=st.integers(0, 6), c=st.integers(0, 6))
def test_sphere_rule_exact_up_to_degree(order, a, b, c):
    rule = sphere_rule(order)
    if a + b + c > rule.degree:
        return
    x, y, z = rule.nodes.T
    assert rule.integrate(x**a * y**b * z**c) == pytest.approx(sphere_monomial(a, b, c),
                                                               abs=1e-12)


def test_sphere_rule_area_and_antipodes():
    rule = sphere_rule(7)
    assert rule.weights.sum() == pytest.approx(4.0 * np.pi, rel=1e-14)
    assert rule.size == 7 * 14
    n = rule.nodes
    d = np.linalg.norm(n[:, None, :] + n[None, :, :], axis=2)
    assert np.all(d.min(axis=1) < 1e-12)


def test_sphere_rule_rejects_bad_order():
    with pytest.raises(ValueError):
        sphere_rule(0)
    with pytest.raises(ValueError):
        sphere_rule(10_000)


unit_vectors = st.tuples(*[st.floats(-1, 1, allow_nan=False)] * 3).filter(
    lambda v: np.linalg.norm(v) > 1e-3)


@given(unit_vectors)
def test_orthonormal_frame_properties(v):
    a = np.asarray(v) / np.linalg.norm(v)
    e1, e2 = orthonormal_frame(a)
    M = np.stack([e1, e2, a])
    assert np.allclose(M @ M.T, np.eye(3), atol=1e-12)
    assert np.linalg.det(M) == pytest.approx(1.0, abs=1e-12)
    f1, f2 = orthonormal_frame(-a)
    # e1 is shared between opposite axes, e2 flips
    assert np.allclose(f1, e1, atol=1e-12)
    assert np.allclose(f2, -e2, atol=1e-12)


@given(unit_vectors)
def test_oriented_sphere_keeps_rule(v):
    rule = sphere_rule(5)
    nodes = rule.oriented(v)
    a = np.asarray(v) / np.linalg.norm(v)
    assert np.allclose(np.linalg.norm(nodes, axis=1), 1.0)
    # cosines about the axis are the Gauss-Legendre nodes
    assert np.allclose(np.sort(np.unique(np.round(nodes @ a, 12))), np.sort(rule.t), atol=1e-10)


@pytest.mark.parametrize("gam", [0.3, 0.5, 0.9])
def test_plane_rule_graded_singularity(gam):
    # int r^(gamma-2) exp(-r^2) dA = pi Gamma(gamma/2)
    rule = plane_rule(24, 4, 8.0, gam)
    val = rule.integrate(lambda x, y: (x * x + y * y) ** ((gam - 2) / 2) * np.exp(-x * x - y * y))
    assert val == pytest.approx(np.pi * gamma_fn(gam / 2), rel=1e-6)


def test_plane_rule_validation():
    with pytest.raises(ValueError):
        plane_rule(gamma=1.0)
    with pytest.raises(ValueError):
        plane_rule(R_max=0.0)
    with pytest.raises(ValueError):
        plane_rule(0, 4)


def test_plane_points_lie_on_plane():
    rule = plane_rule(4, 6)
    n = np.array([1.0, 2.0, -0.5])
    c = np.array([0.3, -1.0, 2.0])
    pts = rule.points(c, n)
    assert np.allclose((pts - c) @ n, 0.0, atol=1e-12)


def test_build_grid_layout():
    g = build_grid(4, 2.0)
    assert g.size == 64 and g.h == 1.0
    assert g.weights.sum() == pytest.approx(64.0)
    assert np.all(np.abs(g.nodes) <= 2.0 - g.h / 2 + 1e-15)
    assert not np.any(np.all(g.nodes == 0, axis=1))
    assert np.all(g.odd_coords % 2 == 1)
    assert np.allclose(g.odd_coords * g.h / 2, g.nodes)
    assert g.to_dict() == {"N": 4, "R": 2.0}


@pytest.mark.parametrize("N", [3, 0, 1, 2.5, True])
def test_build_grid_rejects_bad_N(N):
    with pytest.raises(ValueError, match="N must be"):
        build_grid(N, 1.0)


def test_build_grid_rejects_bad_R():
    with pytest.raises(ValueError):
        build_grid(4, 0.0)


def test_gauss_hermite_3d_gaussian_moment():
    s = 0.7
    pts, w = gauss_hermite_3d(6, s, center=(0.2, 0.0, -0.1))
    d = pts - np.array([0.2, 0.0, -0.1])
    r2 = np.sum(d * d, axis=1)
    exact = (math.sqrt(math.pi) * s) ** 3 * (1.0 + 1.5 * s * s)
    assert np.dot(w, np.exp(-r2 / s**2) * (1.0 + r2)) == pytest.approx(exact, rel=1e-12)

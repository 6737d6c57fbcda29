"""Reduced collision kernels of the linearized operator.

Polyatomic gas, ``L_i h = nu_i h_i - sum_j int k_ij(xi, xi*) h_j(xi*) dxi*`` with
``k_ij = k_ij2 - k_ij1``::

    k_ij1 = (M_i M_j*)^{1/2} |g| sum_kl int_{S^2} sigma_ij^kl 1_open domega
    k_ij2 = 8 / ((phi_i phi_j)^{1/2} |g|) sum_kl int_{n-perp} B_ik^jl (M_k' M_l*' / phi_k phi_l)^{1/2} dw

where ``xi' = xi* + w - chi n``, ``xi*' = xi + w - chi n``, ``chi = dI_ik^jl/(m|g|)``
and ``B = phi_i phi_k |g~| sigma_ik^jl(|g~|) / |g*|`` is the cross section in the
form that is symmetric under pre/post exchange (constant ``C`` for hard spheres).

Mixture, ``k_ab = delta_ab sum_c k_ac^(a) + k_ab2^(b) - k_ab1^(b)`` with the loss
kernel ``k_ab1^(b)``, the plane kernel ``k_ab^(a)`` and the sphere kernel
``k_ab2^(b)`` (a plane integral again when ``m_a = m_b``).

Plane integrals use the graded polar rule centred on the peak of the Gaussian
factor (``w = -u`` with ``u`` the part of ``(xi + xi*)/2`` normal to ``g``).
The sphere integral of ``k_ab2^(b)`` concentrates like ``exp(a cos theta)``
about a known pole, so its cosine nodes are pushed through the inverse CDF of
that exponential. Every rule is built on :func:`quadrature.orthonormal_frame`,
which makes the swap symmetries of the kernels hold node by node.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .cross_sections import MIX_HS, POLY_HS, CrossSectionModel
from .gas_models import MixtureSpec, PolyatomicGas
from .quadrature import (PlaneRule, SphereRule, gauss_legendre, orthonormal_frame, plane_rule,
                         sphere_rule)


@dataclass(frozen=True)
class KernelRules:
    """Quadrature rules used by the kernels."""

    sphere: SphereRule = field(default_factory=lambda: sphere_rule(6))
    plane: PlaneRule = field(default_factory=plane_rule)
    gain_order: int = 12

    def to_dict(self) -> dict:
        p = self.plane
        return {"sphere_order": self.sphere.order, "plane_radial": p.n_radial,
                "plane_angular": p.n_angular, "plane_R_max": p.R_max, "plane_gamma": p.gamma,
                "gain_order": self.gain_order}


def make_rules(sphere_order: int = 6, n_radial: int = 32, n_angular: int = 16,
               R_max: float = 8.0, gamma: float = 0.5, gain_order: int = 12) -> KernelRules:
    if gain_order < 1:
        raise ValueError("gain_order must be positive")
    return KernelRules(sphere_rule(sphere_order), plane_rule(n_radial, n_angular, R_max, gamma),
                       int(gain_order))


def _impl():
    if _backend.get_backend() == "numba":
        from . import _kernels_numba as mod
    else:
        from . import _kernels_numpy as mod
    return mod


def _pairs(xa, xb):
    xa = np.ascontiguousarray(np.atleast_2d(np.asarray(xa, dtype=float)))
    xb = np.ascontiguousarray(np.atleast_2d(np.asarray(xb, dtype=float)))
    if xa.shape != xb.shape or xa.shape[-1] != 3:
        raise ValueError("velocity arrays must have matching shape (P, 3)")
    if len(xa) and np.any(np.all(xa == xb, axis=1)):
        raise ValueError("kernels are undefined at coincident velocities xi = xi*")
    return xa, xb


def _plane_args(plane: PlaneRule):
    return (np.ascontiguousarray(plane.r), np.cos(plane.theta), np.sin(plane.theta),
            np.ascontiguousarray(plane.weights))


def _check_poly(model: CrossSectionModel):
    if not model.is_poly:
        raise ValueError(f"{model.variant} is not a polyatomic cross section")


def _check_mix(model: CrossSectionModel):
    if model.is_poly:
        raise ValueError(f"{model.variant} is not a mixture cross section")


def poly_kernel_table(gas: PolyatomicGas, model: CrossSectionModel, xa, xb,
                      rules: KernelRules | None = None):
    """Loss and gain kernels for every pair: two arrays of shape ``(P, r, r)``."""
    _check_poly(model)
    rules = rules or KernelRules()
    xa, xb = _pairs(xa, xb)
    sp = rules.sphere
    return _impl().poly_batch(xa, xb, gas.m, gas.I_arr, gas.phi_arr, model.code, model.C,
                              model.gamma, model.skew, *_plane_args(rules.plane),
                              np.ascontiguousarray(sp.nodes), np.ascontiguousarray(sp.weights))


def poly_kernel(gas, model, xa, xb, rules=None) -> np.ndarray:
    """Full kernel ``k_ij = k_ij2 - k_ij1`` for every pair, shape ``(P, r, r)``."""
    k1, k2 = poly_kernel_table(gas, model, xa, xb, rules)
    return k2 - k1


def mix_kernel_table(mix: MixtureSpec, model: CrossSectionModel, xa, xb,
                     rules: KernelRules | None = None):
    """``(loss, same, gain)`` arrays of shape ``(P, s, s)``.

    ``loss[p, a, b] = k_ab1^(b)``, ``same[p, a, b] = k_ab^(a)`` and
    ``gain[p, a, b] = k_ab2^(b)`` evaluated at ``(xa[p], xb[p])``.
    """
    _check_mix(model)
    rules = rules or KernelRules()
    xa, xb = _pairs(xa, xb)
    sp = rules.sphere
    gy, gwy = gauss_legendre(rules.gain_order, 0.0, 1.0)
    return _impl().mix_batch(xa, xb, mix.m_arr, mix.n_arr, model.code, model.c_matrix(mix.s),
                             model.gamma, model.skew, *_plane_args(rules.plane),
                             np.ascontiguousarray(sp.nodes), np.ascontiguousarray(sp.weights),
                             np.ascontiguousarray(gy), np.ascontiguousarray(gwy),
                             2 * rules.gain_order)


def compose_mix(loss, same, gain) -> np.ndarray:
    """``k_ab = delta_ab sum_c k_ac^(a) + k_ab2^(b) - k_ab1^(b)``."""
    s = loss.shape[-1]
    k = gain - loss
    idx = np.arange(s)
    k[..., idx, idx] += same.sum(axis=-1)
    return k


def mix_kernel(mix, model, xa, xb, rules=None) -> np.ndarray:
    return compose_mix(*mix_kernel_table(mix, model, xa, xb, rules))


# ---------------------------------------------------------------------------
# pointwise interface


def _pair(xi, xi_star):
    xi = np.asarray(xi, dtype=float).reshape(3)
    xs = np.asarray(xi_star, dtype=float).reshape(3)
    if np.array_equal(xi, xs):
        raise ValueError("kernels are undefined at coincident velocities xi = xi*")
    return xi[None], xs[None]


def _idx(v, n, what):
    v = int(v)
    if not 0 <= v < n:
        raise IndexError(f"{what} {v} out of range [0, {n})")
    return v


def k1_poly(gas, model, i, j, xi, xi_star, sphere: SphereRule | None = None) -> float:
    i, j = _idx(i, gas.r, "level"), _idx(j, gas.r, "level")
    rules = KernelRules(sphere=sphere or sphere_rule(6), plane=plane_rule(1, 1))
    k1, _ = poly_kernel_table(gas, model, *_pair(xi, xi_star), rules)
    return float(k1[0, i, j])


def k2_poly(gas, model, i, j, xi, xi_star, plane: PlaneRule | None = None) -> float:
    i, j = _idx(i, gas.r, "level"), _idx(j, gas.r, "level")
    rules = KernelRules(sphere=sphere_rule(1), plane=plane or plane_rule())
    _, k2 = poly_kernel_table(gas, model, *_pair(xi, xi_star), rules)
    return float(k2[0, i, j])


def k_poly(gas, model, i, j, xi, xi_star, rules: KernelRules | None = None) -> float:
    i, j = _idx(i, gas.r, "level"), _idx(j, gas.r, "level")
    return float(poly_kernel(gas, model, *_pair(xi, xi_star), rules)[0, i, j])


def k_mix_loss(mix, model, alpha, beta, xi, xi_star, sphere: SphereRule | None = None) -> float:
    a, b = _idx(alpha, mix.s, "species"), _idx(beta, mix.s, "species")
    rules = KernelRules(sphere=sphere or sphere_rule(6), plane=plane_rule(1, 1), gain_order=1)
    return float(mix_kernel_table(mix, model, *_pair(xi, xi_star), rules)[0][0, a, b])


def k_mix_same(mix, model, alpha, beta, xi, xi_star, plane: PlaneRule | None = None) -> float:
    a, b = _idx(alpha, mix.s, "species"), _idx(beta, mix.s, "species")
    rules = KernelRules(sphere=sphere_rule(1), plane=plane or plane_rule(), gain_order=1)
    return float(mix_kernel_table(mix, model, *_pair(xi, xi_star), rules)[1][0, a, b])


def k_mix_gain(mix, model, alpha, beta, xi, xi_star, sphere: SphereRule | None = None,
               plane: PlaneRule | None = None) -> float:
    """``k_ab2^(b)``; the cosine-node count of the peaked sphere rule is ``sphere.order``.

    With ``LINBOLTZ_DEBUG`` set, the energy-ratio inequality of the mass-ratio
    lemma is asserted at every sphere node.
    """
    a, b = _idx(alpha, mix.s, "species"), _idx(beta, mix.s, "species")
    order = sphere.order if sphere is not None else 12
    rules = KernelRules(sphere=sphere_rule(1), plane=plane or plane_rule(), gain_order=order)
    pa, pb = _pair(xi, xi_star)
    if _backend.debug_enabled() and mix.masses[a] != mix.masses[b]:
        assert_gain_nodes_lemma(mix, a, b, pa[0], pb[0], order)
    return float(mix_kernel_table(mix, model, pa, pb, rules)[2][0, a, b])


def k_mix(mix, model, alpha, beta, xi, xi_star, rules: KernelRules | None = None) -> float:
    a, b = _idx(alpha, mix.s, "species"), _idx(beta, mix.s, "species")
    return float(mix_kernel(mix, model, *_pair(xi, xi_star), rules)[0, a, b])


# ---------------------------------------------------------------------------
# kinematics helpers (numpy, used by tests and the debug assertion)


def gain_post_velocities(mix: MixtureSpec, alpha: int, beta: int, xi, xi_star, order: int = 12):
    """Nodes of the peaked sphere rule and the post-collision velocities there.

    Returns ``(omega, xi_p, xi_star_p)`` where ``xi_p`` belongs to species
    ``beta`` and ``xi_star_p`` to species ``alpha``.
    """
    ma, mb = mix.masses[alpha], mix.masses[beta]
    if ma == mb:
        raise ValueError("the sphere parametrization needs distinct masses")
    xi = np.asarray(xi, float)
    xs = np.asarray(xi_star, float)
    d = ma - mb
    gn = np.linalg.norm(xi - xs)
    gab = (ma * xi - mb * xs) / d
    G = np.linalg.norm(gab)
    pk = (-np.sign(d) * gab / G) if G > 0 else np.array([0.0, 0.0, 1.0])
    a = ma * mb * gn * G / abs(d)
    y, _ = gauss_legendre(order, 0.0, 1.0)
    if a > 1e-8:
        t = 1.0 + np.log1p((1.0 - y) * np.expm1(-2.0 * a)) / a
    else:
        t = 2.0 * y - 1.0
    t = np.clip(t, -1.0, 1.0)
    st = np.sqrt(1.0 - t * t)
    n_az = 2 * order
    ph = (np.arange(n_az) + 0.5) * 2.0 * np.pi / n_az
    e1, e2 = orthonormal_frame(pk)
    om = (t[:, None, None] * pk + st[:, None, None]
          * (np.cos(ph)[None, :, None] * e1 + np.sin(ph)[None, :, None] * e2)).reshape(-1, 3)
    xi_p = gab + ma * gn * om / d
    xs_p = gab + mb * gn * om / d
    return om, xi_p, xs_p


def assert_gain_nodes_lemma(mix, alpha, beta, xi, xi_star, order=12, tol=1e-12):
    from .verify import rho_formula

    ma, mb = mix.masses[alpha], mix.masses[beta]
    rho = rho_formula(ma, mb).rho
    _, xp, xsp = gain_post_velocities(mix, alpha, beta, xi, xi_star, order)
    den = ma * np.dot(xi, xi) + mb * np.dot(xi_star, xi_star)
    if den == 0:
        return
    ratio = (mb * np.sum(xp * xp, axis=1) + ma * np.sum(xsp * xsp, axis=1)) / den
    if np.any(ratio < rho - tol):
        raise AssertionError(f"energy ratio {ratio.min():.6g} below rho = {rho:.6g}")


def is_hard_sphere(model: CrossSectionModel) -> bool:
    return model.code in (POLY_HS, MIX_HS)

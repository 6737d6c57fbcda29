"""Collision frequencies, discrete operator assembly and direct collision integrals.

The discrete operator acts on ``h~[(i, a)] = sqrt(w_a) h_i(xi_a)`` (row index
``i * n_nodes + a``) and reads ``L~ = diag(nu) - K~`` with
``K~[(i, a), (j, b)] = sqrt(w_a) k_ij(xi_a, xi_b) sqrt(w_b)``, so it is exactly
symmetric whenever the kernel table is.

Kernel values are evaluated once per orbit of node pairs under the 48 signed
permutations of the axes (the grid and the kernels share that symmetry) and
mirrored across the diagonal. The singular coincident cells are either left at
zero or filled with a local correction: for node ``a`` the missing part of
``int k_ij(xi_a, .) h_j`` is measured, with ``h_j`` frozen at its node value,
against a smooth cutoff ``exp(-r^2 / (2 rho^2))`` as the difference between an
accurate spherical integral and the lattice sum that the matrix already
contains. Freezing ``h_j`` rather than weighting by a Maxwellian keeps the
correction bounded when species of different mass meet at the same node.

The direct routines evaluate ``Q``, ``L`` and ``Gamma`` from the cross section
without going through the kernels and serve as independent oracles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import permutations, product

import numpy as np

from . import _backend
from .cross_sections import CrossSectionModel, sigma_mix, sigma_poly
from .gas_models import (DistributionField, MixtureSpec, PolyatomicGas, maxwellian_field_mix,
                         maxwellian_field_poly)
from .kernels import KernelRules, mix_kernel, poly_kernel
from .quadrature import (VelocityGrid, composite_gauss_legendre, gauss_hermite_3d,
                         gauss_legendre, sphere_rule)

DEFAULT_SIZE_CAP = 20000
DIAGONAL_MODES = ("local", "zero")


class ResourceError(ValueError):
    """Raised when an assembly would exceed the configured size cap."""


# ---------------------------------------------------------------------------
# collision frequencies


def _radial_nodes(x: float, R_max: float, width: float, n: int = 8):
    edges = [0.0]
    for lo, hi in ((0.0, min(x, R_max)), (min(x, R_max), R_max)):
        if hi > lo:
            k = max(1, math.ceil((hi - lo) / width))
            edges.extend(np.linspace(lo, hi, k + 1)[1:])
    return composite_gauss_legendre(edges, n)


def _shell_average(x: float, R: np.ndarray, m: float, cut: float, n_rho: int = 48) -> np.ndarray:
    """``int_{-1}^{1} exp(-m |xi - R e|^2 / 2) d(cos)`` for ``|xi| = x``."""
    if x == 0.0:
        return 2.0 * np.exp(-0.5 * m * R * R)
    lo = np.abs(x - R)
    hi = np.minimum(x + R, np.maximum(lo, cut))
    t, w = gauss_legendre(n_rho, 0.0, 1.0)
    rho = lo[:, None] + (hi - lo)[:, None] * t[None, :]
    integ = np.sum(w[None, :] * rho * np.exp(-0.5 * m * rho * rho), axis=1) * (hi - lo)
    return integ / (x * R)


def nu_poly(gas: PolyatomicGas, model: CrossSectionModel, i: int, xi_norm) -> np.ndarray:
    """Collision frequency ``nu_i(|xi|)``.

    ``nu_i = 4 pi sum_jkl int |g| sigma_ij^kl(|g|) M_j(xi - g) dg``, reduced to a
    radial integral over ``s = sqrt(|g|^2 - R_th^2)`` and a shell average done
    in the variable ``|xi*|``. Truncated at ``|xi*| <= 10 / sqrt(m)``.
    """
    if not model.is_poly:
        raise ValueError(f"{model.variant} is not a polyatomic cross section")
    if not 0 <= int(i) < gas.r:
        raise IndexError(f"level index {i} out of range")
    i = int(i)
    xs = np.atleast_1d(np.asarray(xi_norm, dtype=float))
    if np.any(xs < 0):
        raise ValueError("|xi| must be nonnegative")
    m = gas.m
    cut = 10.0 / math.sqrt(m)
    width = 1.0 / math.sqrt(m)
    norm = m**1.5 * (2.0 * np.pi) ** -1.5
    out = np.empty(len(xs))
    I = gas.I_arr
    phi = gas.phi_arr
    for p, x in enumerate(xs):
        R_max = x + cut
        total = 0.0
        for j, k, l in product(range(gas.r), repeat=3):
            dI = I[k] + I[l] - I[i] - I[j]
            Rth2 = max(4.0 * dI / m, 0.0)
            if R_max**2 <= Rth2:
                continue
            s_break = math.sqrt(x * x - Rth2) if x * x > Rth2 else 0.0
            s, ws = _radial_nodes(s_break, math.sqrt(R_max**2 - Rth2), width)
            R = np.sqrt(Rth2 + s * s)
            sig = sigma_poly(model, gas, (i, j, k, l), R)
            A = _shell_average(x, R, m, cut)
            Mj = norm * phi[j] * math.exp(-I[j])
            total += 2.0 * np.pi * Mj * np.sum(ws * s * R * R * sig * A)
        out[p] = 4.0 * np.pi * total
    return out if np.ndim(xi_norm) else out[:1].reshape(())


def nu_mix(mix: MixtureSpec, model: CrossSectionModel, alpha: int, xi_norm) -> np.ndarray:
    """Collision frequency ``nu_a(|xi|) = 4 pi sum_b int |g| sigma_ab M_b(xi - g) dg``."""
    if model.is_poly:
        raise ValueError(f"{model.variant} is not a mixture cross section")
    if not 0 <= int(alpha) < mix.s:
        raise IndexError(f"species index {alpha} out of range")
    a = int(alpha)
    xs = np.atleast_1d(np.asarray(xi_norm, dtype=float))
    if np.any(xs < 0):
        raise ValueError("|xi| must be nonnegative")
    out = np.zeros(len(xs))
    for b in range(mix.s):
        mb = mix.m_arr[b]
        cut = 10.0 / math.sqrt(mb)
        norm = mix.n_arr[b] * (mb / (2.0 * np.pi)) ** 1.5
        for p, x in enumerate(xs):
            R, wR = _radial_nodes(x, x + cut, 1.0 / math.sqrt(mb))
            sig = sigma_mix(model, mix, (a, b), R)
            A = _shell_average(x, R, mb, cut)
            out[p] += 4.0 * np.pi * 2.0 * np.pi * norm * np.sum(wR * R**3 * sig * A)
    return out if np.ndim(xi_norm) else out[:1].reshape(())


def _nu_on_grid(nu_fn, ncomp: int, grid: VelocityGrid) -> np.ndarray:
    sq = np.sum(grid.odd_coords**2, axis=1)
    uniq, inv = np.unique(sq, return_inverse=True)
    radii = np.sqrt(uniq) * grid.h / 2.0
    return np.stack([nu_fn(c, radii)[inv] for c in range(ncomp)])


# ---------------------------------------------------------------------------
# symmetry reduction


def octahedral_ops() -> list[tuple[tuple[int, int, int], np.ndarray]]:
    """The 48 signed axis permutations as ``(perm, signs)`` pairs."""
    return [(p, np.array(s)) for p in permutations(range(3))
            for s in product((1, -1), repeat=3)]


def _encode(c: np.ndarray, N: int) -> np.ndarray:
    """Integer key for rows of odd coordinates (any even number of columns)."""
    base = 2 * N - 1
    key = np.zeros(len(c), dtype=np.int64)
    for col in range(c.shape[1]):
        key = key * base + (c[:, col] + N - 1)
    return key


def _decode(key: np.ndarray, N: int, ncol: int) -> np.ndarray:
    base = 2 * N - 1
    out = np.empty((len(key), ncol), dtype=np.int64)
    k = key.copy()
    for col in range(ncol - 1, -1, -1):
        out[:, col] = k % base - (N - 1)
        k //= base
    return out


def _node_index(c: np.ndarray, N: int) -> np.ndarray:
    idx = (c + N - 1) // 2
    return (idx[:, 0] * N + idx[:, 1]) * N + idx[:, 2]


def pair_orbits(grid: VelocityGrid, ia: np.ndarray, ib: np.ndarray):
    """Canonical representatives of node pairs under the octahedral group.

    Returns ``(rep_a, rep_b, inverse, swapped)``: ``k(xi_ia, xi_ib)`` equals the
    kernel table at the representative ``inverse`` (transposed where
    ``swapped``).
    """
    N = grid.N
    c = grid.odd_coords
    ca, cb = c[ia], c[ib]
    best = np.full(len(ia), np.iinfo(np.int64).max, dtype=np.int64)
    swapped = np.zeros(len(ia), dtype=bool)
    for perm, sg in octahedral_ops():
        pa = ca[:, perm] * sg
        pb = cb[:, perm] * sg
        for sw, (u, v) in ((False, (pa, pb)), (True, (pb, pa))):
            key = _encode(np.hstack([u, v]), N)
            better = key < best
            best = np.where(better, key, best)
            swapped = np.where(better, sw, swapped)
    uniq, inverse = np.unique(best, return_inverse=True)
    rep = _decode(uniq, N, 6)
    return _node_index(rep[:, :3], N), _node_index(rep[:, 3:], N), inverse, swapped


def node_orbits(grid: VelocityGrid):
    """Canonical representative of every node: ``(rep_nodes, inverse)``."""
    N = grid.N
    c = grid.odd_coords
    best = np.full(len(c), np.iinfo(np.int64).max, dtype=np.int64)
    for perm, sg in octahedral_ops():
        best = np.minimum(best, _encode(c[:, perm] * sg, N))
    uniq, inverse = np.unique(best, return_inverse=True)
    return _node_index(_decode(uniq, N, 3), N), inverse


# ---------------------------------------------------------------------------
# assembled operator


@dataclass(frozen=True)
class LinearizedOperator:
    """``L~ = diag(nu) - K~`` in weight-scaled coordinates."""

    grid: VelocityGrid
    n_components: int
    nu: np.ndarray  # (n_components, n_nodes)
    Kmat: np.ndarray  # (rows, rows)
    diagonal: str = "local"
    metadata: dict = field(default_factory=dict, compare=False)

    @property
    def rows(self) -> int:
        return self.Kmat.shape[0]

    @property
    def nu_flat(self) -> np.ndarray:
        return self.nu.reshape(-1)

    @property
    def L(self) -> np.ndarray:
        L = -self.Kmat.copy()
        L[np.diag_indices_from(L)] += self.nu_flat
        return L

    def scale(self) -> np.ndarray:
        """``sqrt(w)`` per row, mapping node values to scaled coordinates."""
        return np.tile(np.sqrt(self.grid.weights), self.n_components)

    def to_scaled(self, values) -> np.ndarray:
        """Node values of shape ``(n_components, n_nodes)`` to a scaled vector."""
        return np.asarray(values, float).reshape(-1) * self.scale()

    def matvec(self, h) -> np.ndarray:
        h = np.asarray(h, float)
        return self.nu_flat * h - self.Kmat @ h


def _check_size(ncomp: int, grid: VelocityGrid, size_cap: int):
    rows = ncomp * grid.size
    if rows > size_cap:
        raise ResourceError(f"operator would have {rows} rows, above the size cap {size_cap}")
    return rows


def _assemble(kernel_fn, ncomp: int, grid: VelocityGrid, nu: np.ndarray,
              diagonal: str, use_symmetry: bool, size_cap: int, meta: dict):
    if diagonal not in DIAGONAL_MODES:
        raise ValueError(f"diagonal must be one of {DIAGONAL_MODES}")
    rows = _check_size(ncomp, grid, size_cap)
    n = grid.size
    X = np.asarray(grid.nodes)
    ia, ib = np.triu_indices(n, 1)
    if use_symmetry:
        ra, rb, inv, swapped = pair_orbits(grid, ia, ib)
        table = kernel_fn(X[ra], X[rb])
        blocks = table[inv]
        blocks[swapped] = np.swapaxes(blocks[swapped], 1, 2)
        n_eval = len(ra)
    else:
        blocks = kernel_fn(X[ia], X[ib])
        n_eval = len(ia)
    w = grid.weights
    blocks *= np.sqrt(w[ia] * w[ib])[:, None, None]
    K = np.zeros((ncomp, n, ncomp, n))
    for i in range(ncomp):
        for j in range(ncomp):
            K[i, ia, j, ib] = blocks[:, i, j]
            K[j, ib, i, ia] = blocks[:, i, j]
    K = K.reshape(rows, rows)
    # same-node blocks (a == b) stay zero unless the local correction fills them
    if diagonal == "local":
        D = _local_correction(kernel_fn, ncomp, grid, use_symmetry)
        K4 = K.reshape(ncomp, n, ncomp, n)
        a = np.arange(n)
        for i in range(ncomp):
            for j in range(ncomp):
                K4[i, a, j, a] = D[:, i, j]
    meta = dict(meta, kernel_evaluations=int(n_eval), diagonal=diagonal,
                use_symmetry=bool(use_symmetry))
    return LinearizedOperator(grid, ncomp, nu, K, diagonal, meta)


def _local_correction(kernel_fn, ncomp, grid, use_symmetry, n_radial=16,
                      sphere_order=12, rho_factor=1.0, cut_factor=5.0):
    """Per-node ``(ncomp, ncomp)`` blocks repairing the omitted coincident cell."""
    h = grid.h
    rho = rho_factor * h
    Rc = cut_factor * rho
    X = np.asarray(grid.nodes)
    if use_symmetry:
        reps, inverse = node_orbits(grid)
    else:
        reps, inverse = np.arange(grid.size), np.arange(grid.size)
    t, wt = gauss_legendre(n_radial, 0.0, Rc)
    sp = sphere_rule(sphere_order)
    offs_sph = (t[:, None, None] * sp.nodes[None]).reshape(-1, 3)
    w_sph = (wt[:, None] * t[:, None] ** 2 * sp.weights[None]).reshape(-1)
    r_sph = np.repeat(t, sp.size)
    L = int(math.ceil(Rc / h))
    ax = np.arange(-L, L + 1) * h
    lat = np.stack(np.meshgrid(ax, ax, ax, indexing="ij"), -1).reshape(-1, 3)
    ln = np.linalg.norm(lat, axis=1)
    keep = (ln > 0) & (ln < Rc)
    lat, ln = lat[keep], ln[keep]
    cut_sph = w_sph * np.exp(-r_sph**2 / (2 * rho**2))
    cut_lat = h**3 * np.exp(-ln**2 / (2 * rho**2))
    offs = np.vstack([offs_sph, lat])
    wts = np.concatenate([cut_sph, -cut_lat])
    D = np.zeros((len(reps), ncomp, ncomp))
    for q, a in enumerate(reps):
        xa = X[a]
        P = xa - offs
        k = kernel_fn(np.broadcast_to(xa, P.shape).copy(), P)
        D[q] = np.einsum("p,pij->ij", wts, k)
    D = 0.5 * (D + np.swapaxes(D, 1, 2))
    return D[inverse]


def _rules(rules):
    return rules if rules is not None else KernelRules()


def assemble_poly(gas: PolyatomicGas, model: CrossSectionModel, grid: VelocityGrid,
                  rules: KernelRules | None = None, diagonal: str = "local",
                  use_symmetry: bool = True, size_cap: int = DEFAULT_SIZE_CAP
                  ) -> LinearizedOperator:
    """Discrete linearized operator for a polyatomic gas."""
    rules = _rules(rules)
    _check_size(gas.r, grid, size_cap)
    nu = _nu_on_grid(lambda c, x: nu_poly(gas, model, c, x), gas.r, grid)
    meta = {"kind": "polyatomic", "gas": gas.to_dict(), "model": model.to_dict(),
            "grid": grid.to_dict(), "rules": rules.to_dict()}
    return _assemble(lambda a, b: poly_kernel(gas, model, a, b, rules), gas.r, grid,
                     nu, diagonal, use_symmetry, size_cap, meta)


def assemble_mix(mix: MixtureSpec, model: CrossSectionModel, grid: VelocityGrid,
                 rules: KernelRules | None = None, diagonal: str = "local",
                 use_symmetry: bool = True, size_cap: int = DEFAULT_SIZE_CAP
                 ) -> LinearizedOperator:
    """Discrete linearized operator for a monatomic mixture."""
    rules = _rules(rules)
    _check_size(mix.s, grid, size_cap)
    nu = _nu_on_grid(lambda c, x: nu_mix(mix, model, c, x), mix.s, grid)
    meta = {"kind": "mixture", "mixture": mix.to_dict(), "model": model.to_dict(),
            "grid": grid.to_dict(), "rules": rules.to_dict()}
    return _assemble(lambda a, b: mix_kernel(mix, model, a, b, rules), mix.s, grid,
                     nu, diagonal, use_symmetry, size_cap, meta)


def kernel_basis_vectors(op: LinearizedOperator, basis) -> np.ndarray:
    """Scaled grid vectors of a ``CollisionInvariantBasis`` of ker L."""
    vals = basis.sample(op.grid.nodes)  # (count, ncomp, nodes)
    return vals.reshape(len(vals), -1) * op.scale()[None, :]


# ---------------------------------------------------------------------------
# direct collision integrals


@dataclass(frozen=True)
class DirectRules:
    """Quadrature for the strong form of the collision operator.

    Radial integrals use ``n_radial`` Gauss nodes per panel of width
    ``width / sqrt(m)`` up to ``|xi| + cutoff / sqrt(m)``; ``g_order`` and
    ``omega_order`` are the product sphere rules for the direction of ``g``
    and the scattering direction.
    """

    n_radial: int = 6
    width: float = 1.0
    cutoff: float = 7.0
    g_order: int = 12
    omega_order: int = 8

    def to_dict(self) -> dict:
        return {"n_radial": self.n_radial, "width": self.width, "cutoff": self.cutoff,
                "g_order": self.g_order, "omega_order": self.omega_order}


@dataclass(frozen=True)
class WeakRules:
    """Quadrature for the weak form: Gauss-Hermite in ``G``, panels in ``|g|``
    up to ``g_max / sqrt(m)``, product sphere rules for both directions."""

    hermite: int = 4
    n_radial: int = 4
    width: float = 3.0
    g_max: float = 12.0
    g_order: int = 4
    omega_order: int = 4

    def to_dict(self) -> dict:
        return {"hermite": self.hermite, "n_radial": self.n_radial, "width": self.width,
                "g_max": self.g_max, "g_order": self.g_order, "omega_order": self.omega_order}


def _impl():
    if _backend.get_backend() == "numba":
        from . import _collision_numba as mod
    else:
        from . import _collision_numpy as mod
    return mod


def _sphere_args(order: int):
    sp = sphere_rule(order)
    st = np.sqrt(np.maximum(1.0 - sp.t**2, 0.0))
    return (np.ascontiguousarray(sp.t), st, np.cos(sp.azim), np.sin(sp.azim),
            np.ascontiguousarray(sp.wt * (2.0 * np.pi / len(sp.azim))))


def _points(xi, comp, ncomp):
    xi = np.ascontiguousarray(np.atleast_2d(np.asarray(xi, dtype=float)))
    if xi.shape[-1] != 3:
        raise ValueError("velocities must have shape (P, 3)")
    comps = np.broadcast_to(np.asarray(comp, dtype=np.int64), (len(xi),)).copy()
    if np.any((comps < 0) | (comps >= ncomp)):
        raise IndexError("component index out of range")
    return xi, comps


def _strong(kind, spec, model, fa, fb, sym, xi, comp, rules):
    rules = rules or DirectRules()
    ux, uw = gauss_legendre(rules.n_radial, 0.0, 1.0)
    if kind == "poly":
        m_ref = spec.m
        ncomp = spec.r
    else:
        m_ref = float(np.min(spec.m_arr))
        ncomp = spec.s
    pts, comps = _points(xi, comp, ncomp)
    for f in (fa, fb):
        if f.n_components != ncomp:
            raise ValueError("field component count does not match the model")
    width = rules.width / math.sqrt(m_ref)
    rcut = rules.cutoff / math.sqrt(m_ref)
    common = (fa.packed(), fb.packed(), bool(sym), ux, uw, width, rcut,
              *_sphere_args(rules.g_order), *_sphere_args(rules.omega_order))
    if kind == "poly":
        return _impl().strong_poly(pts, comps, spec.m, spec.I_arr, spec.phi_arr, model.code,
                                   model.C, model.gamma, model.skew, *common)
    return _impl().strong_mix(pts, comps, spec.m_arr, model.code, model.c_matrix(spec.s),
                              model.gamma, model.skew, *common)


def collision_terms_poly(gas, model, fa, fb, xi, i, rules=None, sym=False):
    """Gain and loss parts of ``Q_i(fa, fb)`` (or of ``Q(fa, fb) + Q(fb, fa)``)."""
    if not model.is_poly:
        raise ValueError(f"{model.variant} is not a polyatomic cross section")
    return _strong("poly", gas, model, fa, fb, sym, xi, i, rules)


def collision_terms_mix(mix, model, fa, fb, xi, alpha, rules=None, sym=False):
    if model.is_poly:
        raise ValueError(f"{model.variant} is not a mixture cross section")
    return _strong("mix", mix, model, fa, fb, sym, xi, alpha, rules)


def apply_Q_poly(gas: PolyatomicGas, model: CrossSectionModel, f: DistributionField, xi, i,
                 rules: DirectRules | None = None) -> np.ndarray:
    """``Q_i(f, f)(xi)`` from the cross section by direct quadrature."""
    gain, loss = collision_terms_poly(gas, model, f, f, xi, i, rules)
    return gain - loss


def apply_Q_mix(mix: MixtureSpec, model: CrossSectionModel, f: DistributionField, xi, alpha,
                rules: DirectRules | None = None) -> np.ndarray:
    gain, loss = collision_terms_mix(mix, model, f, f, xi, alpha, rules)
    return gain - loss


def _sqrt_m(coef, beta, xi, comp):
    pts = np.atleast_2d(np.asarray(xi, float))
    c = np.broadcast_to(np.asarray(comp), (len(pts),))
    return np.sqrt(coef[c]) * np.exp(-beta[c] * np.sum(pts * pts, axis=1))


def apply_L_direct(gas: PolyatomicGas, model: CrossSectionModel, h: DistributionField, xi, i,
                   rules: DirectRules | None = None) -> np.ndarray:
    """``L_i h = -M_i^{-1/2} (Q_i(M, M^{1/2} h) + Q_i(M^{1/2} h, M))``."""
    coef = gas.maxwellian_coef()
    F = h.times_gaussian(np.sqrt(coef), 0.25 * gas.m)
    M = maxwellian_field_poly(gas)
    gain, loss = collision_terms_poly(gas, model, M, F, xi, i, rules, sym=True)
    sq = _sqrt_m(coef, np.full(gas.r, 0.25 * gas.m), xi, i)
    return (loss - gain) / sq


def apply_L_direct_mix(mix: MixtureSpec, model: CrossSectionModel, h: DistributionField, xi,
                       alpha, rules: DirectRules | None = None) -> np.ndarray:
    coef = mix.maxwellian_coef()
    F = h.times_gaussian(np.sqrt(coef), 0.25 * mix.m_arr)
    M = maxwellian_field_mix(mix)
    gain, loss = collision_terms_mix(mix, model, M, F, xi, alpha, rules, sym=True)
    sq = _sqrt_m(coef, 0.25 * mix.m_arr, xi, alpha)
    return (loss - gain) / sq


def gamma_poly(gas: PolyatomicGas, model: CrossSectionModel, h: DistributionField, xi, i,
               rules: DirectRules | None = None) -> np.ndarray:
    """``Gamma_i(h, h) = M_i^{-1/2} Q_i(M^{1/2} h, M^{1/2} h)``."""
    coef = gas.maxwellian_coef()
    F = h.times_gaussian(np.sqrt(coef), 0.25 * gas.m)
    gain, loss = collision_terms_poly(gas, model, F, F, xi, i, rules)
    sq = _sqrt_m(coef, np.full(gas.r, 0.25 * gas.m), xi, i)
    return (gain - loss) / sq


# ---------------------------------------------------------------------------
# weak form


@dataclass(frozen=True)
class WeakResult:
    """``(Q(f, f), T)`` with the magnitude of its loss part and a positivity flag."""

    value: float
    scale: float
    nonpositive_hits: int


def weak_moment_poly(gas: PolyatomicGas, model: CrossSectionModel, f: DistributionField,
                     test="log", rules: WeakRules | None = None) -> WeakResult:
    """``(Q(f, f), T)`` through the symmetrized weak form.

    Evaluates ``1/4 sum_ijkl int W (Phi' - Phi) (T_i + T_j - T_k' - T_l')`` over
    centre-of-mass velocity ``G`` (Gauss-Hermite), relative velocity ``g`` and
    scattering direction, where ``Phi = f_i f_j*`` and
    ``Phi' = f_k' f_l*' phi_i phi_j / (phi_k phi_l)``.

    ``test`` is ``"log"`` for ``T = log(f / phi)`` (entropy production) or a
    tuple ``(a, b, c, d)`` for ``T_i = a_i + b . xi + c |xi|^2 + d |xi|^4``.
    ``scale`` is ``int W |Phi| |T_i|``, the size of the loss contribution.
    """
    if not model.is_poly:
        raise ValueError(f"{model.variant} is not a polyatomic cross section")
    rules = rules or WeakRules()
    r = gas.r
    if isinstance(test, str):
        if test != "log":
            raise ValueError("test must be 'log' or a tuple (a, b, c, d)")
        mode, ta, tb, tc, td = 1, np.zeros(r), np.zeros(3), 0.0, 0.0
    else:
        a, b, c, d = test
        mode = 0
        ta = np.broadcast_to(np.asarray(a, float), (r,)).copy()
        tb = np.broadcast_to(np.asarray(b, float), (3,)).copy()
        tc, td = float(c), float(d)
    m = gas.m
    Gpts, Gw = gauss_hermite_3d(rules.hermite, 1.0 / math.sqrt(m))
    ux, uw = gauss_legendre(rules.n_radial, 0.0, 1.0)
    gs = sphere_rule(rules.g_order)
    os_ = sphere_rule(rules.omega_order)
    val, scl, bad = _impl().weak_poly(
        np.ascontiguousarray(Gpts), np.ascontiguousarray(Gw), m, gas.I_arr, gas.phi_arr,
        model.code, model.C, model.gamma, model.skew, f.packed(), mode, ta, tb, tc, td, ux, uw,
        rules.width / math.sqrt(m), rules.g_max / math.sqrt(m),
        np.ascontiguousarray(gs.nodes), np.ascontiguousarray(gs.weights),
        np.ascontiguousarray(os_.nodes), np.ascontiguousarray(os_.weights))
    return WeakResult(float(np.sum(val)), float(np.sum(scl)), int(np.sum(bad)))


def invariant_test(field_: DistributionField):
    """Convert a polynomial invariant field into the ``(a, b, c, d)`` test tuple."""
    if np.any(field_.alpha != 0):
        raise ValueError("test functions must be polynomial (alpha = 0)")
    ncomp = field_.n_components
    a = np.zeros(ncomp)
    b = np.zeros(3)
    c = 0.0
    for t in range(field_.n_terms):
        k = field_.comp[t]
        a[k] += field_.coef[t] * field_.p0[t]
        b_t = field_.coef[t] * field_.p1[t]
        c_t = field_.coef[t] * field_.p2[t]
        # the weak kernel takes b and c shared across components
        b = b_t if t == 0 else b
        c = c_t if t == 0 else c
        if not (np.allclose(b_t, b) and np.isclose(c_t, c)):
            raise ValueError("b and c must be the same for every component")
    return a, b, c, 0.0

"""Gas models, Maxwellians and collision invariants.

Two settings are supported: a single polyatomic species whose internal
energy takes ``r`` discrete values ``I_i`` with degeneracy weights ``phi_i``,
and a mixture of ``s`` monatomic species with masses ``m_a`` and number
densities ``n_a``. Component indices are zero based throughout.

Velocity distributions are represented by :class:`DistributionField`, a sum
of polynomial-times-Gaussian terms. The representation is closed under the
operations the library needs (multiplication by Maxwellian factors, linear
combinations), can be evaluated anywhere, and has a flat array form that the
compiled collision integrals consume directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * np.pi


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class PolyatomicGas:
    """Single species with ``r`` discrete internal energy levels."""

    m: float
    I: tuple
    phi: tuple

    def __post_init__(self):
        I = tuple(float(v) for v in np.atleast_1d(self.I))
        phi = tuple(float(v) for v in np.atleast_1d(self.phi))
        object.__setattr__(self, "m", float(self.m))
        object.__setattr__(self, "I", I)
        object.__setattr__(self, "phi", phi)
        if len(I) < 1:
            raise ValueError("need at least one internal energy level")
        if len(I) != len(phi):
            raise ValueError("I and phi must have the same length")
        if not np.isfinite(self.m) or self.m <= 0:
            raise ValueError("mass must be positive")
        if any(not np.isfinite(v) or v < 0 for v in I):
            raise ValueError("internal energies must be finite and nonnegative")
        if any(not np.isfinite(v) or v <= 0 for v in phi):
            raise ValueError("degeneracy weights must be positive")

    @property
    def r(self) -> int:
        return len(self.I)

    @property
    def n_components(self) -> int:
        return self.r

    @property
    def I_arr(self) -> np.ndarray:
        return np.asarray(self.I, dtype=float)

    @property
    def phi_arr(self) -> np.ndarray:
        return np.asarray(self.phi, dtype=float)

    def energy_defect(self, i: int, j: int, k: int, l: int) -> float:
        """Internal energy gained in the channel (i, j) -> (k, l)."""
        I = self.I
        return I[k] + I[l] - I[i] - I[j]

    def maxwellian_coef(self) -> np.ndarray:
        """Prefactors ``phi_i m^{3/2} (2 pi)^{-3/2} exp(-I_i)``."""
        return self.phi_arr * self.m**1.5 * TWO_PI**-1.5 * np.exp(-self.I_arr)

    def to_dict(self) -> dict:
        return {"kind": "polyatomic", "m": self.m, "I": list(self.I), "phi": list(self.phi)}


@dataclass(frozen=True)
class MixtureSpec:
    """Mixture of monatomic species."""

    masses: tuple
    densities: tuple

    def __post_init__(self):
        masses = tuple(float(v) for v in np.atleast_1d(self.masses))
        dens = tuple(float(v) for v in np.atleast_1d(self.densities))
        object.__setattr__(self, "masses", masses)
        object.__setattr__(self, "densities", dens)
        if len(masses) < 1:
            raise ValueError("need at least one species")
        if len(masses) != len(dens):
            raise ValueError("masses and densities must have the same length")
        if any(not np.isfinite(v) or v <= 0 for v in masses):
            raise ValueError("masses must be positive")
        if any(not np.isfinite(v) or v <= 0 for v in dens):
            raise ValueError("densities must be positive")

    @property
    def s(self) -> int:
        return len(self.masses)

    @property
    def n_components(self) -> int:
        return self.s

    @property
    def m_arr(self) -> np.ndarray:
        return np.asarray(self.masses, dtype=float)

    @property
    def n_arr(self) -> np.ndarray:
        return np.asarray(self.densities, dtype=float)

    def reduced_mass(self, alpha: int, beta: int) -> float:
        ma, mb = self.masses[alpha], self.masses[beta]
        return ma * mb / (ma + mb)

    def maxwellian_coef(self) -> np.ndarray:
        """Prefactors ``n_a (m_a / 2 pi)^{3/2}``."""
        return self.n_arr * (self.m_arr / TWO_PI) ** 1.5

    def to_dict(self) -> dict:
        return {"kind": "mixture", "m": list(self.masses), "n": list(self.densities)}


def _check_index(idx: int, n: int, what: str) -> int:
    if isinstance(idx, bool) or not isinstance(idx, (int, np.integer)):
        raise TypeError(f"{what} must be an integer")
    if not 0 <= idx < n:
        raise IndexError(f"{what} {idx} out of range [0, {n})")
    return int(idx)


def _sqnorm(xi) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    return np.sum(xi * xi, axis=-1)


def maxwellian_poly(gas: PolyatomicGas, i: int, xi) -> np.ndarray:
    """Normalized Maxwellian ``M_i(xi)`` of the polyatomic gas."""
    i = _check_index(i, gas.r, "energy level")
    return gas.maxwellian_coef()[i] * np.exp(-0.5 * gas.m * _sqnorm(xi))


def maxwellian_mix(mix: MixtureSpec, alpha: int, xi) -> np.ndarray:
    """Maxwellian ``M_a(xi)`` of species ``alpha``."""
    alpha = _check_index(alpha, mix.s, "species")
    return mix.maxwellian_coef()[alpha] * np.exp(-0.5 * mix.masses[alpha] * _sqnorm(xi))


# ---------------------------------------------------------------------------
# distribution fields


@dataclass(frozen=True)
class DistributionField:
    """Vector-valued velocity distribution built from Gaussian terms.

    Component ``i`` is the sum over terms ``t`` with ``comp[t] == i`` of::

        coef[t] * (p0[t] + p1[t] . xi + p2[t] |xi|^2) * exp(-alpha[t] |xi - center[t]|^2)

    ``alpha`` may be zero, which turns a term into a plain polynomial (used for
    collision invariants).
    """

    n_components: int
    comp: np.ndarray
    coef: np.ndarray
    alpha: np.ndarray
    center: np.ndarray
    p0: np.ndarray
    p1: np.ndarray
    p2: np.ndarray
    label: str = field(default="", compare=False)

    def __post_init__(self):
        T = len(np.atleast_1d(self.comp))
        object.__setattr__(self, "n_components", int(self.n_components))
        object.__setattr__(self, "comp", _frozen(np.atleast_1d(self.comp), np.int64))
        object.__setattr__(self, "coef", _frozen(np.broadcast_to(self.coef, (T,))))
        object.__setattr__(self, "alpha", _frozen(np.broadcast_to(self.alpha, (T,))))
        object.__setattr__(self, "center", _frozen(np.broadcast_to(self.center, (T, 3))))
        object.__setattr__(self, "p0", _frozen(np.broadcast_to(self.p0, (T,))))
        object.__setattr__(self, "p1", _frozen(np.broadcast_to(self.p1, (T, 3))))
        object.__setattr__(self, "p2", _frozen(np.broadcast_to(self.p2, (T,))))
        if self.n_components < 1:
            raise ValueError("need at least one component")
        if T and (self.comp.min() < 0 or self.comp.max() >= self.n_components):
            raise ValueError("term component index out of range")
        if np.any(self.alpha < 0):
            raise ValueError("Gaussian exponents must be nonnegative")
        arrays = (self.coef, self.alpha, self.center, self.p0, self.p1, self.p2)
        if not all(np.all(np.isfinite(a)) for a in arrays):
            raise ValueError("field parameters must be finite")

    # construction helpers --------------------------------------------------
    @classmethod
    def zeros(cls, n_components: int) -> "DistributionField":
        e = np.zeros(0)
        return cls(n_components, np.zeros(0, np.int64), e, e, np.zeros((0, 3)), e,
                   np.zeros((0, 3)), e)

    @classmethod
    def gaussian(cls, n_components, comp, coef, alpha, center=(0.0, 0.0, 0.0),
                 p0=1.0, p1=(0.0, 0.0, 0.0), p2=0.0, label="") -> "DistributionField":
        comp = np.atleast_1d(np.asarray(comp, dtype=np.int64))
        return cls(n_components, comp, coef, alpha, center, p0, p1, p2, label)

    @property
    def n_terms(self) -> int:
        return len(self.comp)

    # evaluation ------------------------------------------------------------
    def __call__(self, i: int, xi) -> np.ndarray:
        i = _check_index(i, self.n_components, "component")
        xi = np.asarray(xi, dtype=float)
        out = np.zeros(xi.shape[:-1])
        for t in np.flatnonzero(self.comp == i):
            d = xi - self.center[t]
            poly = self.p0[t] + xi @ self.p1[t] + self.p2[t] * _sqnorm(xi)
            out = out + self.coef[t] * poly * np.exp(-self.alpha[t] * _sqnorm(d))
        return out

    def values(self, xi) -> np.ndarray:
        """All components at once: shape ``(n_components,) + xi.shape[:-1]``."""
        return np.stack([self(i, xi) for i in range(self.n_components)])

    def packed(self):
        """Flat arrays consumed by the compiled integrals."""
        return (self.comp, self.coef, self.alpha, np.ascontiguousarray(self.center),
                self.p0, np.ascontiguousarray(self.p1), self.p2)

    # algebra ----------------------------------------------------------------
    def _check_compatible(self, other: "DistributionField"):
        if not isinstance(other, DistributionField):
            return NotImplemented
        if other.n_components != self.n_components:
            raise ValueError("component counts differ")
        return None

    def __add__(self, other: "DistributionField") -> "DistributionField":
        bad = self._check_compatible(other)
        if bad is NotImplemented:
            return bad
        cat = np.concatenate
        return DistributionField(
            self.n_components, cat([self.comp, other.comp]), cat([self.coef, other.coef]),
            cat([self.alpha, other.alpha]), cat([self.center, other.center]),
            cat([self.p0, other.p0]), cat([self.p1, other.p1]), cat([self.p2, other.p2]),
        )

    def __mul__(self, c: float) -> "DistributionField":
        if not np.isscalar(c):
            return NotImplemented
        return DistributionField(self.n_components, self.comp, self.coef * float(c), self.alpha,
                                 self.center, self.p0, self.p1, self.p2, self.label)

    __rmul__ = __mul__

    def __neg__(self) -> "DistributionField":
        return self * -1.0

    def __sub__(self, other: "DistributionField") -> "DistributionField":
        return self + (-other)

    def times_gaussian(self, scale, beta) -> "DistributionField":
        """Multiply component ``i`` by ``scale[i] * exp(-beta[i] |xi|^2)``."""
        scale = np.broadcast_to(np.asarray(scale, float), (self.n_components,))[self.comp]
        beta = np.broadcast_to(np.asarray(beta, float), (self.n_components,))[self.comp]
        a = self.alpha
        a_new = a + beta
        safe = np.where(a_new > 0, a_new, 1.0)
        center = np.where((a_new > 0)[:, None], self.center * (a / safe)[:, None], self.center)
        shift = np.where(a_new > 0, a * beta / safe, 0.0) * _sqnorm(self.center)
        return DistributionField(self.n_components, self.comp, self.coef * scale * np.exp(-shift),
                                 a_new, center, self.p0, self.p1, self.p2, self.label)


def maxwellian_field_poly(gas: PolyatomicGas) -> DistributionField:
    r = gas.r
    return DistributionField.gaussian(r, np.arange(r), gas.maxwellian_coef(), 0.5 * gas.m,
                                      label="M")


def sqrt_maxwellian_field_poly(gas: PolyatomicGas) -> DistributionField:
    r = gas.r
    return DistributionField.gaussian(r, np.arange(r), np.sqrt(gas.maxwellian_coef()),
                                      0.25 * gas.m, label="M^1/2")


def maxwellian_field_mix(mix: MixtureSpec) -> DistributionField:
    s = mix.s
    return DistributionField.gaussian(s, np.arange(s), mix.maxwellian_coef(), 0.5 * mix.m_arr,
                                      label="M")


def sqrt_maxwellian_field_mix(mix: MixtureSpec) -> DistributionField:
    s = mix.s
    return DistributionField.gaussian(s, np.arange(s), np.sqrt(mix.maxwellian_coef()),
                                      0.25 * mix.m_arr, label="M^1/2")


def general_maxwellian_poly(gas: PolyatomicGas, n: float = 1.0, u=(0.0, 0.0, 0.0),
                            T: float = 1.0) -> DistributionField:
    """Maxwellian with density ``n``, bulk velocity ``u`` and temperature ``T``.

    ``f_i = n phi_i exp(-I_i/T) / q * (m / (2 pi T))^{3/2} exp(-m |xi - u|^2 / (2T))``
    with ``q = sum_i phi_i exp(-I_i / T)``. Used only as input to the
    nonlinear (conservation and entropy) checks.
    """
    if n <= 0 or T <= 0:
        raise ValueError("density and temperature must be positive")
    w = gas.phi_arr * np.exp(-gas.I_arr / T)
    coef = n * w / w.sum() * (gas.m / (TWO_PI * T)) ** 1.5
    return DistributionField.gaussian(gas.r, np.arange(gas.r), coef, gas.m / (2.0 * T),
                                      center=np.asarray(u, float))


# ---------------------------------------------------------------------------
# collision invariants


@dataclass(frozen=True)
class CollisionInvariantBasis:
    fields: tuple
    names: tuple

    @property
    def count(self) -> int:
        return len(self.fields)

    def __iter__(self):
        return iter(self.fields)

    def __len__(self) -> int:
        return len(self.fields)

    def __getitem__(self, k: int) -> DistributionField:
        return self.fields[k]

    def sample(self, nodes) -> np.ndarray:
        """Stack of field values, shape ``(count, n_components, n_nodes)``."""
        return np.stack([f.values(nodes) for f in self.fields])


def _poly_field(ncomp, p0, p1=(0.0, 0.0, 0.0), p2=0.0, label=""):
    p0 = np.broadcast_to(np.asarray(p0, float), (ncomp,))
    return DistributionField(ncomp, np.arange(ncomp), 1.0, 0.0, np.zeros(3), p0, p1, p2, label)


_MOMENTUM_NAMES = ("momentum_x", "momentum_y", "momentum_z")


def invariants_poly(gas: PolyatomicGas) -> CollisionInvariantBasis:
    """The five invariants ``1, xi_x, xi_y, xi_z, m|xi|^2 + 2 I``."""
    r = gas.r
    fields = [_poly_field(r, 1.0, label="mass")]
    for d in range(3):
        e = np.zeros(3)
        e[d] = 1.0
        fields.append(_poly_field(r, 0.0, e, label=_MOMENTUM_NAMES[d]))
    fields.append(_poly_field(r, 2.0 * gas.I_arr, p2=gas.m, label="energy"))
    return CollisionInvariantBasis(tuple(fields), tuple(f.label for f in fields))


def invariants_mix(mix: MixtureSpec) -> CollisionInvariantBasis:
    """The ``s + 4`` invariants ``e_1..e_s, m xi_x, m xi_y, m xi_z, m|xi|^2``."""
    s = mix.s
    m = mix.m_arr
    fields = []
    for a in range(s):
        fields.append(_poly_field(s, np.eye(s)[a], label=f"number_{a}"))
    for d in range(3):
        # momentum carries a species dependent linear coefficient, one term each
        p1 = np.zeros((s, 3))
        p1[:, d] = m
        fields.append(DistributionField(s, np.arange(s), 1.0, 0.0, np.zeros(3), 0.0, p1, 0.0,
                                        _MOMENTUM_NAMES[d]))
    fields.append(DistributionField(s, np.arange(s), 1.0, 0.0, np.zeros(3), 0.0, np.zeros(3),
                                    m, "energy"))
    return CollisionInvariantBasis(tuple(fields), tuple(f.label for f in fields))


def linearized_kernel_basis_poly(gas: PolyatomicGas) -> CollisionInvariantBasis:
    """``M^{1/2} psi`` for every invariant ``psi``: a basis of ker L."""
    sq = np.sqrt(gas.maxwellian_coef())
    basis = invariants_poly(gas)
    fields = tuple(f.times_gaussian(sq, 0.25 * gas.m) for f in basis)
    return CollisionInvariantBasis(fields, basis.names)


def linearized_kernel_basis_mix(mix: MixtureSpec) -> CollisionInvariantBasis:
    sq = np.sqrt(mix.maxwellian_coef())
    basis = invariants_mix(mix)
    fields = tuple(f.times_gaussian(sq, 0.25 * mix.m_arr) for f in basis)
    return CollisionInvariantBasis(fields, basis.names)

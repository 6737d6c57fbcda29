"""Integration rules: unit sphere, graded polar plane, Cartesian velocity grid."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

MAX_SPHERE_ORDER = 256


@lru_cache(maxsize=64)
def _leggauss(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(n: int, a: float = -1.0, b: float = 1.0):
    """Gauss-Legendre nodes and weights on ``[a, b]``."""
    x, w = _leggauss(int(n))
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def composite_gauss_legendre(edges, n: int):
    """Panel-wise Gauss-Legendre rule over consecutive ``edges``."""
    edges = np.asarray(edges, dtype=float)
    xs, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        if b > a:
            x, w = gauss_legendre(n, a, b)
            xs.append(x)
            ws.append(w)
    if not xs:
        return np.zeros(0), np.zeros(0)
    return np.concatenate(xs), np.concatenate(ws)


def orthonormal_frame(axis) -> tuple[np.ndarray, np.ndarray]:
    """Unit vectors ``e1, e2`` completing ``axis`` to a right-handed frame.

    ``e1`` depends on ``axis`` only up to sign, so ``axis`` and ``-axis`` share
    ``e1`` while ``e2`` flips. Quadrature rules built on this frame are
    therefore mapped onto themselves by ``axis -> -axis``, which is what makes
    the kernel swap symmetries hold node by node.
    """
    a = np.asarray(axis, dtype=float)
    a = a / np.linalg.norm(a)
    ref = np.zeros(3)
    ref[int(np.argmin(np.abs(a)))] = 1.0
    e1 = ref - (ref @ a) * a
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(a, e1)
    return e1, e2


@dataclass(frozen=True)
class SphereRule:
    """Product rule on the unit sphere: Gauss-Legendre in ``cos theta``
    times ``2 * order`` equispaced azimuths (offset by half a step).

    Exact for spherical polynomials of degree ``<= 2 * order - 1``. The node
    set is invariant under ``omega -> -omega``.
    """

    order: int
    t: np.ndarray
    wt: np.ndarray
    azim: np.ndarray
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def size(self) -> int:
        return len(self.weights)

    @property
    def degree(self) -> int:
        return 2 * self.order - 1

    def oriented(self, axis) -> np.ndarray:
        """Nodes with the rule's pole rotated onto ``axis``."""
        a = np.asarray(axis, dtype=float)
        a = a / np.linalg.norm(a)
        e1, e2 = orthonormal_frame(a)
        s = np.sqrt(np.maximum(1.0 - self.t**2, 0.0))
        ct, st = np.cos(self.azim), np.sin(self.azim)
        nodes = (self.t[:, None, None] * a
                 + s[:, None, None] * (ct[None, :, None] * e1 + st[None, :, None] * e2))
        return nodes.reshape(-1, 3)

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))


def sphere_rule(order: int) -> SphereRule:
    order = int(order)
    if not 1 <= order <= MAX_SPHERE_ORDER:
        raise ValueError(f"unsupported sphere rule order {order}")
    t, wt = _leggauss(order)
    n_az = 2 * order
    azim = (np.arange(n_az) + 0.5) * (2.0 * np.pi / n_az)
    s = np.sqrt(1.0 - t**2)
    nodes = np.stack([
        s[:, None] * np.cos(azim)[None, :],
        s[:, None] * np.sin(azim)[None, :],
        np.broadcast_to(t[:, None], (order, n_az)),
    ], axis=-1).reshape(-1, 3)
    weights = np.repeat(wt * (2.0 * np.pi / n_az), n_az)
    for a in (nodes, weights, azim):
        a.setflags(write=False)
    return SphereRule(order, t, wt, azim, nodes, weights)


@dataclass(frozen=True)
class PlaneRule:
    """Polar rule on a plane, graded towards its centre.

    Radial nodes ``r = R_max * t**p`` with ``t`` Gauss-Legendre on ``(0, 1)``
    and grading exponent ``p = 2 / gamma``, so ``r**(gamma - 2) dA`` becomes a
    polynomial in ``t``. Angular nodes are equispaced and offset by half a
    step, which keeps the node set invariant under ``theta -> -theta``.
    """

    n_radial: int
    n_angular: int
    R_max: float
    gamma: float
    grading: float
    r: np.ndarray
    theta: np.ndarray
    weights: np.ndarray  # shape (n_radial, n_angular), includes r dr dtheta

    @property
    def size(self) -> int:
        return self.n_radial * self.n_angular

    def points(self, center=(0.0, 0.0, 0.0), normal=(0.0, 0.0, 1.0)) -> np.ndarray:
        """Nodes embedded in 3D on the plane through ``center`` normal to ``normal``."""
        e1, e2 = orthonormal_frame(normal)
        ct, st = np.cos(self.theta), np.sin(self.theta)
        d = ct[None, :, None] * e1 + st[None, :, None] * e2
        pts = np.asarray(center, float) + self.r[:, None, None] * d
        return pts.reshape(-1, 3)

    def integrate(self, func) -> float:
        """Integrate ``func(x, y)`` over the plane (coordinates in the rule frame)."""
        x = self.r[:, None] * np.cos(self.theta)[None, :]
        y = self.r[:, None] * np.sin(self.theta)[None, :]
        return float(np.sum(self.weights * func(x, y)))


def plane_rule(n_radial: int = 32, n_angular: int = 16, R_max: float = 8.0,
               gamma: float = 0.5) -> PlaneRule:
    if not 0.0 < gamma < 1.0:
        raise ValueError("gamma must lie in (0, 1)")
    if R_max <= 0:
        raise ValueError("R_max must be positive")
    if n_radial < 1 or n_angular < 1:
        raise ValueError("node counts must be positive")
    p = 2.0 / gamma
    t, wt = gauss_legendre(n_radial, 0.0, 1.0)
    r = R_max * t**p
    dr = R_max * p * t ** (p - 1.0) * wt
    theta = (np.arange(n_angular) + 0.5) * (2.0 * np.pi / n_angular)
    weights = (dr * r)[:, None] * np.full(n_angular, 2.0 * np.pi / n_angular)[None, :]
    for a in (r, theta, weights):
        a.setflags(write=False)
    return PlaneRule(int(n_radial), int(n_angular), float(R_max), float(gamma), p, r, theta,
                     weights)


@dataclass(frozen=True)
class VelocityGrid:
    """Uniform midpoint grid on ``[-R, R]^3`` with ``N`` nodes per axis."""

    N: int
    R: float
    h: float
    nodes: np.ndarray
    weights: np.ndarray
    index: np.ndarray

    @property
    def size(self) -> int:
        return self.N**3

    @property
    def weight(self) -> float:
        return self.h**3

    @property
    def odd_coords(self) -> np.ndarray:
        """Integer coordinates ``2 * index - (N - 1)``; node = ``odd * h / 2``."""
        return 2 * self.index - (self.N - 1)

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))

    def to_dict(self) -> dict:
        return {"N": self.N, "R": self.R}


def build_grid(N: int, R: float) -> VelocityGrid:
    if isinstance(N, bool) or int(N) != N:
        raise ValueError("N must be an integer")
    N = int(N)
    if N < 2 or N % 2:
        raise ValueError(f"N must be an even integer >= 2 (got {N}); odd N would put a "
                         "node at the origin and break the xi -> -xi pairing")
    if not R > 0:
        raise ValueError("R must be positive")
    h = 2.0 * R / N
    ax = -R + h * (np.arange(N) + 0.5)
    idx = np.stack(np.meshgrid(np.arange(N), np.arange(N), np.arange(N), indexing="ij"),
                   axis=-1).reshape(-1, 3)
    nodes = ax[idx]
    weights = np.full(N**3, h**3)
    for a in (nodes, weights, idx):
        a.setflags(write=False)
    return VelocityGrid(N, float(R), h, nodes, weights, idx)


def gauss_hermite_3d(n: int, scale: float, center=(0.0, 0.0, 0.0)):
    """Tensor rule for ``int f(x) dx`` over R^3, exact for ``poly * exp(-|x-c|^2/scale^2)``."""
    x, w = np.polynomial.hermite.hermgauss(int(n))
    g = np.stack(np.meshgrid(x, x, x, indexing="ij"), axis=-1).reshape(-1, 3)
    wg = (w[:, None, None] * w[None, :, None] * w[None, None, :]).ravel()
    pts = np.asarray(center, float) + scale * g
    weights = wg * np.exp(np.sum(g * g, axis=1)) * scale**3
    return pts, weights

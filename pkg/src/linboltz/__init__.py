"""Linearized Boltzmann collision operators for polyatomic gases and mixtures."""

from ._backend import get_backend, set_backend, set_threads, use_backend
from .cross_sections import (CrossSectionModel, MixBounded, MixHardSphere, PolyBounded,
                             PolyHardSphere)
from .gas_models import (CollisionInvariantBasis, DistributionField, MixtureSpec,
                         PolyatomicGas)
from .quadrature import VelocityGrid, build_grid

__version__ = "0.1.0"

__all__ = [
    "CollisionInvariantBasis",
    "CrossSectionModel",
    "DistributionField",
    "MixBounded",
    "MixHardSphere",
    "MixtureSpec",
    "PolyBounded",
    "PolyHardSphere",
    "PolyatomicGas",
    "VelocityGrid",
    "build_grid",
    "get_backend",
    "set_backend",
    "set_threads",
    "use_backend",
]

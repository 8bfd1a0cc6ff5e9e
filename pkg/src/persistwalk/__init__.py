"""Persistent random walks whose increments carry variable-length memory.

The package is organised around the letter/memory chain: ``model`` and
``alphas`` parameterise it, ``chain`` simulates it, ``invariant`` computes
its stationary law, ``vlmc`` maps it to comb context trees, ``exact``
delivers finite-time walk laws, ``asymptotics`` the drift and central limit
constants, and ``gitn`` the scaling limit (generalized integrated telegraph
noise) with its Laplace transform.
"""

from .alphas import (
    AlphaSequence,
    ConstantAlpha,
    CustomAlpha,
    PoissonLikeAlpha,
    ScaledHazardAlpha,
    TableAlpha,
)
from .errors import (
    ConfigError,
    ConvergenceError,
    DomainError,
    NoInvariantMeasureError,
    PersistwalkError,
)
from .hazards import ConstantHazard, Hazard, ParetoHazard, QuadratureHazard, WeibullHazard
from .model import INFINITE_MEMORY, MINUS, PLUS, ChainState, ModelSpec, two_letter_spec
from .rng import DEFAULT_SEED, make_rng, split_rngs

__version__ = "0.1.0"

__all__ = [
    "AlphaSequence",
    "ConstantAlpha",
    "CustomAlpha",
    "PoissonLikeAlpha",
    "ScaledHazardAlpha",
    "TableAlpha",
    "ConfigError",
    "ConvergenceError",
    "DomainError",
    "NoInvariantMeasureError",
    "PersistwalkError",
    "Hazard",
    "ConstantHazard",
    "WeibullHazard",
    "ParetoHazard",
    "QuadratureHazard",
    "INFINITE_MEMORY",
    "MINUS",
    "PLUS",
    "ChainState",
    "ModelSpec",
    "two_letter_spec",
    "DEFAULT_SEED",
    "make_rng",
    "split_rngs",
    "__version__",
]

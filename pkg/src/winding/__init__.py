"""Density of the winding angle of planar Brownian motion, its large-time
expansions, and a Monte Carlo cross-check."""

__version__ = "0.1.0"

from .density import density, density_f1, density_f2, interval_probability, total_mass
from .errors import (
    DegenerateDenominator,
    DomainError,
    HypothesisViolated,
    InvalidBins,
    InvalidRange,
    NonConvergence,
    StepBudgetExceeded,
    WindingError,
)
from .numerics import QuadratureSpec

__all__ = [
    "density", "density_f1", "density_f2", "interval_probability", "total_mass",
    "QuadratureSpec", "WindingError", "DomainError", "InvalidRange", "HypothesisViolated",
    "DegenerateDenominator", "InvalidBins", "NonConvergence", "StepBudgetExceeded",
]

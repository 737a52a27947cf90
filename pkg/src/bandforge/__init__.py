"""Density of states, band edges and bound states of periodic-tail tridiagonal Hamiltonians."""

from bandforge.coefficients import (
    Asymptotics,
    CoefficientModel,
    asymptotics,
    coefficients,
    estimate_asymptotics,
    validate_model,
)
from bandforge.greens import (
    SecondKindSeed,
    band_structure,
    bound_state_weight,
    density,
    density_curve,
    density_second_kind,
    find_poles,
    g00,
    normalization,
)
from bandforge.polynomials import bound_states, classify_zeros, evaluate, zeros
from bandforge.terminator import BandStructure, band_boundaries, discriminant, terminator

__all__ = [
    "Asymptotics", "BandStructure", "CoefficientModel", "SecondKindSeed",
    "asymptotics", "band_boundaries", "band_structure", "bound_state_weight", "bound_states", "classify_zeros",
    "coefficients", "density", "density_curve", "density_second_kind", "discriminant",
    "estimate_asymptotics", "evaluate", "find_poles", "g00", "normalization", "terminator",
    "validate_model", "zeros",
]

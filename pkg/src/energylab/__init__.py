"""Riesz and logarithmic energy configurations on spheres S^d.

Modules
-------
specfun   special functions (digamma, 2F1, Hurwitz/Epstein zeta, Stieltjes constants)
theory    closed-form constants, bounds and conjectured coefficients
energy    discrete energies, gradients, circle energies and their expansion
optimize  projected-gradient multistart optimizer
harness   remainder sequences, bound checks, fits and reports
cli       the ``energylab`` command
"""
from .energy import EnergyKind, circle_exact, circle_expansion, energy_gradient, log_energy, riesz_energy
from .exceptions import (
    DomainError,
    EnergyLabError,
    ParseError,
    PoleError,
    SingularConfigurationError,
    StagnationError,
    UnsupportedCaseError,
)
from .harness import AsymptoticExpansionRegressor, EnergyTable, fit_constants, verify_bounds
from .optimize import OptimizerSettings, SphereEnergyMinimizer, minimize, multistart
from .theory import TheoryConstant, get_constant

__version__ = "0.1.0"

__all__ = [
    "AsymptoticExpansionRegressor",
    "DomainError",
    "EnergyKind",
    "EnergyLabError",
    "EnergyTable",
    "OptimizerSettings",
    "ParseError",
    "PoleError",
    "SingularConfigurationError",
    "SphereEnergyMinimizer",
    "StagnationError",
    "TheoryConstant",
    "UnsupportedCaseError",
    "circle_exact",
    "circle_expansion",
    "energy_gradient",
    "fit_constants",
    "get_constant",
    "log_energy",
    "minimize",
    "multistart",
    "riesz_energy",
    "verify_bounds",
]

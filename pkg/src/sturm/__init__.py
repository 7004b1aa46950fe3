"""Bound states and resonances of Coulomb plus short-range potentials in a
Coulomb-Sturmian basis, for the Schrödinger, Klein-Gordon and squared-Dirac
radial equations."""

from __future__ import annotations

from .csbasis import BasisParams, RadialPotential, Term, potential_matrix, separable_truncate
from .effective import DiracCoupling, Equation, EquationKind, effective_channel
from .errors import (
    ConditioningError,
    ConfigError,
    ConvergenceError,
    DomainError,
    MultiplicityError,
    PoleProximityError,
    SturmError,
    SupercriticalChargeError,
)
from .greens import GreensWorkspace, PhysicalConstants, Sheet, greens_inverse, greens_matrix, tail_correction
from .solver import (
    DeterminantEvaluator,
    Problem,
    RootResult,
    convergence_study,
    determinant,
    expectation_value,
    find_bound_states,
    find_resonances,
    solve,
    state_vector,
)

__version__ = "0.1.0"

__all__ = [
    "BasisParams",
    "ConditioningError",
    "ConfigError",
    "ConvergenceError",
    "DeterminantEvaluator",
    "DiracCoupling",
    "DomainError",
    "Equation",
    "EquationKind",
    "GreensWorkspace",
    "MultiplicityError",
    "PhysicalConstants",
    "PoleProximityError",
    "Problem",
    "RadialPotential",
    "RootResult",
    "Sheet",
    "SturmError",
    "SupercriticalChargeError",
    "Term",
    "convergence_study",
    "determinant",
    "effective_channel",
    "expectation_value",
    "find_bound_states",
    "find_resonances",
    "greens_inverse",
    "greens_matrix",
    "potential_matrix",
    "separable_truncate",
    "solve",
    "state_vector",
    "tail_correction",
]

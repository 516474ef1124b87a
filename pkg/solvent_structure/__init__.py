"""Linearized beam + viscous solvent step, pressure recovery and the inner fixed point."""

from .compatibility import CompatibilityReport, check_compatibility, compatible_forcing
from .energy import energy_monitor
from .inner import InnerResult, inner_fixed_point
from .linear_step import LinearStepOperator, solve_linear_step, solve_stokes, step_operator
from .perturbation import assemble_perturbation_terms
from .pressure import initial_pressure, recover_pressure, solve_robin
from .state import Dataset, FlowState, PerturbationTerms, PhysicalParams, PressureDecomposition

__all__ = [
    "CompatibilityReport",
    "Dataset",
    "FlowState",
    "InnerResult",
    "LinearStepOperator",
    "PerturbationTerms",
    "PhysicalParams",
    "PressureDecomposition",
    "assemble_perturbation_terms",
    "check_compatibility",
    "compatible_forcing",
    "energy_monitor",
    "initial_pressure",
    "inner_fixed_point",
    "recover_pressure",
    "solve_linear_step",
    "solve_robin",
    "solve_stokes",
    "step_operator",
]

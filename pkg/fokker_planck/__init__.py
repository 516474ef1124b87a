"""Pulled-back Fokker–Planck solver and its runtime monitors."""

from .drag import DragMode, drag_matrix, skew_gradient, velocity_gradient
from .monitors import (
    EnergyReport,
    Extrema,
    TimeDerivativeMonitor,
    energy_report,
    extrema,
    solute_mass,
    time_derivative_monitor,
)
from .stepper import FpStepInput, flow_face_fluxes, initial_rate, step_fp

__all__ = [
    "DragMode",
    "EnergyReport",
    "Extrema",
    "FpStepInput",
    "TimeDerivativeMonitor",
    "drag_matrix",
    "energy_report",
    "extrema",
    "flow_face_fluxes",
    "initial_rate",
    "skew_gradient",
    "solute_mass",
    "step_fp",
    "time_derivative_monitor",
    "velocity_gradient",
]

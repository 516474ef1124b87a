"""Outer solute–solvent fixed point, window management and global extension."""

from .global_run import CRITERIA, GlobalRun, Termination, global_extend, termination_check
from .norms import NormReport, x_components, y_components, y_distance, y_norm
from .outer import (
    CoupledState,
    DriveResult,
    OuterProblem,
    OuterResult,
    fixed_point_drive,
    fp_along,
    outer_map,
)

__all__ = [
    "CRITERIA",
    "CoupledState",
    "DriveResult",
    "GlobalRun",
    "NormReport",
    "OuterProblem",
    "OuterResult",
    "Termination",
    "fixed_point_drive",
    "fp_along",
    "global_extend",
    "outer_map",
    "termination_check",
    "x_components",
    "y_components",
    "y_distance",
    "y_norm",
]

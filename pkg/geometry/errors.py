# -*- coding: utf-8 -*-
"""Exception hierarchy shared by every simulation package."""

from __future__ import annotations


class SimulationError(RuntimeError):
    """Base class for failures raised by the solver packages."""


class DegenerateGeometry(SimulationError):
    """The deformed geometry can no longer be represented on the grid."""


class OutsideTube(DegenerateGeometry):
    """Point lies outside the tubular neighbourhood of the boundary."""


class AmbiguousProjection(DegenerateGeometry):
    """Foot point on the boundary is not unique."""


class DegenerateMap(DegenerateGeometry):
    """Hanzawa map lost orientation (min J <= 0)."""

    def __init__(self, message: str, min_jacobian: float | None = None) -> None:
        super().__init__(message)
        self.min_jacobian = min_jacobian


class TubeExit(DegenerateMap):
    """Displacement left the tube: ‖η‖_∞ ≥ L."""

    criterion = "sup_norm"

    def __init__(self, message: str, sup_norm: float) -> None:
        super().__init__(message)
        self.value = sup_norm


class DegenerateBoundary(DegenerateGeometry):
    """Deformed boundary approaches a self-intersection.

    ``criterion`` names the check that fired: ``arc_length``,
    ``normal_alignment``, ``sup_norm`` or ``pressure_constant``.
    """

    def __init__(self, message: str, criterion: str, value: float | None = None) -> None:
        super().__init__(message)
        self.criterion = criterion
        self.value = value


class InadmissibleDisplacement(DegenerateGeometry):
    """Displacement violates the sup-norm or gradient bound."""


class DomainError(SimulationError, ValueError):
    """Argument lies outside the configuration ball or the potential's domain."""


class CflViolation(SimulationError):
    """Explicit transport or drag step would exceed its stability limit."""

    def __init__(self, message: str, courant: float | None = None) -> None:
        super().__init__(message)
        self.courant = courant


class SolverDivergence(SimulationError):
    """A linear solve returned a residual above tolerance or non-finite values."""


class NoContraction(SimulationError):
    """Fixed-point iteration failed to contract before the window underflowed."""

    def __init__(self, message: str, window: int | None = None, factor: float | None = None) -> None:
        super().__init__(message)
        self.window = window
        self.factor = factor


class ShapeMismatch(SimulationError, ValueError):
    """Two fields compared on different grids."""


class ConfigError(ValueError):
    """Invalid run configuration."""


class IoError(OSError):
    """Checkpoint, dump or summary could not be written or read."""

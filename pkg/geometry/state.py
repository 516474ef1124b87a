# -*- coding: utf-8 -*-
"""Beam displacement on the periodic boundary grid."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InadmissibleDisplacement


@dataclass(frozen=True)
class StructureState:
    """Displacement ``eta`` and velocity ``eta_dot`` at the ω-nodes ``y_j = jΔy``.

    Only the ``n`` distinct nodes are stored, so the identified endpoints of
    the periodic grid agree by construction.
    """

    eta: np.ndarray
    eta_dot: np.ndarray
    time: float = 0.0
    eta_ddot: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        eta = np.array(self.eta, dtype=float)
        eta_dot = np.array(self.eta_dot, dtype=float)
        if eta.ndim != 1 or eta.shape != eta_dot.shape:
            raise ValueError("eta and eta_dot must be 1-D arrays of equal length")
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "eta_dot", eta_dot)
        if self.eta_ddot is not None:
            object.__setattr__(self, "eta_ddot", np.array(self.eta_ddot, dtype=float))

    @classmethod
    def zeros(cls, n: int, time: float = 0.0) -> "StructureState":
        return cls(np.zeros(n), np.zeros(n), time)

    @property
    def n(self) -> int:
        return self.eta.size

    def periodic_values(self) -> np.ndarray:
        """Displacement with the first node repeated at y = 2π."""
        return np.append(self.eta, self.eta[0])

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.eta))) if self.eta.size else 0.0

    def check_admissible(self, safety_margin: float) -> None:
        if self.sup_norm() >= safety_margin:
            raise InadmissibleDisplacement(
                f"‖eta‖_∞ = {self.sup_norm():.4g} is not below the safety margin {safety_margin}"
            )

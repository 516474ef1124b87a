# -*- coding: utf-8 -*-
"""Window norms of distribution trajectories.

Ȳ over a window [t₀, t₀ + T] (snapshots every step, trapezoid in time):

    sup_t ‖f‖_{L²(Ω;L²_M)}
    + (∫ ‖f‖² + ‖∇_x f‖² dt)^{1/2}       L²(W^{1,2}(Ω;L²_M))
    + (∫ ‖f‖² + ‖∇_q f‖² dt)^{1/2}       L²(L²(Ω;H¹_M))
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from configspace.fene import FeneModel
from configspace.norms import weighted_norms
from configspace.state import DistributionState
from geometry.domain import PolarGrid
from geometry.errors import ShapeMismatch


def _arrays(trajectory) -> list[np.ndarray]:
    return [s.f_hat if isinstance(s, DistributionState) else np.asarray(s, dtype=float) for s in trajectory]


def _trapezoid(values: Sequence[float], dt: float) -> float:
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        return 0.0
    return float(dt * (values.sum() - 0.5 * (values[0] + values[-1])))


def y_components(
    trajectory,
    model: FeneModel,
    grid: PolarGrid,
    dt: float,
    volumes: np.ndarray | None = None,
) -> dict[str, float]:
    """The three parts of the Ȳ norm of one trajectory."""
    norms = [weighted_norms(f, model, grid, volumes) for f in _arrays(trajectory)]
    l2 = [n.l2**2 for n in norms]
    return {
        "sup_l2": float(np.sqrt(max(l2))) if l2 else 0.0,
        "w12": float(np.sqrt(_trapezoid([a + n.grad_x**2 for a, n in zip(l2, norms)], dt))),
        "h1m": float(np.sqrt(_trapezoid([a + n.grad_q**2 for a, n in zip(l2, norms)], dt))),
    }


def y_norm(trajectory, model: FeneModel, grid: PolarGrid, dt: float, volumes: np.ndarray | None = None) -> float:
    return float(sum(y_components(trajectory, model, grid, dt, volumes).values()))


def y_distance(
    first,
    second,
    model: FeneModel,
    grid: PolarGrid,
    dt: float,
    volumes: np.ndarray | None = None,
) -> float:
    """Ȳ norm of the difference of two trajectories on the same grids and times."""
    a, b = _arrays(first), _arrays(second)
    if len(a) != len(b):
        raise ShapeMismatch(f"trajectories hold {len(a)} and {len(b)} snapshots")
    for x, y in zip(a, b):
        if x.shape != y.shape:
            raise ShapeMismatch(f"snapshot shapes {x.shape} and {y.shape} differ")
    return y_norm([x - y for x, y in zip(a, b)], model, grid, dt, volumes)


def x_components(
    trajectory,
    model: FeneModel,
    grid: PolarGrid,
    dt: float,
    volumes: np.ndarray | None = None,
) -> dict[str, float]:
    """sup/integral terms of the stronger X norm: sup ‖f‖_{W^{1,2}}, ∫‖∂_t f‖², ∫‖∇_q f‖²."""
    arrays = _arrays(trajectory)
    norms = [weighted_norms(f, model, grid, volumes) for f in arrays]
    vol = grid.volumes.ravel() if volumes is None else np.asarray(volumes, dtype=float).ravel()
    rates = [
        float(vol @ ((((b - a) / dt) ** 2) @ model.weights)) for a, b in zip(arrays[:-1], arrays[1:])
    ]
    return {
        "sup_w12": float(np.sqrt(max(n.l2**2 + n.grad_x**2 for n in norms))) if norms else 0.0,
        "dt_l2": float(np.sqrt(dt * sum(rates))),
        "grad_q_l2": float(np.sqrt(_trapezoid([n.grad_q**2 for n in norms], dt))),
    }


@dataclass(frozen=True)
class NormReport:
    """One outer iteration: Ȳ distance to the previous iterate, X-norm parts, contraction factor."""

    iteration: int
    y_norm: float
    x_norm_components: dict[str, float] = field(default_factory=dict)
    contraction_rho: float | None = None

    def __post_init__(self) -> None:
        if self.y_norm < 0.0 or any(v < 0.0 for v in self.x_norm_components.values()):
            raise ValueError("norm components must be non-negative")
        if self.iteration < 2 and self.contraction_rho is not None:
            raise ValueError("contraction factor is defined from the second iteration on")

    def as_dict(self) -> dict:
        row = asdict(self)
        row.update(row.pop("x_norm_components"))
        return row

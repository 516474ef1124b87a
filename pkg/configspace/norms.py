# -*- coding: utf-8 -*-
"""Discrete Maxwellian-weighted norms on Ω × B."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from geometry.domain import PolarGrid

from .fene import FeneModel
from .state import DistributionState


class WeightedNorms(NamedTuple):
    l2: float
    grad_x: float
    grad_q: float


def _values(f) -> np.ndarray:
    return f.f_hat if isinstance(f, DistributionState) else np.asarray(f, dtype=float)


def x_gradient_sq(f_hat: np.ndarray, grid: PolarGrid) -> np.ndarray:
    """|∇_x f̂|² per (x, q) cell with mirrored ghosts at the outer wall."""
    grad = grid.gradient(f_hat.reshape(grid.shape + (-1,)), bc="neumann")
    return np.sum(grad**2, axis=-1).reshape(f_hat.shape)


def q_gradient_sq(f_hat: np.ndarray, model: FeneModel) -> np.ndarray:
    """|∇_q f̂|² per (x, q) cell; one-sided at the rim."""
    qgrid = model.grid
    moved = np.moveaxis(f_hat, 1, 0).reshape(qgrid.shape + (-1,))
    grad = qgrid.gradient(moved, bc="extrapolate")
    sq = np.sum(grad**2, axis=-1).reshape(qgrid.size, -1)
    return np.moveaxis(sq, 0, 1)


def weighted_norms(
    f: DistributionState | np.ndarray,
    model: FeneModel,
    grid: PolarGrid,
    volumes: np.ndarray | None = None,
) -> WeightedNorms:
    """(‖f̂‖_{L²(Ω;L²_M)}, ‖∇_x f̂‖_{L²(Ω;L²_M)}, ‖∇_q f̂‖_{L²(Ω;L²_M)}).

    ``volumes`` defaults to the reference cell areas; pass mapped areas to
    measure on the deformed domain.
    """
    f_hat = _values(f)
    vol = grid.volumes.ravel() if volumes is None else np.asarray(volumes, dtype=float).ravel()
    m = model.weights

    def _integrate(values: np.ndarray) -> float:
        return float(np.sqrt(max(vol @ (values @ m), 0.0)))

    return WeightedNorms(
        _integrate(f_hat**2),
        _integrate(x_gradient_sq(f_hat, grid)),
        _integrate(q_gradient_sq(f_hat, model)),
    )


def pointwise_weighted_norm(f: DistributionState | np.ndarray, model: FeneModel) -> np.ndarray:
    """‖f̂(x, ·)‖_{L²_M} for each x-cell."""
    f_hat = _values(f)
    return np.sqrt(np.maximum((f_hat**2) @ model.weights, 0.0))

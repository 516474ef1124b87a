# -*- coding: utf-8 -*-
"""Kramers elastic stress S(x) = ∫_B M f̂ U'(|q|²/2) q ⊗ q dq."""

from __future__ import annotations

import numpy as np

from .fene import FeneModel
from .state import DistributionState


def kramers_stress(f: DistributionState | np.ndarray, model: FeneModel) -> np.ndarray:
    """Symmetric stress per x-cell, shape (n_x, 2, 2)."""
    f_hat = f.f_hat if isinstance(f, DistributionState) else np.asarray(f, dtype=float)
    k = model.kramers_tensors
    s11 = f_hat @ k[:, 0, 0]
    s12 = f_hat @ k[:, 0, 1]
    s22 = f_hat @ k[:, 1, 1]
    stress = np.empty(f_hat.shape[:-1] + (2, 2))
    stress[..., 0, 0] = s11
    stress[..., 0, 1] = stress[..., 1, 0] = s12
    stress[..., 1, 1] = s22
    return stress


def stress_on_grid(f: DistributionState | np.ndarray, model: FeneModel, shape: tuple[int, int]) -> np.ndarray:
    """Kramers stress reshaped onto the (n_r, n_theta) reference grid."""
    return kramers_stress(f, model).reshape(tuple(shape) + (2, 2))

# -*- coding: utf-8 -*-
"""Maxwellian-normalized density on the product grid Ω × B."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class DistributionState:
    """``f_hat[x, q] = f / M`` on reference x-cells times configuration cells.

    ``f_hat_dot`` is the backward difference of the last step; it is zero
    for an initial state.
    """

    f_hat: np.ndarray
    f_hat_dot: np.ndarray | None = field(default=None, compare=False)
    time: float = 0.0

    def __post_init__(self) -> None:
        f_hat = np.array(self.f_hat, dtype=float)
        if f_hat.ndim != 2:
            raise ValueError(f"f_hat must be 2-D (x-cells, q-cells), got shape {f_hat.shape}")
        object.__setattr__(self, "f_hat", f_hat)
        rate = np.zeros_like(f_hat) if self.f_hat_dot is None else np.array(self.f_hat_dot, dtype=float)
        if rate.shape != f_hat.shape:
            raise ValueError("f_hat_dot must match f_hat")
        object.__setattr__(self, "f_hat_dot", rate)

    @classmethod
    def constant(cls, n_x: int, n_q: int, value: float = 1.0, time: float = 0.0) -> "DistributionState":
        return cls(np.full((n_x, n_q), float(value)), time=time)

    @property
    def shape(self) -> tuple[int, int]:
        return self.f_hat.shape

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.f_hat)) and np.all(np.isfinite(self.f_hat_dot)))

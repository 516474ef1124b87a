# -*- coding: utf-8 -*-
"""Value types of the solvent–structure step."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from geometry.state import StructureState

ForceField = Callable[[float, np.ndarray], np.ndarray]
BoundaryForcing = Callable[[float, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class PhysicalParams:
    """ρ_s, γ, α (beam) / ρ_f, μ (solvent) / ε, κ (solute); all default to 1."""

    rho_s: float = 1.0
    gamma: float = 1.0
    alpha: float = 1.0
    rho_f: float = 1.0
    mu: float = 1.0
    epsilon: float = 1.0
    kappa: float = 1.0

    def __post_init__(self) -> None:
        for name, value in self.__dict__.items():
            if not value > 0.0:
                raise ValueError(f"physical parameter {name} must be positive, got {value}")

    @classmethod
    def from_dict(cls, values: dict | None) -> "PhysicalParams":
        values = values or {}
        return cls(**{k: float(v) for k, v in values.items() if k in cls.__dataclass_fields__})


@dataclass(frozen=True)
class FlowState:
    """Reference velocity ū (n_r, n_θ, 2), pressure π̄ (n_r, n_θ) and wall speed ∂_tη."""

    u_bar: np.ndarray
    pi_bar: np.ndarray
    time: float = 0.0
    wall_speed: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        u = np.array(self.u_bar, dtype=float)
        p = np.array(self.pi_bar, dtype=float)
        if u.shape != p.shape + (2,):
            raise ValueError(f"u_bar shape {u.shape} does not match pi_bar shape {p.shape}")
        object.__setattr__(self, "u_bar", u)
        object.__setattr__(self, "pi_bar", p)
        if self.wall_speed is not None:
            object.__setattr__(self, "wall_speed", np.array(self.wall_speed, dtype=float))

    @classmethod
    def zeros(cls, shape: tuple[int, int], time: float = 0.0) -> "FlowState":
        return cls(np.zeros(tuple(shape) + (2,)), np.zeros(shape), time, np.zeros(shape[1]))

    def trace(self, normals: np.ndarray) -> np.ndarray:
        """Wall velocity (∂_tη) n, shape (n_θ, 2)."""
        speed = np.zeros(self.pi_bar.shape[1]) if self.wall_speed is None else self.wall_speed
        return speed[:, None] * normals


@dataclass(frozen=True)
class PerturbationTerms:
    """Defects h (n_r, n_θ), h_vec (n_r, n_θ, 2) and H (n_r, n_θ, 2, 2)."""

    h: np.ndarray
    h_vec: np.ndarray
    H: np.ndarray

    @classmethod
    def zeros(cls, shape: tuple[int, int]) -> "PerturbationTerms":
        shape = tuple(shape)
        return cls(np.zeros(shape), np.zeros(shape + (2,)), np.zeros(shape + (2, 2)))

    def max_abs(self) -> float:
        return float(max(np.abs(self.h).max(), np.abs(self.h_vec).max(), np.abs(self.H).max()))


@dataclass(frozen=True)
class PressureDecomposition:
    """π = π⋆ + c_π with π⋆ of zero mean over the deformed domain."""

    pi_star: np.ndarray
    c_pi: float
    boundary: np.ndarray | None = field(default=None, compare=False)

    @property
    def pressure(self) -> np.ndarray:
        return self.pi_star + self.c_pi


@dataclass
class Dataset:
    """Initial data and forcing of the coupled problem.

    ``f(t, x)`` is the body force at deformed points (…, 2); ``g(t, y)`` the
    structure forcing at boundary angles.  Missing forces are zero.
    """

    eta0: np.ndarray
    eta_star: np.ndarray
    u0: np.ndarray
    f_hat0: np.ndarray | None = None
    f: ForceField | None = None
    g: BoundaryForcing | None = None
    params: PhysicalParams = field(default_factory=PhysicalParams)
    pi0: np.ndarray | None = None

    def __post_init__(self) -> None:
        self.eta0 = np.array(self.eta0, dtype=float)
        self.eta_star = np.array(self.eta_star, dtype=float)
        self.u0 = np.array(self.u0, dtype=float)
        if self.eta0.shape != self.eta_star.shape:
            raise ValueError("eta0 and eta_star must have equal shape")

    @classmethod
    def zeros(cls, shape: tuple[int, int], n_q: int | None = None, params: PhysicalParams | None = None) -> "Dataset":
        f_hat0 = None if n_q is None else np.zeros((shape[0] * shape[1], n_q))
        return cls(np.zeros(shape[1]), np.zeros(shape[1]), np.zeros(tuple(shape) + (2,)), f_hat0,
                   params=params or PhysicalParams())

    def body_force(self, time: float, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        if self.f is None:
            return np.zeros(points.shape)
        return np.asarray(self.f(time, points), dtype=float).reshape(points.shape)

    def structure_forcing(self, time: float, y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if self.g is None:
            return np.zeros(y.shape)
        return np.asarray(self.g(time, y), dtype=float).reshape(y.shape)

    def initial_structure(self) -> StructureState:
        return StructureState(self.eta0, self.eta_star, 0.0)

    def with_forcing(self, g: BoundaryForcing | None) -> "Dataset":
        return replace(self, g=g)

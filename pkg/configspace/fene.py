# -*- coding: utf-8 -*-
"""FENE spring, its Maxwellian and the discretized configuration ball.

The ball B(0, √b) carries a polar finite-volume grid whose radial faces are
clustered toward the rim through ``r = √b sin(πρ/2)`` with ``ρ`` uniform.
Every integral against the Maxwellian is taken cell by cell in closed form,
so the weights are positive and sum to one to rounding.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from geometry.domain import PolarGrid
from geometry.errors import DomainError

logger = logging.getLogger(__name__)

B_DEFAULT = 4.0


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------


def fene_potential(s, b: float = B_DEFAULT):
    """Warner potential U(s) = -(b/2) ln(1 - 2s/b) for 0 <= s < b/2."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0.0) or np.any(s >= 0.5 * b):
        raise DomainError(f"FENE potential is defined on [0, {0.5 * b}), got {s.min():.4g}..{s.max():.4g}")
    value = -0.5 * b * np.log1p(-2.0 * s / b)
    return float(value) if value.ndim == 0 else value


def fene_force(s, b: float = B_DEFAULT):
    """U'(s) = 1 / (1 - 2s/b)."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0.0) or np.any(s >= 0.5 * b):
        raise DomainError(f"FENE force is defined on [0, {0.5 * b}), got {s.min():.4g}..{s.max():.4g}")
    value = 1.0 / (1.0 - 2.0 * s / b)
    return float(value) if value.ndim == 0 else value


def normalization(b: float = B_DEFAULT) -> float:
    """Z = ∫_B (1 - |q|²/b)^{b/2} dq in two dimensions."""
    return 2.0 * np.pi * b / (b + 2.0)


def maxwellian(q, b: float = B_DEFAULT):
    """M(q) = (1 - |q|²/b)^{b/2} / Z for points of shape (..., 2)."""
    q = np.asarray(q, dtype=float)
    r2 = np.sum(q**2, axis=-1)
    if np.any(r2 >= b):
        raise DomainError(f"|q|² must stay below b={b}, got {r2.max():.4g}")
    value = (1.0 - r2 / b) ** (0.5 * b) / normalization(b)
    return float(value) if np.ndim(value) == 0 else value


def _mass_antiderivative(r, b: float) -> np.ndarray:
    # ∫ r (1 - r²/b)^{b/2} dr
    u = np.clip(1.0 - np.asarray(r, dtype=float) ** 2 / b, 0.0, None)
    return -b / (b + 2.0) * u ** (0.5 * b + 1.0)


def _stress_antiderivative(r, b: float) -> np.ndarray:
    # ∫ r³ (1 - r²/b)^{b/2 - 1} dr
    u = np.clip(1.0 - np.asarray(r, dtype=float) ** 2 / b, 0.0, None)
    return -0.5 * b**2 * (u ** (0.5 * b) / (0.5 * b) - u ** (0.5 * b + 1.0) / (0.5 * b + 1.0))


def cutoff_weight(radius, level: int, b: float = B_DEFAULT) -> np.ndarray:
    """χⁿ(|q|): 1 up to √b(1-2⁻ⁿ), C¹ cubic descent, 0 from √b(1-2⁻ⁿ⁻¹)."""
    if level < 1:
        raise ValueError("cutoff level must be >= 1")
    root = np.sqrt(b)
    start = root * (1.0 - 2.0**-level)
    stop = root * (1.0 - 2.0 ** -(level + 1))
    t = np.clip((np.asarray(radius, dtype=float) - start) / (stop - start), 0.0, 1.0)
    return 1.0 - t**2 * (3.0 - 2.0 * t)


# ---------------------------------------------------------------------------
# Discretized model
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FeneModel:
    """Spring parameter ``b`` and the polar grid on the configuration ball."""

    b: float = B_DEFAULT
    n_qr: int = 16
    n_qtheta: int = 24
    dimension: int = 2

    def __post_init__(self) -> None:
        if self.b <= 2.0:
            raise DomainError(f"FENE parameter b must exceed 2, got {self.b}")
        if self.dimension != 2:
            raise NotImplementedError("only two-dimensional configuration space is implemented")

    @property
    def ball_radius(self) -> float:
        return float(np.sqrt(self.b))

    @cached_property
    def grid(self) -> PolarGrid:
        rho = np.linspace(0.0, 1.0, self.n_qr + 1)
        faces = self.ball_radius * np.sin(0.5 * np.pi * rho)
        faces[-1] = self.ball_radius
        centers = self.ball_radius * np.sin(0.5 * np.pi * 0.5 * (rho[1:] + rho[:-1]))
        return PolarGrid(faces, self.n_qtheta, r_centers=centers)

    @property
    def size(self) -> int:
        return self.grid.size

    @property
    def points(self) -> np.ndarray:
        """Cell-center configurations, shape (n_q, 2)."""
        return self.grid.centers.reshape(-1, 2)

    @property
    def normalization(self) -> float:
        return normalization(self.b)

    @cached_property
    def weights(self) -> np.ndarray:
        """m_c = ∫_cell M dq, flattened; Σ m_c = 1."""
        g = self.grid
        ring = _mass_antiderivative(g.r_faces[1:], self.b) - _mass_antiderivative(g.r_faces[:-1], self.b)
        return np.repeat(ring[:, None] * g.dtheta / self.normalization, g.n_theta, axis=1).ravel()

    @cached_property
    def maxwellian_values(self) -> np.ndarray:
        return maxwellian(self.points, self.b)

    @cached_property
    def face_maxwellian(self) -> tuple[np.ndarray, np.ndarray]:
        """M on r-faces (n_qr+1, n_qθ) and θ-faces (n_qr, n_qθ); zero on the rim."""
        g = self.grid
        u = np.clip(1.0 - g.r_faces**2 / self.b, 0.0, None)
        m_r = np.repeat((u ** (0.5 * self.b) / self.normalization)[:, None], g.n_theta, axis=1)
        m_t = np.repeat((maxwellian(np.c_[g.r, np.zeros_like(g.r)], self.b))[:, None], g.n_theta, axis=1)
        return m_r, m_t

    @cached_property
    def spring_force(self) -> np.ndarray:
        """U'(|q|²/2) at cell centers."""
        return fene_force(0.5 * np.sum(self.points**2, axis=-1), self.b)

    @cached_property
    def kramers_tensors(self) -> np.ndarray:
        """K_c = ∫_cell M U'(|q|²/2) q ⊗ q dq, shape (n_q, 2, 2)."""
        g = self.grid
        radial = _stress_antiderivative(g.r_faces[1:], self.b) - _stress_antiderivative(g.r_faces[:-1], self.b)
        lo = g.theta - 0.5 * g.dtheta
        hi = g.theta + 0.5 * g.dtheta
        cc = 0.5 * g.dtheta + 0.25 * (np.sin(2.0 * hi) - np.sin(2.0 * lo))
        ss = 0.5 * g.dtheta - 0.25 * (np.sin(2.0 * hi) - np.sin(2.0 * lo))
        cs = -0.25 * (np.cos(2.0 * hi) - np.cos(2.0 * lo))
        ang = np.empty((g.n_theta, 2, 2))
        ang[:, 0, 0], ang[:, 1, 1] = cc, ss
        ang[:, 0, 1] = ang[:, 1, 0] = cs
        tensors = radial[:, None, None, None] * ang[None] / self.normalization
        return tensors.reshape(-1, 2, 2)

    @cached_property
    def diffusion_matrix(self) -> sp.csr_matrix:
        """Σ_faces M ∇_q f̂ · N per cell; no flux through the rim where M = 0."""
        m_r, m_t = self.face_maxwellian
        zero_r, zero_t = np.zeros_like(m_r), np.zeros_like(m_t)
        return self.grid.diffusion_operator(m_r, zero_r, m_t, zero_t, bc="neumann").matrix

    def cutoff(self, level: int) -> np.ndarray:
        return build_cutoff(level, self)

    def describe(self) -> str:
        return f"FENE b={self.b} grid={self.n_qr}x{self.n_qtheta} Z={self.normalization:.6f}"


def build_cutoff(level: int, model: FeneModel) -> np.ndarray:
    """χⁿ at the cell centers of the configuration grid, flattened."""
    radius = np.hypot(model.points[:, 0], model.points[:, 1])
    return cutoff_weight(radius, level, model.b)

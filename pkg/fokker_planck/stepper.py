# -*- coding: utf-8 -*-
"""Pulled-back Fokker–Planck step on the moving disk.

One step is a Lie splitting of four conservative stages:

• x-transport: explicit upwind with the volume flux relative to the moving
  faces, ``U = ū·(B N) − swept/dt``; zero flux through the wall.
• x-diffusion: implicit, ``(a/dt − ε L_A) f = a f*/dt`` with the conormal
  Neumann condition built into ``L_A``.
• q-drag: explicit upwind on ``M f̂`` with velocity ``χⁿ K q``.
• q-diffusion: implicit, ``(m/dt − κ L_q) f = m f*/dt``; the Maxwellian
  vanishes on the rim so no flux leaves the ball.

``a`` are mapped cell areas and ``m`` Maxwellian cell weights, so each
stage preserves ``Σ a m f̂`` to rounding.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from configspace.fene import FeneModel
from configspace.state import DistributionState
from geometry.errors import CflViolation, SolverDivergence
from geometry.hanzawa import HanzawaMap

from .drag import DragMode, apply_drag, drag_divergence, drag_matrix, face_velocities, velocity_gradient

logger = logging.getLogger(__name__)

SOLVE_TOL = 1e-10


@dataclass
class FpStepInput:
    """Everything one Fokker–Planck step needs.

    ``velocity`` is the reference velocity ū at t+dt on cell centers,
    ``boundary_velocity`` its trace ``(∂_tη) n`` on the wall.  ``face_fluxes``
    (r-faces, θ-faces) replaces the averaged ``ū·(B N)`` when the flow solver
    supplies its own discretely divergence-free fluxes.
    """

    state: DistributionState
    velocity: np.ndarray
    map_new: HanzawaMap
    dt: float
    model: FeneModel
    mode: DragMode | str = DragMode.CO_ROTATIONAL
    level: int | None = None
    map_old: HanzawaMap | None = None
    epsilon: float = 1.0
    kappa: float = 1.0
    boundary_velocity: np.ndarray | None = None
    face_fluxes: tuple[np.ndarray, np.ndarray] | None = None
    source: np.ndarray | Callable[[float], np.ndarray] | None = None
    cfl: float = 1.0

    def __post_init__(self) -> None:
        self.mode = DragMode.parse(self.mode)
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if self.mode is DragMode.FULL_GRADIENT and self.level is None:
            raise ValueError("full-gradient drag needs a cutoff level")
        n_x = self.map_new.grid.size
        if self.state.shape != (n_x, self.model.size):
            raise ValueError(f"state shape {self.state.shape} does not match grids ({n_x}, {self.model.size})")


# ---------------------------------------------------------------------------
# Linear solves
# ---------------------------------------------------------------------------


def _solve(matrix: sp.spmatrix, lu, rhs: np.ndarray, label: str) -> np.ndarray:
    sol = lu.solve(rhs)
    if not np.all(np.isfinite(sol)):
        raise SolverDivergence(f"{label}: non-finite solution")
    res = np.linalg.norm(matrix @ sol - rhs)
    scale = max(np.linalg.norm(rhs), np.finfo(float).tiny)
    if res > SOLVE_TOL * scale and res > 1e-14:
        raise SolverDivergence(f"{label}: relative residual {res / scale:.3e} above {SOLVE_TOL}")
    return sol


@lru_cache(maxsize=16)
def _q_system(model: FeneModel, dt: float, kappa: float):
    matrix = (sp.diags(model.weights / dt) - kappa * model.diffusion_matrix).tocsc()
    return matrix, splu(matrix)


def _x_system(hmap: HanzawaMap, areas: np.ndarray, dt: float, epsilon: float):
    matrix = (sp.diags(areas / dt) - hmap.diffusion_operator(scale=epsilon, bc="neumann").matrix).tocsc()
    return matrix, splu(matrix)


# ---------------------------------------------------------------------------
# x-transport
# ---------------------------------------------------------------------------


def flow_face_fluxes(hmap: HanzawaMap, velocity: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Deformed volume fluxes avg(ū)·(B N) on interior faces; wall and origin rows are zero."""
    g = hmap.grid
    u = np.asarray(velocity, dtype=float).reshape(g.shape + (2,))
    bn_r, bn_t = hmap.flux_normals
    flux_r = np.zeros((g.n_r + 1, g.n_theta))
    flux_r[1:-1] = np.einsum("ijk,ijk->ij", 0.5 * (u[:-1] + u[1:]), bn_r[1:-1])
    flux_t = np.einsum("ijk,ijk->ij", 0.5 * (u + np.roll(u, -1, axis=1)), bn_t)
    return flux_r, flux_t


def transport_fluxes(inp: FpStepInput) -> tuple[np.ndarray, np.ndarray]:
    """U on faces: flow flux minus the area swept by the moving face per unit time."""
    if inp.face_fluxes is not None:
        flux_r = np.array(inp.face_fluxes[0], dtype=float)
        flux_t = np.array(inp.face_fluxes[1], dtype=float)
    else:
        flux_r, flux_t = flow_face_fluxes(inp.map_new, inp.velocity)
    if inp.map_old is not None:
        flux_r = flux_r - inp.map_new.swept_areas(inp.map_old) / inp.dt
    flux_r[0] = 0.0
    flux_r[-1] = 0.0
    return flux_r, flux_t


def transport_matrix(grid, flux_r: np.ndarray, flux_t: np.ndarray, centered: bool = False) -> sp.csr_matrix:
    """Net outward flux operator per x-cell for face fluxes along +r / +θ."""
    i, j = np.meshgrid(np.arange(1, grid.n_r), np.arange(grid.n_theta), indexing="ij")
    lo_r, hi_r, u_r = grid.index(i - 1, j).ravel(), grid.index(i, j).ravel(), flux_r[1:-1].ravel()
    i, j = np.meshgrid(np.arange(grid.n_r), np.arange(grid.n_theta), indexing="ij")
    lo_t, hi_t, u_t = grid.index(i, j).ravel(), grid.index(i, j + 1).ravel(), flux_t.ravel()
    lo = np.concatenate([lo_r, lo_t])
    hi = np.concatenate([hi_r, hi_t])
    u = np.concatenate([u_r, u_t])
    if centered:
        rows = np.concatenate([lo, lo, hi, hi])
        cols = np.concatenate([lo, hi, lo, hi])
        vals = np.concatenate([0.5 * u, 0.5 * u, -0.5 * u, -0.5 * u])
    else:
        up = np.where(u > 0.0, lo, hi)
        rows = np.concatenate([lo, hi])
        cols = np.concatenate([up, up])
        vals = np.concatenate([u, -u])
    return sp.coo_matrix((vals, (rows, cols)), shape=(grid.size, grid.size)).tocsr()


def transport_courant(grid, flux_r: np.ndarray, flux_t: np.ndarray, areas: np.ndarray, dt: float) -> float:
    out = np.maximum(flux_r[1:], 0.0) + np.maximum(-flux_r[:-1], 0.0)
    out += np.maximum(flux_t, 0.0) + np.maximum(-np.roll(flux_t, 1, axis=1), 0.0)
    return float(np.max(dt * out.ravel() / areas))


# ---------------------------------------------------------------------------
# Step
# ---------------------------------------------------------------------------


def _source_values(inp: FpStepInput, time: float) -> np.ndarray | None:
    if inp.source is None:
        return None
    values = inp.source(time) if callable(inp.source) else inp.source
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    return values


def drag_velocities(inp: FpStepInput) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(K, face velocities on r-faces, on θ-faces) at t+dt."""
    grad = velocity_gradient(inp.velocity, inp.map_new.grid, inp.boundary_velocity, inp.map_new.F_inv)
    k = drag_matrix(grad, inp.mode)
    v_r, v_t = face_velocities(k, inp.model, inp.mode, inp.level)
    return k, v_r, v_t


def step_fp(inp: FpStepInput) -> DistributionState:
    """Advance f̂ by one IMEX step; raises CflViolation on the explicit stages."""
    f = inp.state.f_hat
    grid = inp.map_new.grid
    a_new = inp.map_new.cell_areas.ravel()
    a_old = inp.map_old.cell_areas.ravel() if inp.map_old is not None else a_new

    # x-transport
    flux_r, flux_t = transport_fluxes(inp)
    courant = transport_courant(grid, flux_r, flux_t, a_old, inp.dt)
    if courant > inp.cfl:
        raise CflViolation(f"transport Courant number {courant:.3f} exceeds {inp.cfl}", courant)
    net = transport_matrix(grid, flux_r, flux_t)
    f_star = (a_old[:, None] * f - inp.dt * (net @ f)) / a_new[:, None]

    # x-diffusion
    rhs = a_new[:, None] * f_star / inp.dt
    src = _source_values(inp, inp.state.time + inp.dt)
    if src is not None:
        rhs = rhs + a_new[:, None] * src
    matrix, lu = _x_system(inp.map_new, a_new, inp.dt, inp.epsilon)
    f_star = _solve(matrix, lu, rhs, "x-diffusion")

    # q-drag
    _, v_r, v_t = drag_velocities(inp)
    f_star = apply_drag(f_star, v_r, v_t, inp.model, inp.dt, inp.cfl)

    # q-diffusion
    matrix, lu = _q_system(inp.model, float(inp.dt), float(inp.kappa))
    rhs = (f_star * inp.model.weights[None, :] / inp.dt).T
    f_new = _solve(matrix, lu, rhs, "q-diffusion").T

    return DistributionState(f_new, (f_new - f) / inp.dt, inp.state.time + inp.dt)


def initial_rate(inp: FpStepInput) -> np.ndarray:
    """Right-hand side of the Fokker–Planck equation at the input state (f̃₀).

    Evaluated on the geometry of ``map_new`` without mesh motion.
    """
    f = inp.state.f_hat
    grid = inp.map_new.grid
    areas = inp.map_new.cell_areas.ravel()
    flux_r, flux_t = flow_face_fluxes(inp.map_new, inp.velocity)
    if inp.face_fluxes is not None:
        flux_r, flux_t = np.array(inp.face_fluxes[0], dtype=float), np.array(inp.face_fluxes[1], dtype=float)
        flux_r[0] = flux_r[-1] = 0.0
    transport = transport_matrix(grid, flux_r, flux_t) @ f
    diffusion = inp.map_new.diffusion_operator(scale=inp.epsilon, bc="neumann").matrix @ f
    _, v_r, v_t = drag_velocities(inp)
    drag = drag_divergence(f, v_r, v_t, inp.model)
    q_diff = (inp.kappa * (inp.model.diffusion_matrix @ f.T)).T
    rate = (diffusion - transport) / areas[:, None] + (q_diff - drag) / inp.model.weights[None, :]
    src = _source_values(inp, inp.state.time)
    if src is not None:
        rate = rate + src
    return rate

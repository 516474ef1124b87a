# -*- coding: utf-8 -*-
"""
convergence.py

Manufactured solutions on the unit disk and the observed orders of the
Fokker–Planck and solvent–structure steps under grid and step refinement.

• FP in space: f̂ = 1 + a·x(3 − |x|²) is Neumann on r = 1 and steady under
  the source 8aεx (one long implicit step, no flow).
• FP in time: implicit Euler against the exact flow of the same spatial
  operator (matrix exponential), dt halved.
• Solvent–structure: ū = 4(1 − |x|²)(−y, x), π = x(3 − |x|²) with the body
  force −μΔū + ∇π; the wall load −π(R, y) keeps the beam at rest.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from configspace.fene import FeneModel
from configspace.state import DistributionState
from fokker_planck.stepper import FpStepInput, step_fp
from geometry.domain import ReferenceDomain
from geometry.hanzawa import build_hanzawa
from geometry.state import StructureState
from solvent_structure.linear_step import solve_linear_step
from solvent_structure.state import FlowState, PerturbationTerms, PhysicalParams

logger = logging.getLogger(__name__)

GRIDS = (8, 16, 32)
AMPLITUDE = 0.5


@dataclass(frozen=True)
class Refinement:
    """Errors along a refinement sequence with a fixed ratio between levels."""

    sizes: tuple
    errors: tuple
    ratio: float = 2.0

    @property
    def orders(self) -> np.ndarray:
        e = np.asarray(self.errors, dtype=float)
        return np.log(e[:-1] / e[1:]) / np.log(self.ratio)

    @property
    def order(self) -> float:
        return float(self.orders[-1])


def _disk(n_r: int) -> ReferenceDomain:
    return ReferenceDomain(1.0, 0.5, n_r, 2 * n_r)


def _l2(values: np.ndarray, volumes: np.ndarray) -> float:
    return float(np.sqrt(np.sum(volumes * values**2)))


# ---------------------------------------------------------------------------
# Fokker–Planck
# ---------------------------------------------------------------------------


def _fp_profile(points: np.ndarray) -> np.ndarray:
    x, y = points[..., 0], points[..., 1]
    return 1.0 + AMPLITUDE * x * (3.0 - x**2 - y**2)


def fp_spatial_error(n_r: int, model: FeneModel | None = None, epsilon: float = 1.0) -> float:
    model = model or FeneModel(4.0, 4, 8)
    dom = _disk(n_r)
    grid = dom.grid
    hmap = build_hanzawa(dom, np.zeros(dom.n_theta))
    exact = _fp_profile(grid.centers).ravel()
    source = 8.0 * AMPLITUDE * epsilon * grid.centers[..., 0].ravel()
    f0 = DistributionState(np.outer(exact, np.ones(model.size)))
    inp = FpStepInput(f0, np.zeros(grid.shape + (2,)), hmap, 1e3, model, map_old=hmap, epsilon=epsilon, source=source)
    f = step_fp(inp).f_hat
    return _l2((f - exact[:, None]).reshape(grid.shape + (model.size,)), hmap.cell_areas[..., None])


def fp_spatial_refinement(grids=GRIDS, model: FeneModel | None = None) -> Refinement:
    errors = tuple(fp_spatial_error(n, model) for n in grids)
    logger.info("FP spatial errors %s", ", ".join(f"{e:.3e}" for e in errors))
    return Refinement(tuple(grids), errors)


def fp_temporal_refinement(
    n_r: int = 8,
    horizon: float = 0.05,
    steps=(8, 16, 32),
    model: FeneModel | None = None,
) -> Refinement:
    """Implicit Euler error at ``horizon`` against exp(t a⁻¹εL) f̂₀ on the same grid."""
    model = model or FeneModel(4.0, 4, 8)
    dom = _disk(n_r)
    grid = dom.grid
    hmap = build_hanzawa(dom, np.zeros(dom.n_theta))
    areas = hmap.cell_areas.ravel()
    profile = _fp_profile(grid.centers).ravel()
    generator = hmap.diffusion_operator(scale=1.0, bc="neumann").matrix.toarray() / areas[:, None]
    exact = expm(horizon * generator) @ profile

    errors = []
    for n in steps:
        dt = horizon / n
        f = DistributionState(np.outer(profile, np.ones(model.size)))
        for _ in range(n):
            f = step_fp(FpStepInput(f, np.zeros(grid.shape + (2,)), hmap, dt, model, map_old=hmap))
        errors.append(_l2(f.f_hat[:, 0] - exact, areas))
    logger.info("FP temporal errors %s", ", ".join(f"{e:.3e}" for e in errors))
    return Refinement(tuple(horizon / n for n in steps), tuple(errors))


# ---------------------------------------------------------------------------
# Solvent–structure
# ---------------------------------------------------------------------------


def stokes_fields(points: np.ndarray, mu: float = 1.0) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(ū, π, body force) of the rotating manufactured flow at ``points``."""
    x, y = points[..., 0], points[..., 1]
    bump = 1.0 - x**2 - y**2
    velocity = 4.0 * np.stack([-y * bump, x * bump], axis=-1)
    pressure = x * (3.0 - x**2 - y**2)
    force = np.stack([-32.0 * mu * y + 3.0 - 3.0 * x**2 - y**2, 32.0 * mu * x - 2.0 * x * y], axis=-1)
    return velocity, pressure, force


def stokes_error(n_r: int, freeze_structure: bool = False, dt: float = 1.0) -> tuple[float, float]:
    """(velocity, wall speed) errors of one step started from the exact flow."""
    params = PhysicalParams()
    dom = _disk(n_r)
    grid = dom.grid
    hmap = build_hanzawa(dom, np.zeros(dom.n_theta))
    velocity, pressure, force = stokes_fields(grid.centers, params.mu)
    terms = PerturbationTerms(np.zeros(grid.shape), force, np.zeros(grid.shape + (2, 2)))
    wall_pressure = stokes_fields(dom.boundary_param(grid.theta))[1]
    flow0 = FlowState(velocity, pressure, 0.0, wall_speed=np.zeros(dom.n_theta))
    structure, flow = solve_linear_step(
        hmap,
        StructureState.zeros(dom.n_theta),
        flow0,
        terms,
        None,
        -wall_pressure,
        dt,
        params,
        freeze_structure=freeze_structure,
    )
    error = _l2(np.linalg.norm(flow.u_bar - velocity, axis=-1), grid.volumes)
    return error, float(np.max(np.abs(structure.eta_dot)))


def stokes_refinement(grids=GRIDS, freeze_structure: bool = False) -> Refinement:
    errors = tuple(stokes_error(n, freeze_structure)[0] for n in grids)
    logger.info("solvent-structure spatial errors %s", ", ".join(f"{e:.3e}" for e in errors))
    return Refinement(tuple(grids), errors)

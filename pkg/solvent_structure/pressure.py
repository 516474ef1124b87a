# -*- coding: utf-8 -*-
"""Pressure from the current state by a Robin problem, and the initial pressure.

Taking the divergence of the momentum balance and eliminating ∂_t²η at the
wall through the beam equation gives, on the deformed domain,

    Δπ = div F,    F = μΔu + f + div S − ρ_f (u·∇)u
    ∂_{n_η}π + (ρ_f/ρ_s)(n·n_η)|∂_yφ_η| π
        = F·n_η − (ρ_f/ρ_s)[γ ∂_y²∂_tη − α ∂_y⁴η + g]
          + (ρ_f/ρ_s) nᵀ(μ(∇u + ∇uᵀ) + S) n_η |∂_yφ_η|

The problem is pulled back to the reference grid (conormal fluxes of A_η)
and solved with the wall pressure as extra unknowns.
"""

from __future__ import annotations

import logging

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from geometry.errors import DegenerateBoundary, SolverDivergence
from geometry.hanzawa import HanzawaMap
from geometry.state import StructureState
from geometry.trig import TrigInterpolant

from .linear_step import divergence_operators, tensor_face_fluxes
from .perturbation import reference_gradient
from .state import Dataset, FlowState, PerturbationTerms, PhysicalParams, PressureDecomposition

logger = logging.getLogger(__name__)

SOLVE_TOL = 1e-9
DEGENERACY_TOL = 1e-8


# ---------------------------------------------------------------------------
# Helpers shared with the compatibility check
# ---------------------------------------------------------------------------


def wall_values(grid, cells: np.ndarray) -> np.ndarray:
    """Linear extrapolation of a cell field (n_r, n_θ, ...) onto the wall."""
    weight = (grid.radius - grid.r[-1]) / (grid.r[-1] - grid.r[-2])
    return cells[-1] + weight * (cells[-1] - cells[-2])


def physical_gradient(hmap: HanzawaMap, velocity, wall_speed=None) -> np.ndarray:
    """∇_x u = ∇_X ū F⁻¹ at cell centers."""
    grad = reference_gradient(hmap, velocity, wall_speed)
    return np.einsum("...ik,...kj->...ij", grad, hmap.F_inv)


def momentum_source(
    hmap: HanzawaMap,
    flow: FlowState,
    stress=None,
    force=None,
    params: PhysicalParams | None = None,
    convective: bool = True,
) -> np.ndarray:
    """F = μΔu + f + div S − ρ_f (u·∇)u per unit deformed area, shape (n_r, n_θ, 2)."""
    params = params or PhysicalParams()
    g = hmap.grid
    areas = hmap.cell_areas
    u = flow.u_bar
    speed = np.zeros(g.n_theta) if flow.wall_speed is None else flow.wall_speed
    trace = speed[:, None] * hmap.domain.outward_normal(g.theta)
    diff = hmap.diffusion_operator(scale=params.mu, bc="dirichlet")
    lap = np.stack(
        [(diff.matrix @ u[..., k].ravel() + diff.boundary @ trace[:, k]).reshape(g.shape) for k in range(2)],
        axis=-1,
    )
    total = lap / areas[..., None]
    if stress is not None:
        flux_r, flux_t = tensor_face_fluxes(hmap, stress)
        total += g.sum_face_fluxes(flux_r, flux_t) / areas[..., None]
    if force is not None:
        total += np.asarray(force, dtype=float).reshape(g.shape + (2,))
    if convective:
        grad = physical_gradient(hmap, u, flow.wall_speed)
        total -= params.rho_f * np.einsum("...ij,...j->...i", grad, u)
    return total


def wall_traction(hmap: HanzawaMap, flow: FlowState, stress, params: PhysicalParams) -> np.ndarray:
    """nᵀ(μ(∇u + ∇uᵀ) + S) n_η |∂_yφ_η| at the boundary nodes."""
    g = hmap.grid
    grad = physical_gradient(hmap, flow.u_bar, flow.wall_speed)
    tensor = params.mu * (grad + np.swapaxes(grad, -1, -2))
    if stress is not None:
        tensor = tensor + np.asarray(stress, dtype=float).reshape(g.shape + (2, 2))
    wall = wall_values(g, tensor)
    n = hmap.domain.outward_normal(g.theta)
    b = hmap.boundary
    return np.einsum("ji,jik,jk->j", n, wall, b["normal"]) * b["factor"]


def beam_operator_terms(eta: np.ndarray, eta_dot: np.ndarray, params: PhysicalParams) -> np.ndarray:
    """γ ∂_y²∂_tη − α ∂_y⁴η at the nodes, differentiated spectrally."""
    return params.gamma * TrigInterpolant(eta_dot).nodal_derivative(2) - params.alpha * TrigInterpolant(
        eta
    ).nodal_derivative(4)


# ---------------------------------------------------------------------------
# Robin problem
# ---------------------------------------------------------------------------


def solve_robin(
    hmap: HanzawaMap,
    source: np.ndarray,
    robin: np.ndarray,
    data: np.ndarray,
    face_length: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Solve div(A∇π) = source (integrated per cell) with ∂_{n_η}π + c π = data.

    ``face_length`` is the deformed length of each wall face; it defaults to
    |∂_yφ_η| Δy.  Returns cell values (n_r, n_θ) and wall values (n_θ,).
    """
    g = hmap.grid
    n, nt = g.size, g.n_theta
    if face_length is None:
        face_length = hmap.boundary["factor"] * g.dtheta
    w = np.asarray(face_length, dtype=float)
    op = hmap.diffusion_operator(scale=1.0, bc="dirichlet")
    matrix = sp.bmat(
        [
            [op.matrix, op.boundary],
            [op.flux_cells, op.flux_data + sp.diags(w * np.asarray(robin, dtype=float))],
        ],
        format="csc",
    )
    rhs = np.concatenate([np.asarray(source, dtype=float).ravel(), w * np.asarray(data, dtype=float)])
    sol = splu(matrix).solve(rhs)
    if not np.all(np.isfinite(sol)):
        raise SolverDivergence("Robin pressure solve returned non-finite values")
    res = np.linalg.norm(matrix @ sol - rhs)
    if res > SOLVE_TOL * max(np.linalg.norm(rhs), 1.0):
        raise SolverDivergence(f"Robin pressure residual {res:.3e}")
    return sol[:n].reshape(g.shape), sol[n:]


def _robin_problem(
    hmap: HanzawaMap,
    flow: FlowState,
    eta: np.ndarray,
    eta_dot: np.ndarray,
    stress,
    force,
    g_values: np.ndarray,
    params: PhysicalParams,
    convective: bool,
    extra_source: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    grid = hmap.grid
    accel = momentum_source(hmap, flow, stress, force, params, convective)
    d_u, _ = divergence_operators(hmap)
    source = d_u @ np.concatenate([accel[..., 0].ravel(), accel[..., 1].ravel()])
    accel_wall = wall_values(grid, accel)
    bn_wall = hmap.flux_normals[0][-1]
    outer = grid.index(grid.n_r - 1, np.arange(grid.n_theta))
    source[outer] += np.einsum("jk,jk->j", accel_wall, bn_wall)
    if extra_source is not None:
        source = source + np.asarray(extra_source, dtype=float).ravel()

    b = hmap.boundary
    ratio = params.rho_f / params.rho_s
    robin = ratio * b["alignment"] * b["factor"]
    traction = wall_traction(hmap, flow, stress, params)
    data = (
        np.einsum("jk,jk->j", accel_wall, b["normal"])
        - ratio * (beam_operator_terms(eta, eta_dot, params) + g_values)
        + ratio * traction
    )
    cells, wall = solve_robin(hmap, source, robin, data)
    return cells, wall, traction


def recover_pressure(
    flow: FlowState,
    structure: StructureState,
    stress,
    g,
    hmap: HanzawaMap,
    params: PhysicalParams | None = None,
    *,
    force=None,
    convective: bool = True,
    tol: float = DEGENERACY_TOL,
) -> PressureDecomposition:
    """π⋆ (zero mean over Ω_η) from the Robin problem and c_π from the integrated beam equation."""
    params = params or PhysicalParams()
    grid = hmap.grid
    b = hmap.boundary
    weight = b["alignment"] * b["factor"]
    lhs = float(np.sum(weight) * grid.dtheta)
    if lhs <= tol:
        raise DegenerateBoundary(f"pressure constant integral {lhs:.3e} <= {tol}", "pressure_constant", lhs)

    g_values = np.zeros(grid.n_theta) if g is None else np.asarray(g, dtype=float)
    cells, wall, traction = _robin_problem(
        hmap, flow, structure.eta, structure.eta_dot, stress, force, g_values, params, convective
    )
    areas = hmap.cell_areas
    mean = float(np.sum(areas * cells) / np.sum(areas))
    pi_star, wall_star = cells - mean, wall - mean

    eta_ddot = np.zeros(grid.n_theta) if structure.eta_ddot is None else structure.eta_ddot
    rhs = grid.dtheta * float(
        np.sum(params.rho_s * eta_ddot - g_values + traction - wall_star * weight)
    )
    c_pi = rhs / lhs
    logger.debug("recovered pressure: mean %.3e, c_pi %.6e", mean, c_pi)
    return PressureDecomposition(pi_star, c_pi, wall_star)


def initial_pressure(
    dataset: Dataset,
    map0: HanzawaMap,
    terms_at_0: PerturbationTerms | None = None,
    terms_at_dt: PerturbationTerms | None = None,
    dt: float | None = None,
    *,
    stress0=None,
    convective: bool = True,
) -> np.ndarray:
    """π̄₀ from the Robin problem at t = 0.

    ∂_t h(0) enters the interior source by a one-sided difference of the
    two supplied defect sets; without them it is zero.
    """
    params = dataset.params
    grid = map0.grid
    flow0 = FlowState(dataset.u0, np.zeros(grid.shape), 0.0, wall_speed=dataset.eta_star)
    force = dataset.body_force(0.0, map0.forward(grid.centers)) if dataset.f is not None else None
    g0 = dataset.structure_forcing(0.0, grid.theta)
    extra = None
    if terms_at_0 is not None and terms_at_dt is not None and dt:
        rate = (np.asarray(terms_at_dt.h) - np.asarray(terms_at_0.h)) / dt
        extra = -params.rho_f * grid.volumes * rate
    cells, _, _ = _robin_problem(
        map0, flow0, dataset.eta0, dataset.eta_star, stress0, force, g0, params, convective, extra
    )
    return cells

# -*- coding: utf-8 -*-
"""Monolithic implicit step of the linearized beam + Stokes system.

Unknowns are the cell velocities ``ū``, cell pressures ``π̄`` and the beam
velocity ``v = ∂_tη`` at the boundary nodes; ``η`` follows from
``η^{n+1} = η^n + dt v``.  Per reference cell the momentum balance reads

    ρ_f |c| J₀ (ū − ūⁿ)/dt − μ (L_A ū + L_b (v n)) − D_uᵀ π̄
        = Σ_faces ((S B₀ − H) N) + |c| h_vec

the constraint ``D_u ū + D_v v = |c| h`` is imposed exactly, and the beam
rows, integrated over each boundary face of length ``ℓ = RΔy``, take the
exact reaction of the wall flux:

    ℓ [ρ_s (v − vⁿ)/dt − γ ∂_y² v + α dt ∂_y⁴ v] + μ n·(wall flux) − D_vᵀ π̄
        = ℓ [ρ_s vⁿ/dt − α ∂_y⁴ ηⁿ + g] + n·((H − S B₀) N_b)

Pressure enters momentum and beam through the transposes of the discrete
divergence, so pressure does no work.  The pair is not stabilized: the
wall ring pins every cell-centered pressure mode through D_vᵀ, and with
``freeze_structure`` the wall is held and the pressure gets a zero-mean
gauge instead.
"""

from __future__ import annotations

import logging
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from geometry.errors import SolverDivergence
from geometry.hanzawa import HanzawaMap
from geometry.state import StructureState

from .state import FlowState, PerturbationTerms, PhysicalParams

logger = logging.getLogger(__name__)

SOLVE_TOL = 1e-10
REFINE_STEPS = 2


# ---------------------------------------------------------------------------
# Discrete operators
# ---------------------------------------------------------------------------


def periodic_second_difference(n: int, dy: float) -> sp.csr_matrix:
    j = np.arange(n)
    rows = np.concatenate([j, j, j])
    cols = np.concatenate([j, (j + 1) % n, (j - 1) % n])
    vals = np.concatenate([np.full(n, -2.0), np.ones(n), np.ones(n)]) / dy**2
    return sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()


def divergence_operators(hmap: HanzawaMap) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """(D_u, D_v): net outward volume flux per cell from cell velocities and the wall speed."""
    g = hmap.grid
    n = g.size
    bn_r, bn_t = hmap.flux_normals
    i, j = np.meshgrid(np.arange(1, g.n_r), np.arange(g.n_theta), indexing="ij")
    lo_r, hi_r = g.index(i - 1, j).ravel(), g.index(i, j).ravel()
    vec_r = bn_r[1:-1].reshape(-1, 2)
    i, j = np.meshgrid(np.arange(g.n_r), np.arange(g.n_theta), indexing="ij")
    lo_t, hi_t = g.index(i, j).ravel(), g.index(i, j + 1).ravel()
    vec_t = bn_t.reshape(-1, 2)
    lo = np.concatenate([lo_r, lo_t])
    hi = np.concatenate([hi_r, hi_t])
    vec = np.concatenate([vec_r, vec_t])

    rows, cols, vals = [], [], []
    for k in range(2):
        half = 0.5 * vec[:, k]
        rows += [lo, lo, hi, hi]
        cols += [lo + k * n, hi + k * n, lo + k * n, hi + k * n]
        vals += [half, half, -half, -half]
    d_u = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, 2 * n)
    ).tocsr()

    normals = hmap.domain.outward_normal(g.theta)
    wall = np.einsum("jk,jk->j", normals, bn_r[-1])
    outer = g.index(g.n_r - 1, np.arange(g.n_theta))
    d_v = sp.csr_matrix((wall, (outer, np.arange(g.n_theta))), shape=(n, g.n_theta))
    return d_u, d_v


def tensor_face_fluxes(hmap: HanzawaMap, stress=None, defect=None) -> tuple[np.ndarray, np.ndarray]:
    """Fluxes ((S B₀ − H) N) on r-faces (n_r+1, n_θ, 2) and θ-faces (n_r, n_θ, 2).

    Cell tensors are averaged onto interior faces and extrapolated linearly
    onto the wall; the origin row is zero.
    """
    g = hmap.grid
    b_r, b_t = hmap.r_face_tensors["B"], hmap.t_face_tensors["B"]
    flux_r = np.zeros((g.n_r + 1, g.n_theta, 2))
    flux_t = np.zeros(g.shape + (2,))
    weight = (g.radius - g.r[-1]) / (g.r[-1] - g.r[-2])

    def _faces(cells):
        inner = 0.5 * (cells[:-1] + cells[1:])
        wall = cells[-1] + weight * (cells[-1] - cells[-2])
        return inner, wall, 0.5 * (cells + np.roll(cells, -1, axis=1))

    if stress is not None:
        s = np.asarray(stress, dtype=float).reshape(g.shape + (2, 2))
        inner, wall, side = _faces(s)
        sb_r = np.zeros((g.n_r + 1, g.n_theta, 2, 2))
        sb_r[1:-1] = np.einsum("...ik,...kj->...ij", inner, b_r[1:-1])
        sb_r[-1] = np.einsum("...ik,...kj->...ij", wall, b_r[-1])
        flux_r += np.einsum("...ij,...j->...i", sb_r, g.normals_r)
        flux_t += np.einsum("...ij,...j->...i", np.einsum("...ik,...kj->...ij", side, b_t), g.normals_t)
    if defect is not None:
        d = np.asarray(defect, dtype=float).reshape(g.shape + (2, 2))
        inner, wall, side = _faces(d)
        d_r = np.zeros((g.n_r + 1, g.n_theta, 2, 2))
        d_r[1:-1], d_r[-1] = inner, wall
        flux_r -= np.einsum("...ij,...j->...i", d_r, g.normals_r)
        flux_t -= np.einsum("...ij,...j->...i", side, g.normals_t)
    return flux_r, flux_t


# ---------------------------------------------------------------------------
# Assembled operator
# ---------------------------------------------------------------------------


class LinearStepOperator:
    """Factorized saddle-point matrix for one frozen geometry η₀ and step size.

    ``dt=None`` drops the time derivatives (steady Stokes, frozen wall only).
    """

    def __init__(
        self,
        map0: HanzawaMap,
        params: PhysicalParams,
        dt: float | None,
        freeze_structure: bool = False,
    ) -> None:
        if dt is None and not freeze_structure:
            raise ValueError("steady solves need a frozen structure")
        self.map0 = map0
        self.params = params
        self.dt = dt
        self.freeze = freeze_structure
        g = map0.grid
        self.grid = g
        self.n, self.nt = g.size, g.n_theta
        self.normals = map0.domain.outward_normal(g.theta)
        self.ell = map0.domain.radius * g.dtheta
        self.vol = g.volumes.ravel()
        inv_dt = 0.0 if dt is None else 1.0 / dt
        self.mass = params.rho_f * self.vol * map0.jacobian.ravel()
        self.diff = map0.diffusion_operator(scale=params.mu, bc="dirichlet")
        self.div_u, self.div_v = divergence_operators(map0)
        self.d_yy = periodic_second_difference(self.nt, g.dtheta)
        self.d4 = (self.d_yy @ self.d_yy).tocsr()
        self.matrix = self._assemble(inv_dt)
        self.lu = splu(self.matrix.tocsc())
        logger.debug("linear step operator: %d unknowns, nnz=%d", self.matrix.shape[0], self.matrix.nnz)

    @property
    def size(self) -> int:
        return 3 * self.n + self.nt + (1 if self.freeze else 0)

    def _assemble(self, inv_dt: float) -> sp.csr_matrix:
        p = self.params
        n, nt = self.n, self.nt
        nx, ny = self.normals[:, 0], self.normals[:, 1]
        k_uu = sp.diags(self.mass * inv_dt) - self.diff.matrix
        d_x, d_y = self.div_u[:, :n], self.div_u[:, n:]
        beam = self.ell * (p.rho_s * inv_dt * sp.identity(nt) - p.gamma * self.d_yy)
        if inv_dt:
            beam = beam + self.ell * p.alpha * (1.0 / inv_dt) * self.d4
        k_vv = beam + sum(
            sp.diags(c) @ self.diff.flux_data @ sp.diags(c) for c in (nx, ny)
        )
        blocks = [
            [k_uu, None, -d_x.T, -self.diff.boundary @ sp.diags(nx)],
            [None, k_uu, -d_y.T, -self.diff.boundary @ sp.diags(ny)],
            [d_x, d_y, None, self.div_v],
            [sp.diags(nx) @ self.diff.flux_cells, sp.diags(ny) @ self.diff.flux_cells, -self.div_v.T, k_vv],
        ]
        if self.freeze:
            blocks[3] = [None, None, None, sp.identity(nt)]
            gauge = sp.csr_matrix(self.vol[:, None])
            for row in blocks:
                row.append(None)
            blocks[2][4] = gauge
            blocks.append([None, None, gauge.T, None, None])
        return sp.bmat(blocks, format="csr")

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        sol = self.lu.solve(rhs)
        for _ in range(REFINE_STEPS):
            if not np.all(np.isfinite(sol)):
                break
            sol = sol + self.lu.solve(rhs - self.matrix @ sol)
        if not np.all(np.isfinite(sol)):
            raise SolverDivergence("solvent-structure solve returned non-finite values")
        res = np.linalg.norm(self.matrix @ sol - rhs)
        scale = max(np.linalg.norm(rhs), 1.0)
        if res > SOLVE_TOL * scale:
            raise SolverDivergence(f"solvent-structure residual {res:.3e} above {SOLVE_TOL * scale:.3e}")
        return sol

    def split(self, sol: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        n, nt = self.n, self.nt
        u = np.stack([sol[:n], sol[n : 2 * n]], axis=-1).reshape(self.grid.shape + (2,))
        pressure = sol[2 * n : 3 * n].reshape(self.grid.shape)
        v = sol[3 * n : 3 * n + nt]
        return u, pressure, v

    def divergence(self, flow: FlowState) -> np.ndarray:
        """Discrete B₀:∇ū per unit reference volume, wall speed included."""
        u = flow.u_bar.reshape(-1, 2)
        v = np.zeros(self.nt) if flow.wall_speed is None else flow.wall_speed
        net = self.div_u @ np.concatenate([u[:, 0], u[:, 1]]) + self.div_v @ v
        return (net / self.vol).reshape(self.grid.shape)

    def divergence_residual(self, flow: FlowState, h=None) -> float:
        """max_c |B₀:∇ū − h| over cells."""
        div = self.divergence(flow)
        if h is not None:
            div = div - np.asarray(h, dtype=float).reshape(self.grid.shape)
        return float(np.max(np.abs(div)))

    def transport_face_fluxes(self, flow: FlowState, hmap: HanzawaMap | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Volume fluxes along +r / +θ whose cell sums are the divergence constraint's left side."""
        hmap = hmap or self.map0
        g = self.grid
        u = flow.u_bar
        bn_r, bn_t = hmap.flux_normals
        flux_r = np.zeros((g.n_r + 1, g.n_theta))
        flux_r[1:-1] = np.einsum("ijk,ijk->ij", 0.5 * (u[:-1] + u[1:]), bn_r[1:-1])
        if flow.wall_speed is not None:
            flux_r[-1] = flow.wall_speed * np.einsum("jk,jk->j", self.normals, bn_r[-1])
        flux_t = np.einsum("ijk,ijk->ij", 0.5 * (u + np.roll(u, -1, axis=1)), bn_t)
        return flux_r, flux_t


@lru_cache(maxsize=8)
def step_operator(
    map0: HanzawaMap,
    params: PhysicalParams,
    dt: float | None,
    freeze_structure: bool = False,
) -> LinearStepOperator:
    return LinearStepOperator(map0, params, dt, freeze_structure)


# ---------------------------------------------------------------------------
# Step
# ---------------------------------------------------------------------------


def solve_linear_step(
    map0: HanzawaMap,
    structure_prev: StructureState,
    flow_prev: FlowState,
    terms: PerturbationTerms | None,
    stress,
    g,
    dt: float,
    params: PhysicalParams | None = None,
    *,
    freeze_structure: bool = False,
    operator: LinearStepOperator | None = None,
) -> tuple[StructureState, FlowState]:
    """One implicit Euler step from ``(structure_prev, flow_prev)`` to t + dt.

    ``stress`` is the Kramers stress at t + dt on cells (or None) and ``g``
    the structure forcing at the boundary nodes at t + dt.
    """
    params = params or PhysicalParams()
    op = operator or step_operator(map0, params, float(dt), freeze_structure)
    grid = map0.grid
    terms = terms or PerturbationTerms.zeros(grid.shape)
    n, nt = op.n, op.nt

    flux_r, flux_t = tensor_face_fluxes(map0, stress, terms.H)
    net = grid.sum_face_fluxes(flux_r, flux_t).reshape(n, 2)
    u_prev = flow_prev.u_bar.reshape(n, 2)
    h_vec = np.asarray(terms.h_vec, dtype=float).reshape(n, 2)
    momentum = op.mass[:, None] * u_prev / dt + net + op.vol[:, None] * h_vec
    continuity = op.vol * np.asarray(terms.h, dtype=float).ravel()

    g = np.zeros(nt) if g is None else np.asarray(g, dtype=float)
    if freeze_structure:
        beam = np.zeros(nt)
    else:
        wall_load = np.einsum("jk,jk->j", op.normals, flux_r[-1])
        beam = op.ell * (
            params.rho_s * structure_prev.eta_dot / dt - params.alpha * (op.d4 @ structure_prev.eta) + g
        ) - wall_load
    rhs = np.concatenate([momentum[:, 0], momentum[:, 1], continuity, beam])
    if freeze_structure:
        rhs = np.append(rhs, 0.0)

    u, pressure, v = op.split(op.solve(rhs))
    time = structure_prev.time + dt
    if freeze_structure:
        v = np.zeros(nt)
        structure = StructureState(structure_prev.eta, v, time, eta_ddot=np.zeros(nt))
    else:
        eta = structure_prev.eta + dt * v
        structure = StructureState(eta, v, time, eta_ddot=(v - structure_prev.eta_dot) / dt)
    return structure, FlowState(u, pressure, time, wall_speed=v)


def solve_stokes(
    map0: HanzawaMap,
    force,
    params: PhysicalParams | None = None,
) -> FlowState:
    """Steady Stokes flow for a body force per unit volume, no-slip wall, zero-mean pressure."""
    params = params or PhysicalParams()
    op = step_operator(map0, params, None, True)
    n = op.n
    f = np.asarray(force, dtype=float).reshape(n, 2) * op.vol[:, None]
    rhs = np.concatenate([f[:, 0], f[:, 1], np.zeros(n), np.zeros(op.nt), [0.0]])
    u, pressure, _ = op.split(op.solve(rhs))
    return FlowState(u, pressure, 0.0, wall_speed=np.zeros(op.nt))

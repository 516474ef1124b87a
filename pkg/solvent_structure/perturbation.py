# -*- coding: utf-8 -*-
"""Defects between the frozen-geometry operator and the true pulled-back one.

With ``η₀`` frozen in the operator and ``ζ`` the current geometry iterate:

    h     = (B₀ − B_ζ) : ∇w̄
    H     = μ ∇w̄ (A₀ − A_ζ) − (q̄ I − S)(B₀ − B_ζ)
    h_vec = ρ_f (J₀ − J_ζ) ∂_t w̄ − ρ_f J_ζ ∇w̄ (∂_tΨ_ζ⁻¹∘Ψ_ζ)
            − ρ_f J_ζ ∇w̄ F_ζ⁻¹ w̄ + J_ζ f∘Ψ_ζ
"""

from __future__ import annotations

import numpy as np

from geometry.hanzawa import HanzawaMap

from .state import Dataset, FlowState, PerturbationTerms, PhysicalParams


def _velocity(w) -> np.ndarray:
    return w.u_bar if isinstance(w, FlowState) else np.asarray(w, dtype=float)


def reference_gradient(hmap: HanzawaMap, velocity, wall_speed=None) -> np.ndarray:
    """∇_X ū per cell; the wall trace (∂_tη) n closes the outer ring when given."""
    g = hmap.grid
    u = np.asarray(velocity, dtype=float).reshape(g.shape + (2,))
    if wall_speed is None:
        return g.gradient(u, bc="extrapolate")
    trace = np.asarray(wall_speed, dtype=float)[:, None] * hmap.domain.outward_normal(g.theta)
    return g.gradient(u, trace, bc="dirichlet")


def assemble_perturbation_terms(
    map0: HanzawaMap,
    zeta_map: HanzawaMap,
    zeta_dot,
    w_bar,
    q_bar=None,
    stress=None,
    params: PhysicalParams | None = None,
    *,
    w_prev=None,
    dt: float | None = None,
    force: np.ndarray | None = None,
    dataset: Dataset | None = None,
    time: float = 0.0,
    convective: bool = True,
) -> PerturbationTerms:
    """Evaluate (h, h_vec, H) on the reference grid.

    ``force`` is f∘Ψ_ζ at cell centers; if absent it is taken from
    ``dataset.f`` at the deformed cell centers.
    """
    params = params or PhysicalParams()
    g = map0.grid
    zeta_dot = np.asarray(zeta_dot, dtype=float)
    w = _velocity(w_bar).reshape(g.shape + (2,))
    q = np.zeros(g.shape) if q_bar is None else np.asarray(q_bar, dtype=float).reshape(g.shape)
    s = np.zeros(g.shape + (2, 2)) if stress is None else np.asarray(stress, dtype=float).reshape(g.shape + (2, 2))

    grad = reference_gradient(map0, w, zeta_dot)
    d_b = map0.B - zeta_map.B
    d_a = map0.A - zeta_map.A
    j0, jz = map0.jacobian, zeta_map.jacobian

    h = np.einsum("...ij,...ij->...", d_b, grad)
    pressure_part = q[..., None, None] * np.eye(2) - s
    H = params.mu * np.einsum("...ik,...kj->...ij", grad, d_a) - np.einsum("...ik,...kj->...ij", pressure_part, d_b)

    h_vec = np.zeros(g.shape + (2,))
    if w_prev is not None and dt:
        rate = (w - _velocity(w_prev).reshape(g.shape + (2,))) / dt
        h_vec += params.rho_f * (j0 - jz)[..., None] * rate
    mesh = zeta_map.inverse_mesh_velocity(zeta_dot)
    h_vec -= params.rho_f * jz[..., None] * np.einsum("...ij,...j->...i", grad, mesh)
    if convective:
        push = np.einsum("...ij,...j->...i", zeta_map.F_inv, w)
        h_vec -= params.rho_f * jz[..., None] * np.einsum("...ij,...j->...i", grad, push)
    if force is None and dataset is not None and dataset.f is not None:
        force = dataset.body_force(time, zeta_map.forward(g.centers))
    if force is not None:
        h_vec += jz[..., None] * np.asarray(force, dtype=float).reshape(g.shape + (2,))
    return PerturbationTerms(h, h_vec, H)

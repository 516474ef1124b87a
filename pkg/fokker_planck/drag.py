# -*- coding: utf-8 -*-
"""Configuration-space drag ``div_q(K q M f̂)`` on the polar q-grid.

``K`` is either the full velocity gradient ``∇_x u`` (cut off by χⁿ) or its
skew part ``W(u)``.  For a linear field ``v = K q`` the normal velocity on a
q-face splits into a symmetric part and a rigid rotation::

    v · e_r = r e_rᵀ S e_r,      v · e_θ = r (e_θᵀ S e_r + W₂₁)

so in co-rotational mode the radial fluxes vanish identically and the
angular fluxes are uniform around each ring.
"""

from __future__ import annotations

import enum
import logging

import numpy as np

from configspace.fene import FeneModel, cutoff_weight
from geometry.domain import PolarGrid
from geometry.errors import CflViolation

logger = logging.getLogger(__name__)


class DragMode(str, enum.Enum):
    FULL_GRADIENT = "full_gradient"
    CO_ROTATIONAL = "co_rotational"

    @classmethod
    def parse(cls, value: "DragMode | str") -> "DragMode":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "_")
        aliases = {"fullgradient": cls.FULL_GRADIENT, "corotational": cls.CO_ROTATIONAL}
        if key in aliases:
            return aliases[key]
        return cls(key)


# ---------------------------------------------------------------------------
# Velocity gradients
# ---------------------------------------------------------------------------


def velocity_gradient(velocity, grid: PolarGrid, boundary=None, F_inv=None) -> np.ndarray:
    """∇_x u per cell, shape (n_r, n_theta, 2, 2) with ``[i, j] = ∂u_i/∂x_j``.

    With ``F_inv`` the reference gradient is pushed forward, ``∇ū F⁻¹``.
    ``boundary`` holds the velocity trace (n_theta, 2); without it the
    outer ring is differenced one-sidedly.
    """
    values = np.asarray(velocity, dtype=float).reshape(grid.shape + (2,))
    if boundary is None:
        grad = grid.gradient(values, bc="extrapolate")
    else:
        grad = grid.gradient(values, np.asarray(boundary, dtype=float), bc="dirichlet")
    if F_inv is not None:
        grad = np.einsum("...ik,...kj->...ij", grad, np.asarray(F_inv, dtype=float))
    return grad


def skew_gradient(velocity, grid: PolarGrid, boundary=None, F_inv=None) -> np.ndarray:
    """W(u) = ½(∇u − ∇uᵀ); antisymmetric by construction."""
    grad = velocity_gradient(velocity, grid, boundary, F_inv)
    return 0.5 * (grad - np.swapaxes(grad, -1, -2))


def drag_matrix(gradient: np.ndarray, mode: DragMode) -> np.ndarray:
    """Matrix K acting on q, flattened to (n_x, 2, 2)."""
    k = np.asarray(gradient, dtype=float).reshape(-1, 2, 2)
    if DragMode.parse(mode) is DragMode.CO_ROTATIONAL:
        return 0.5 * (k - np.swapaxes(k, -1, -2))
    return k


# ---------------------------------------------------------------------------
# Face velocities on the q-grid
# ---------------------------------------------------------------------------


def _arc_moments(grid: PolarGrid) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    lo = grid.theta - 0.5 * grid.dtheta
    hi = grid.theta + 0.5 * grid.dtheta
    cc = 0.5 * grid.dtheta + 0.25 * (np.sin(2.0 * hi) - np.sin(2.0 * lo))
    ss = 0.5 * grid.dtheta - 0.25 * (np.sin(2.0 * hi) - np.sin(2.0 * lo))
    cs = -0.25 * (np.cos(2.0 * hi) - np.cos(2.0 * lo))
    return cc, ss, cs


def face_velocities(k: np.ndarray, model: FeneModel, mode: DragMode, level: int | None) -> tuple[np.ndarray, np.ndarray]:
    """∫ v·n ds on q-faces for each x-cell.

    Returns r-face values (n_qr+1, n_qθ, n_x) and θ-face values
    (n_qr, n_qθ, n_x), oriented along +r and +θ.
    """
    mode = DragMode.parse(mode)
    g = model.grid
    sym = 0.5 * (k + np.swapaxes(k, -1, -2))
    rot = 0.5 * (k[:, 1, 0] - k[:, 0, 1])
    if mode is DragMode.CO_ROTATIONAL:
        sym = np.zeros_like(sym)
        chi_r = np.ones(g.n_r + 1)
        chi_t = np.ones(g.n_r)
    else:
        if level is None:
            raise ValueError("full-gradient drag needs a cutoff level")
        chi_r = cutoff_weight(g.r_faces, level, model.b)
        chi_t = cutoff_weight(g.r, level, model.b)

    cc, ss, cs = _arc_moments(g)
    radial = np.einsum("j,x->jx", cc, sym[:, 0, 0]) + np.einsum("j,x->jx", ss, sym[:, 1, 1])
    radial += 2.0 * np.einsum("j,x->jx", cs, sym[:, 0, 1])
    v_r = (chi_r * g.r_faces**2)[:, None, None] * radial[None, :, :]

    tf = g.theta_faces
    c, s = np.cos(tf), np.sin(tf)
    # e_θᵀ S e_r at θ_{j+½}
    shear = np.einsum("j,x->jx", -s * c, sym[:, 0, 0]) + np.einsum("j,x->jx", s * c, sym[:, 1, 1])
    shear += np.einsum("j,x->jx", c * c - s * s, sym[:, 0, 1])
    ring = 0.5 * (g.r_faces[1:] ** 2 - g.r_faces[:-1] ** 2) * chi_t
    v_t = ring[:, None, None] * (shear + rot[None, :])[None, :, :]
    return v_r, v_t


def _upwind(v: np.ndarray, low: np.ndarray, high: np.ndarray) -> np.ndarray:
    return np.where(v > 0.0, low, high)


def _arrange(f_hat: np.ndarray, model: FeneModel) -> np.ndarray:
    """(n_x, n_q) -> (n_qr, n_qθ, n_x)."""
    return f_hat.T.reshape(model.grid.shape + (f_hat.shape[0],))


def drag_fluxes(f_hat: np.ndarray, v_r: np.ndarray, v_t: np.ndarray, model: FeneModel, centered: bool = False):
    """Face fluxes ``v·N M f̂`` with upwind (default) or centered f̂."""
    m_r, m_t = model.face_maxwellian
    f = _arrange(f_hat, model)
    n_r = model.grid.n_r
    flux_r = np.zeros_like(v_r)
    lo, hi = f[:-1], f[1:]
    vi = v_r[1:n_r]
    face = 0.5 * (lo + hi) if centered else _upwind(vi, lo, hi)
    flux_r[1:n_r] = vi * m_r[1:n_r, :, None] * face
    nxt = np.roll(f, -1, axis=1)
    face = 0.5 * (f + nxt) if centered else _upwind(v_t, f, nxt)
    flux_t = v_t * m_t[:, :, None] * face
    return flux_r, flux_t


def drag_divergence(f_hat: np.ndarray, v_r, v_t, model: FeneModel, centered: bool = False) -> np.ndarray:
    """Net outward drag flux per (x, q) cell, shape (n_x, n_q)."""
    flux_r, flux_t = drag_fluxes(f_hat, v_r, v_t, model, centered)
    net = model.grid.sum_face_fluxes(flux_r, flux_t)
    return net.reshape(model.size, -1).T


def drag_courant(v_r: np.ndarray, v_t: np.ndarray, model: FeneModel, dt: float) -> float:
    """Largest dt · (outgoing flux capacity) / m_c over all cells."""
    m_r, m_t = model.face_maxwellian
    out = np.maximum(v_r[1:], 0.0) * m_r[1:, :, None] + np.maximum(-v_r[:-1], 0.0) * m_r[:-1, :, None]
    out += np.maximum(v_t, 0.0) * m_t[:, :, None] + np.maximum(-np.roll(v_t, 1, axis=1), 0.0) * m_t[:, :, None]
    weights = model.weights.reshape(model.grid.shape)[:, :, None]
    return float(np.max(dt * out / weights)) if out.size else 0.0


def apply_drag(f_hat: np.ndarray, v_r, v_t, model: FeneModel, dt: float, cfl: float = 1.0) -> np.ndarray:
    """Explicit upwind drag step; positivity preserving under the Courant bound."""
    courant = drag_courant(v_r, v_t, model, dt)
    if courant > cfl:
        raise CflViolation(f"drag Courant number {courant:.3f} exceeds {cfl}", courant)
    return f_hat - dt * drag_divergence(f_hat, v_r, v_t, model) / model.weights[None, :]


def drag_production(f_hat: np.ndarray, v_r, v_t, model: FeneModel, areas: np.ndarray) -> float:
    """−Σ_x a_x Σ_q f̂ div(centered drag flux); zero for skew drag."""
    div = drag_divergence(f_hat, v_r, v_t, model, centered=True)
    return float(-np.asarray(areas, dtype=float).ravel() @ np.sum(f_hat * div, axis=1))


def drag_bound(f_hat: np.ndarray, k: np.ndarray, model: FeneModel, areas: np.ndarray) -> float:
    """Σ_x a_x ‖K_x‖₂ Σ_faces ℓ_f r_f M_f |f̄_f| |Δf̂_f|, an upper bound of |drag_production|."""
    g = model.grid
    m_r, m_t = model.face_maxwellian
    f = _arrange(f_hat, model)
    norms = np.linalg.norm(k, ord=2, axis=(1, 2))
    arc = g.r_faces[1:-1] * g.dtheta
    lo, hi = f[:-1], f[1:]
    term_r = ((arc * g.r_faces[1:-1])[:, None] * m_r[1:-1])[:, :, None] * np.abs(0.5 * (lo + hi)) * np.abs(hi - lo)
    nxt = np.roll(f, -1, axis=1)
    mid = 0.5 * (g.r_faces[1:] + g.r_faces[:-1])
    term_t = ((g.dr * mid)[:, None] * m_t)[:, :, None] * np.abs(0.5 * (f + nxt)) * np.abs(nxt - f)
    per_x = term_r.sum(axis=(0, 1)) + term_t.sum(axis=(0, 1))
    return float(np.asarray(areas, dtype=float).ravel() @ (norms * per_x))

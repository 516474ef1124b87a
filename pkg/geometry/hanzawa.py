# -*- coding: utf-8 -*-
"""Hanzawa transform of the reference disk and its pulled-back tensors.

For the disk the tubular coordinates are polar, ``p(x) = R e_r``,
``s(x) = |x| - R``, and the transform moves points along rays:

    Ψ_η(r, θ) = ρ(r, θ) e_r(θ),    ρ = r + η(θ) φ_c(r - R).

All tensors are evaluated from the exact derivatives of ρ, with η
represented by its trigonometric interpolant.  Index convention: the
deformation gradient is ``F[i, j] = ∂Ψ_i/∂x_j``, velocity gradients are
``∇u[i, j] = ∂u_i/∂x_j``, and

    J = det F,   B = J F⁻ᵀ (= cof F),   A = J F⁻¹ F⁻ᵀ.

The flux of a deformed-frame field ``w`` through a reference face with
integrated normal ``N`` is ``w · (B N)``; the conormal diffusive flux is
``(A ∇f) · N``.
"""

from __future__ import annotations

import logging
from functools import cached_property

import numpy as np

from .domain import ReferenceDomain
from .errors import DegenerateBoundary, DegenerateMap, TubeExit
from .state import StructureState
from .trig import TrigInterpolant

logger = logging.getLogger(__name__)

ROOT_TOL = 1e-12
_GAUSS_NODES, _GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(4)


def _as_eta(eta) -> np.ndarray:
    if isinstance(eta, StructureState):
        return eta.eta.copy()
    return np.array(eta, dtype=float)


def _rotate(polar: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """Polar-basis tensors (…, 2, 2) to Cartesian components."""
    c, s = np.cos(theta), np.sin(theta)
    q = np.empty(theta.shape + (2, 2))
    q[..., 0, 0], q[..., 0, 1] = c, -s
    q[..., 1, 0], q[..., 1, 1] = s, c
    return np.einsum("...ik,...kl,...jl->...ij", q, polar, q)


class HanzawaMap:
    """Read-only snapshot of Ψ_η and everything derived from it."""

    def __init__(self, domain: ReferenceDomain, eta, root_tol: float = ROOT_TOL) -> None:
        self.domain = domain
        self.grid = domain.grid
        self.eta = _as_eta(eta)
        if self.eta.shape != (self.grid.n_theta,):
            raise ValueError(f"eta must have {self.grid.n_theta} boundary values, got {self.eta.shape}")
        self.interp = TrigInterpolant(self.eta)
        self.root_tol = root_tol

    # ------------------------------------------------------------------
    # pointwise radial profile
    # ------------------------------------------------------------------

    def _profile(self, r, theta) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        r = np.asarray(r, dtype=float)
        theta = np.asarray(theta, dtype=float)
        s = r - self.domain.radius
        eta = self.interp(theta)
        eta_p = self.interp(theta, 1)
        phi = self.domain.cutoff(s)
        rho = r + eta * phi
        rho_r = 1.0 + eta * self.domain.cutoff_prime(s)
        rho_t = eta_p * phi
        return rho, rho_r, rho_t

    def polar_tensors(self, r, theta) -> dict[str, np.ndarray]:
        """J and the polar components of F⁻¹, B and A at points (r, θ)."""
        rho, rho_r, rho_t = self._profile(r, theta)
        r = np.asarray(r, dtype=float)
        jac = rho_r * rho / r
        b = np.zeros(r.shape + (2, 2))
        b[..., 0, 0] = rho / r
        b[..., 1, 0] = -rho_t / r
        b[..., 1, 1] = rho_r
        f_inv = np.zeros(r.shape + (2, 2))
        f_inv[..., 0, 0] = rho / r / jac
        f_inv[..., 0, 1] = -rho_t / r / jac
        f_inv[..., 1, 1] = rho_r / jac
        a = np.empty(r.shape + (2, 2))
        a[..., 0, 0] = (rho**2 + rho_t**2) / (r * rho_r * rho)
        a[..., 0, 1] = a[..., 1, 0] = -rho_t / rho
        a[..., 1, 1] = r * rho_r / rho
        return {"J": jac, "B": b, "F_inv": f_inv, "A": a, "rho": rho, "rho_r": rho_r}

    def tensors_at(self, points) -> dict[str, np.ndarray]:
        """Cartesian J, F⁻¹, B and A at reference points of shape (…, 2)."""
        points = np.asarray(points, dtype=float)
        r = np.hypot(points[..., 0], points[..., 1])
        theta = np.arctan2(points[..., 1], points[..., 0])
        pol = self.polar_tensors(r, theta)
        return {
            "J": pol["J"],
            "F_inv": _rotate(pol["F_inv"], theta),
            "B": _rotate(pol["B"], theta),
            "A": _rotate(pol["A"], theta),
        }

    # ------------------------------------------------------------------
    # forward and inverse map
    # ------------------------------------------------------------------

    def forward(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        r = np.hypot(points[..., 0], points[..., 1])
        theta = np.arctan2(points[..., 1], points[..., 0])
        rho, _, _ = self._profile(r, theta)
        return np.stack([rho * np.cos(theta), rho * np.sin(theta)], axis=-1)

    def inverse(self, points) -> np.ndarray:
        """Ψ⁻¹ by safeguarded Newton–bisection on the ray through each point."""
        points = np.asarray(points, dtype=float)
        target = np.hypot(points[..., 0], points[..., 1])
        theta = np.arctan2(points[..., 1], points[..., 0])
        eta = self.interp(theta)
        radius = self.domain.radius
        lo = np.maximum(0.0, target - np.abs(eta))
        hi = target + np.abs(eta)
        r = np.clip(target - eta, lo, hi)
        for _ in range(200):
            s = r - radius
            g = r + eta * self.domain.cutoff(s) - target
            dg = 1.0 + eta * self.domain.cutoff_prime(s)
            lo = np.where(g < 0.0, r, lo)
            hi = np.where(g > 0.0, r, hi)
            newton = r - g / np.where(dg > 0.0, dg, 1.0)
            inside = (newton > lo) & (newton < hi) & (dg > 0.0)
            step = np.where(inside, newton, 0.5 * (lo + hi))
            done = np.abs(step - r) <= self.root_tol * max(radius, 1.0)
            r = step
            if np.all(done):
                break
        return np.stack([r * np.cos(theta), r * np.sin(theta)], axis=-1)

    # ------------------------------------------------------------------
    # tensors on the grid
    # ------------------------------------------------------------------

    @cached_property
    def cell_tensors(self) -> dict[str, np.ndarray]:
        g = self.grid
        pol = self.polar_tensors(g.radii, g.angles)
        return {
            "J": pol["J"],
            "rho_r": pol["rho_r"],
            "A_polar": pol["A"],
            "F_inv": _rotate(pol["F_inv"], g.angles),
            "B": _rotate(pol["B"], g.angles),
        }

    @property
    def jacobian(self) -> np.ndarray:
        return self.cell_tensors["J"]

    @property
    def F_inv(self) -> np.ndarray:
        return self.cell_tensors["F_inv"]

    @property
    def B(self) -> np.ndarray:
        return self.cell_tensors["B"]

    @property
    def A(self) -> np.ndarray:
        return _rotate(self.cell_tensors["A_polar"], self.grid.angles)

    @cached_property
    def r_face_tensors(self) -> dict[str, np.ndarray]:
        """Tensors at r-face midpoints (r_f, θ_j); the r = 0 row is zero."""
        g = self.grid
        r = np.repeat(g.r_faces[1:, None], g.n_theta, axis=1)
        theta = np.repeat(g.theta[None, :], g.n_r, axis=0)
        pol = self.polar_tensors(r, theta)
        a = np.zeros((g.n_r + 1, g.n_theta, 2, 2))
        b = np.zeros((g.n_r + 1, g.n_theta, 2, 2))
        a[1:] = pol["A"]
        b[1:] = _rotate(pol["B"], theta)
        return {"A_polar": a, "B": b}

    @cached_property
    def t_face_tensors(self) -> dict[str, np.ndarray]:
        """Tensors at θ-face midpoints (r_i, θ_{j+½})."""
        g = self.grid
        r = np.repeat(g.r[:, None], g.n_theta, axis=1)
        theta = np.repeat(g.theta_faces[None, :], g.n_r, axis=0)
        pol = self.polar_tensors(r, theta)
        return {"A_polar": pol["A"], "B": _rotate(pol["B"], theta)}

    def diffusion_coefficients(self, scale: float = 1.0) -> tuple[np.ndarray, ...]:
        """(a_rr, a_rt, a_tt, a_tr) face arrays of ``scale · A_η``."""
        ar = self.r_face_tensors["A_polar"]
        at = self.t_face_tensors["A_polar"]
        return scale * ar[..., 0, 0], scale * ar[..., 0, 1], scale * at[..., 1, 1], scale * at[..., 1, 0]

    def diffusion_operator(self, scale: float = 1.0, bc: str = "neumann"):
        return self.grid.diffusion_operator(*self.diffusion_coefficients(scale), bc=bc)

    @cached_property
    def flux_normals(self) -> tuple[np.ndarray, np.ndarray]:
        """B N on r-faces and θ-faces: velocity · (B N) is the deformed volume flux."""
        g = self.grid
        bn_r = np.einsum("...ij,...j->...i", self.r_face_tensors["B"], g.normals_r)
        bn_t = np.einsum("...ij,...j->...i", self.t_face_tensors["B"], g.normals_t)
        return bn_r, bn_t

    def piola_residual(self) -> np.ndarray:
        """Finite-volume divergence of the rows of B per unit cell volume, shape (n_r, n_theta, 2)."""
        g = self.grid
        flux_r = np.einsum("...ij,...j->...i", self.r_face_tensors["B"], g.normals_r)
        flux_t = np.einsum("...ij,...j->...i", self.t_face_tensors["B"], g.normals_t)
        return g.sum_face_fluxes(flux_r, flux_t) / g.volumes[..., None]

    # ------------------------------------------------------------------
    # mapped areas (exact along rays, Gauss–Legendre in θ)
    # ------------------------------------------------------------------

    @cached_property
    def _gauss_angles(self) -> np.ndarray:
        g = self.grid
        return g.theta[:, None] + 0.5 * g.dtheta * _GAUSS_NODES[None, :]

    @cached_property
    def face_rho_squared(self) -> np.ndarray:
        """ρ(r_f, θ)² at Gauss angles, shape (n_r+1, n_theta, 4)."""
        g = self.grid
        eta = self.interp(self._gauss_angles)
        r = g.r_faces[:, None, None]
        rho = r + eta[None] * self.domain.cutoff(r - self.domain.radius)
        return rho**2

    def _angular_quadrature(self, values: np.ndarray) -> np.ndarray:
        return values @ _GAUSS_WEIGHTS * (0.25 * self.grid.dtheta)

    @cached_property
    def cell_areas(self) -> np.ndarray:
        """Deformed area of each cell, i.e. ∫_cell J dx."""
        rho2 = self.face_rho_squared
        return self._angular_quadrature(rho2[1:] - rho2[:-1])

    def swept_areas(self, previous: "HanzawaMap") -> np.ndarray:
        """Area swept by each r-face moving from ``previous`` to this map, along +r."""
        return self._angular_quadrature(self.face_rho_squared - previous.face_rho_squared)

    @property
    def deformed_area(self) -> float:
        return float(self.cell_areas.sum())

    # ------------------------------------------------------------------
    # boundary and mesh velocity
    # ------------------------------------------------------------------

    @cached_property
    def boundary(self) -> dict[str, np.ndarray]:
        normal, factor = _normal_and_factor(self.interp, self.grid.theta, self.domain.radius)
        reference = self.domain.outward_normal(self.grid.theta)
        return {
            "eta": self.eta,
            "eta_prime": self.interp.nodal_derivative(1),
            "normal": normal,
            "factor": factor,
            "alignment": np.einsum("...i,...i->...", normal, reference),
        }

    def mesh_velocity(self, eta_dot) -> np.ndarray:
        """∂_tΨ at cell centers for boundary velocity ``eta_dot``."""
        g = self.grid
        speed = np.asarray(eta_dot, dtype=float)[None, :] * self.domain.cutoff(g.radii - self.domain.radius)
        return speed[..., None] * g.e_r[None, :, :]

    def inverse_mesh_velocity(self, eta_dot) -> np.ndarray:
        """(∂_tΨ⁻¹)∘Ψ = -F⁻¹ ∂_tΨ at cell centers."""
        return -self.mesh_velocity(eta_dot) / self.cell_tensors["rho_r"][..., None]

    def check(self) -> "HanzawaMap":
        jac = self.jacobian
        rho_r_faces = 1.0 + np.outer(
            np.ones(self.grid.n_r + 1), self.eta
        ) * self.domain.cutoff_prime(self.grid.r_faces[:, None] - self.domain.radius)
        worst = min(float(jac.min()), float(rho_r_faces.min()))
        if not np.isfinite(worst) or worst <= 0.0:
            raise DegenerateMap(f"Hanzawa map is not orientation preserving (min J = {worst:.3e})", worst)
        return self


def build_hanzawa(dom: ReferenceDomain, eta, *, root_tol: float = ROOT_TOL) -> HanzawaMap:
    """Build and validate Ψ_η for displacement ``eta`` (StructureState or array)."""
    values = _as_eta(eta)
    sup = float(np.max(np.abs(values), initial=0.0))
    if sup >= dom.tube_radius:
        raise TubeExit(f"‖eta‖_∞ = {sup:.4g} leaves the tube of radius {dom.tube_radius}", sup)
    hmap = HanzawaMap(dom, values, root_tol=root_tol).check()
    logger.debug("Hanzawa map built: min J=%.6f max J=%.6f", hmap.jacobian.min(), hmap.jacobian.max())
    return hmap


def _normal_and_factor(interp: TrigInterpolant, y, radius: float) -> tuple[np.ndarray, np.ndarray]:
    y = np.asarray(y, dtype=float)
    eta = interp(y)
    eta_p = interp(y, 1)
    e_r = np.stack([np.cos(y), np.sin(y)], axis=-1)
    e_t = np.stack([-np.sin(y), np.cos(y)], axis=-1)
    factor = np.hypot(radius + eta, eta_p)
    normal = ((radius + eta)[..., None] * e_r - eta_p[..., None] * e_t) / factor[..., None]
    return normal, factor


def deformed_normal(eta, y, domain: ReferenceDomain | None = None, tol: float = 1e-8) -> tuple[np.ndarray, np.ndarray]:
    """Unit outward normal n_η(y) and arc-length factor |∂_y φ_η| of the deformed circle."""
    radius = domain.radius if domain is not None else 1.0
    values = eta.eta if isinstance(eta, (StructureState, HanzawaMap)) else np.asarray(eta, dtype=float)
    normal, factor = _normal_and_factor(TrigInterpolant(values), y, radius)
    y = np.asarray(y, dtype=float)
    reference = np.stack([np.cos(y), np.sin(y)], axis=-1)
    alignment = np.einsum("...i,...i->...", normal, reference)
    if np.min(factor) <= tol:
        raise DegenerateBoundary(f"arc-length factor {np.min(factor):.3e} <= {tol}", "arc_length", float(np.min(factor)))
    if np.min(alignment) <= tol:
        raise DegenerateBoundary(
            f"normal alignment n·n_η = {np.min(alignment):.3e} <= {tol}", "normal_alignment", float(np.min(alignment))
        )
    return normal, factor

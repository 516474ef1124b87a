# -*- coding: utf-8 -*-
"""Reference disk, tubular neighbourhood and the polar finite-volume grid.

The grid is cell-centered in ``r`` (no node at the origin) and uniform in
``θ``.  Cells are numbered ``c = i * n_theta + j`` with ``i`` the ring and
``j`` the sector.  Interior operators are assembled once as sparse matrices
and then rescaled by face coefficients, so variable-coefficient operators
on a moving geometry only cost a few sparse products per step.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .errors import AmbiguousProjection, OutsideTube

logger = logging.getLogger(__name__)

# cutoff plateaus as fractions of the tube radius
CUTOFF_ZERO = 0.8
CUTOFF_ONE = 0.2

BOUNDARY_KINDS = ("neumann", "dirichlet", "extrapolate")


def cutoff_profile(s, tube_radius: float) -> np.ndarray:
    """Quintic smoothstep: 0 for s <= -0.8L, 1 for s >= -0.2L."""
    width = (CUTOFF_ZERO - CUTOFF_ONE) * tube_radius
    t = np.clip((np.asarray(s, dtype=float) + CUTOFF_ZERO * tube_radius) / width, 0.0, 1.0)
    return t**3 * (10.0 - 15.0 * t + 6.0 * t**2)


def cutoff_slope(s, tube_radius: float) -> np.ndarray:
    width = (CUTOFF_ZERO - CUTOFF_ONE) * tube_radius
    t = np.clip((np.asarray(s, dtype=float) + CUTOFF_ZERO * tube_radius) / width, 0.0, 1.0)
    return 30.0 * t**2 * (1.0 - t) ** 2 / width


@dataclass(frozen=True)
class DiffusionOperator:
    """Sparse form of ``f -> Σ_faces (A ∇f)·N`` per cell.

    ``boundary`` maps Dirichlet data (one value per boundary face) into the
    cell rows.  ``flux_cells``/``flux_data`` give the outward flux through
    each boundary face, used for the reaction load on the structure.
    """

    matrix: sp.csr_matrix
    boundary: sp.csr_matrix | None = None
    flux_cells: sp.csr_matrix | None = None
    flux_data: sp.csr_matrix | None = None


class PolarGrid:
    """Polar tensor grid on a disk of radius ``r_faces[-1]``."""

    def __init__(self, r_faces, n_theta: int, r_centers=None) -> None:
        r_faces = np.asarray(r_faces, dtype=float)
        if r_faces.ndim != 1 or r_faces.size < 5 or r_faces[0] != 0.0:
            raise ValueError("r_faces must start at 0 and hold at least 4 rings")
        if np.any(np.diff(r_faces) <= 0):
            raise ValueError("r_faces must be strictly increasing")
        if n_theta < 4 or n_theta % 2:
            raise ValueError("n_theta must be even and >= 4 (pole coupling across the origin)")
        self.r_faces = r_faces
        self.n_r = r_faces.size - 1
        self.n_theta = int(n_theta)
        if r_centers is None:
            r_centers = 0.5 * (r_faces[1:] + r_faces[:-1])
        self.r = np.asarray(r_centers, dtype=float)
        self.dr = np.diff(r_faces)
        self.dtheta = 2.0 * np.pi / self.n_theta
        self.theta = np.arange(self.n_theta) * self.dtheta
        self.theta_faces = self.theta + 0.5 * self.dtheta
        self.shape = (self.n_r, self.n_theta)
        self.size = self.n_r * self.n_theta
        self._radial_cache: dict[str, tuple[sp.csr_matrix, sp.csr_matrix]] = {}

    @classmethod
    def uniform(cls, radius: float, n_r: int, n_theta: int) -> "PolarGrid":
        return cls(np.linspace(0.0, radius, n_r + 1), n_theta)

    # ------------------------------------------------------------------
    # geometry of cells and faces
    # ------------------------------------------------------------------

    @property
    def radius(self) -> float:
        return float(self.r_faces[-1])

    def index(self, i, j):
        return np.asarray(i) * self.n_theta + np.mod(j, self.n_theta)

    @cached_property
    def volumes(self) -> np.ndarray:
        ring = 0.5 * (self.r_faces[1:] ** 2 - self.r_faces[:-1] ** 2) * self.dtheta
        return np.repeat(ring[:, None], self.n_theta, axis=1)

    @cached_property
    def area(self) -> float:
        return float(self.volumes.sum())

    @cached_property
    def radii(self) -> np.ndarray:
        return np.repeat(self.r[:, None], self.n_theta, axis=1)

    @cached_property
    def angles(self) -> np.ndarray:
        return np.repeat(self.theta[None, :], self.n_r, axis=0)

    @cached_property
    def centers(self) -> np.ndarray:
        return np.stack([self.radii * np.cos(self.angles), self.radii * np.sin(self.angles)], axis=-1)

    @cached_property
    def e_r(self) -> np.ndarray:
        return np.stack([np.cos(self.theta), np.sin(self.theta)], axis=-1)

    @cached_property
    def e_theta(self) -> np.ndarray:
        return np.stack([-np.sin(self.theta), np.cos(self.theta)], axis=-1)

    @cached_property
    def normals_r(self) -> np.ndarray:
        """∫ n ds over each r-face (arc), shape (n_r+1, n_theta, 2)."""
        chord = 2.0 * self.r_faces * np.sin(0.5 * self.dtheta)
        return chord[:, None, None] * self.e_r[None, :, :]

    @cached_property
    def normals_t(self) -> np.ndarray:
        """∫ n ds over each θ-face j+½ (radial segment), shape (n_r, n_theta, 2)."""
        e_t = np.stack([-np.sin(self.theta_faces), np.cos(self.theta_faces)], axis=-1)
        return self.dr[:, None, None] * e_t[None, :, :]

    def sum_face_fluxes(self, flux_r: np.ndarray, flux_t: np.ndarray) -> np.ndarray:
        """Net outward flux per cell from face fluxes oriented along +r / +θ."""
        return flux_r[1:] - flux_r[:-1] + flux_t - np.roll(flux_t, 1, axis=1)

    # ------------------------------------------------------------------
    # elementary sparse operators
    # ------------------------------------------------------------------

    def _sparse(self, rows, cols, vals, shape) -> sp.csr_matrix:
        return sp.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=shape
        ).tocsr()

    @cached_property
    def _interior_r(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        i, j = np.meshgrid(np.arange(self.n_r - 1), np.arange(self.n_theta), indexing="ij")
        face = (i * self.n_theta + j).ravel()
        return face, self.index(i, j).ravel(), self.index(i + 1, j).ravel()

    @cached_property
    def _sectors(self) -> tuple[np.ndarray, np.ndarray]:
        i, j = np.meshgrid(np.arange(self.n_r), np.arange(self.n_theta), indexing="ij")
        return self.index(i, j).ravel(), self.index(i, j + 1).ravel()

    @cached_property
    def grad_r_faces(self) -> sp.csr_matrix:
        face, lo, hi = self._interior_r
        inv = np.repeat(1.0 / np.diff(self.r), self.n_theta)
        shape = ((self.n_r - 1) * self.n_theta, self.size)
        return self._sparse([face, face], [hi, lo], [inv, -inv], shape)

    @cached_property
    def avg_r_faces(self) -> sp.csr_matrix:
        face, lo, hi = self._interior_r
        half = np.full(face.size, 0.5)
        return self._sparse([face, face], [hi, lo], [half, half], ((self.n_r - 1) * self.n_theta, self.size))

    @cached_property
    def div_r_faces(self) -> sp.csr_matrix:
        face, lo, hi = self._interior_r
        one = np.ones(face.size)
        return self._sparse([lo, hi], [face, face], [one, -one], (self.size, (self.n_r - 1) * self.n_theta))

    @cached_property
    def grad_t_faces(self) -> sp.csr_matrix:
        """Angular difference (f_{j+1} - f_j)/Δθ at θ-faces (not divided by r)."""
        here, nxt = self._sectors
        inv = np.full(here.size, 1.0 / self.dtheta)
        face = np.arange(self.size)
        return self._sparse([face, face], [nxt, here], [inv, -inv], (self.size, self.size))

    @cached_property
    def avg_t_faces(self) -> sp.csr_matrix:
        here, nxt = self._sectors
        face = np.arange(self.size)
        half = np.full(self.size, 0.5)
        return self._sparse([face, face], [nxt, here], [half, half], (self.size, self.size))

    @cached_property
    def div_t_faces(self) -> sp.csr_matrix:
        here, nxt = self._sectors
        face = np.arange(self.size)
        one = np.ones(self.size)
        return self._sparse([here, nxt], [face, face], [one, -one], (self.size, self.size))

    def _centered_theta(self, denominator: float) -> sp.csr_matrix:
        here, nxt = self._sectors
        i = here // self.n_theta
        j = here % self.n_theta
        prev = self.index(i, j - 1)
        val = np.full(self.size, 1.0 / denominator)
        return self._sparse([here, here], [nxt, prev], [val, -val], (self.size, self.size))

    @cached_property
    def ddtheta(self) -> sp.csr_matrix:
        """Centered ∂_θ at cell centers."""
        return self._centered_theta(2.0 * self.dtheta)

    @cached_property
    def ddtheta_chord(self) -> sp.csr_matrix:
        """Centered angular difference over 2 sin Δθ; divided by r it is exact on linear fields."""
        return self._centered_theta(2.0 * np.sin(self.dtheta))

    @cached_property
    def ring_scatter(self) -> sp.csr_matrix:
        """Maps one value per boundary face onto the outer ring of cells."""
        cells = self.index(self.n_r - 1, np.arange(self.n_theta))
        return sp.csr_matrix((np.ones(self.n_theta), (cells, np.arange(self.n_theta))), shape=(self.size, self.n_theta))

    @cached_property
    def periodic_centered(self) -> sp.csr_matrix:
        """Centered ∂_y on the boundary grid."""
        j = np.arange(self.n_theta)
        val = np.full(self.n_theta, 0.5 / self.dtheta)
        return self._sparse([j, j], [(j + 1) % self.n_theta, (j - 1) % self.n_theta], [val, -val], (self.n_theta, self.n_theta))

    def radial_derivative(self, bc: str = "extrapolate") -> tuple[sp.csr_matrix, sp.csr_matrix]:
        """Centered ∂_r at cell centers as ``(D, D_b)``; ``D_b`` acts on boundary data."""
        if bc not in BOUNDARY_KINDS:
            raise ValueError(f"unknown boundary kind: {bc}")
        if bc in self._radial_cache:
            return self._radial_cache[bc]
        nt, nr, r = self.n_theta, self.n_r, self.r
        j = np.arange(nt)
        rows, cols, vals = [], [], []
        # pole: ghost is the cell across the origin at radius -r_0
        den = r[1] + r[0]
        rows += [self.index(0, j)] * 2
        cols += [self.index(1, j), self.index(0, j + nt // 2)]
        vals += [np.full(nt, 1.0 / den), np.full(nt, -1.0 / den)]
        for i in range(1, nr - 1):
            den = r[i + 1] - r[i - 1]
            rows += [self.index(i, j)] * 2
            cols += [self.index(i + 1, j), self.index(i - 1, j)]
            vals += [np.full(nt, 1.0 / den), np.full(nt, -1.0 / den)]
        outer, inner = self.index(nr - 1, j), self.index(nr - 2, j)
        b_rows, b_cols, b_vals = [], [], []
        if bc == "extrapolate":
            den = r[-1] - r[-2]
            rows += [outer, outer]
            cols += [outer, inner]
            vals += [np.full(nt, 1.0 / den), np.full(nt, -1.0 / den)]
        else:
            den = 2.0 * self.radius - r[-1] - r[-2]
            if bc == "neumann":
                rows += [outer, outer]
                cols += [outer, inner]
                vals += [np.full(nt, 1.0 / den), np.full(nt, -1.0 / den)]
            else:
                rows += [outer, outer]
                cols += [outer, inner]
                vals += [np.full(nt, -1.0 / den), np.full(nt, -1.0 / den)]
                b_rows, b_cols, b_vals = [outer], [j], [np.full(nt, 2.0 / den)]
        d = self._sparse(rows, cols, vals, (self.size, self.size))
        if b_rows:
            db = self._sparse(b_rows, b_cols, b_vals, (self.size, nt))
        else:
            db = sp.csr_matrix((self.size, nt))
        self._radial_cache[bc] = (d, db)
        return d, db

    def boundary_derivative_weights(self) -> tuple[float, float, float]:
        """Weights (w_b, w_1, w_2) of the quadratic one-sided ∂_r at r = R.

        ∂_r f(R) ≈ w_b g + w_1 f_{N-1} + w_2 f_{N-2}.
        """
        d1 = self.radius - self.r[-1]
        d2 = self.radius - self.r[-2]
        return 1.0 / d1 + 1.0 / d2, -d2 / (d1 * (d2 - d1)), d1 / (d2 * (d2 - d1))

    # ------------------------------------------------------------------
    # variable-coefficient operators
    # ------------------------------------------------------------------

    def diffusion_operator(self, a_rr, a_rt, a_tt, a_tr, bc: str = "neumann") -> DiffusionOperator:
        """Finite-volume ``div(A ∇·)`` with polar components of A on faces.

        ``a_rr``/``a_rt`` live on r-faces, shape (n_r+1, n_theta); ``a_tt``/
        ``a_tr`` on θ-faces, shape (n_r, n_theta).  ``bc`` is ``neumann``
        (zero conormal flux) or ``dirichlet`` (data on the outer boundary).
        """
        if bc not in ("neumann", "dirichlet"):
            raise ValueError(f"unsupported boundary kind for diffusion: {bc}")
        a_rr, a_rt = np.asarray(a_rr, dtype=float), np.asarray(a_rt, dtype=float)
        a_tt, a_tr = np.asarray(a_tt, dtype=float), np.asarray(a_tr, dtype=float)
        nt = self.n_theta
        r_in = self.r_faces[1:-1]
        area_r = np.repeat(r_in * self.dtheta, nt)
        rr = area_r * a_rr[1:-1].ravel()
        rt = area_r * a_rt[1:-1].ravel() / np.repeat(r_in, nt)
        area_t = np.repeat(self.dr, nt)
        tt = area_t * a_tt.ravel() / np.repeat(self.r, nt)
        tr = area_t * a_tr.ravel()
        d_r, d_rb = self.radial_derivative(bc)

        mat = (
            self.div_r_faces @ sp.diags(rr) @ self.grad_r_faces
            + self.div_r_faces @ sp.diags(rt) @ self.avg_r_faces @ self.ddtheta
            + self.div_t_faces @ sp.diags(tt) @ self.grad_t_faces
            + self.div_t_faces @ sp.diags(tr) @ self.avg_t_faces @ d_r
        )
        if bc == "neumann":
            return DiffusionOperator(mat.tocsr())

        boundary = self.div_t_faces @ sp.diags(tr) @ self.avg_t_faces @ d_rb
        w_b, w_1, w_2 = self.boundary_derivative_weights()
        area_b = self.radius * self.dtheta
        j = np.arange(nt)
        cb = area_b * a_rr[-1]
        flux_cells = sp.csr_matrix(
            (
                np.concatenate([cb * w_1, cb * w_2]),
                (np.concatenate([j, j]), np.concatenate([self.index(self.n_r - 1, j), self.index(self.n_r - 2, j)])),
            ),
            shape=(nt, self.size),
        )
        flux_data = sp.diags(cb * w_b) + sp.diags(area_b * a_rt[-1] / self.radius) @ self.periodic_centered
        mat = mat + self.ring_scatter @ flux_cells
        boundary = boundary + self.ring_scatter @ flux_data
        return DiffusionOperator(mat.tocsr(), boundary.tocsr(), flux_cells.tocsr(), flux_data.tocsr())

    # ------------------------------------------------------------------
    # cell-centered gradients
    # ------------------------------------------------------------------

    def polar_derivatives(self, values, boundary=None, bc: str = "extrapolate") -> tuple[np.ndarray, np.ndarray]:
        """(∂_r f, r⁻¹∂_θ f) at cell centers for fields of shape (n_r, n_theta, ...)."""
        values = np.asarray(values, dtype=float)
        rest = values.shape[2:]
        flat = values.reshape(self.size, -1)
        d_r, d_rb = self.radial_derivative(bc)
        radial = d_r @ flat
        if bc == "dirichlet":
            if boundary is None:
                raise ValueError("dirichlet gradient needs boundary values")
            radial = radial + d_rb @ np.asarray(boundary, dtype=float).reshape(self.n_theta, -1)
        angular = (self.ddtheta_chord @ flat) / np.repeat(self.r, self.n_theta)[:, None]
        return radial.reshape(self.shape + rest), angular.reshape(self.shape + rest)

    def gradient(self, values, boundary=None, bc: str = "extrapolate") -> np.ndarray:
        """Cartesian gradient, shape (n_r, n_theta, ..., 2); exact on linear fields."""
        radial, angular = self.polar_derivatives(values, boundary, bc)
        extra = radial.ndim - 2
        cos = np.cos(self.angles).reshape(self.shape + (1,) * extra)
        sin = np.sin(self.angles).reshape(self.shape + (1,) * extra)
        return np.stack([radial * cos - angular * sin, radial * sin + angular * cos], axis=-1)


@dataclass(frozen=True)
class ReferenceDomain:
    """Reference disk Ω with its boundary parametrization φ(y) = R(cos y, sin y)."""

    radius: float = 1.0
    tube_radius: float = 0.5
    n_r: int = 24
    n_theta: int = 48
    dimension: int = 2

    def __post_init__(self) -> None:
        if self.dimension != 2:
            raise NotImplementedError("only the 2-D disk is implemented")
        if not 0.0 < self.tube_radius:
            raise ValueError("tube radius must be positive")
        if self.radius <= 0.0:
            raise ValueError("radius must be positive")

    @cached_property
    def grid(self) -> PolarGrid:
        return PolarGrid.uniform(self.radius, self.n_r, self.n_theta)

    @property
    def boundary_nodes(self) -> np.ndarray:
        return self.grid.theta

    def boundary_param(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        return self.radius * np.stack([np.cos(y), np.sin(y)], axis=-1)

    def outward_normal(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        return np.stack([np.cos(y), np.sin(y)], axis=-1)

    def tangent(self, y) -> np.ndarray:
        """∂_y φ."""
        y = np.asarray(y, dtype=float)
        return self.radius * np.stack([-np.sin(y), np.cos(y)], axis=-1)

    def cutoff(self, s) -> np.ndarray:
        return cutoff_profile(s, self.tube_radius)

    def cutoff_prime(self, s) -> np.ndarray:
        return cutoff_slope(s, self.tube_radius)

    def project_to_boundary(self, x) -> tuple:
        """Foot point angle ``y`` and signed distance ``s`` (negative inside)."""
        x = np.asarray(x, dtype=float)
        rho = np.hypot(x[..., 0], x[..., 1])
        s = rho - self.radius
        if np.any(np.abs(s) >= self.tube_radius):
            raise OutsideTube(
                f"distance {np.max(np.abs(s)):.4g} to the boundary is not below L={self.tube_radius}"
            )
        if np.any(rho <= 1e-12 * self.radius):
            raise AmbiguousProjection("projection of the origin is not unique; L is too large")
        y = np.mod(np.arctan2(x[..., 1], x[..., 0]), 2.0 * np.pi)
        if np.ndim(y) == 0:
            return float(y), float(s)
        return y, s

    def foot_point(self, x) -> np.ndarray:
        y, _ = self.project_to_boundary(x)
        return self.boundary_param(y)

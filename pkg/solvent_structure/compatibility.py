# -*- coding: utf-8 -*-
"""Compatibility of the initial data at t = 0.

Structure and fluid accelerations must agree on the wall:

    [γ ∂_y²η⋆ − α ∂_y⁴η₀ + g(0) − nᵀT(0) n_η |∂_yφ_η|] n / ρ_s
        = [μΔu₀ − ∇π₀ + f(0) + div S(f̂₀)] / ρ_f        on ω

with T = μ(∇u + ∇uᵀ) − πI + S.  The convective term is left out, as in the
identity itself.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from geometry.hanzawa import HanzawaMap
from geometry.trig import TrigInterpolant

from .pressure import beam_operator_terms, initial_pressure, momentum_source, wall_traction, wall_values
from .state import Dataset, FlowState

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CompatibilityReport:
    """sup / L²(ω) of the residual (structure side − fluid side) and its parts."""

    normal_sup: float
    normal_l2: float
    tangential_sup: float
    tangential_l2: float
    sup: float
    l2: float
    residual: np.ndarray = field(repr=False, compare=False)

    def as_dict(self) -> dict[str, float]:
        return {
            "compat_normal_sup": self.normal_sup,
            "compat_normal_l2": self.normal_l2,
            "compat_tangential_sup": self.tangential_sup,
            "compat_tangential_l2": self.tangential_l2,
            "compat_sup": self.sup,
            "compat_l2": self.l2,
        }


def _initial_flow(dataset: Dataset, map0: HanzawaMap, pi0) -> FlowState:
    if pi0 is None:
        pi0 = dataset.pi0 if dataset.pi0 is not None else initial_pressure(dataset, map0, convective=False)
    return FlowState(dataset.u0, pi0, 0.0, wall_speed=dataset.eta_star)


def _sides(dataset: Dataset, map0: HanzawaMap, flow: FlowState, stress0) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(structure side without g(0), g(0), fluid acceleration on the wall)."""
    params = dataset.params
    grid = map0.grid
    b = map0.boundary
    pi_wall = wall_values(grid, flow.pi_bar)
    traction = wall_traction(map0, flow, stress0, params) - pi_wall * b["alignment"] * b["factor"]
    elastic = beam_operator_terms(dataset.eta0, dataset.eta_star, params) - traction
    g0 = dataset.structure_forcing(0.0, grid.theta)

    force = dataset.body_force(0.0, map0.forward(grid.centers)) if dataset.f is not None else None
    accel = momentum_source(map0, flow, stress0, force, params, convective=False)
    grad_pi = np.einsum("...k,...ki->...i", grid.gradient(flow.pi_bar), map0.F_inv)
    fluid = wall_values(grid, accel - grad_pi) / params.rho_f
    return elastic, g0, fluid


def check_compatibility(
    dataset: Dataset,
    map0: HanzawaMap,
    pi0: np.ndarray | None = None,
    *,
    stress0=None,
) -> CompatibilityReport:
    """Residual of the compatibility identity on the boundary nodes.

    π₀ is taken from ``pi0``, then ``dataset.pi0``, else from
    :func:`initial_pressure`.
    """
    flow = _initial_flow(dataset, map0, pi0)
    elastic, g0, fluid = _sides(dataset, map0, flow, stress0)
    grid = map0.grid
    n = map0.domain.outward_normal(grid.theta)
    n_eta = map0.boundary["normal"]
    tangent = np.stack([-n_eta[:, 1], n_eta[:, 0]], axis=-1)

    structure = (elastic + g0) / dataset.params.rho_s
    residual = structure[:, None] * n - fluid
    normal = np.einsum("jk,jk->j", residual, n_eta)
    tangential = np.einsum("jk,jk->j", residual, tangent)
    full = np.linalg.norm(residual, axis=-1)

    def _l2(values: np.ndarray) -> float:
        return float(np.sqrt(grid.dtheta * np.sum(values**2)))

    report = CompatibilityReport(
        float(np.max(np.abs(normal))),
        _l2(normal),
        float(np.max(np.abs(tangential))),
        _l2(tangential),
        float(np.max(full)),
        _l2(full),
        residual,
    )
    logger.debug("compatibility residual: sup=%.3e l2=%.3e", report.sup, report.l2)
    return report


def compatible_forcing(
    dataset: Dataset,
    map0: HanzawaMap,
    pi0: np.ndarray | None = None,
    *,
    stress0=None,
) -> Dataset:
    """Dataset whose g(0) makes the normal part of the identity vanish for the given π₀.

    The correction is a fixed function of y added to g for all t; π₀ is
    stored on the returned dataset.
    """
    flow = _initial_flow(dataset, map0, pi0)
    elastic, g0, fluid = _sides(dataset, map0, flow, stress0)
    grid = map0.grid
    n = map0.domain.outward_normal(grid.theta)
    n_eta = map0.boundary["normal"]
    alignment = np.einsum("jk,jk->j", n, n_eta)
    target = dataset.params.rho_s * np.einsum("jk,jk->j", fluid, n_eta) / alignment
    correction = TrigInterpolant(target - elastic - g0)
    previous = dataset.g

    def forcing(t, y):
        base = np.zeros(np.shape(y)) if previous is None else np.asarray(previous(t, y), dtype=float)
        return base + correction(y)

    logger.info("compatible forcing: max correction %.3e", float(np.max(np.abs(target - elastic - g0))))
    updated = dataset.with_forcing(forcing)
    updated.pi0 = flow.pi_bar
    return updated

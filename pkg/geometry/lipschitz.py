# -*- coding: utf-8 -*-
"""Empirical Lipschitz constants of η ↦ Ψ_η in integer-order Sobolev norms."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .domain import ReferenceDomain
from .errors import InadmissibleDisplacement
from .state import StructureState
from .trig import TrigInterpolant

logger = logging.getLogger(__name__)


@dataclass
class LipschitzReport:
    order: int
    ratios: dict[int, float] = field(default_factory=dict)
    numerators: dict[int, float] = field(default_factory=dict)
    denominators: dict[int, float] = field(default_factory=dict)

    @property
    def ratio(self) -> float:
        return self.ratios.get(0, 0.0)


def _values(eta) -> np.ndarray:
    return eta.eta if isinstance(eta, StructureState) else np.asarray(eta, dtype=float)


def _check(dom: ReferenceDomain, eta: np.ndarray, safety_margin: float, gradient_bound: float) -> None:
    if np.max(np.abs(eta)) >= safety_margin:
        raise InadmissibleDisplacement(f"‖eta‖_∞ = {np.max(np.abs(eta)):.4g} >= safety margin {safety_margin}")
    slope = np.max(np.abs(TrigInterpolant(eta).nodal_derivative(1)))
    if slope >= gradient_bound:
        raise InadmissibleDisplacement(f"‖eta'‖_∞ = {slope:.4g} >= gradient bound {gradient_bound}")


def _boundary_norm_sq(dom: ReferenceDomain, diff: np.ndarray, order: int) -> float:
    interp = TrigInterpolant(diff)
    weight = dom.radius * dom.grid.dtheta
    return float(sum(np.sum(interp.nodal_derivative(m) ** 2) * weight for m in range(order + 1)))


def _map_norm_sq(dom: ReferenceDomain, diff: np.ndarray, order: int) -> float:
    # Ψ_η - Ψ_ζ = (η - ζ)(θ) φ_c(r - R) e_r
    g = dom.grid
    amp = diff[None, :] * dom.cutoff(g.radii - dom.radius)
    field_ = amp[..., None] * g.e_r[None, :, :]
    total = 0.0
    for _ in range(order + 1):
        total += float(np.sum(field_**2 * g.volumes.reshape(g.shape + (1,) * (field_.ndim - 2))))
        field_ = g.gradient(field_)
    return total


def verify_lipschitz(
    dom: ReferenceDomain,
    eta,
    zeta,
    order: int = 0,
    *,
    safety_margin: float | None = None,
    gradient_bound: float = 1.0,
    eta_series: Sequence | None = None,
    zeta_series: Sequence | None = None,
    dt: float | None = None,
) -> LipschitzReport:
    """Ratio ‖∂_t^k(Ψ_η − Ψ_ζ)‖_{W^{s,2}(Ω)} / ‖∂_t^k(η − ζ)‖_{W^{s,2}(ω)}.

    ``k = 0`` always; ``k = 1`` when both displacement series and ``dt`` are
    supplied (time derivatives by forward differences, norms in L² in time).
    Equal displacements give a ratio of 0.
    """
    if order not in (0, 1, 2):
        raise ValueError("order must be 0, 1 or 2")
    margin = dom.tube_radius if safety_margin is None else safety_margin
    eta_v, zeta_v = _values(eta), _values(zeta)
    for values in (eta_v, zeta_v):
        _check(dom, values, margin, gradient_bound)

    report = LipschitzReport(order)
    diff = eta_v - zeta_v
    num, den = _map_norm_sq(dom, diff, order), _boundary_norm_sq(dom, diff, order)
    report.numerators[0], report.denominators[0] = float(np.sqrt(num)), float(np.sqrt(den))
    report.ratios[0] = float(np.sqrt(num / den)) if den > 0.0 else 0.0

    if eta_series is not None and zeta_series is not None and dt:
        a = np.array([_values(e) for e in eta_series])
        b = np.array([_values(z) for z in zeta_series])
        if a.shape != b.shape or a.shape[0] < 2:
            raise ValueError("displacement series must match and hold at least two snapshots")
        for snap in np.concatenate([a, b]):
            _check(dom, snap, margin, gradient_bound)
        rate = np.diff(a - b, axis=0) / dt
        num = sum(_map_norm_sq(dom, d, order) for d in rate) * dt
        den = sum(_boundary_norm_sq(dom, d, order) for d in rate) * dt
        report.numerators[1], report.denominators[1] = float(np.sqrt(num)), float(np.sqrt(den))
        report.ratios[1] = float(np.sqrt(num / den)) if den > 0.0 else 0.0

    logger.debug("verify_lipschitz order=%d ratios=%s", order, report.ratios)
    return report

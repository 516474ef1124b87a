# -*- coding: utf-8 -*-
"""Runtime monitors for the Fokker–Planck solver: mass, extrema, energy."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass

import numpy as np

from configspace.fene import FeneModel
from configspace.norms import pointwise_weighted_norm
from configspace.state import DistributionState
from geometry.hanzawa import HanzawaMap

from .drag import drag_bound, drag_production
from .stepper import FpStepInput, drag_velocities, flow_face_fluxes, transport_matrix

logger = logging.getLogger(__name__)


def _values(f) -> np.ndarray:
    return f.f_hat if isinstance(f, DistributionState) else np.asarray(f, dtype=float)


def solute_mass(f: DistributionState | np.ndarray, hmap: HanzawaMap, model: FeneModel) -> float:
    """m = Σ_x |cell_η| Σ_q m_q f̂, the solute mass in the deformed domain."""
    return float(hmap.cell_areas.ravel() @ (_values(f) @ model.weights))


@dataclass(frozen=True)
class Extrema:
    minimum: float
    norm_sup: float
    maximum: float


def extrema(f: DistributionState | np.ndarray, model: FeneModel) -> Extrema:
    """(min f̂, sup_x ‖f̂(x,·)‖_{L²_M}, max f̂)."""
    f_hat = _values(f)
    return Extrema(float(f_hat.min()), float(pointwise_weighted_norm(f_hat, model).max()), float(f_hat.max()))


@dataclass(frozen=True)
class EnergyReport:
    """Terms of the discrete energy balance of ½‖f̂‖²_{L²(Ω_η;L²_M)}.

    ``rate`` is only defined when a previous state is supplied; ``residual``
    is rate + dissipation − production − transport.
    """

    energy: float
    rate: float
    dissipation_x: float
    dissipation_q: float
    drag_production: float
    drag_bound: float
    transport: float
    residual: float

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


def energy_report(
    inp: FpStepInput,
    f: DistributionState | None = None,
    previous: DistributionState | None = None,
    previous_map: HanzawaMap | None = None,
) -> EnergyReport:
    """Energy terms at ``f`` (default: ``inp.state``) on the geometry of ``inp.map_new``."""
    f_hat = _values(f if f is not None else inp.state)
    hmap, model = inp.map_new, inp.model
    areas = hmap.cell_areas.ravel()
    m = model.weights

    energy = 0.5 * float(areas @ ((f_hat**2) @ m))
    rate = float("nan")
    if previous is not None:
        old_areas = (previous_map or hmap).cell_areas.ravel()
        old = 0.5 * float(old_areas @ ((previous.f_hat**2) @ m))
        rate = (energy - old) / inp.dt

    l_x = hmap.diffusion_operator(scale=inp.epsilon, bc="neumann").matrix
    dissipation_x = -float(np.sum((f_hat * (l_x @ f_hat)) @ m))
    l_q = model.diffusion_matrix
    dissipation_q = -inp.kappa * float(areas @ np.sum(f_hat * (l_q @ f_hat.T).T, axis=1))

    k, v_r, v_t = drag_velocities(inp)
    production = drag_production(f_hat, v_r, v_t, model, areas)
    bound = drag_bound(f_hat, k, model, areas)

    flux_r, flux_t = flow_face_fluxes(hmap, inp.velocity)
    centered = transport_matrix(hmap.grid, flux_r, flux_t, centered=True)
    transport = -float(np.sum((f_hat * (centered @ f_hat)) @ m))

    residual = rate + dissipation_x + dissipation_q - production - transport if previous is not None else float("nan")
    return EnergyReport(energy, rate, dissipation_x, dissipation_q, production, bound, transport, residual)


@dataclass
class TimeDerivativeMonitor:
    """Running record of ‖∂_t f̂‖_{L²(Ω;L²_M)}."""

    model: FeneModel
    volumes: np.ndarray
    steps: int = 0
    last: float = 0.0
    sup: float = 0.0

    def update(self, f: DistributionState) -> float:
        value = time_derivative_norm(f, self.model, self.volumes)
        self.steps += 1
        self.last = value
        self.sup = max(self.sup, value)
        return value


def time_derivative_norm(f: DistributionState, model: FeneModel, volumes: np.ndarray) -> float:
    vol = np.asarray(volumes, dtype=float).ravel()
    return float(np.sqrt(max(vol @ ((f.f_hat_dot**2) @ model.weights), 0.0)))


def time_derivative_monitor(history, model: FeneModel, volumes: np.ndarray) -> dict[str, float]:
    """‖∂_t f̂‖ of the latest state and its sup over ``history`` (at least two steps)."""
    states = list(history)
    if len(states) < 2:
        raise ValueError("time-derivative monitor needs at least two completed steps")
    norms = [time_derivative_norm(s, model, volumes) for s in states[1:]]
    return {"dt_norm": norms[-1], "dt_norm_sup": max(norms), "steps": len(norms)}

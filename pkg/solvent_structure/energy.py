# -*- coding: utf-8 -*-
"""Per-step energy table of a solvent–structure trajectory.

Columns
-------
time, kinetic (½ρ_f Σ J|ū|²), beam_kinetic (½ρ_s ∫|∂_tη|²),
elastic (½α ∫|∂_y²η|²), total, dt_grad_eta (∫|∂_t∂_yη|²),
grad_lap_eta (∫|∂_y³η|²), dissipation (μ‖∇ū‖² incl. the wall trace),
damping (γ ∫|∂_t∂_yη|²)
"""

from __future__ import annotations

import logging
from typing import Iterable

import numpy as np
import pandas as pd
import scipy.sparse as sp

from geometry.hanzawa import HanzawaMap
from geometry.state import StructureState

from .linear_step import periodic_second_difference
from .state import FlowState, PhysicalParams

logger = logging.getLogger(__name__)

COLUMNS = [
    "time",
    "kinetic",
    "beam_kinetic",
    "elastic",
    "total",
    "dt_grad_eta",
    "grad_lap_eta",
    "dissipation",
    "damping",
]


def _forward_difference(n: int, dy: float) -> sp.csr_matrix:
    j = np.arange(n)
    return sp.coo_matrix(
        (np.concatenate([-np.ones(n), np.ones(n)]) / dy, (np.concatenate([j, j]), np.concatenate([j, (j + 1) % n]))),
        shape=(n, n),
    ).tocsr()


def energy_row(
    structure: StructureState,
    flow: FlowState,
    hmap: HanzawaMap,
    params: PhysicalParams | None = None,
) -> dict[str, float]:
    params = params or PhysicalParams()
    g = hmap.grid
    ell = hmap.domain.radius * g.dtheta
    d_y = _forward_difference(g.n_theta, g.dtheta)
    d_yy = periodic_second_difference(g.n_theta, g.dtheta)

    mass = params.rho_f * g.volumes * hmap.jacobian
    kinetic = 0.5 * float(np.sum(mass[..., None] * flow.u_bar**2))
    beam_kinetic = 0.5 * params.rho_s * ell * float(structure.eta_dot @ structure.eta_dot)
    lap = d_yy @ structure.eta
    elastic = 0.5 * params.alpha * ell * float(lap @ lap)
    grad_v = d_y @ structure.eta_dot
    dt_grad = ell * float(grad_v @ grad_v)
    grad_lap = d_y @ lap
    higher = ell * float(grad_lap @ grad_lap)

    diff = hmap.diffusion_operator(scale=params.mu, bc="dirichlet")
    trace = flow.trace(hmap.domain.outward_normal(g.theta))
    dissipation = 0.0
    for k in range(2):
        u = flow.u_bar[..., k].ravel()
        dissipation -= float(u @ (diff.matrix @ u + diff.boundary @ trace[:, k]))
        # wall faces: trace times the outward wall flux
        dissipation += float(trace[:, k] @ (diff.flux_cells @ u + diff.flux_data @ trace[:, k]))
    return {
        "time": float(flow.time),
        "kinetic": kinetic,
        "beam_kinetic": beam_kinetic,
        "elastic": elastic,
        "total": kinetic + beam_kinetic + elastic,
        "dt_grad_eta": dt_grad,
        "grad_lap_eta": higher,
        "dissipation": dissipation,
        "damping": params.gamma * dt_grad,
    }


def energy_monitor(
    trajectory,
    hmap: HanzawaMap,
    params: PhysicalParams | None = None,
) -> pd.DataFrame:
    """Energy table for ``trajectory``: an InnerResult or (structure, flow) pairs.

    All rows use the geometry of ``hmap`` (the frozen map of the window).
    """
    if hasattr(trajectory, "structures"):
        pairs: Iterable = zip(trajectory.structures, trajectory.flows)
    else:
        pairs = trajectory
    rows = [energy_row(s, f, hmap, params) for s, f in pairs]
    df = pd.DataFrame(rows, columns=COLUMNS)
    if len(df) > 1:
        growth = df["total"].diff().max()
        logger.debug("energy monitor: %d rows, max step growth %.3e", len(df), growth)
    return df

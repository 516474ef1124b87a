# -*- coding: utf-8 -*-
"""Scenario library.

• zero               all-zero coupled data, co-rotational drag
• fp-fixed           relaxation of a perturbed equilibrium in the fixed disk,
                     optionally stirred by a swirl with zero wall trace
• fp-moving          prescribed boundary oscillation with the matching potential flow
• solvent-structure  beam + viscous solvent released from a displaced beam, no solute
• coupled-local      full-gradient drag, chained outer fixed points
• coupled-global     co-rotational drag, extended to the horizon or a geometric event
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np

from configspace.fene import FeneModel
from fokker_planck.drag import DragMode
from geometry.domain import ReferenceDomain
from geometry.hanzawa import build_hanzawa
from solvent_structure.compatibility import compatible_forcing
from solvent_structure.state import Dataset, PhysicalParams

from .config import RunConfig

logger = logging.getLogger(__name__)

KINDS = {
    "zero": "coupled",
    "fp-fixed": "fp",
    "fp-moving": "fp",
    "solvent-structure": "solvent",
    "coupled-local": "coupled",
    "coupled-global": "coupled",
}


@dataclass
class Scenario:
    name: str
    kind: str
    config: RunConfig
    domain: ReferenceDomain
    model: FeneModel
    dataset: Dataset
    mode: DragMode
    level: int | None = None
    prescribed: Callable | None = None
    global_run: bool = False


# ---------------------------------------------------------------------------
# Data builders
# ---------------------------------------------------------------------------


def swirl(rotation: float) -> Callable[[np.ndarray], np.ndarray]:
    """u = ω(1 − |x|²)(−x₂, x₁): divergence free, zero on the unit circle."""

    def velocity(points: np.ndarray) -> np.ndarray:
        x, y = points[..., 0], points[..., 1]
        s = rotation * (1.0 - x**2 - y**2)
        return np.stack([-s * y, s * x], axis=-1)

    return velocity


def oscillation(amplitude: float, mode: int, frequency: float = 2.0 * np.pi):
    """η(t, y) = a sin(ωt) cos(m y) and the harmonic potential flow with that normal speed.

    The flow matches ∂_tη on the reference circle |x| = 1 (``mode`` ≥ 1).
    """
    if mode < 1:
        raise ValueError("oscillation mode must be at least 1")

    def eta(t: float, y: np.ndarray) -> np.ndarray:
        return amplitude * np.sin(frequency * t) * np.cos(mode * y)

    def eta_dot(t: float, y: np.ndarray) -> np.ndarray:
        return amplitude * frequency * np.cos(frequency * t) * np.cos(mode * y)

    def velocity(t: float, points: np.ndarray) -> np.ndarray:
        # ∇((c/m) r^m cos mθ)
        x, y = points[..., 0], points[..., 1]
        r = np.hypot(x, y)
        theta = np.arctan2(y, x)
        c = amplitude * frequency * np.cos(frequency * t)
        radial = c * r ** (mode - 1) * np.cos(mode * theta)
        angular = -c * r ** (mode - 1) * np.sin(mode * theta)
        return np.stack(
            [radial * np.cos(theta) - angular * np.sin(theta), radial * np.sin(theta) + angular * np.cos(theta)],
            axis=-1,
        )

    return eta, eta_dot, velocity


def perturbed_equilibrium(domain: ReferenceDomain, model: FeneModel, amplitude: float, seed: int) -> np.ndarray:
    """f̂₀ = 1 + a·ψ(x)·φ(q) with random smooth low modes, kept within [1 − a, 1 + a]."""
    rng = np.random.default_rng(seed)
    centers = domain.grid.centers.reshape(-1, 2)
    r = np.hypot(centers[:, 0], centers[:, 1]) / domain.radius
    theta = np.arctan2(centers[:, 1], centers[:, 0])
    cx = rng.uniform(-1.0, 1.0, size=3)
    psi = cx[0] * np.cos(np.pi * r**2) + cx[1] * r * np.cos(theta) + cx[2] * r * np.sin(theta)
    q = model.points / model.ball_radius
    cq = rng.uniform(-1.0, 1.0, size=2)
    phi = cq[0] * (q[:, 0] ** 2 - q[:, 1] ** 2) + cq[1] * q[:, 0] * q[:, 1]
    psi = psi / max(np.abs(psi).max(), 1e-300)
    phi = phi / max(np.abs(phi).max(), 1e-300)
    return 1.0 + amplitude * np.outer(psi, phi)


def _dataset(cfg: RunConfig, domain: ReferenceDomain, model: FeneModel, with_solute: bool) -> Dataset:
    forcing = cfg.forcing
    grid = domain.grid
    params = PhysicalParams.from_dict(cfg.physics)
    eta0 = forcing["eta0_amplitude"] * np.cos(int(forcing["eta0_mode"]) * grid.theta)
    f_hat0 = None
    if with_solute:
        f_hat0 = perturbed_equilibrium(domain, model, forcing["f_hat_amplitude"], cfg.seed)
        if cfg.scenario == "zero":
            f_hat0 = np.zeros_like(f_hat0)

    g = None
    if forcing["structure_amplitude"]:
        amp, mode = forcing["structure_amplitude"], int(forcing["structure_mode"])

        def g(t, y):
            return amp * np.cos(mode * np.asarray(y))

    f = None
    if forcing["body_amplitude"]:
        body = swirl(forcing["body_amplitude"])

        def f(t, points):
            return body(points)

    return Dataset(eta0, np.zeros(grid.n_theta), np.zeros(grid.shape + (2,)), f_hat0, f, g, params)


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def build_scenario(cfg: RunConfig) -> Scenario:
    """Assemble domain, models and data for ``cfg.scenario``."""
    geo = cfg.geometry
    domain = ReferenceDomain(geo.radius, geo.tube_radius, geo.n_r, geo.n_theta)
    model = FeneModel(cfg.fene.b, cfg.fene.n_qr, cfg.fene.n_qtheta)
    kind = KINDS[cfg.scenario]
    mode = DragMode.parse(cfg.drag_mode)
    if cfg.scenario == "coupled-local":
        mode = DragMode.FULL_GRADIENT
    elif cfg.scenario in ("coupled-global", "zero"):
        mode = DragMode.CO_ROTATIONAL
    level = cfg.fene.cutoff_level if mode is DragMode.FULL_GRADIENT else None

    dataset = _dataset(cfg, domain, model, with_solute=kind != "solvent")
    prescribed = None
    grid = domain.grid
    if cfg.scenario == "fp-fixed":
        prescribed = swirl(cfg.forcing["rotation"])
        dataset.eta0 = np.zeros(grid.n_theta)
        dataset.u0 = prescribed(grid.centers)
    elif cfg.scenario == "fp-moving":
        prescribed = oscillation(cfg.forcing["eta0_amplitude"], int(cfg.forcing["eta0_mode"]))
        eta, eta_dot, velocity = prescribed
        dataset.eta0 = eta(0.0, grid.theta)
        dataset.eta_star = eta_dot(0.0, grid.theta)
        dataset.u0 = velocity(0.0, grid.centers)
    else:
        map0 = build_hanzawa(domain, dataset.eta0, root_tol=float(cfg.tolerances["root"]))
        dataset = compatible_forcing(dataset, map0)

    logger.info("scenario %s: %s drag, %s, %s", cfg.scenario, mode.value, model.describe(), kind)
    return Scenario(
        cfg.scenario,
        kind,
        cfg,
        domain,
        model,
        dataset,
        mode,
        level,
        prescribed,
        global_run=cfg.scenario in ("coupled-global", "zero"),
    )

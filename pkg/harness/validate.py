# -*- coding: utf-8 -*-
"""Admissibility and compatibility checks of an initial dataset.

• trace           max |u₀ (wall) − η⋆ n|, cell values extrapolated to the wall
• divergence      max |div u₀| per cell of the reference geometry of η₀
• sup_norm        ‖η₀‖_∞ against the tube radius L
• initial_rate    f̃₀ (right-hand side of the Fokker–Planck equation at t = 0) finite
• compatibility   sup residual of the structure/fluid acceleration identity
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field

import numpy as np
import pandas as pd

from configspace.fene import FeneModel
from configspace.state import DistributionState
from fokker_planck.drag import DragMode
from fokker_planck.stepper import FpStepInput, initial_rate
from geometry.domain import ReferenceDomain
from geometry.errors import SimulationError
from geometry.hanzawa import build_hanzawa
from solvent_structure.compatibility import check_compatibility
from solvent_structure.linear_step import step_operator
from solvent_structure.pressure import wall_values
from solvent_structure.state import Dataset, FlowState

from .config import RunConfig
from .scenarios import build_scenario

logger = logging.getLogger(__name__)

TRACE_TOL = 1e-9
DIVERGENCE_TOL = 1e-9
COMPATIBILITY_TOL = 1e-6


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    residual: float
    tolerance: float
    detail: str = ""


@dataclass
class ValidationReport:
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> Check:
        for check in self.checks:
            if check.name == name:
                return check
        raise KeyError(name)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([asdict(c) for c in self.checks], columns=["name", "passed", "residual", "tolerance", "detail"])

    def as_dict(self) -> dict:
        return {"passed": self.passed, "checks": [asdict(c) for c in self.checks]}


def _check(name: str, residual: float, tolerance: float, detail: str = "") -> Check:
    passed = bool(np.isfinite(residual) and residual <= tolerance)
    if not passed:
        logger.warning("dataset check %s failed: residual %.3e > %.1e %s", name, residual, tolerance, detail)
    return Check(name, passed, float(residual), float(tolerance), detail)


def validate_dataset(
    dataset: Dataset,
    dom: ReferenceDomain,
    model: FeneModel | None = None,
    *,
    mode: DragMode | str = DragMode.CO_ROTATIONAL,
    level: int | None = None,
    dt: float = 1e-3,
    trace_tol: float = TRACE_TOL,
    divergence_tol: float = DIVERGENCE_TOL,
    compatibility_tol: float = COMPATIBILITY_TOL,
) -> ValidationReport:
    """Run every dataset check; never raises for a failing check."""
    grid = dom.grid
    report = ValidationReport()
    eta0 = np.asarray(dataset.eta0, dtype=float)
    sup = float(np.max(np.abs(eta0), initial=0.0))
    if sup >= dom.tube_radius:
        report.checks.append(Check("sup_norm", False, sup, dom.tube_radius, "outside the tubular neighbourhood"))
        logger.warning("dataset check sup_norm failed: ‖eta0‖ = %.4g ≥ L = %.4g", sup, dom.tube_radius)
        return report
    report.checks.append(Check("sup_norm", True, sup, dom.tube_radius))

    try:
        map0 = build_hanzawa(dom, eta0)
    except SimulationError as exc:
        report.checks.append(Check("geometry", False, float("nan"), 0.0, str(exc)))
        return report

    normals = dom.outward_normal(grid.theta)
    u0 = np.asarray(dataset.u0, dtype=float)
    wall = wall_values(grid, u0)
    trace = np.linalg.norm(wall - dataset.eta_star[:, None] * normals, axis=-1)
    report.checks.append(_check("trace", float(np.max(trace, initial=0.0)), trace_tol))

    op = step_operator(map0, dataset.params, float(dt))
    flow = FlowState(u0, np.zeros(grid.shape), 0.0, wall_speed=dataset.eta_star)
    report.checks.append(_check("divergence", op.divergence_residual(flow), divergence_tol))

    if dataset.f_hat0 is not None and model is not None:
        inp = FpStepInput(
            DistributionState(dataset.f_hat0),
            u0,
            map0,
            dt,
            model,
            mode,
            level if DragMode.parse(mode) is DragMode.FULL_GRADIENT else None,
            epsilon=dataset.params.epsilon,
            kappa=dataset.params.kappa,
            boundary_velocity=dataset.eta_star[:, None] * normals,
        )
        with np.errstate(all="ignore"):
            rate = initial_rate(inp)
        finite = bool(np.all(np.isfinite(rate)))
        norm = float(np.sqrt(map0.cell_areas.ravel() @ ((rate**2) @ model.weights))) if finite else float("inf")
        report.checks.append(Check("initial_rate", finite, norm, float("inf"), "weighted L2 norm of f̃₀"))
        if not finite:
            logger.warning("dataset check initial_rate failed: f̃₀ is not finite")

    try:
        compat = check_compatibility(dataset, map0)
        report.checks.append(_check("compatibility", compat.sup, compatibility_tol, f"l2={compat.l2:.3e}"))
    except SimulationError as exc:
        report.checks.append(Check("compatibility", False, float("nan"), compatibility_tol, str(exc)))
        logger.warning("dataset check compatibility failed: %s", exc)
    return report


def validate_config(cfg: RunConfig) -> ValidationReport:
    """Validate the initial dataset of the scenario ``cfg`` selects."""
    scn = build_scenario(cfg)
    tol = cfg.tolerances
    report = validate_dataset(
        scn.dataset,
        scn.domain,
        scn.model,
        mode=scn.mode,
        level=scn.level,
        dt=cfg.time.dt,
        trace_tol=float(tol.get("trace", TRACE_TOL)),
        divergence_tol=float(tol.get("divergence", DIVERGENCE_TOL)),
        compatibility_tol=float(tol.get("compatibility", COMPATIBILITY_TOL)),
    )
    logger.info("dataset of %s: %s", cfg.scenario, "passed" if report.passed else "FAILED")
    return report

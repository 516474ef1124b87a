# -*- coding: utf-8 -*-
"""Outer solute–solvent coupling over one time window.

T2: the Kramers stress of a given distribution trajectory ħ drives the inner
solvent–structure fixed point.  T1: the Fokker–Planck solver runs along the
resulting geometry and flow.  ``fixed_point_drive`` Picard-iterates T = T1∘T2
and halves the window whenever the iterates stop contracting.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from configspace.fene import FeneModel
from configspace.state import DistributionState
from configspace.stress import stress_on_grid
from fokker_planck.drag import DragMode
from fokker_planck.stepper import FpStepInput, step_fp
from geometry.domain import ReferenceDomain
from geometry.errors import NoContraction
from geometry.hanzawa import HanzawaMap, build_hanzawa
from geometry.state import StructureState
from solvent_structure.inner import InnerResult, inner_fixed_point
from solvent_structure.linear_step import step_operator
from solvent_structure.state import Dataset, FlowState

from .norms import NormReport, x_components, y_distance, y_norm

logger = logging.getLogger(__name__)

TIME_TOL = 1e-12


@dataclass
class CoupledState:
    """Structure, flow and distribution at one instant, with the geometry snapshot."""

    structure: StructureState
    flow: FlowState
    distribution: DistributionState
    hmap: HanzawaMap
    window: tuple[float, float] = (0.0, 0.0)
    ledger: list[float] = field(default_factory=list)

    def __post_init__(self) -> None:
        times = (self.structure.time, self.flow.time, self.distribution.time)
        if max(times) - min(times) > TIME_TOL * max(1.0, abs(times[0])):
            raise ValueError(f"sub-states carry different times {times}")
        if not np.array_equal(self.hmap.eta, self.structure.eta):
            raise ValueError("geometry snapshot does not match the structure displacement")

    @property
    def time(self) -> float:
        return float(self.structure.time)

    @classmethod
    def initial(cls, dom: ReferenceDomain, dataset: Dataset, model: FeneModel) -> "CoupledState":
        grid = dom.grid
        structure = dataset.initial_structure()
        pi0 = np.zeros(grid.shape) if dataset.pi0 is None else dataset.pi0
        flow = FlowState(dataset.u0, pi0, 0.0, wall_speed=dataset.eta_star)
        f_hat0 = np.zeros((grid.size, model.size)) if dataset.f_hat0 is None else dataset.f_hat0
        return cls(structure, flow, DistributionState(f_hat0), build_hanzawa(dom, structure.eta))


@dataclass(frozen=True)
class OuterProblem:
    """Fixed ingredients of the outer iteration."""

    domain: ReferenceDomain
    model: FeneModel
    dataset: Dataset
    dt: float
    mode: DragMode = DragMode.CO_ROTATIONAL
    level: int | None = None
    tol_fix: float = 1e-8
    max_inner: int = 30
    max_outer: int = 30
    min_window: int = 2
    convective: bool = True
    cfl: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", DragMode.parse(self.mode))
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")


@dataclass
class OuterResult:
    distributions: list[DistributionState]
    inner: InnerResult


@dataclass
class DriveResult:
    """Accepted window: the end state, trajectories and the iteration ledger."""

    state: CoupledState
    distributions: list[DistributionState]
    inner: InnerResult
    reports: list[NormReport]
    window: int
    halvings: int = 0

    @property
    def iterations(self) -> int:
        return len(self.reports)

    @property
    def factors(self) -> list[float]:
        return [r.contraction_rho for r in self.reports if r.contraction_rho is not None]


def _stress_series(problem: OuterProblem, hbar: list[DistributionState]) -> list[np.ndarray]:
    shape = problem.domain.grid.shape
    return [stress_on_grid(h, problem.model, shape) for h in hbar[1:]]


def fp_along(problem: OuterProblem, start: DistributionState, inner: InnerResult) -> list[DistributionState]:
    """T1: step the Fokker–Planck equation along a solvent–structure trajectory."""
    dom = problem.domain
    params = problem.dataset.params
    op = step_operator(inner.map0, params, float(problem.dt))
    normals = dom.outward_normal(dom.grid.theta)
    states = [start]
    previous = inner.map0 if np.array_equal(inner.map0.eta, inner.structures[0].eta) else build_hanzawa(
        dom, inner.structures[0].eta
    )
    for structure, flow in zip(inner.structures[1:], inner.flows[1:]):
        hmap = build_hanzawa(dom, structure.eta)
        inp = FpStepInput(
            states[-1],
            flow.u_bar,
            hmap,
            problem.dt,
            problem.model,
            problem.mode,
            problem.level,
            map_old=previous,
            epsilon=params.epsilon,
            kappa=params.kappa,
            boundary_velocity=flow.trace(normals),
            face_fluxes=op.transport_face_fluxes(flow, hmap),
            cfl=problem.cfl,
        )
        states.append(step_fp(inp))
        previous = hmap
    return states


def outer_map(
    problem: OuterProblem,
    hbar: list[DistributionState],
    start: CoupledState,
    window: int | None = None,
) -> OuterResult:
    """T(ħ) = T1(T2(ħ)) over ``window`` steps from ``start``.

    The inner iteration may shorten the window; the returned trajectory then
    covers the accepted steps only.
    """
    window = len(hbar) - 1 if window is None else int(window)
    if window > len(hbar) - 1:
        raise ValueError(f"window of {window} steps exceeds the {len(hbar) - 1} steps of hbar")
    inner = inner_fixed_point(
        problem.domain,
        problem.dataset,
        window,
        problem.dt,
        _stress_series(problem, hbar[: window + 1]),
        structure0=start.structure,
        flow0=start.flow,
        tol_fix=problem.tol_fix,
        max_iter=problem.max_inner,
        min_window=problem.min_window,
        convective=problem.convective,
    )
    return OuterResult(fp_along(problem, start.distribution, inner), inner)


def _frozen_guess(start: CoupledState, window: int, dt: float) -> list[DistributionState]:
    f = start.distribution.f_hat
    return [start.distribution] + [DistributionState(f, time=start.time + n * dt) for n in range(1, window + 1)]


def fixed_point_drive(
    problem: OuterProblem,
    start: CoupledState,
    window: int,
    tol: float | None = None,
    guess: list[DistributionState] | None = None,
) -> DriveResult:
    """Picard iteration of the outer map from the frozen-in-time guess, or from ``guess``.

    Converges when the Ȳ distance of successive iterates drops below
    ``tol · max(1, ‖iterate‖_Ȳ)``.  On a contraction factor ≥ 1 (or
    ``max_outer`` iterations) the window is halved and the iteration restarts.
    """
    tol = problem.tol_fix if tol is None else tol
    grid = problem.domain.grid
    dt = problem.dt
    halvings = 0
    current = int(window)
    while True:
        if guess is not None and len(guess) > current:
            hbar = [start.distribution] + list(guess[1 : current + 1])
        else:
            hbar = _frozen_guess(start, current, dt)
        reports: list[NormReport] = []
        factor = float("nan")
        for k in range(1, problem.max_outer + 1):
            result = outer_map(problem, hbar, start, current)
            accepted = result.inner.window
            if accepted < current:
                logger.info("outer window shortened by the inner iteration: %d -> %d", current, accepted)
                current = accepted
                hbar = hbar[: current + 1]
            new = result.distributions
            dist = y_distance(new, hbar, problem.model, grid, dt)
            size = y_norm(new, problem.model, grid, dt)
            rho = None
            if reports and reports[-1].y_norm > 0.0:
                rho = dist / reports[-1].y_norm
            elif reports:
                rho = 0.0
            reports.append(NormReport(k, dist, x_components(new, problem.model, grid, dt), rho))
            logger.info("outer iteration %d: window=%d Y-distance=%.3e rho=%s", k, current, dist, rho)
            if dist <= tol * max(1.0, size):
                structure, flow = result.inner.final
                hmap = build_hanzawa(problem.domain, structure.eta)
                state = CoupledState(
                    structure,
                    flow,
                    new[-1],
                    hmap,
                    (start.time, structure.time),
                    start.ledger + [r.y_norm for r in reports],
                )
                return DriveResult(state, new, result.inner, reports, current, halvings)
            if rho is not None and rho >= 1.0:
                factor = rho
                break
            factor = rho if rho is not None else factor
            hbar = new

        halvings += 1
        if current // 2 < problem.min_window:
            raise NoContraction(
                f"outer iteration stalled (factor {factor:.3g}) with window {current}", window=current, factor=factor
            )
        logger.warning("outer iteration stalled (factor %.3g); halving window %d -> %d", factor, current, current // 2)
        current //= 2

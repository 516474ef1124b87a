# -*- coding: utf-8 -*-
"""Picard iteration (ζ, w̄, q̄) ↦ (η, ū, π̄) over a time window.

The operator is frozen at the displacement of the window start; every sweep
assembles the defects from the previous iterate and runs the linear step
across the window.  The window is halved whenever the iteration stalls.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

from geometry.domain import ReferenceDomain
from geometry.errors import NoContraction
from geometry.hanzawa import HanzawaMap, build_hanzawa
from geometry.state import StructureState

from .linear_step import periodic_second_difference, solve_linear_step, step_operator
from .perturbation import assemble_perturbation_terms
from .state import Dataset, FlowState

logger = logging.getLogger(__name__)

TOL_FIX = 1e-8
MAX_ITER = 30
MIN_WINDOW = 2

StressSeries = Union[Sequence[np.ndarray], Callable[[float], np.ndarray], None]


@dataclass
class InnerResult:
    """Accepted trajectory (start state included) and the iteration ledger."""

    structures: list[StructureState]
    flows: list[FlowState]
    window: int
    dt: float
    map0: HanzawaMap
    iterations: int = 0
    distances: list[float] = field(default_factory=list)
    factors: list[float] = field(default_factory=list)
    halvings: int = 0
    divergence: list[float] = field(default_factory=list)

    @property
    def final(self) -> tuple[StructureState, FlowState]:
        return self.structures[-1], self.flows[-1]

    @property
    def times(self) -> np.ndarray:
        return np.array([s.time for s in self.structures])


def _stress_at(stress: StressSeries, step: int, time: float):
    if stress is None:
        return None
    if callable(stress):
        return stress(time)
    return stress[step - 1]


def _initial_guess(structure0: StructureState, flow0: FlowState, window: int, dt: float):
    structures = [structure0]
    flows = [flow0]
    for n in range(1, window + 1):
        t = structure0.time + n * dt
        structures.append(StructureState(structure0.eta + n * dt * structure0.eta_dot, structure0.eta_dot, t))
        flows.append(FlowState(flow0.u_bar, flow0.pi_bar, t, wall_speed=structure0.eta_dot))
    return structures, flows


class _Metric:
    """Energy-type distance: sup over steps of the state part plus dt Σ ‖Δπ̄‖²."""

    def __init__(self, map0: HanzawaMap, dataset: Dataset, dt: float) -> None:
        g = map0.grid
        p = dataset.params
        self.dt = dt
        self.params = p
        self.mass = p.rho_f * (g.volumes * map0.jacobian)[..., None]
        self.vol = g.volumes
        self.ell = map0.domain.radius * g.dtheta
        self.d_yy = periodic_second_difference(g.n_theta, g.dtheta)

    def _state(self, structure: StructureState, flow: FlowState, other=None) -> tuple[float, float]:
        du = flow.u_bar if other is None else flow.u_bar - other[1].u_bar
        dv = structure.eta_dot if other is None else structure.eta_dot - other[0].eta_dot
        de = structure.eta if other is None else structure.eta - other[0].eta
        dp = flow.pi_bar if other is None else flow.pi_bar - other[1].pi_bar
        p = self.params
        state = (
            float(np.sum(self.mass * du**2))
            + self.ell * float(p.rho_s * dv @ dv + p.alpha * np.sum((self.d_yy @ de) ** 2) + de @ de)
        )
        return state, float(np.sum(self.vol * dp**2))

    def __call__(self, structures, flows, others=None) -> float:
        sup, integral = 0.0, 0.0
        for n in range(1, len(structures)):
            other = None if others is None else (others[0][n], others[1][n])
            state, pressure = self._state(structures[n], flows[n], other)
            sup = max(sup, state)
            integral += self.dt * pressure
        return float(np.sqrt(sup + integral))


def _sweep(
    dom: ReferenceDomain,
    map0: HanzawaMap,
    dataset: Dataset,
    iterate: tuple[list[StructureState], list[FlowState]],
    dt: float,
    stress: StressSeries,
    convective: bool,
) -> tuple[list[StructureState], list[FlowState], list[float]]:
    params = dataset.params
    op = step_operator(map0, params, float(dt))
    theta = map0.grid.theta
    zetas, ws = iterate
    structures, flows = [zetas[0]], [ws[0]]
    residuals: list[float] = []
    for n in range(1, len(zetas)):
        t = zetas[0].time + n * dt
        zeta = zetas[n]
        s_n = _stress_at(stress, n, t)
        terms = assemble_perturbation_terms(
            map0,
            build_hanzawa(dom, zeta.eta),
            zeta.eta_dot,
            ws[n],
            ws[n].pi_bar,
            s_n,
            params,
            w_prev=ws[n - 1],
            dt=dt,
            dataset=dataset,
            time=t,
            convective=convective,
        )
        g_n = dataset.structure_forcing(t, theta)
        structure, flow = solve_linear_step(
            map0, structures[-1], flows[-1], terms, s_n, g_n, dt, params, operator=op
        )
        structures.append(structure)
        flows.append(flow)
        residuals.append(op.divergence_residual(flow, terms.h))
    return structures, flows, residuals


def inner_fixed_point(
    dom: ReferenceDomain,
    dataset: Dataset,
    window: int,
    dt: float,
    stress: StressSeries = None,
    *,
    structure0: StructureState | None = None,
    flow0: FlowState | None = None,
    tol_fix: float = TOL_FIX,
    max_iter: int = MAX_ITER,
    min_window: int = MIN_WINDOW,
    convective: bool = True,
) -> InnerResult:
    """Iterate the linear step over ``window`` steps of size ``dt`` to its fixed point.

    The start state defaults to the dataset's initial data.  On a
    contraction factor ≥ 1 or after ``max_iter`` sweeps the window is halved;
    :class:`NoContraction` is raised once it would drop below ``min_window``.
    """
    if window < 1 or dt <= 0.0:
        raise ValueError("window must be positive and dt > 0")
    grid = dom.grid
    if structure0 is None:
        structure0 = dataset.initial_structure()
    if flow0 is None:
        pi0 = np.zeros(grid.shape) if dataset.pi0 is None else dataset.pi0
        flow0 = FlowState(dataset.u0, pi0, structure0.time, wall_speed=structure0.eta_dot)
    map0 = build_hanzawa(dom, structure0.eta)
    metric = _Metric(map0, dataset, dt)

    halvings = 0
    current = int(window)
    while True:
        iterate = _initial_guess(structure0, flow0, current, dt)
        distances: list[float] = []
        factors: list[float] = []
        factor = float("nan")
        for k in range(1, max_iter + 1):
            *new, residuals = _sweep(dom, map0, dataset, iterate, dt, stress, convective)
            dist = metric(new[0], new[1], iterate)
            size = metric(new[0], new[1])
            distances.append(dist)
            if k >= 2:
                factor = dist / distances[-2] if distances[-2] > 0.0 else 0.0
                factors.append(factor)
            logger.debug("inner iteration %d: window=%d distance=%.3e", k, current, dist)
            if dist <= tol_fix * max(1.0, size):
                logger.info(
                    "inner fixed point: window=%d steps, %d iterations, distance %.3e", current, k, dist
                )
                return InnerResult(new[0], new[1], current, dt, map0, k, distances, factors, halvings, residuals)
            if k >= 2 and factor >= 1.0:
                break
            iterate = new

        halvings += 1
        if current // 2 < min_window:
            raise NoContraction(
                f"inner iteration stalled (factor {factor:.3g}) with window {current} at minimum {min_window}",
                window=current,
                factor=factor,
            )
        logger.warning("inner iteration stalled (factor %.3g); halving window %d -> %d", factor, current, current // 2)
        current //= 2

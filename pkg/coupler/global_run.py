# -*- coding: utf-8 -*-
"""Chaining accepted windows in the co-rotational regime until a horizon or a geometric event.

Termination criteria, checked in this order after every window:

• arc_length        min |∂_yφ_η| ≤ tol
• normal_alignment  min n·n_η ≤ tol
• sup_norm          ‖η‖_∞ ≥ L − tube_margin, or η left the tube inside a window
• jacobian          the Hanzawa map lost orientation inside a window
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

from fokker_planck.drag import DragMode
from geometry.errors import DegenerateBoundary, DegenerateMap, TubeExit
from geometry.hanzawa import deformed_normal

from .outer import CoupledState, DriveResult, OuterProblem, fixed_point_drive

logger = logging.getLogger(__name__)

CRITERIA = ("arc_length", "normal_alignment", "sup_norm", "jacobian")
DEGENERACY_TOL = 1e-8


@dataclass(frozen=True)
class Termination:
    criterion: str
    value: float
    time: float

    def as_dict(self) -> dict:
        return {"criterion": self.criterion, "value": self.value, "time": self.time}


@dataclass
class GlobalRun:
    state: CoupledState
    windows: list[DriveResult] = field(default_factory=list)
    termination: Termination | None = None

    @property
    def steps(self) -> int:
        return sum(w.window for w in self.windows)

    @property
    def reached_horizon(self) -> bool:
        return self.termination is None


def termination_check(
    state: CoupledState,
    tube_margin: float,
    tol: float = DEGENERACY_TOL,
) -> Termination | None:
    """First criterion that fires for the current displacement, or None."""
    dom = state.hmap.domain
    eta = state.structure.eta
    try:
        deformed_normal(eta, dom.grid.theta, dom, tol)
    except DegenerateBoundary as exc:
        return Termination(exc.criterion, float(exc.value), state.time)
    sup = state.structure.sup_norm()
    if sup >= dom.tube_radius - tube_margin:
        return Termination("sup_norm", sup, state.time)
    return None


def global_extend(
    problem: OuterProblem,
    start: CoupledState,
    horizon: float,
    window: int,
    *,
    tube_margin: float = 0.0,
    tol: float = DEGENERACY_TOL,
    on_window: Callable[[DriveResult], None] | None = None,
) -> GlobalRun:
    """Run windows of at most ``window`` steps up to ``horizon`` (time).

    With ``tube_margin = L − α`` (α the safety margin) the sup criterion
    fires at α.  ``on_window`` sees every accepted window.
    """
    if problem.mode is not DragMode.CO_ROTATIONAL:
        raise ValueError("global extension needs the co-rotational drag")
    dt = problem.dt
    total = int(round((horizon - start.time) / dt))
    run = GlobalRun(start)

    event = termination_check(start, tube_margin, tol)
    while event is None and run.steps < total:
        n = min(window, total - run.steps)
        try:
            result = fixed_point_drive(problem, run.state, n)
        except DegenerateBoundary as exc:
            event = Termination(exc.criterion, float(exc.value), run.state.time)
            break
        except TubeExit as exc:
            event = Termination(exc.criterion, float(exc.value), run.state.time)
            break
        except DegenerateMap as exc:
            value = float("nan") if exc.min_jacobian is None else float(exc.min_jacobian)
            event = Termination("jacobian", value, run.state.time)
            break
        run.windows.append(result)
        run.state = result.state
        if on_window is not None:
            on_window(result)
        logger.info(
            "window [%.4g, %.4g] accepted: %d steps, %d outer iterations, sup|eta|=%.4g",
            result.state.window[0],
            result.state.window[1],
            result.window,
            result.iterations,
            run.state.structure.sup_norm(),
        )
        event = termination_check(run.state, tube_margin, tol)

    if event is not None:
        logger.warning("run terminated at t=%.4g: %s = %.4g", event.time, event.criterion, event.value)
        run.termination = event
    else:
        logger.info("horizon t=%.4g reached after %d steps", horizon, run.steps)
    return run

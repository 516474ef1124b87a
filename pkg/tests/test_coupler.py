# -*- coding: utf-8 -*-
from __future__ import annotations

import numpy as np
import pytest

from configspace.state import DistributionState
from coupler.global_run import global_extend, termination_check
from coupler.norms import NormReport, y_distance, y_norm
from coupler.outer import CoupledState, OuterProblem, fixed_point_drive, outer_map
from fokker_planck.drag import DragMode
from geometry.domain import PolarGrid
from geometry.errors import ShapeMismatch, TubeExit
from geometry.hanzawa import build_hanzawa
from geometry.state import StructureState
from solvent_structure.compatibility import compatible_forcing
from solvent_structure.state import Dataset, FlowState


def _problem(domain, model, f_hat0: float = 0.0, mode=DragMode.CO_ROTATIONAL) -> tuple[OuterProblem, CoupledState]:
    data = Dataset.zeros(domain.grid.shape, model.size)
    data.f_hat0 = np.full((domain.grid.size, model.size), f_hat0)
    level = 3 if mode is DragMode.FULL_GRADIENT else None
    problem = OuterProblem(domain, model, data, 1e-3, mode, level)
    return problem, CoupledState.initial(domain, data, model)


def test_y_distance_of_constant_difference(model):
    grid = PolarGrid.uniform(1.0, 8, 16)
    dt, c = 0.1, 0.3
    ones = np.ones((grid.size, model.size))
    first = [DistributionState(ones + c) for _ in range(5)]
    second = [DistributionState(ones) for _ in range(5)]
    horizon = 4 * dt
    expected = c * np.sqrt(np.pi) * (1.0 + 2.0 * np.sqrt(horizon))
    assert y_distance(first, second, model, grid, dt) == pytest.approx(expected, rel=1e-12)
    assert y_distance(first, first, model, grid, dt) == 0.0


def test_y_distance_rejects_mismatched_trajectories(model):
    grid = PolarGrid.uniform(1.0, 8, 16)
    ones = np.ones((grid.size, model.size))
    with pytest.raises(ShapeMismatch):
        y_distance([ones, ones], [ones], model, grid, 0.1)
    with pytest.raises(ShapeMismatch):
        y_distance([ones], [ones[:, :-1]], model, grid, 0.1)


def test_norm_report_validation():
    with pytest.raises(ValueError):
        NormReport(1, 0.5, contraction_rho=0.1)
    with pytest.raises(ValueError):
        NormReport(2, -1.0)


def test_zero_data_is_a_fixed_point(domain, model):
    problem, start = _problem(domain, model)
    result = fixed_point_drive(problem, start, 4)
    assert result.iterations == 1
    assert result.window == 4
    assert np.all(result.state.distribution.f_hat == 0.0)
    assert np.all(result.state.flow.u_bar == 0.0)
    assert result.state.time == pytest.approx(4e-3)


def test_outer_map_of_zero_guess(domain, model):
    problem, start = _problem(domain, model)
    hbar = [start.distribution] * 5
    result = outer_map(problem, hbar, start)
    assert len(result.distributions) == 5
    assert all(np.all(f.f_hat == 0.0) for f in result.distributions)
    with pytest.raises(ValueError):
        outer_map(problem, hbar, start, window=5)


def test_equilibrium_solute_leaves_solvent_at_rest(domain, model):
    # f̂ ≡ 1 gives S = I for b = 4, which only shifts the pressure
    problem, start = _problem(domain, model, f_hat0=1.0)
    result = fixed_point_drive(problem, start, 4)
    state = result.state
    assert np.max(np.abs(state.flow.u_bar)) <= 1e-10
    assert np.max(np.abs(state.structure.eta)) <= 1e-12
    np.testing.assert_allclose(state.distribution.f_hat, 1.0, atol=1e-10)
    np.testing.assert_allclose(state.flow.pi_bar, 1.0, atol=1e-8)


def _state_with(domain, model, eta: np.ndarray) -> CoupledState:
    shape = domain.grid.shape
    return CoupledState(
        StructureState(eta, np.zeros_like(eta)),
        FlowState.zeros(shape),
        DistributionState(np.zeros((domain.grid.size, model.size))),
        build_hanzawa(domain, eta),
    )


def test_termination_check_sup_norm(domain, model):
    state = _state_with(domain, model, np.full(domain.n_theta, 0.35))
    event = termination_check(state, tube_margin=0.2)
    assert event is not None
    assert event.criterion == "sup_norm"
    assert event.value == pytest.approx(0.35)
    assert termination_check(state, tube_margin=0.1) is None


def test_tube_exit_inside_a_window_is_a_sup_norm_event(domain, model, monkeypatch):
    problem, start = _problem(domain, model)

    def overshoot(*args, **kwargs):
        raise TubeExit("left the tube", 0.55)

    monkeypatch.setattr("coupler.global_run.fixed_point_drive", overshoot)
    run = global_extend(problem, start, 8e-3, 4, tube_margin=0.2)
    assert not run.reached_horizon
    assert run.termination.criterion == "sup_norm"
    assert run.termination.value == pytest.approx(0.55)
    assert run.termination.time == 0.0
    assert run.steps == 0


def test_outer_fixed_point_does_not_depend_on_the_start(domain, model):
    theta = domain.grid.theta
    data = Dataset.zeros(domain.grid.shape, model.size)
    data.eta0 = 0.01 * np.cos(2.0 * theta)
    data.g = lambda t, y: 0.01 * np.cos(2.0 * np.asarray(y))
    data.f_hat0 = np.ones((domain.grid.size, model.size))
    data = compatible_forcing(data, build_hanzawa(domain, data.eta0))
    problem = OuterProblem(domain, model, data, 1e-3, tol_fix=1e-9)
    start = CoupledState.initial(domain, data, model)

    frozen = fixed_point_drive(problem, start, 4)
    shifted = [DistributionState(1.2 * f.f_hat, time=f.time) for f in frozen.distributions]
    other = fixed_point_drive(problem, start, frozen.window, guess=shifted)
    assert other.window == frozen.window
    assert other.iterations > 1

    grid = domain.grid
    size = max(1.0, y_norm(frozen.distributions, model, grid, problem.dt))
    gap = y_distance(other.distributions, frozen.distributions, model, grid, problem.dt)
    assert gap <= 5.0 * problem.tol_fix * size


def test_global_extension_reaches_horizon_for_zero_data(domain, model):
    problem, start = _problem(domain, model)
    seen = []
    run = global_extend(problem, start, 8e-3, 4, tube_margin=0.2, on_window=seen.append)
    assert run.reached_horizon
    assert run.steps == 8
    assert len(seen) == 2
    assert run.state.time == pytest.approx(8e-3)


def test_global_extension_needs_corotational_drag(domain, model):
    problem, start = _problem(domain, model, mode=DragMode.FULL_GRADIENT)
    with pytest.raises(ValueError):
        global_extend(problem, start, 8e-3, 4)

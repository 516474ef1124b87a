# -*- coding: utf-8 -*-
from __future__ import annotations

import numpy as np
import pytest

from geometry.domain import ReferenceDomain
from geometry.errors import NoContraction
from geometry.hanzawa import build_hanzawa
from geometry.state import StructureState
from harness.convergence import stokes_error, stokes_refinement
from harness.scenarios import swirl
from harness.suite import contraction_sweep, is_geometric, resolved_factors
from solvent_structure.compatibility import check_compatibility, compatible_forcing
from solvent_structure.energy import COLUMNS, energy_monitor, energy_row
from solvent_structure.inner import inner_fixed_point
from solvent_structure.linear_step import solve_linear_step, solve_stokes, step_operator
from solvent_structure.perturbation import assemble_perturbation_terms
from solvent_structure.pressure import initial_pressure, recover_pressure, solve_robin
from solvent_structure.state import Dataset, FlowState, PerturbationTerms, PhysicalParams


def _small_dataset(dom: ReferenceDomain, scale: float = 0.01) -> Dataset:
    data = Dataset.zeros(dom.grid.shape)
    data.eta0 = scale * np.cos(2.0 * dom.grid.theta)
    data.g = lambda t, y: scale * np.cos(2.0 * np.asarray(y))
    return compatible_forcing(data, build_hanzawa(dom, data.eta0))


# ---------------------------------------------------------------------------
# Perturbation terms and the linear step
# ---------------------------------------------------------------------------


def test_perturbation_terms_vanish_for_frozen_geometry(domain):
    theta = domain.grid.theta
    hmap = build_hanzawa(domain, 0.05 * np.cos(3.0 * theta))
    rng = np.random.default_rng(0)
    w = rng.normal(size=domain.grid.shape + (2,))
    terms = assemble_perturbation_terms(hmap, hmap, np.zeros(domain.n_theta), w, convective=False)
    assert np.all(terms.h == 0.0)
    assert np.all(terms.H == 0.0)


def test_perturbation_force_term_for_resting_flow(domain):
    hmap = build_hanzawa(domain, 0.05 * np.cos(2.0 * domain.grid.theta))
    force = np.ones(domain.grid.shape + (2,))
    terms = assemble_perturbation_terms(
        hmap, hmap, np.zeros(domain.n_theta), np.zeros(domain.grid.shape + (2,)), force=force
    )
    np.testing.assert_allclose(terms.h_vec, hmap.jacobian[..., None] * force, rtol=1e-15)


def test_zero_data_gives_zero_step(domain, flat_map):
    shape = domain.grid.shape
    structure, flow = solve_linear_step(
        flat_map, StructureState.zeros(domain.n_theta), FlowState.zeros(shape), None, None, None, 1e-3
    )
    assert np.all(flow.u_bar == 0.0)
    assert np.all(flow.pi_bar == 0.0)
    assert np.all(structure.eta == 0.0)
    assert structure.time == pytest.approx(1e-3)


def test_frozen_steps_converge_to_stokes_flow(domain, flat_map):
    shape = domain.grid.shape
    x, y = domain.grid.centers[..., 0], domain.grid.centers[..., 1]
    force = np.stack([np.sin(np.pi * y), x**2], axis=-1)
    terms = PerturbationTerms(np.zeros(shape), force, np.zeros(shape + (2, 2)))

    structure, flow = StructureState.zeros(domain.n_theta), FlowState.zeros(shape)
    for _ in range(30):
        structure, flow = solve_linear_step(flat_map, structure, flow, terms, None, None, 1.0, freeze_structure=True)
    steady = solve_stokes(flat_map, force)
    np.testing.assert_allclose(flow.u_bar, steady.u_bar, atol=1e-8)
    np.testing.assert_allclose(flow.pi_bar, steady.pi_bar, atol=1e-7)


@pytest.mark.parametrize("n_r", [8, 16])
def test_forced_steps_keep_divergence_at_defect(n_r):
    dom = ReferenceDomain(1.0, 0.5, n_r, 2 * n_r)
    grid = dom.grid
    map0 = build_hanzawa(dom, 0.05 * np.cos(2.0 * grid.theta))
    params = PhysicalParams()
    x, y = grid.centers[..., 0], grid.centers[..., 1]
    terms = PerturbationTerms(0.01 * x, np.stack([np.sin(np.pi * y), x**2], axis=-1), np.zeros(grid.shape + (2, 2)))
    stress = np.zeros(grid.shape + (2, 2))
    stress[..., 0, 0] = 1.0 + 0.2 * x
    stress[..., 1, 1] = 1.0 - 0.1 * y
    stress[..., 0, 1] = stress[..., 1, 0] = 0.05 * x * y
    g = 0.1 * np.cos(2.0 * grid.theta)
    dt = 1e-3
    op = step_operator(map0, params, dt)

    structure, flow = StructureState.zeros(dom.n_theta), FlowState.zeros(grid.shape)
    for _ in range(3):
        structure, flow = solve_linear_step(map0, structure, flow, terms, stress, g, dt, params)
        assert op.divergence_residual(flow, terms.h) <= 1e-9
    assert np.max(np.abs(flow.u_bar)) > 1e-4
    np.testing.assert_allclose(flow.wall_speed, structure.eta_dot, rtol=0.0, atol=0.0)


@pytest.mark.parametrize("freeze", [True, False])
def test_manufactured_flow_converges_at_second_order(freeze):
    refinement = stokes_refinement(freeze_structure=freeze)
    assert refinement.errors[2] < refinement.errors[1] < refinement.errors[0]
    assert refinement.order >= 1.8


def test_manufactured_wall_load_keeps_beam_at_rest():
    coarse = stokes_error(8)[1]
    fine = stokes_error(16)[1]
    assert fine < coarse
    assert fine <= 1e-2


# ---------------------------------------------------------------------------
# Pressure
# ---------------------------------------------------------------------------


def _robin_error(n_r: int) -> float:
    # π = (r³ − 2r) cos θ: Δπ = 8x and ∂_r π + π = 0 on r = 1
    dom = ReferenceDomain(1.0, 0.5, n_r, 2 * n_r)
    grid = dom.grid
    hmap = build_hanzawa(dom, np.zeros(dom.n_theta))
    lo, hi = grid.theta - 0.5 * grid.dtheta, grid.theta + 0.5 * grid.dtheta
    radial = (grid.r_faces[1:] ** 3 - grid.r_faces[:-1] ** 3) / 3.0
    source = 8.0 * np.outer(radial, np.sin(hi) - np.sin(lo))
    cells, _ = solve_robin(hmap, source, np.ones(dom.n_theta), np.zeros(dom.n_theta))
    exact = (grid.radii**3 - 2.0 * grid.radii) * np.cos(grid.angles)
    return float(np.max(np.abs(cells - exact)))


def test_robin_problem_converges():
    errors = [_robin_error(n) for n in (8, 16, 32)]
    assert errors[2] < errors[1] < errors[0]
    assert errors[2] < 1e-2
    assert errors[1] / errors[2] >= 2.5


def test_recovered_pressure_of_resting_state_is_zero(domain, flat_map):
    decomposition = recover_pressure(
        FlowState.zeros(domain.grid.shape), StructureState.zeros(domain.n_theta), None, None, flat_map
    )
    assert np.max(np.abs(decomposition.pi_star)) <= 1e-14
    assert decomposition.c_pi == pytest.approx(0.0, abs=1e-14)


def test_initial_pressure_of_zero_dataset(domain, flat_map):
    pi0 = initial_pressure(Dataset.zeros(domain.grid.shape), flat_map)
    assert np.max(np.abs(pi0)) <= 1e-14


# ---------------------------------------------------------------------------
# Compatibility
# ---------------------------------------------------------------------------


def test_zero_dataset_is_compatible(domain, flat_map):
    assert check_compatibility(Dataset.zeros(domain.grid.shape), flat_map).sup <= 1e-10


def test_compatibility_residual_is_linear_in_forcing(domain, flat_map):
    residuals = []
    for delta in (1e-3, 2e-3, 4e-3):
        data = Dataset.zeros(domain.grid.shape)
        data.g = lambda t, y, d=delta: d * np.cos(np.asarray(y))
        residuals.append(check_compatibility(data, flat_map).sup)
    assert residuals[0] > 0.0
    assert residuals[1] / residuals[0] == pytest.approx(2.0, rel=1e-8)
    assert residuals[2] / residuals[0] == pytest.approx(4.0, rel=1e-8)


def test_compatible_forcing_closes_the_normal_identity(domain):
    data = Dataset.zeros(domain.grid.shape)
    data.eta0 = 0.02 * np.cos(2.0 * domain.grid.theta)
    data.u0 = swirl(0.5)(domain.grid.centers)
    map0 = build_hanzawa(domain, data.eta0)
    before = check_compatibility(data, map0)
    fixed = compatible_forcing(data, map0)
    after = check_compatibility(fixed, map0)
    assert after.normal_sup <= 1e-9 * max(1.0, before.normal_sup)
    assert fixed.pi0 is not None


# ---------------------------------------------------------------------------
# Inner fixed point
# ---------------------------------------------------------------------------


def test_inner_fixed_point_of_zero_data(domain):
    result = inner_fixed_point(domain, Dataset.zeros(domain.grid.shape), 4, 1e-3)
    assert result.iterations == 1
    assert result.window == 4
    assert all(np.all(f.u_bar == 0.0) for f in result.flows)


def test_inner_fixed_point_contracts(domain):
    result = inner_fixed_point(domain, _small_dataset(domain), 8, 1e-3, tol_fix=1e-10, max_iter=40)
    assert result.halvings == 0
    assert result.factors and max(result.factors) < 1.0
    assert len(result.structures) == result.window + 1


def test_inner_fixed_point_gives_up_at_minimum_window(domain):
    with pytest.raises(NoContraction):
        inner_fixed_point(domain, _small_dataset(domain), 2, 1e-3, tol_fix=1e-14, max_iter=2, min_window=2)


def test_window_halving_grows_with_forcing(domain):
    runs = contraction_sweep(domain)
    windows = [0 if result is None else result.window for _, result in runs]
    assert windows[0] == 16
    assert all(a >= b for a, b in zip(windows, windows[1:]))
    accepted = [result for _, result in runs if result is not None]
    assert all(max(resolved_factors(r), default=0.0) < 1.0 for r in accepted)
    assert any(is_geometric(r) for r in accepted)


def test_energy_of_resting_state(domain, flat_map):
    row = energy_row(StructureState.zeros(domain.n_theta), FlowState.zeros(domain.grid.shape), flat_map)
    assert row["total"] == 0.0
    assert row["dissipation"] == 0.0


def test_energy_monitor_of_resting_trajectory(domain, flat_map):
    pairs = [(StructureState.zeros(domain.n_theta), FlowState.zeros(domain.grid.shape)) for _ in range(3)]
    table = energy_monitor(pairs, flat_map)
    assert list(table.columns) == COLUMNS
    assert len(table) == 3
    assert np.all(table["total"] == 0.0)

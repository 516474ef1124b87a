# -*- coding: utf-8 -*-
from __future__ import annotations

import numpy as np
import pytest
from scipy.special import j0, j1, jn_zeros, jnp_zeros

from configspace.fene import FeneModel
from configspace.state import DistributionState
from fokker_planck.drag import DragMode, skew_gradient
from fokker_planck.monitors import energy_report, extrema, solute_mass, time_derivative_monitor
from fokker_planck.stepper import FpStepInput, step_fp
from geometry.domain import ReferenceDomain
from geometry.hanzawa import build_hanzawa
from harness.convergence import fp_spatial_refinement, fp_temporal_refinement
from harness.scenarios import perturbed_equilibrium, swirl


def _march(f: DistributionState, velocity, hmap, model, steps: int, dt: float = 1e-3, mode=DragMode.CO_ROTATIONAL):
    level = 3 if mode is DragMode.FULL_GRADIENT else None
    for _ in range(steps):
        f = step_fp(FpStepInput(f, velocity, hmap, dt, model, mode, level, map_old=hmap))
    return f


def test_constant_distribution_is_stationary(domain, model, flat_map):
    f0 = DistributionState.constant(domain.grid.size, model.size, 0.7)
    f = _march(f0, np.zeros(domain.grid.shape + (2,)), flat_map, model, 5)
    np.testing.assert_allclose(f.f_hat, 0.7, atol=1e-12)
    assert f.time == pytest.approx(5e-3)


def test_mass_is_conserved_under_swirl(domain, model, flat_map):
    f0 = DistributionState(perturbed_equilibrium(domain, model, 0.5, seed=1))
    velocity = swirl(2.0)(domain.grid.centers)
    mass0 = solute_mass(f0, flat_map, model)
    f = _march(f0, velocity, flat_map, model, 10)
    assert abs(solute_mass(f, flat_map, model) - mass0) <= 1e-12 * mass0


@pytest.mark.parametrize("mode", [DragMode.CO_ROTATIONAL, DragMode.FULL_GRADIENT])
def test_nonnegativity_is_preserved(domain, model, flat_map, mode):
    f0 = DistributionState(perturbed_equilibrium(domain, model, 0.9, seed=2))
    velocity = swirl(2.0)(domain.grid.centers)
    f = _march(f0, velocity, flat_map, model, 10, mode=mode)
    assert extrema(f, model).minimum >= -1e-12


def test_solute_mass_of_equilibrium_on_dilated_disk(domain, model):
    c = 0.1
    hmap = build_hanzawa(domain, np.full(domain.n_theta, c))
    f = np.ones((domain.grid.size, model.size))
    assert solute_mass(f, hmap, model) == pytest.approx(np.pi * (1.0 + c) ** 2, rel=1e-12)


def test_extrema_of_equilibrium(model):
    ext = extrema(np.ones((4, model.size)), model)
    assert ext.minimum == ext.maximum == 1.0
    assert ext.norm_sup == pytest.approx(1.0, abs=1e-14)


def test_rigid_rotation_skew_gradient(domain):
    centers = domain.grid.centers
    velocity = np.stack([-centers[..., 1], centers[..., 0]], axis=-1)
    w = skew_gradient(velocity, domain.grid)
    expected = np.broadcast_to(np.array([[0.0, -1.0], [1.0, 0.0]]), w.shape)
    np.testing.assert_allclose(w, expected, atol=1e-12)


def test_corotational_drag_produces_no_energy(domain, model, flat_map):
    rng = np.random.default_rng(0)
    for _ in range(5):
        velocity = rng.normal(size=domain.grid.shape + (2,))
        f_hat = 1.0 + 0.5 * rng.uniform(-1.0, 1.0, size=(domain.grid.size, model.size))
        inp = FpStepInput(DistributionState(f_hat), velocity, flat_map, 1e-3, model, DragMode.CO_ROTATIONAL)
        assert abs(energy_report(inp).drag_production) <= 1e-12


def test_constant_distribution_dissipates_nothing(domain, model, flat_map):
    inp = FpStepInput(DistributionState.constant(domain.grid.size, model.size, 2.0),
                      np.zeros(domain.grid.shape + (2,)), flat_map, 1e-3, model)
    report = energy_report(inp)
    assert report.dissipation_x == pytest.approx(0.0, abs=1e-12)
    assert report.dissipation_q == pytest.approx(0.0, abs=1e-12)


def _decay_rate(profile, n_r: int = 16, steps: int = 100, dt: float = 1e-3) -> float:
    dom = ReferenceDomain(1.0, 0.5, n_r, 16)
    model = FeneModel(4.0, 4, 8)
    grid = dom.grid
    hmap = build_hanzawa(dom, np.zeros(dom.n_theta))
    f = DistributionState(1.0 + 0.5 * np.outer(profile(grid), np.ones(model.size)))
    areas = hmap.cell_areas.ravel()

    def deviation(state: DistributionState) -> float:
        column = state.f_hat[:, 0]
        mean = areas @ column / areas.sum()
        return float(np.sqrt(areas @ (column - mean) ** 2))

    d0 = deviation(f)
    f = _march(f, np.zeros(grid.shape + (2,)), hmap, model, steps, dt)
    return -np.log(deviation(f) / d0) / (steps * dt)


def test_radial_mode_decays_at_bessel_rate():
    k = float(jn_zeros(1, 1)[0])
    rate = _decay_rate(lambda grid: 0.2 * j0(k * grid.radii.ravel()))
    assert rate == pytest.approx(k**2, rel=5e-2)


def test_first_angular_mode_decays_at_neumann_rate():
    # cos θ J₁(k r) with J₁'(k) = 0 is the slowest Neumann mode of the disk
    k = float(jnp_zeros(1, 1)[0])
    rate = _decay_rate(lambda grid: (j1(k * grid.radii) * np.cos(grid.angles)).ravel())
    assert rate == pytest.approx(k**2, rel=5e-2)


def test_manufactured_steady_profile_converges_at_second_order():
    refinement = fp_spatial_refinement()
    assert refinement.errors[2] < refinement.errors[1] < refinement.errors[0]
    assert refinement.order >= 1.8


def test_implicit_step_converges_at_first_order_in_time():
    refinement = fp_temporal_refinement()
    assert refinement.errors[2] < refinement.errors[1] < refinement.errors[0]
    assert refinement.order >= 0.9


def test_time_derivative_monitor(domain, model, flat_map):
    shape = (domain.grid.size, model.size)
    rest = DistributionState(np.ones(shape))
    moving = DistributionState(np.ones(shape), f_hat_dot=np.ones(shape))
    report = time_derivative_monitor([rest, moving, rest], model, flat_map.cell_areas)
    assert report["dt_norm"] == 0.0
    assert report["dt_norm_sup"] == pytest.approx(np.sqrt(np.pi), rel=1e-12)
    assert report["steps"] == 2
    with pytest.raises(ValueError):
        time_derivative_monitor([rest], model, flat_map.cell_areas)

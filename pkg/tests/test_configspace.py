# -*- coding: utf-8 -*-
from __future__ import annotations

import numpy as np
import pytest
from scipy.integrate import quad

from configspace.fene import FeneModel, build_cutoff, fene_force, fene_potential, maxwellian, normalization
from configspace.norms import weighted_norms
from configspace.stress import kramers_stress
from geometry.domain import PolarGrid
from geometry.errors import DomainError


def test_fene_potential_closed_form():
    assert fene_potential(1.0, b=4.0) == pytest.approx(2.0 * np.log(2.0), rel=1e-14)
    assert fene_potential(0.0, b=4.0) == 0.0


def test_fene_potential_blows_up_monotonically():
    s = np.array([1.9, 1.99, 1.999])
    values = fene_potential(s, b=4.0)
    assert np.all(np.diff(values) > 0.0)
    with pytest.raises(DomainError):
        fene_potential(2.0, b=4.0)


def test_fene_force_is_potential_derivative():
    s, h = 0.7, 1e-6
    slope = (fene_potential(s + h) - fene_potential(s - h)) / (2.0 * h)
    assert fene_force(s) == pytest.approx(slope, rel=1e-8)


def test_normalization_matches_quadrature():
    b = 4.0
    radial, _ = quad(lambda r: r * (1.0 - r**2 / b) ** (0.5 * b), 0.0, np.sqrt(b), epsabs=1e-14, epsrel=1e-14)
    assert normalization(b) == pytest.approx(2.0 * np.pi * radial, abs=1e-9)


def test_maxwellian_outside_ball_is_rejected():
    with pytest.raises(DomainError):
        maxwellian(np.array([2.0, 0.1]), b=4.0)


def test_model_rejects_small_b():
    with pytest.raises(DomainError):
        FeneModel(2.0)


def test_quadrature_weights_are_probability_masses(model):
    assert model.weights.sum() == pytest.approx(1.0, abs=1e-14)
    assert np.all(model.weights > 0.0)


def test_zero_distribution_has_zero_stress(model):
    stress = kramers_stress(np.zeros((5, model.size)), model)
    assert np.all(stress == 0.0)


def test_equilibrium_stress_is_isotropic(model):
    # b = 4: ∫ M U'(|q|²/2) q₁² dq = 1
    stress = kramers_stress(np.ones((3, model.size)), model)
    np.testing.assert_allclose(stress, np.broadcast_to(np.eye(2), stress.shape), atol=1e-13)


def test_sheared_distribution_off_diagonal_stress():
    model = FeneModel(4.0, 32, 64)
    q = model.points
    f_hat = 1.0 + 0.3 * q[:, 0] * q[:, 1] / model.b
    stress = kramers_stress(f_hat[None, :], model)[0]
    # 0.3 / b · ∫ M U' q₁² q₂² dq with the last integral equal to 1/2
    assert stress[0, 1] == pytest.approx(0.0375, rel=5e-2)
    assert stress[0, 0] == pytest.approx(1.0, abs=1e-12)
    assert stress[1, 1] == pytest.approx(1.0, abs=1e-12)


def test_constant_distribution_norms(model):
    grid = PolarGrid.uniform(1.0, 8, 16)
    norms = weighted_norms(np.full((grid.size, model.size), -2.0), model, grid)
    assert norms.l2 == pytest.approx(2.0 * np.sqrt(np.pi), rel=1e-13)
    assert norms.grad_x == pytest.approx(0.0, abs=1e-10)
    assert norms.grad_q == pytest.approx(0.0, abs=1e-10)


def test_linear_distribution_q_gradient(model):
    grid = PolarGrid.uniform(1.0, 8, 16)
    f_hat = np.tile(model.points[:, 0], (grid.size, 1))
    assert weighted_norms(f_hat, model, grid).grad_q == pytest.approx(np.sqrt(np.pi), rel=1e-9)


def test_cutoff_plateaus_are_nested(model):
    radius = np.hypot(model.points[:, 0], model.points[:, 1])
    previous = build_cutoff(1, model)
    assert np.all((previous >= 0.0) & (previous <= 1.0))
    assert np.all(previous[radius <= np.sqrt(model.b) * 0.5] == 1.0)
    for level in (2, 3, 4):
        chi = build_cutoff(level, model)
        assert np.all(chi >= previous)
        previous = chi
    with pytest.raises(ValueError):
        build_cutoff(0, model)

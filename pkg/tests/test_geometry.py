# -*- coding: utf-8 -*-
from __future__ import annotations

import numpy as np
import pytest

from geometry.domain import ReferenceDomain
from geometry.errors import DegenerateMap, OutsideTube, TubeExit
from geometry.hanzawa import build_hanzawa, deformed_normal
from geometry.lipschitz import verify_lipschitz


def test_project_to_boundary_inside_point():
    dom = ReferenceDomain(1.0, 0.5)
    y, s = dom.project_to_boundary(np.array([0.9, 0.0]))
    assert y == pytest.approx(0.0, abs=1e-15)
    assert s == pytest.approx(-0.1, abs=1e-15)


def test_project_to_boundary_fixes_boundary_points():
    dom = ReferenceDomain(1.0, 0.5)
    x = np.array([np.cos(0.7), np.sin(0.7)])
    y, s = dom.project_to_boundary(x)
    assert s == pytest.approx(0.0, abs=1e-15)
    np.testing.assert_allclose(dom.foot_point(x), x, atol=1e-15)
    assert y == pytest.approx(0.7)


def test_project_to_boundary_outside_tube():
    dom = ReferenceDomain(1.0, 0.35)
    with pytest.raises(OutsideTube):
        dom.project_to_boundary(np.array([0.6 * np.cos(1.2), 0.6 * np.sin(1.2)]))


def test_hanzawa_identity_for_zero_displacement(domain):
    hmap = build_hanzawa(domain, np.zeros(domain.n_theta))
    eye = np.broadcast_to(np.eye(2), hmap.B.shape)
    np.testing.assert_allclose(hmap.jacobian, 1.0, atol=1e-14)
    np.testing.assert_allclose(hmap.B, eye, atol=1e-14)
    np.testing.assert_allclose(hmap.A, eye, atol=1e-14)
    points = domain.grid.centers
    np.testing.assert_allclose(hmap.forward(points), points, atol=1e-15)


def test_jacobian_matches_finite_difference_determinant():
    dom = ReferenceDomain(1.0, 0.5, 16, 32)
    hmap = build_hanzawa(dom, 0.1 * np.cos(dom.grid.theta))
    rng = np.random.default_rng(3)
    r = rng.uniform(0.3, 0.95, size=20)
    theta = rng.uniform(0.0, 2.0 * np.pi, size=20)
    points = np.stack([r * np.cos(theta), r * np.sin(theta)], axis=-1)

    h = 1e-6
    columns = []
    for e in np.eye(2):
        columns.append((hmap.forward(points + h * e) - hmap.forward(points - h * e)) / (2.0 * h))
    fd = np.stack(columns, axis=-1)
    expected = np.linalg.det(fd)
    np.testing.assert_allclose(hmap.tensors_at(points)["J"], expected, atol=1e-8)


def _fd_gradient(hmap, points: np.ndarray, h: float = 1e-6) -> np.ndarray:
    columns = [(hmap.forward(points + h * e) - hmap.forward(points - h * e)) / (2.0 * h) for e in np.eye(2)]
    return np.stack(columns, axis=-1)


def test_cofactor_and_metric_match_finite_differences():
    dom = ReferenceDomain(1.0, 0.5, 16, 32)
    theta = dom.grid.theta
    hmap = build_hanzawa(dom, 0.1 * np.cos(theta) + 0.05 * np.sin(2.0 * theta))
    rng = np.random.default_rng(5)
    r = rng.uniform(0.3, 0.95, size=20)
    angle = rng.uniform(0.0, 2.0 * np.pi, size=20)
    points = np.stack([r * np.cos(angle), r * np.sin(angle)], axis=-1)

    grad = _fd_gradient(hmap, points)
    # cof F = [[F11, -F10], [-F01, F00]], A = BᵀB / J
    cof = np.empty_like(grad)
    cof[:, 0, 0], cof[:, 0, 1] = grad[:, 1, 1], -grad[:, 1, 0]
    cof[:, 1, 0], cof[:, 1, 1] = -grad[:, 0, 1], grad[:, 0, 0]
    det = np.linalg.det(grad)
    metric = np.einsum("nki,nkj->nij", cof, cof) / det[:, None, None]

    tensors = hmap.tensors_at(points)
    np.testing.assert_allclose(tensors["B"], cof, atol=1e-8)
    np.testing.assert_allclose(tensors["A"], metric, atol=1e-8)


def _smooth_eta(theta: np.ndarray) -> np.ndarray:
    return 0.1 * np.cos(theta) + 0.05 * np.sin(2.0 * theta)


def test_piola_identity_converges_at_second_order():
    errors = []
    for n_r in (8, 16, 32):
        dom = ReferenceDomain(1.0, 0.5, n_r, 2 * n_r)
        hmap = build_hanzawa(dom, _smooth_eta(dom.grid.theta))
        errors.append(float(np.max(np.abs(hmap.piola_residual()[1:]))))
    assert errors[0] > errors[1] > errors[2]
    assert np.log2(errors[1] / errors[2]) >= 1.8


def test_degeneracy_fires_for_every_scale_past_the_first():
    dom = ReferenceDomain(1.0, 0.5, 12, 24)
    shape = np.cos(2.0 * dom.grid.theta)
    scales = np.linspace(0.01, 0.45, 45)
    degenerate = []
    for t in scales:
        try:
            build_hanzawa(dom, t * shape)
        except DegenerateMap:
            degenerate.append(True)
        else:
            degenerate.append(False)
    first = degenerate.index(True)
    assert 0 < first
    assert all(degenerate[first:])


def test_tube_exit_reports_the_sup_norm(domain):
    with pytest.raises(TubeExit) as info:
        build_hanzawa(domain, 0.6 * np.cos(domain.grid.theta))
    assert info.value.criterion == "sup_norm"
    assert info.value.value == pytest.approx(0.6)


def test_inverse_undoes_forward():
    dom = ReferenceDomain(1.0, 0.5, 12, 24)
    theta = dom.grid.theta
    hmap = build_hanzawa(dom, 0.1 * np.cos(theta) + 0.05 * np.sin(2.0 * theta))
    points = dom.grid.centers
    np.testing.assert_allclose(hmap.inverse(hmap.forward(points)), points, atol=1e-10)


def test_displacement_outside_tube_is_rejected(domain):
    with pytest.raises(DegenerateMap):
        build_hanzawa(domain, np.full(domain.n_theta, 0.6))


def test_dilated_disk_normal_and_factor(domain):
    y = domain.grid.theta
    normal, factor = deformed_normal(np.full(domain.n_theta, 0.2), y, domain)
    np.testing.assert_allclose(normal, domain.outward_normal(y), atol=1e-14)
    np.testing.assert_allclose(factor, 1.2, atol=1e-14)


def test_deformed_normal_matches_closed_form():
    dom = ReferenceDomain(1.0, 0.5, 8, 32)
    eta = 0.1 * np.cos(dom.grid.theta)
    y = np.linspace(0.0, 2.0 * np.pi, 17)
    normal, factor = deformed_normal(eta, y, dom)

    radial = 1.0 + 0.1 * np.cos(y)
    slope = -0.1 * np.sin(y)
    e_r = np.stack([np.cos(y), np.sin(y)], axis=-1)
    e_t = np.stack([-np.sin(y), np.cos(y)], axis=-1)
    length = np.hypot(radial, slope)
    np.testing.assert_allclose(factor, length, atol=1e-10)
    np.testing.assert_allclose(normal, (radial[:, None] * e_r - slope[:, None] * e_t) / length[:, None], atol=1e-10)


def test_lipschitz_ratio_zero_for_equal_displacements(domain):
    eta = 0.05 * np.cos(2.0 * domain.grid.theta)
    assert verify_lipschitz(domain, eta, eta, 1).ratio == 0.0


def test_lipschitz_ratio_stable_for_constant_shift():
    dom = ReferenceDomain(1.0, 0.5, 12, 24)
    zeta = 0.05 * np.cos(2.0 * dom.grid.theta)
    ratios = [verify_lipschitz(dom, zeta + c, zeta, 0).ratio for c in (1e-2, 1e-3, 1e-4)]
    assert all(np.isfinite(ratios))
    assert abs(ratios[-1] - ratios[-2]) <= 0.05 * ratios[-1]


@pytest.mark.parametrize("order", [1, 2])
def test_lipschitz_ratio_stable_for_constant_shift_with_derivatives(order):
    dom = ReferenceDomain(1.0, 0.5, 12, 24)
    zeta = 0.05 * np.cos(2.0 * dom.grid.theta)
    ratios = [verify_lipschitz(dom, zeta + c, zeta, order).ratio for c in (1e-2, 1e-3, 1e-4)]
    assert all(np.isfinite(ratios)) and min(ratios) > 0.0
    assert max(ratios) - min(ratios) <= 0.05 * max(ratios)

# -*- coding: utf-8 -*-
"""Small grids shared by the test modules."""

from __future__ import annotations

import numpy as np
import pytest

from configspace.fene import FeneModel
from geometry.domain import ReferenceDomain
from geometry.hanzawa import build_hanzawa
from harness.config import RunConfig, deep_merge

QUICK = {
    "geometry": {"n_r": 8, "n_theta": 16},
    "fene": {"n_qr": 6, "n_qtheta": 8},
    "time": {"steps": 8, "initial_window": 4},
}


@pytest.fixture
def domain() -> ReferenceDomain:
    return ReferenceDomain(1.0, 0.5, 8, 16)


@pytest.fixture
def model() -> FeneModel:
    return FeneModel(4.0, 6, 8)


@pytest.fixture
def flat_map(domain):
    return build_hanzawa(domain, np.zeros(domain.n_theta))


@pytest.fixture
def quick_config(tmp_path):
    """RunConfig factory on the coarse grid, writing under ``tmp_path``."""

    def make(scenario: str, **sections) -> RunConfig:
        values = deep_merge(QUICK, {"scenario": scenario, "output": {"dir": str(tmp_path / scenario)}})
        return RunConfig.from_dict(deep_merge(values, sections))

    return make

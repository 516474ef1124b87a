"""FENE model, Maxwellian-weighted quadrature and the Kramers stress."""

from .fene import FeneModel, build_cutoff, cutoff_weight, fene_force, fene_potential, maxwellian, normalization
from .norms import WeightedNorms, pointwise_weighted_norm, weighted_norms
from .state import DistributionState
from .stress import kramers_stress, stress_on_grid

__all__ = [
    "DistributionState",
    "FeneModel",
    "WeightedNorms",
    "build_cutoff",
    "cutoff_weight",
    "fene_force",
    "fene_potential",
    "kramers_stress",
    "maxwellian",
    "normalization",
    "pointwise_weighted_norm",
    "stress_on_grid",
    "weighted_norms",
]

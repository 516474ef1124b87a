"""Reference disk, boundary displacement and the Hanzawa transform."""

from .domain import PolarGrid, ReferenceDomain
from .errors import (
    AmbiguousProjection,
    DegenerateBoundary,
    DegenerateGeometry,
    DegenerateMap,
    InadmissibleDisplacement,
    OutsideTube,
    SimulationError,
    TubeExit,
)
from .hanzawa import HanzawaMap, build_hanzawa, deformed_normal
from .lipschitz import LipschitzReport, verify_lipschitz
from .state import StructureState
from .trig import TrigInterpolant

__all__ = [
    "AmbiguousProjection",
    "DegenerateBoundary",
    "DegenerateGeometry",
    "DegenerateMap",
    "HanzawaMap",
    "InadmissibleDisplacement",
    "LipschitzReport",
    "OutsideTube",
    "PolarGrid",
    "ReferenceDomain",
    "SimulationError",
    "StructureState",
    "TrigInterpolant",
    "TubeExit",
    "build_hanzawa",
    "deformed_normal",
    "verify_lipschitz",
]

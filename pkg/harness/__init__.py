"""Run configuration, scenario library, persistence and the acceptance suite."""

from .config import DEFAULTS, SCENARIOS, RunConfig, load_config
from .persistence import Checkpoint, checkpoint_roundtrip, load_checkpoint, save_checkpoint
from .runner import COLUMNS, RunReport, run
from .scenarios import Scenario, build_scenario
from .validate import ValidationReport, validate_config, validate_dataset

__all__ = [
    "COLUMNS",
    "Checkpoint",
    "DEFAULTS",
    "RunConfig",
    "RunReport",
    "SCENARIOS",
    "Scenario",
    "ValidationReport",
    "build_scenario",
    "checkpoint_roundtrip",
    "load_checkpoint",
    "load_config",
    "run",
    "save_checkpoint",
    "validate_config",
    "validate_dataset",
]

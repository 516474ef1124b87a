# -*- coding: utf-8 -*-
"""Run configuration.

Values in a JSON file are deep-merged over ``DEFAULTS``; the merged result
is logged for transparency and validated by :meth:`RunConfig.from_dict`.
The default output root can be set with ``POLYFSI_OUTPUT_ROOT``.
"""

from __future__ import annotations

import copy
import hashlib
import json
import logging
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path

from geometry.errors import ConfigError

logger = logging.getLogger(__name__)

OUTPUT_ENV = "POLYFSI_OUTPUT_ROOT"
SCENARIOS = ("zero", "fp-fixed", "fp-moving", "solvent-structure", "coupled-local", "coupled-global")

DEFAULTS: dict = {
    "scenario": "zero",
    "geometry": {
        "radius": 1.0,
        "n_r": 24,
        "n_theta": 48,
        "tube_radius": 0.5,
        "safety_margin": 0.3,
        "gradient_bound": 1.0,
    },
    "fene": {"b": 4.0, "n_qr": 16, "n_qtheta": 24, "cutoff_level": 3},
    "physics": {"rho_s": 1.0, "gamma": 1.0, "alpha": 1.0, "rho_f": 1.0, "mu": 1.0, "epsilon": 1.0, "kappa": 1.0},
    "drag_mode": "co_rotational",
    "time": {"dt": 1e-3, "steps": 500, "initial_window": 16, "min_window": 2},
    "tolerances": {
        "tol_fix": 1e-8,
        "root": 1e-12,
        "degeneracy": 1e-8,
        "tube_margin": None,
        "divergence": 1e-9,
        "trace": 1e-9,
        "compatibility": 1e-6,
        "max_picard": 30,
    },
    "forcing": {
        "structure_amplitude": 0.0,
        "structure_mode": 2,
        "body_amplitude": 0.0,
        "eta0_amplitude": 0.0,
        "eta0_mode": 2,
        "f_hat_amplitude": 0.0,
        "rotation": 0.0,
    },
    "output": {"dir": None, "dump_every": 0, "checkpoint_every": 0, "excel": False},
    "seed": 0,
}


def _load_from_json(path: Path) -> dict:
    if not path.exists():
        return {}
    try:
        with path.open("r", encoding="utf-8") as fh:
            return json.load(fh)
    except Exception as exc:
        logger.warning("Failed to load %s: %s", path, exc)
        return {}


def deep_merge(base: dict, override: dict) -> dict:
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def load_config(path: Path | str | None = None, overrides: dict | None = None) -> dict:
    """Merge ``path`` (if any) and ``overrides`` over the defaults and log the result."""
    loaded = _load_from_json(Path(path)) if path is not None else {}
    values = deep_merge(DEFAULTS, loaded)
    if overrides:
        values = deep_merge(values, overrides)
    logger.info("Config loaded from %s: %s", path, json.dumps(values, sort_keys=True))
    return values


def default_output_root() -> Path:
    return Path(os.environ.get(OUTPUT_ENV, "runs"))


def config_hash(values: dict) -> str:
    """SHA-256 of the canonical JSON without the output section."""
    data = {k: v for k, v in values.items() if k != "output"}
    canonical = json.dumps(data, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# Validated view
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GeometryConfig:
    radius: float
    n_r: int
    n_theta: int
    tube_radius: float
    safety_margin: float
    gradient_bound: float


@dataclass(frozen=True)
class FeneConfig:
    b: float
    n_qr: int
    n_qtheta: int
    cutoff_level: int


@dataclass(frozen=True)
class TimeConfig:
    dt: float
    steps: int
    initial_window: int
    min_window: int

    @property
    def horizon(self) -> float:
        return self.dt * self.steps


@dataclass(frozen=True)
class RunConfig:
    scenario: str
    geometry: GeometryConfig
    fene: FeneConfig
    physics: dict[str, float]
    drag_mode: str
    time: TimeConfig
    tolerances: dict
    forcing: dict[str, float]
    output: dict
    seed: int = 0
    raw: dict = field(default_factory=dict, compare=False, repr=False)

    @classmethod
    def from_dict(cls, values: dict) -> "RunConfig":
        values = deep_merge(DEFAULTS, values)
        try:
            geometry = GeometryConfig(**values["geometry"])
            fene = FeneConfig(**values["fene"])
            time = TimeConfig(**values["time"])
        except TypeError as exc:
            raise ConfigError(f"invalid config section: {exc}") from exc
        cfg = cls(
            scenario=str(values["scenario"]),
            geometry=geometry,
            fene=fene,
            physics={k: float(v) for k, v in values["physics"].items()},
            drag_mode=str(values["drag_mode"]),
            time=time,
            tolerances=dict(values["tolerances"]),
            forcing={k: float(v) for k, v in values["forcing"].items()},
            output=dict(values["output"]),
            seed=int(values["seed"]),
            raw=values,
        )
        cfg.validate()
        return cfg

    def validate(self) -> None:
        g, f, t = self.geometry, self.fene, self.time
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}; choose from {', '.join(SCENARIOS)}")
        if self.drag_mode not in ("co_rotational", "full_gradient"):
            raise ConfigError(f"unknown drag mode {self.drag_mode!r}")
        if min(g.n_r, g.n_theta, f.n_qr, f.n_qtheta) < 4:
            raise ConfigError("all grid sizes must be >= 4")
        if g.n_theta % 2 or f.n_qtheta % 2:
            raise ConfigError("angular grid sizes must be even")
        if not t.dt > 0.0:
            raise ConfigError("dt must be positive")
        if t.steps < 0 or t.initial_window < 1 or t.min_window < 1:
            raise ConfigError("steps and windows must be positive")
        if not f.b > 2.0:
            raise ConfigError("FENE parameter b must exceed 2")
        if not g.tube_radius > g.safety_margin > 0.0:
            raise ConfigError("need tube radius L > safety margin > 0")
        if not g.tube_radius < g.radius:
            raise ConfigError("tube radius must be below the disk radius")
        if f.cutoff_level < 1:
            raise ConfigError("cutoff level must be >= 1")
        for name, value in self.physics.items():
            if not value > 0.0:
                raise ConfigError(f"physical parameter {name} must be positive")

    @property
    def tube_margin(self) -> float:
        margin = self.tolerances.get("tube_margin")
        return self.geometry.tube_radius - self.geometry.safety_margin if margin is None else float(margin)

    @property
    def output_dir(self) -> Path:
        return Path(self.output["dir"]) if self.output.get("dir") else default_output_root() / self.scenario

    @property
    def hash(self) -> str:
        return config_hash(self.raw)

    def as_dict(self) -> dict:
        data = asdict(self)
        data.pop("raw")
        return data


def log_config(cfg: RunConfig, logger_: logging.Logger | None = None) -> None:
    """Log the validated configuration using ``logger_`` or the module logger."""
    logger_ = logger_ or logger
    logger_.info(
        "Config: scenario=%s grid=%dx%d fene(b=%s, %dx%d, n=%d) drag=%s dt=%s steps=%d window=%d hash=%s",
        cfg.scenario,
        cfg.geometry.n_r,
        cfg.geometry.n_theta,
        cfg.fene.b,
        cfg.fene.n_qr,
        cfg.fene.n_qtheta,
        cfg.fene.cutoff_level,
        cfg.drag_mode,
        cfg.time.dt,
        cfg.time.steps,
        cfg.time.initial_window,
        cfg.hash[:12],
    )

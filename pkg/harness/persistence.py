# -*- coding: utf-8 -*-
"""Run artifacts on disk.

• diagnostics  CSV with the fixed header of ``runner.COLUMNS`` (``%.17g`` floats)
• field dumps  raw little-endian float64 ``<field>_<step>.bin`` plus a JSON sidecar
• checkpoints  ``.npz`` arrays plus a ``.json`` meta file; load(save(s)) is bit-exact
• summary      pretty-printed JSON

Every filesystem failure surfaces as :class:`IoError`.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from configspace.state import DistributionState
from coupler.outer import CoupledState
from geometry.domain import ReferenceDomain
from geometry.errors import IoError
from geometry.hanzawa import build_hanzawa
from geometry.state import StructureState
from solvent_structure.state import FlowState

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
FLOAT_FORMAT = "%.17g"
DUMP_DTYPE = "<f8"


# ---------------------------------------------------------------------------
# Diagnostics CSV
# ---------------------------------------------------------------------------


def write_diagnostics(rows: pd.DataFrame, path: Path | str) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        rows.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    except OSError as exc:
        raise IoError(f"cannot write diagnostics {path}: {exc}") from exc
    logger.info("Diagnostics exported → %s (%d rows)", path, len(rows))


def read_diagnostics(path: Path | str) -> pd.DataFrame:
    try:
        return pd.read_csv(path, float_precision="round_trip")
    except (OSError, pd.errors.EmptyDataError) as exc:
        raise IoError(f"cannot read diagnostics {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# Field dumps
# ---------------------------------------------------------------------------


def dump_fields(directory: Path | str, step: int, time: float, fields: dict[str, np.ndarray]) -> list[Path]:
    """Write each array as ``<name>_<step:06d>.bin`` with a sidecar ``.json``."""
    directory = Path(directory)
    written = []
    try:
        directory.mkdir(parents=True, exist_ok=True)
        for name, values in fields.items():
            arr = np.ascontiguousarray(values, dtype=DUMP_DTYPE)
            stem = directory / f"{name}_{step:06d}"
            arr.tofile(stem.with_suffix(".bin"))
            meta = {"field": name, "shape": list(arr.shape), "dtype": DUMP_DTYPE, "step": step, "time": time}
            stem.with_suffix(".json").write_text(json.dumps(meta, sort_keys=True), encoding="utf-8")
            written.append(stem.with_suffix(".bin"))
    except OSError as exc:
        raise IoError(f"cannot write field dump in {directory}: {exc}") from exc
    logger.debug("step %d: dumped %s", step, ", ".join(fields))
    return written


def read_dump(path: Path | str) -> tuple[np.ndarray, dict]:
    """Array and sidecar metadata of one ``.bin`` dump."""
    path = Path(path)
    try:
        meta = json.loads(path.with_suffix(".json").read_text(encoding="utf-8"))
        values = np.fromfile(path, dtype=meta["dtype"]).reshape(meta["shape"])
    except (OSError, ValueError, KeyError) as exc:
        raise IoError(f"cannot read field dump {path}: {exc}") from exc
    return values, meta


# ---------------------------------------------------------------------------
# Checkpoints
# ---------------------------------------------------------------------------


@dataclass
class Checkpoint:
    state: CoupledState
    config_hash: str
    step: int
    mass0: float = 0.0
    format_version: int = FORMAT_VERSION
    extra: dict = field(default_factory=dict)


def _arrays(state: CoupledState) -> dict[str, np.ndarray]:
    s, f, d = state.structure, state.flow, state.distribution
    arrays = {
        "eta": s.eta,
        "eta_dot": s.eta_dot,
        "u_bar": f.u_bar,
        "pi_bar": f.pi_bar,
        "f_hat": d.f_hat,
        "f_hat_dot": d.f_hat_dot,
        "times": np.array([s.time, f.time, d.time]),
        "window": np.array(state.window, dtype=float),
        "ledger": np.array(state.ledger, dtype=float),
    }
    if s.eta_ddot is not None:
        arrays["eta_ddot"] = s.eta_ddot
    if f.wall_speed is not None:
        arrays["wall_speed"] = f.wall_speed
    return arrays


def save_checkpoint(path: Path | str, checkpoint: Checkpoint) -> Path:
    """Write ``<path>.npz`` and ``<path>.json``; returns the ``.npz`` path."""
    path = Path(path).with_suffix(".npz")
    meta = {
        "format_version": checkpoint.format_version,
        "config_hash": checkpoint.config_hash,
        "step": checkpoint.step,
        "mass0": checkpoint.mass0,
        "time": checkpoint.state.time,
        "extra": checkpoint.extra,
    }
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("wb") as fh:
            np.savez(fh, **_arrays(checkpoint.state))
        path.with_suffix(".json").write_text(json.dumps(meta, indent=2, sort_keys=True), encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write checkpoint {path}: {exc}") from exc
    logger.info("Checkpoint saved → %s (step %d, t=%.6g)", path, checkpoint.step, checkpoint.state.time)
    return path


def load_checkpoint(path: Path | str, dom: ReferenceDomain, config_hash: str | None = None) -> Checkpoint:
    """Read a checkpoint; rebuilds the geometry snapshot from the stored displacement.

    With ``config_hash`` given, a checkpoint written under another
    configuration raises IoError.
    """
    path = Path(path).with_suffix(".npz")
    try:
        meta = json.loads(path.with_suffix(".json").read_text(encoding="utf-8"))
        with np.load(path) as data:
            arrays = {k: data[k] for k in data.files}
    except (OSError, ValueError) as exc:
        raise IoError(f"cannot read checkpoint {path}: {exc}") from exc
    if meta.get("format_version") != FORMAT_VERSION:
        raise IoError(f"checkpoint {path} has format version {meta.get('format_version')}, expected {FORMAT_VERSION}")
    if config_hash is not None and meta["config_hash"] != config_hash:
        raise IoError(f"checkpoint {path} was written for config {meta['config_hash'][:12]}, not {config_hash[:12]}")

    t_s, t_f, t_d = (float(t) for t in arrays["times"])
    structure = StructureState(arrays["eta"], arrays["eta_dot"], t_s, arrays.get("eta_ddot"))
    flow = FlowState(arrays["u_bar"], arrays["pi_bar"], t_f, arrays.get("wall_speed"))
    distribution = DistributionState(arrays["f_hat"], arrays["f_hat_dot"], t_d)
    window = tuple(float(w) for w in arrays["window"])
    state = CoupledState(
        structure, flow, distribution, build_hanzawa(dom, structure.eta), window, [float(v) for v in arrays["ledger"]]
    )
    return Checkpoint(state, meta["config_hash"], int(meta["step"]), float(meta["mass0"]), meta["format_version"],
                      meta.get("extra", {}))


def checkpoint_roundtrip(state: CoupledState, path: Path | str, config_hash: str = "") -> CoupledState:
    """save then load ``state``."""
    save_checkpoint(path, Checkpoint(state, config_hash, 0))
    return load_checkpoint(path, state.hmap.domain, config_hash).state


# ---------------------------------------------------------------------------
# Summary
# ---------------------------------------------------------------------------


def write_summary(path: Path | str, summary: dict) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(summary, indent=2, ensure_ascii=False, default=float), encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write summary {path}: {exc}") from exc
    logger.info("Summary exported → %s", path)


def read_summary(path: Path | str) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise IoError(f"cannot read summary {path}: {exc}") from exc

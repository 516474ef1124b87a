# -*- coding: utf-8 -*-
"""
runner.py

Executes one scenario and writes its artifacts under the run directory.

Artifacts
---------
• diagnostics.csv   one row per step (header: ``COLUMNS``)
• summary.json      outcome, invariant extremes, window ledger, error block
• dumps/            ``<field>_<step>.bin`` + sidecar every ``dump_every`` steps
• checkpoints/      at window ends every ``checkpoint_every`` steps, and ``final``
• diagnostics.xlsx  with ``output.excel``

Exit codes: 0 completed or terminated by a geometric criterion,
3 solver or geometry failure, 4 file I/O failure.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from configspace.state import DistributionState
from coupler.global_run import Termination, global_extend
from coupler.outer import CoupledState, DriveResult, OuterProblem, fixed_point_drive
from fokker_planck.monitors import extrema, solute_mass
from fokker_planck.stepper import FpStepInput, step_fp
from geometry.errors import IoError, NoContraction, SimulationError
from geometry.hanzawa import HanzawaMap, build_hanzawa
from geometry.state import StructureState
from solvent_structure.energy import energy_row
from solvent_structure.inner import InnerResult, inner_fixed_point
from solvent_structure.state import FlowState

from .analyze_run import summarize, to_excel
from .config import RunConfig, log_config
from .persistence import (
    Checkpoint,
    dump_fields,
    load_checkpoint,
    read_diagnostics,
    save_checkpoint,
    write_diagnostics,
    write_summary,
)
from .scenarios import Scenario, build_scenario

logger = logging.getLogger(__name__)

COLUMNS = [
    "time",
    "step",
    "mass",
    "mass_drift",
    "min_f",
    "max_f",
    "max_principle",
    "fp_energy",
    "kinetic",
    "beam_kinetic",
    "elastic",
    "total_energy",
    "dissipation",
    "divergence_residual",
    "trace_residual",
    "eta_sup",
    "contraction_rho",
    "iterations",
]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_IO = 4

DIAGNOSTICS = "diagnostics.csv"
SUMMARY = "summary.json"


@dataclass
class RunReport:
    scenario: str
    status: str
    exit_code: int
    steps: int
    out_dir: Path
    diagnostics: pd.DataFrame
    summary: dict = field(default_factory=dict)


def error_block(exc: BaseException) -> dict:
    """Structured description of ``exc`` for the summary JSON."""
    block = {"type": type(exc).__name__, "message": str(exc)}
    for attr in ("criterion", "value", "window", "factor", "courant", "min_jacobian"):
        value = getattr(exc, attr, None)
        if value is not None:
            block[attr] = value
    return block


# ---------------------------------------------------------------------------
# Per-step recording
# ---------------------------------------------------------------------------


class _Recorder:
    """Collects diagnostics rows and writes dumps and checkpoints on cadence."""

    def __init__(
        self,
        scn: Scenario,
        out_dir: Path,
        state: CoupledState,
        mass0: float,
        step: int = 0,
        rows: list[dict] | None = None,
    ) -> None:
        self.scn = scn
        self.out_dir = out_dir
        self.state = state
        self.mass0 = mass0
        self.step = step
        self.rows: list[dict] = rows or []
        self.windows: list[dict] = []
        self.last_checkpoint = step
        output = scn.config.output
        self.dump_every = int(output.get("dump_every") or 0)
        self.checkpoint_every = int(output.get("checkpoint_every") or 0)

    def record(
        self,
        step: int,
        state: CoupledState,
        energy_map: HanzawaMap,
        divergence: float = float("nan"),
        rho: float = float("nan"),
        iterations: int = 0,
    ) -> dict:
        model = self.scn.model
        mass = solute_mass(state.distribution, state.hmap, model)
        drift = abs(mass - self.mass0) / abs(self.mass0) if self.mass0 != 0.0 else abs(mass - self.mass0)
        ext = extrema(state.distribution, model)
        areas = state.hmap.cell_areas.ravel()
        f_hat = state.distribution.f_hat
        energies = energy_row(state.structure, state.flow, energy_map, self.scn.dataset.params)
        wall = state.flow.wall_speed if state.flow.wall_speed is not None else np.zeros_like(state.structure.eta_dot)
        row = {
            "time": state.time,
            "step": step,
            "mass": mass,
            "mass_drift": drift,
            "min_f": ext.minimum,
            "max_f": ext.maximum,
            "max_principle": ext.norm_sup,
            "fp_energy": 0.5 * float(areas @ ((f_hat**2) @ model.weights)),
            "kinetic": energies["kinetic"],
            "beam_kinetic": energies["beam_kinetic"],
            "elastic": energies["elastic"],
            "total_energy": energies["total"],
            "dissipation": energies["dissipation"],
            "divergence_residual": divergence,
            "trace_residual": float(np.max(np.abs(wall - state.structure.eta_dot), initial=0.0)),
            "eta_sup": state.structure.sup_norm(),
            "contraction_rho": rho,
            "iterations": iterations,
        }
        self.rows.append(row)
        self.step = step
        self.state = state
        if self.dump_every and step % self.dump_every == 0:
            dump_fields(self.out_dir / "dumps", step, state.time, fields_of(state))
        return row

    def maybe_checkpoint(self) -> None:
        if self.checkpoint_every and self.step - self.last_checkpoint >= self.checkpoint_every:
            self.checkpoint(f"step_{self.step:06d}")
            self.last_checkpoint = self.step

    def checkpoint(self, name: str) -> Path:
        cfg = self.scn.config
        ckpt = Checkpoint(self.state, cfg.hash, self.step, self.mass0)
        return save_checkpoint(self.out_dir / "checkpoints" / name, ckpt)

    def frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows, columns=COLUMNS)


def fields_of(state: CoupledState) -> dict[str, np.ndarray]:
    return {
        "eta": state.structure.eta,
        "eta_dot": state.structure.eta_dot,
        "u_bar": state.flow.u_bar,
        "pi_bar": state.flow.pi_bar,
        "f_hat": state.distribution.f_hat,
    }


# ---------------------------------------------------------------------------
# Scenario drivers
# ---------------------------------------------------------------------------


def _run_fp(scn: Scenario, state: CoupledState, rec: _Recorder) -> CoupledState:
    """Fokker–Planck alone along a prescribed geometry and flow."""
    cfg = scn.config
    dom, grid, dt = scn.domain, scn.domain.grid, cfg.time.dt
    params = scn.dataset.params
    normals = dom.outward_normal(grid.theta)
    for step in range(rec.step + 1, cfg.time.steps + 1):
        t_new = state.time + dt
        if scn.name == "fp-fixed":
            hmap = state.hmap
            eta = state.structure.eta
            eta_dot = np.zeros(grid.n_theta)
            velocity = scn.prescribed(grid.centers)
        else:
            eta_of, eta_dot_of, velocity_of = scn.prescribed
            eta = eta_of(t_new, grid.theta)
            eta_dot = eta_dot_of(t_new, grid.theta)
            hmap = build_hanzawa(dom, eta)
            velocity = velocity_of(t_new, hmap.forward(grid.centers))
        inp = FpStepInput(
            state.distribution,
            velocity,
            hmap,
            dt,
            scn.model,
            scn.mode,
            scn.level,
            map_old=state.hmap,
            epsilon=params.epsilon,
            kappa=params.kappa,
            boundary_velocity=eta_dot[:, None] * normals,
        )
        distribution = step_fp(inp)
        structure = StructureState(eta, eta_dot, distribution.time)
        flow = FlowState(velocity, np.zeros(grid.shape), distribution.time, wall_speed=eta_dot)
        state = CoupledState(structure, flow, distribution, hmap, (state.time, distribution.time), state.ledger)
        rec.record(step, state, hmap)
        rec.maybe_checkpoint()
    return state


def _record_window(
    scn: Scenario,
    rec: _Recorder,
    start: CoupledState,
    inner: InnerResult,
    distributions: list[DistributionState],
    rho: float,
    iterations: int,
) -> CoupledState:
    dom = scn.domain
    state = start
    for k in range(1, inner.window + 1):
        structure, flow = inner.structures[k], inner.flows[k]
        hmap = inner.map0 if np.array_equal(structure.eta, inner.map0.eta) else build_hanzawa(dom, structure.eta)
        state = CoupledState(structure, flow, distributions[k], hmap, (start.time, inner.structures[-1].time),
                             start.ledger)
        last = k == inner.window
        rec.record(
            rec.step + 1,
            state,
            inner.map0,
            divergence=inner.divergence[k - 1],
            rho=rho if last else float("nan"),
            iterations=iterations if last else 0,
        )
    return state


def _run_solvent(scn: Scenario, state: CoupledState, rec: _Recorder) -> CoupledState:
    """Beam + solvent without solute stress, chained inner windows."""
    cfg = scn.config
    tol = cfg.tolerances
    total = cfg.time.steps
    f_hat = state.distribution.f_hat
    while rec.step < total:
        n = min(cfg.time.initial_window, total - rec.step)
        inner = inner_fixed_point(
            scn.domain,
            scn.dataset,
            n,
            cfg.time.dt,
            None,
            structure0=state.structure,
            flow0=state.flow,
            tol_fix=tol["tol_fix"],
            max_iter=int(tol["max_picard"]),
            min_window=cfg.time.min_window,
        )
        distributions = [DistributionState(f_hat, time=s.time) for s in inner.structures]
        rho = inner.factors[-1] if inner.factors else float("nan")
        start = state
        state = _record_window(scn, rec, start, inner, distributions, rho, inner.iterations)
        rec.windows.append(
            {"start": start.time, "end": state.time, "steps": inner.window, "inner_iterations": inner.iterations,
             "halvings": inner.halvings}
        )
        rec.maybe_checkpoint()
    return state


def outer_problem(scn: Scenario) -> OuterProblem:
    cfg = scn.config
    tol = cfg.tolerances
    return OuterProblem(
        scn.domain,
        scn.model,
        scn.dataset,
        cfg.time.dt,
        scn.mode,
        scn.level,
        tol_fix=tol["tol_fix"],
        max_inner=int(tol["max_picard"]),
        max_outer=int(tol["max_picard"]),
        min_window=cfg.time.min_window,
    )


def _on_drive(scn: Scenario, rec: _Recorder, start: CoupledState):
    """Callback recording every accepted outer window."""
    anchor = {"state": start}

    def handle(result: DriveResult) -> None:
        rho = result.factors[-1] if result.factors else float("nan")
        begin = anchor["state"]
        _record_window(scn, rec, begin, result.inner, result.distributions, rho, result.iterations)
        rec.windows.append(
            {
                "start": begin.time,
                "end": result.state.time,
                "steps": result.window,
                "outer_iterations": result.iterations,
                "halvings": result.halvings,
                "y_distances": [r.y_norm for r in result.reports],
            }
        )
        rec.maybe_checkpoint()
        anchor["state"] = result.state

    return handle


def _run_coupled(scn: Scenario, state: CoupledState, rec: _Recorder) -> tuple[CoupledState, Termination | None]:
    cfg = scn.config
    problem = outer_problem(scn)
    handle = _on_drive(scn, rec, state)
    if scn.global_run:
        run = global_extend(
            problem,
            state,
            cfg.time.horizon,
            cfg.time.initial_window,
            tube_margin=cfg.tube_margin,
            tol=cfg.tolerances["degeneracy"],
            on_window=handle,
        )
        return run.state, run.termination
    while rec.step < cfg.time.steps:
        n = min(cfg.time.initial_window, cfg.time.steps - rec.step)
        result = fixed_point_drive(problem, state, n)
        handle(result)
        state = result.state
    return state, None


# ---------------------------------------------------------------------------
# Summary
# ---------------------------------------------------------------------------


def _finite_max(series: pd.Series) -> float | None:
    values = series.dropna()
    return float(values.max()) if len(values) else None


def build_summary(
    scn: Scenario,
    diagnostics: pd.DataFrame,
    state: CoupledState | None,
    status: str,
    exit_code: int,
    termination: Termination | None = None,
    error: dict | None = None,
    windows: list[dict] | None = None,
) -> dict:
    cfg = scn.config
    summary = {
        "scenario": scn.name,
        "kind": scn.kind,
        "drag_mode": scn.mode.value,
        "config_hash": cfg.hash,
        "status": status,
        "exit_code": exit_code,
        "steps": int(diagnostics["step"].max()) if len(diagnostics) else 0,
        "final_time": float(diagnostics["time"].iloc[-1]) if len(diagnostics) else 0.0,
        "termination": termination.as_dict() if termination is not None else None,
        "error": error,
    }
    if len(diagnostics):
        summary["invariants"] = {
            "mass0": float(diagnostics["mass"].iloc[0]),
            "max_mass_drift": _finite_max(diagnostics["mass_drift"]),
            "min_f": float(diagnostics["min_f"].min()),
            "max_principle": _finite_max(diagnostics["max_principle"]),
            "max_divergence_residual": _finite_max(diagnostics["divergence_residual"]),
            "max_trace_residual": _finite_max(diagnostics["trace_residual"]),
            "max_eta_sup": _finite_max(diagnostics["eta_sup"]),
            "max_contraction_rho": _finite_max(diagnostics["contraction_rho"]),
        }
    if state is not None:
        summary["field_max"] = {name: float(np.max(np.abs(v), initial=0.0)) for name, v in fields_of(state).items()}
        summary["ledger"] = list(state.ledger)
    summary["windows"] = windows or []
    return summary


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def _start(scn: Scenario, out: Path, resume: Path | str | None) -> _Recorder:
    """Recorder at the initial state, or at a checkpoint with the earlier diagnostics rows."""
    cfg = scn.config
    if resume is None:
        state = CoupledState.initial(scn.domain, scn.dataset, scn.model)
        rec = _Recorder(scn, out, state, solute_mass(state.distribution, state.hmap, scn.model))
        rec.record(0, state, state.hmap)
        return rec
    ckpt = load_checkpoint(resume, scn.domain, cfg.hash)
    rows: list[dict] = []
    if (out / DIAGNOSTICS).exists():
        previous = read_diagnostics(out / DIAGNOSTICS)
        rows = previous[previous["step"] <= ckpt.step].to_dict("records")
    logger.info("Resuming %s from step %d (t=%.6g), %d earlier rows", scn.name, ckpt.step, ckpt.state.time, len(rows))
    return _Recorder(scn, out, ckpt.state, ckpt.mass0, ckpt.step, rows)


def run(cfg: RunConfig, resume: Path | str | None = None, out_dir: Path | str | None = None) -> RunReport:
    """Run ``cfg`` (optionally from a checkpoint) and write all artifacts.

    Solver failures never propagate: they are logged, written to the summary
    as an ``error`` block and turned into a nonzero exit code.
    """
    log_config(cfg, logger)
    out = Path(out_dir) if out_dir is not None else cfg.output_dir
    scn = build_scenario(cfg)
    rec = _start(scn, out, resume)

    logger.info("===== %s: t=%.6g, steps %d..%d =====", scn.name, rec.state.time, rec.step, cfg.time.steps)
    termination = None
    error = None
    status, exit_code = "completed", EXIT_OK
    try:
        if scn.kind == "fp":
            _run_fp(scn, rec.state, rec)
        elif scn.kind == "solvent":
            _run_solvent(scn, rec.state, rec)
        else:
            _, termination = _run_coupled(scn, rec.state, rec)
        if termination is not None:
            status = "terminated"
    except NoContraction as exc:
        logger.exception("%s: fixed point did not contract after t=%.6g", scn.name, rec.state.time)
        status, exit_code, error = "failed", EXIT_SOLVER, error_block(exc)
    except SimulationError as exc:
        logger.exception("%s aborted after step %d", scn.name, rec.step)
        status, exit_code, error = "failed", EXIT_SOLVER, error_block(exc)
    except IoError as exc:
        logger.exception("%s: I/O failure", scn.name)
        status, exit_code, error = "failed", EXIT_IO, error_block(exc)

    diagnostics = rec.frame()
    summary = build_summary(scn, diagnostics, rec.state, status, exit_code, termination, error, rec.windows)
    try:
        write_diagnostics(diagnostics, out / DIAGNOSTICS)
        if exit_code == EXIT_OK:
            rec.checkpoint("final")
        if cfg.output.get("excel"):
            to_excel(diagnostics, summarize(diagnostics, summary), out / "diagnostics.xlsx")
        write_summary(out / SUMMARY, summary)
    except IoError as exc:
        logger.exception("%s: cannot write run artifacts", scn.name)
        exit_code = EXIT_IO
        summary.update(status="failed", exit_code=exit_code, error=error_block(exc))

    logger.info("%s finished: %s (exit %d) after %d steps", scn.name, summary["status"], exit_code, summary["steps"])
    return RunReport(scn.name, summary["status"], exit_code, summary["steps"], out, diagnostics, summary)

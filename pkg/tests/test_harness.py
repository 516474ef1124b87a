# -*- coding: utf-8 -*-
from __future__ import annotations

import json

import numpy as np
import pytest

from configspace.state import DistributionState
from coupler.outer import CoupledState
from geometry.errors import ConfigError, IoError
from geometry.hanzawa import build_hanzawa
from geometry.state import StructureState
from harness import cli
from harness.analyze_run import format_summary, load_run, summarize
from harness.config import DEFAULTS, RunConfig, config_hash, load_config
from harness.persistence import (
    Checkpoint,
    checkpoint_roundtrip,
    dump_fields,
    load_checkpoint,
    read_diagnostics,
    read_dump,
    save_checkpoint,
)
from harness.runner import COLUMNS, DIAGNOSTICS, SUMMARY, run
from harness.suite import run_suite
from harness.validate import validate_dataset
from solvent_structure.state import Dataset, FlowState

# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


@pytest.mark.parametrize(
    "values",
    [
        {"scenario": "bogus"},
        {"geometry": {"n_theta": 15}},
        {"geometry": {"n_r": 2}},
        {"geometry": {"spacing": 0.1}},
        {"geometry": {"tube_radius": 0.2, "safety_margin": 0.3}},
        {"fene": {"b": 2.0}},
        {"time": {"dt": 0.0}},
        {"physics": {"mu": -1.0}},
        {"drag_mode": "upper_convected"},
    ],
)
def test_invalid_config_is_rejected(values):
    with pytest.raises(ConfigError):
        RunConfig.from_dict(values)


def test_load_config_merges_over_defaults(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"scenario": "fp-fixed", "time": {"dt": 0.01}}), encoding="utf-8")
    values = load_config(path, {"seed": 7})
    assert values["scenario"] == "fp-fixed"
    assert values["time"]["dt"] == 0.01
    assert values["time"]["steps"] == DEFAULTS["time"]["steps"]
    assert values["seed"] == 7


def test_load_config_without_file_gives_defaults(tmp_path):
    assert load_config(tmp_path / "missing.json") == DEFAULTS


def test_config_hash_ignores_output_section():
    a = load_config(None, {"output": {"dir": "a"}})
    b = load_config(None, {"output": {"dir": "b", "excel": True}})
    c = load_config(None, {"time": {"dt": 2e-3}})
    assert config_hash(a) == config_hash(b)
    assert config_hash(a) != config_hash(c)


def test_tube_margin_defaults_to_safety_distance():
    cfg = RunConfig.from_dict({})
    assert cfg.tube_margin == pytest.approx(DEFAULTS["geometry"]["tube_radius"] - DEFAULTS["geometry"]["safety_margin"])


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------


def _random_state(domain, model, seed: int = 0) -> CoupledState:
    rng = np.random.default_rng(seed)
    n, shape = domain.n_theta, domain.grid.shape
    eta = 0.01 * rng.normal(size=n)
    structure = StructureState(eta, rng.normal(size=n), 0.123, eta_ddot=rng.normal(size=n))
    flow = FlowState(rng.normal(size=shape + (2,)), rng.normal(size=shape), 0.123, wall_speed=rng.normal(size=n))
    f = DistributionState(rng.uniform(size=(domain.grid.size, model.size)),
                          rng.normal(size=(domain.grid.size, model.size)), 0.123)
    return CoupledState(structure, flow, f, build_hanzawa(domain, eta), (0.1, 0.123), [1e-3, 2.5e-6])


def test_checkpoint_roundtrip_is_bit_exact(tmp_path, domain, model):
    state = _random_state(domain, model)
    back = checkpoint_roundtrip(state, tmp_path / "ckpt", "abc")
    assert np.array_equal(back.structure.eta, state.structure.eta)
    assert np.array_equal(back.structure.eta_dot, state.structure.eta_dot)
    assert np.array_equal(back.structure.eta_ddot, state.structure.eta_ddot)
    assert np.array_equal(back.flow.u_bar, state.flow.u_bar)
    assert np.array_equal(back.flow.pi_bar, state.flow.pi_bar)
    assert np.array_equal(back.flow.wall_speed, state.flow.wall_speed)
    assert np.array_equal(back.distribution.f_hat, state.distribution.f_hat)
    assert np.array_equal(back.distribution.f_hat_dot, state.distribution.f_hat_dot)
    assert back.time == state.time
    assert back.window == state.window
    assert back.ledger == state.ledger


def test_checkpoint_of_other_config_is_refused(tmp_path, domain, model):
    save_checkpoint(tmp_path / "ckpt", Checkpoint(_random_state(domain, model), "abc", 3, 1.5))
    assert load_checkpoint(tmp_path / "ckpt", domain).step == 3
    with pytest.raises(IoError):
        load_checkpoint(tmp_path / "ckpt", domain, config_hash="xyz")


def test_missing_checkpoint_raises_io_error(tmp_path, domain):
    with pytest.raises(IoError):
        load_checkpoint(tmp_path / "nothing", domain)


def test_field_dump_keeps_shape_and_metadata(tmp_path):
    values = np.arange(12.0).reshape(3, 4) / 7.0
    (path,) = dump_fields(tmp_path, 42, 0.5, {"pi_bar": values})
    assert path.name == "pi_bar_000042.bin"
    back, meta = read_dump(path)
    assert np.array_equal(back, values)
    assert meta["step"] == 42
    assert meta["time"] == 0.5


def test_reading_missing_diagnostics_raises_io_error(tmp_path):
    with pytest.raises(IoError):
        read_diagnostics(tmp_path / DIAGNOSTICS)


# ---------------------------------------------------------------------------
# Dataset validation
# ---------------------------------------------------------------------------


def test_zero_dataset_passes_validation(domain, model):
    data = Dataset.zeros(domain.grid.shape, model.size)
    report = validate_dataset(data, domain, model)
    assert report.passed
    assert {c.name for c in report.checks} >= {"sup_norm", "trace", "divergence", "initial_rate", "compatibility"}


def test_trace_mismatch_is_reported(domain, model):
    delta = 1e-3
    data = Dataset.zeros(domain.grid.shape, model.size)
    data.u0[..., 0] = delta
    report = validate_dataset(data, domain, model)
    assert not report.passed
    assert report["trace"].residual == pytest.approx(delta, rel=1e-12)


def test_displacement_outside_tube_stops_validation(domain):
    data = Dataset.zeros(domain.grid.shape)
    data.eta0 = np.full(domain.n_theta, 0.6)
    report = validate_dataset(data, domain)
    assert not report.passed
    assert [c.name for c in report.checks] == ["sup_norm"]


# ---------------------------------------------------------------------------
# Runs
# ---------------------------------------------------------------------------


def test_zero_scenario_stays_at_rest(quick_config):
    cfg = quick_config("zero", output={"excel": True})
    report = run(cfg)
    assert report.exit_code == 0
    assert report.status == "completed"
    assert report.steps == cfg.time.steps
    assert list(report.diagnostics.columns) == COLUMNS
    assert len(report.diagnostics) == cfg.time.steps + 1
    assert all(v == 0.0 for v in report.summary["field_max"].values())
    assert (report.out_dir / SUMMARY).exists()
    assert (report.out_dir / "diagnostics.xlsx").exists()
    assert (report.out_dir / "checkpoints" / "final.npz").exists()


def test_shape_changing_load_ends_on_sup_norm(quick_config):
    cfg = quick_config(
        "coupled-global",
        geometry={"safety_margin": 0.1},
        time={"steps": 250, "initial_window": 16},
        forcing={"f_hat_amplitude": 0.2, "structure_amplitude": 20.0, "structure_mode": 2},
    )
    report = run(cfg)
    assert report.status == "terminated"
    assert report.summary["termination"]["criterion"] == "sup_norm"
    assert report.summary["termination"]["value"] >= 0.1
    assert report.steps < 250


def test_fp_fixed_run_is_deterministic_and_resumable(tmp_path, quick_config):
    cfg = quick_config(
        "fp-fixed",
        time={"steps": 10},
        forcing={"f_hat_amplitude": 0.5, "rotation": 1.0},
        output={"checkpoint_every": 5, "dump_every": 5},
    )
    first, second, resumed = tmp_path / "first", tmp_path / "second", tmp_path / "resumed"
    assert run(cfg, out_dir=first).exit_code == 0
    run(cfg, out_dir=second)
    assert (first / DIAGNOSTICS).read_bytes() == (second / DIAGNOSTICS).read_bytes()
    assert (first / "dumps" / "f_hat_000005.bin").exists()

    assert run(cfg, resume=first / "checkpoints" / "step_000005", out_dir=resumed).exit_code == 0
    full = read_diagnostics(first / DIAGNOSTICS)
    tail = read_diagnostics(resumed / DIAGNOSTICS)
    expected = full[full["step"] > 5].reset_index(drop=True)
    assert expected.equals(tail.reset_index(drop=True))


def test_fp_fixed_run_conserves_mass(quick_config):
    cfg = quick_config("fp-fixed", forcing={"f_hat_amplitude": 0.5, "rotation": 2.0})
    df = run(cfg).diagnostics
    assert df["mass_drift"].max() <= 1e-10
    assert df["min_f"].min() >= -1e-12


def test_run_summary_analysis(quick_config):
    report = run(quick_config("zero"))
    diagnostics, summary = load_run(report.out_dir)
    table = summarize(diagnostics, summary)
    values = dict(zip(table["metric"], table["value"]))
    assert values["steps"] == report.steps
    assert values["status"] == "completed"
    assert values["max_trace_residual"] == 0.0
    assert len(format_summary(table)) == len(table)


def test_resume_with_other_config_fails_with_io_code(tmp_path, quick_config):
    cfg = quick_config("zero")
    report = run(cfg)
    other = quick_config("zero", time={"dt": 2e-3})
    with pytest.raises(IoError):
        run(other, resume=report.out_dir / "checkpoints" / "final", out_dir=tmp_path / "other")


# ---------------------------------------------------------------------------
# Command line and suite
# ---------------------------------------------------------------------------


def test_cli_rejects_unknown_scenario(tmp_path):
    assert cli.main(["run", "--scenario", "bogus", "--out", str(tmp_path)]) == 2
    summary = json.loads((tmp_path / SUMMARY).read_text(encoding="utf-8"))
    assert summary["exit_code"] == 2
    assert summary["error"]["type"] == "ConfigError"


def test_cli_resume_needs_checkpoint(tmp_path):
    assert cli.main(["resume", "--scenario", "zero", "--out", str(tmp_path)]) == 2


def test_cli_validates_zero_scenario(tmp_path):
    path = tmp_path / "zero.json"
    path.write_text(json.dumps({"scenario": "zero", "geometry": {"n_r": 8, "n_theta": 16},
                                "fene": {"n_qr": 6, "n_qtheta": 8}}), encoding="utf-8")
    assert cli.main(["validate", "--config", str(path)]) == 0


def test_quick_suite_rows(tmp_path):
    results = run_suite(tmp_path, only=[4, 8], quick=True)
    assert list(results["number"]) == [4, 8]
    assert results["passed"].all()

# -*- coding: utf-8 -*-
"""
suite.py

Acceptance suite: every criterion runs a small scenario or a direct check and
returns one row of the pass/fail table.

• Default scale: disk 24×48, ball 16×24, dt = 1e-3, up to 500 steps.
• ``quick``: disk 8×16, ball 8×12, 20 steps (smoke run of the same checks).
• Convergence orders come from the manufactured solutions in ``convergence``.
"""

from __future__ import annotations

import logging
import shutil
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable

import numpy as np
import pandas as pd
from scipy.special import j0, j1, jn_zeros, jnp_zeros

from configspace.fene import FeneModel
from configspace.state import DistributionState
from coupler.global_run import CRITERIA as TERMINATION_CRITERIA
from coupler.norms import y_distance, y_norm
from coupler.outer import CoupledState, OuterProblem, fixed_point_drive, outer_map
from fokker_planck.drag import DragMode
from fokker_planck.monitors import energy_report
from fokker_planck.stepper import FpStepInput, step_fp
from geometry.domain import ReferenceDomain
from geometry.errors import NoContraction
from geometry.hanzawa import build_hanzawa
from geometry.lipschitz import verify_lipschitz
from solvent_structure.compatibility import check_compatibility, compatible_forcing
from solvent_structure.inner import InnerResult, inner_fixed_point
from solvent_structure.state import Dataset

from .analyze_run import _ascii_table
from .config import RunConfig, deep_merge
from .convergence import fp_spatial_refinement, fp_temporal_refinement, stokes_refinement
from .persistence import read_diagnostics
from .runner import DIAGNOSTICS, run

logger = logging.getLogger(__name__)

INNER_AMPLITUDES = tuple(0.01 * 4.0**k for k in range(6))


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    value: float
    threshold: float
    detail: str = ""


@dataclass
class SuiteContext:
    out_root: Path
    quick: bool = False
    seed: int = 0

    def config(self, scenario: str, **sections) -> RunConfig:
        if self.quick:
            base = {
                "geometry": {"n_r": 8, "n_theta": 16},
                "fene": {"n_qr": 8, "n_qtheta": 12},
                "time": {"steps": 20, "initial_window": 4},
            }
        else:
            base = {"time": {"steps": 500, "initial_window": 16}}
        values = deep_merge(base, {"scenario": scenario, "seed": self.seed})
        values = deep_merge(values, sections)
        return RunConfig.from_dict(values)

    def domain(self, n_r: int | None = None, n_theta: int | None = None) -> ReferenceDomain:
        if n_r is None:
            n_r, n_theta = (8, 16) if self.quick else (24, 48)
        return ReferenceDomain(1.0, 0.5, n_r, n_theta)

    def model(self) -> FeneModel:
        return FeneModel(4.0, 8, 12) if self.quick else FeneModel(4.0, 16, 24)


CriterionFn = Callable[[SuiteContext], CriterionResult]
CRITERIA: dict[int, CriterionFn] = {}


def criterion(number: int):
    def register(fn: CriterionFn) -> CriterionFn:
        CRITERIA[number] = fn
        return fn

    return register


def _run_frame(ctx: SuiteContext, cfg: RunConfig, tag: str) -> tuple[pd.DataFrame, dict]:
    report = run(cfg, out_dir=ctx.out_root / tag)
    return report.diagnostics, report.summary


# ---------------------------------------------------------------------------
# Solute invariants
# ---------------------------------------------------------------------------


@criterion(1)
def mass_conservation(ctx: SuiteContext) -> CriterionResult:
    cfg = ctx.config(
        "coupled-global",
        forcing={"f_hat_amplitude": 0.5, "body_amplitude": 0.5, "structure_amplitude": 0.05},
    )
    df, summary = _run_frame(ctx, cfg, "c01_mass")
    drift = float(df["mass_drift"].max())
    return CriterionResult(1, "mass_conservation", summary["exit_code"] == 0 and drift <= 1e-10, drift, 1e-10,
                           f"{len(df) - 1} steps")


@criterion(2)
def nonnegativity(ctx: SuiteContext) -> CriterionResult:
    worst = np.inf
    for mode in ("co_rotational", "full_gradient"):
        cfg = ctx.config("fp-fixed", drag_mode=mode, forcing={"f_hat_amplitude": 0.9, "rotation": 2.0})
        df, _ = _run_frame(ctx, cfg, f"c02_{mode}")
        worst = min(worst, float(df["min_f"].min()))
    return CriterionResult(2, "nonnegativity", worst >= -1e-12, worst, -1e-12, "both drag modes")


@criterion(3)
def maximum_principle(ctx: SuiteContext) -> CriterionResult:
    cfg = ctx.config("fp-fixed", drag_mode="co_rotational", forcing={"f_hat_amplitude": 0.5, "rotation": 2.0})
    df, _ = _run_frame(ctx, cfg, "c03_max_principle")
    growth = float(df["max_principle"].max() / df["max_principle"].iloc[0] - 1.0)
    return CriterionResult(3, "maximum_principle", growth <= 1e-8, growth, 1e-8, "sup_x ‖f̂‖ relative growth")


@criterion(4)
def skew_neutrality(ctx: SuiteContext) -> CriterionResult:
    rng = np.random.default_rng(ctx.seed)
    dom, model = ctx.domain(), ctx.model()
    hmap = build_hanzawa(dom, np.zeros(dom.n_theta))
    worst = 0.0
    for _ in range(10):
        velocity = rng.normal(size=dom.grid.shape + (2,))
        f_hat = 1.0 + 0.5 * rng.uniform(-1.0, 1.0, size=(dom.grid.size, model.size))
        inp = FpStepInput(DistributionState(f_hat), velocity, hmap, 1e-3, model, DragMode.CO_ROTATIONAL)
        worst = max(worst, abs(energy_report(inp).drag_production))
    return CriterionResult(4, "skew_neutrality", worst <= 1e-12, worst, 1e-12, "10 random velocity fields")


# ---------------------------------------------------------------------------
# Geometry
# ---------------------------------------------------------------------------


def _smooth_eta(theta: np.ndarray) -> np.ndarray:
    return 0.1 * np.cos(theta) + 0.05 * np.sin(2.0 * theta)


@criterion(5)
def hanzawa_consistency(ctx: SuiteContext) -> CriterionResult:
    dom = ctx.domain()
    hmap = build_hanzawa(dom, _smooth_eta(dom.grid.theta))
    points = dom.grid.centers
    roundtrip = float(np.max(np.abs(hmap.inverse(hmap.forward(points)) - points)))
    errors = []
    for n_r in (8, 16, 32):
        d = ReferenceDomain(1.0, 0.5, n_r, 2 * n_r)
        h = build_hanzawa(d, _smooth_eta(d.grid.theta))
        # interior cells away from the origin row
        errors.append(float(np.max(np.abs(h.piola_residual()[1:]))))
    order = float(np.log2(errors[-2] / errors[-1])) if errors[-1] > 0.0 else np.inf
    passed = roundtrip <= 1e-10 and order >= 1.8
    return CriterionResult(5, "hanzawa_consistency", passed, order, 1.8, f"roundtrip {roundtrip:.2e}")


def _random_eta(rng: np.random.Generator, theta: np.ndarray, amplitude: float = 0.08) -> np.ndarray:
    coeffs = rng.uniform(-1.0, 1.0, size=(3, 2)) * amplitude / np.arange(1, 4)[:, None] ** 2
    return sum(a * np.cos((m + 1) * theta) + b * np.sin((m + 1) * theta) for m, (a, b) in enumerate(coeffs))


@criterion(6)
def lipschitz_estimates(ctx: SuiteContext) -> CriterionResult:
    dom = ctx.domain()
    stats = []
    for seed in (ctx.seed, ctx.seed + 1):
        rng = np.random.default_rng(seed)
        ratios = [
            verify_lipschitz(dom, _random_eta(rng, dom.grid.theta), _random_eta(rng, dom.grid.theta), 1).ratio
            for _ in range(20)
        ]
        stats.append(max(ratios))
    spread = abs(stats[0] - stats[1]) / max(stats)
    return CriterionResult(6, "lipschitz_estimates", spread <= 0.1, spread, 0.1, f"max ratios {stats[0]:.4g}, {stats[1]:.4g}")


# ---------------------------------------------------------------------------
# Solvent–structure
# ---------------------------------------------------------------------------


@criterion(7)
def divergence_and_trace(ctx: SuiteContext) -> CriterionResult:
    cfg = ctx.config(
        "solvent-structure",
        forcing={"eta0_amplitude": 0.05, "structure_amplitude": 0.1, "body_amplitude": 0.2},
    )
    df, summary = _run_frame(ctx, cfg, "c07_divergence")
    worst = max(float(df["divergence_residual"].max()), float(df["trace_residual"].max()))
    return CriterionResult(7, "divergence_and_trace", summary["exit_code"] == 0 and worst <= 1e-9, worst, 1e-9)


@criterion(8)
def compatibility(ctx: SuiteContext) -> CriterionResult:
    dom = ctx.domain()
    map0 = build_hanzawa(dom, np.zeros(dom.n_theta))
    zero = check_compatibility(Dataset.zeros(dom.grid.shape), map0).sup
    slopes = []
    for delta in (1e-3, 2e-3, 4e-3):
        data = Dataset.zeros(dom.grid.shape)
        data.g = lambda t, y, d=delta: d * np.cos(2.0 * np.asarray(y))
        slopes.append(check_compatibility(data, map0).sup / delta)
    spread = (max(slopes) - min(slopes)) / max(slopes)
    passed = zero <= 1e-10 and spread <= 0.05
    return CriterionResult(8, "compatibility", passed, spread, 0.05, f"zero dataset residual {zero:.2e}")


def _small_dataset(dom: ReferenceDomain, model: FeneModel | None, scale: float = 0.01) -> Dataset:
    theta = dom.grid.theta
    n_q = None if model is None else model.size
    data = Dataset.zeros(dom.grid.shape, n_q)
    data.eta0 = scale * np.cos(2.0 * theta)
    data.g = lambda t, y: scale * np.cos(2.0 * np.asarray(y))
    if model is not None:
        data.f_hat0 = np.ones((dom.grid.size, model.size))
    return compatible_forcing(data, build_hanzawa(dom, data.eta0))


def _forced_dataset(dom: ReferenceDomain, amplitude: float) -> Dataset:
    data = Dataset.zeros(dom.grid.shape)
    data.eta0 = 0.01 * np.cos(2.0 * dom.grid.theta)
    data.g = lambda t, y: amplitude * np.cos(2.0 * np.asarray(y))
    return compatible_forcing(data, build_hanzawa(dom, data.eta0))


def contraction_sweep(
    dom: ReferenceDomain,
    amplitudes=INNER_AMPLITUDES,
    window: int = 16,
    dt: float = 1e-3,
) -> list[tuple[float, InnerResult | None]]:
    """Inner fixed point for growing structure forcing; None once the window underflows."""
    runs: list[tuple[float, InnerResult | None]] = []
    for amplitude in amplitudes:
        try:
            result = inner_fixed_point(
                dom, _forced_dataset(dom, amplitude), window, dt, tol_fix=1e-12, max_iter=40, min_window=1
            )
        except NoContraction:
            logger.info("inner sweep: no contraction at forcing %.3g", amplitude)
            runs.append((amplitude, None))
            break
        logger.info(
            "inner sweep: forcing %.3g -> window %d, %d iterations", amplitude, result.window, result.iterations
        )
        runs.append((amplitude, result))
    return runs


def resolved_factors(result: InnerResult, floor: float = 1e-11) -> list[float]:
    """Contraction factors whose iterate distance is still above the roundoff ``floor``."""
    return [f for f, d in zip(result.factors, result.distances[1:]) if d > floor]


def is_geometric(result: InnerResult, spread: float = 10.0) -> bool:
    """At least four resolved factors, all below one and within ``spread`` of their median."""
    factors = resolved_factors(result)
    if len(factors) < 4 or max(factors) >= 1.0:
        return False
    body = np.asarray(factors, dtype=float)
    median = float(np.median(body))
    return median > 0.0 and bool(np.all(body <= spread * median) and np.all(body >= median / spread))


@criterion(9)
def inner_contraction(ctx: SuiteContext) -> CriterionResult:
    runs = contraction_sweep(ctx.domain())
    windows = [0 if result is None else result.window for _, result in runs]
    monotone = all(a >= b for a, b in zip(windows, windows[1:]))
    geometric = [result for _, result in runs if result is not None and is_geometric(result)]
    worst = max((max(resolved_factors(r)) for r in geometric), default=float("nan"))
    passed = monotone and bool(geometric)
    return CriterionResult(9, "inner_contraction", passed, worst, 1.0,
                           f"accepted windows {windows}, {len(geometric)} geometric runs")


@criterion(10)
def outer_contraction(ctx: SuiteContext) -> CriterionResult:
    dom, model = ctx.domain(), ctx.model()
    data = _small_dataset(dom, model)
    problem = OuterProblem(dom, model, data, 1e-3, DragMode.CO_ROTATIONAL, tol_fix=1e-9)
    start = CoupledState.initial(dom, data, model)
    result = fixed_point_drive(problem, start, 4)
    again = outer_map(problem, result.distributions, start, result.window).distributions
    grid = dom.grid
    size = max(1.0, y_norm(result.distributions, model, grid, problem.dt))
    moved = y_distance(again, result.distributions, model, grid, problem.dt)

    shifted = [DistributionState(1.2 * f.f_hat, time=f.time) for f in result.distributions]
    other = fixed_point_drive(problem, start, result.window, guess=shifted)
    same_window = other.window == result.window
    spread = y_distance(other.distributions, result.distributions, model, grid, problem.dt) if same_window else np.inf

    rho = max(result.factors) if result.factors else 0.0
    passed = rho < 1.0 and moved <= 2.0 * problem.tol_fix * size and spread <= 5.0 * problem.tol_fix * size
    return CriterionResult(10, "outer_contraction", passed, moved, 2.0 * problem.tol_fix * size,
                           f"max rho {rho:.3g}, start independence {spread:.2e}")


# ---------------------------------------------------------------------------
# Relaxation, convergence, termination, determinism
# ---------------------------------------------------------------------------


def _relaxation_rate(ctx: SuiteContext, profile: np.ndarray) -> float:
    dom, model = ctx.domain(), ctx.model()
    grid = dom.grid
    hmap = build_hanzawa(dom, np.zeros(dom.n_theta))
    f = DistributionState(1.0 + 0.5 * np.outer(profile, np.ones(model.size)))
    areas = hmap.cell_areas.ravel()

    def deviation(state: DistributionState) -> float:
        mean = areas @ state.f_hat[:, 0] / areas.sum()
        return float(np.sqrt(areas @ (state.f_hat[:, 0] - mean) ** 2))

    dt, steps = 1e-3, 20 if ctx.quick else 100
    d0 = deviation(f)
    for _ in range(steps):
        f = step_fp(FpStepInput(f, np.zeros(grid.shape + (2,)), hmap, dt, model, map_old=hmap))
    return -np.log(deviation(f) / d0) / (steps * dt)


@criterion(11)
def equilibrium_relaxation(ctx: SuiteContext) -> CriterionResult:
    grid = ctx.domain().grid
    radial = float(jn_zeros(1, 1)[0])
    angular = float(jnp_zeros(1, 1)[0])
    rates = {
        "radial": (_relaxation_rate(ctx, 0.2 * j0(radial * grid.radii.ravel())), radial**2),
        "angular": (_relaxation_rate(ctx, (j1(angular * grid.radii) * np.cos(grid.angles)).ravel()), angular**2),
    }
    error = max(abs(rate - exact) / exact for rate, exact in rates.values())
    detail = ", ".join(f"{name} {rate:.4g} vs {exact:.4g}" for name, (rate, exact) in rates.items())
    return CriterionResult(11, "equilibrium_relaxation", error <= 0.05, error, 0.05, detail)


@criterion(12)
def manufactured_convergence(ctx: SuiteContext) -> CriterionResult:
    orders = {
        "fp_space": (fp_spatial_refinement().order, 1.8),
        "flow_space": (stokes_refinement().order, 1.8),
        "fp_time": (fp_temporal_refinement().order, 0.9),
    }
    margin = min(order - floor for order, floor in orders.values())
    detail = ", ".join(f"{name} {order:.3g}" for name, (order, _) in orders.items())
    return CriterionResult(12, "manufactured_convergence", margin >= 0.0, margin, 0.0, detail)


@criterion(13)
def termination_taxonomy(ctx: SuiteContext) -> CriterionResult:
    steps = 200 if ctx.quick else 1000
    inflating = ctx.config(
        "coupled-global",
        geometry={"safety_margin": 0.1},
        time={"steps": steps},
        forcing={"structure_amplitude": 20.0, "structure_mode": 2, "f_hat_amplitude": 0.2},
    )
    _, summary = _run_frame(ctx, inflating, "c13_inflating")
    term = summary.get("termination") or {}
    fired = summary["status"] == "terminated" and term.get("criterion") in TERMINATION_CRITERIA

    benign = ctx.config(
        "coupled-global",
        time={"steps": steps},
        forcing={"f_hat_amplitude": 0.5, "body_amplitude": 0.5, "structure_amplitude": 0.05, "structure_mode": 2},
    )
    df, quiet = _run_frame(ctx, benign, "c13_benign")
    drift = float(df["mass_drift"].max())
    floor = float(df["min_f"].min())
    growth = float(df["max_principle"].max() / df["max_principle"].iloc[0] - 1.0)
    intact = drift <= 1e-10 and floor >= -1e-12 and growth <= 1e-8
    passed = fired and quiet["status"] == "completed" and quiet["steps"] == steps and intact
    return CriterionResult(
        13, "termination_taxonomy", passed, float(term.get("value", np.nan)), 0.0,
        f"inflating: {term.get('criterion')}, benign: {quiet['status']} "
        f"(drift {drift:.2e}, min f {floor:.2e}, sup growth {growth:.2e})",
    )


@criterion(14)
def determinism(ctx: SuiteContext) -> CriterionResult:
    steps = 20 if ctx.quick else 100
    sections = {"time": {"steps": steps}, "forcing": {"f_hat_amplitude": 0.5, "rotation": 1.0},
                "output": {"checkpoint_every": steps // 2}}
    cfg = ctx.config("fp-fixed", **sections)
    first = ctx.out_root / "c14_first"
    second = ctx.out_root / "c14_second"
    resumed = ctx.out_root / "c14_resumed"
    for path in (first, second, resumed):
        shutil.rmtree(path, ignore_errors=True)
    run(cfg, out_dir=first)
    run(cfg, out_dir=second)
    identical = (first / DIAGNOSTICS).read_bytes() == (second / DIAGNOSTICS).read_bytes()

    half = steps // 2
    run(cfg, resume=first / "checkpoints" / f"step_{half:06d}", out_dir=resumed)
    full = read_diagnostics(first / DIAGNOSTICS)
    tail = read_diagnostics(resumed / DIAGNOSTICS)
    expected = full[full["step"] > half].reset_index(drop=True)
    matches = expected.equals(tail.reset_index(drop=True))
    return CriterionResult(14, "determinism", identical and matches, float(identical and matches), 1.0,
                           f"rerun identical={identical}, resume identical={matches}")


# ---------------------------------------------------------------------------
# Driver
# ---------------------------------------------------------------------------


def run_suite(
    out_root: Path | str,
    only: list[int] | None = None,
    quick: bool = False,
    seed: int = 0,
) -> pd.DataFrame:
    """Run the selected criteria (all by default); a crashing criterion is a failed row."""
    ctx = SuiteContext(Path(out_root), quick, seed)
    rows = []
    for number in sorted(CRITERIA):
        if only and number not in only:
            continue
        fn = CRITERIA[number]
        logger.info("===== criterion %d: %s =====", number, fn.__name__)
        try:
            result = fn(ctx)
        except Exception as exc:
            logger.exception("criterion %d crashed", number)
            result = CriterionResult(number, fn.__name__, False, float("nan"), float("nan"), f"{type(exc).__name__}: {exc}")
        logger.info("criterion %d %s: %s", number, result.name, "PASS" if result.passed else "FAIL")
        rows.append(asdict(result))
    return pd.DataFrame(rows, columns=["number", "name", "passed", "value", "threshold", "detail"])


def format_table(results: pd.DataFrame) -> str:
    table = results.copy()
    table["passed"] = ["PASS" if p else "FAIL" for p in table["passed"]]
    table["value"] = [f"{v:.3e}" for v in table["value"]]
    table["threshold"] = [f"{v:.3e}" for v in table["threshold"]]
    return _ascii_table(table, heavy=True)

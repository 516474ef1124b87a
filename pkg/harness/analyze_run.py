#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""Analyze a finished run.

Reads ``diagnostics.csv`` and ``summary.json`` of a run directory and prints
a metric/value table, optionally the per-step table and an ASCII trace of
one diagnostics column.  ``--excel`` writes both tables to a workbook.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import List

import numpy as np
import pandas as pd

from .persistence import read_diagnostics, read_summary

TRACE_DEFAULT = "mass_drift"


def load_run(run_dir: Path | str) -> tuple[pd.DataFrame, dict]:
    run_dir = Path(run_dir)
    summary_path = run_dir / "summary.json"
    summary = read_summary(summary_path) if summary_path.exists() else {}
    return read_diagnostics(run_dir / "diagnostics.csv"), summary


def summarize(diagnostics: pd.DataFrame, summary: dict | None = None) -> pd.DataFrame:
    """Metric/value table of a run's diagnostics."""
    if diagnostics.empty:
        return pd.DataFrame(columns=["metric", "value"])
    summary = summary or {}
    rho = diagnostics["contraction_rho"].dropna()
    div = diagnostics["divergence_residual"].dropna()
    mass = diagnostics["mass"]
    metrics = {
        "steps": int(diagnostics["step"].max()),
        "final_time": float(diagnostics["time"].iloc[-1]),
        "mass0": float(mass.iloc[0]),
        "max_mass_drift": float(diagnostics["mass_drift"].max()),
        "min_f": float(diagnostics["min_f"].min()),
        "max_principle_growth": float(
            diagnostics["max_principle"].max() / diagnostics["max_principle"].iloc[0] - 1.0
        )
        if diagnostics["max_principle"].iloc[0] > 0.0
        else 0.0,
        "max_divergence_residual": float(div.max()) if len(div) else float("nan"),
        "max_trace_residual": float(diagnostics["trace_residual"].max()),
        "max_eta_sup": float(diagnostics["eta_sup"].max()),
        "max_contraction_rho": float(rho.max()) if len(rho) else float("nan"),
        "windows": len(summary.get("windows", [])),
        "status": summary.get("status", "unknown"),
    }
    return pd.DataFrame({"metric": list(metrics), "value": list(metrics.values())})


def format_summary(summary: pd.DataFrame) -> pd.DataFrame:
    """Return human friendly formatted summary table."""
    if summary.empty:
        return summary

    def fmt(metric: str, value) -> str:
        if isinstance(value, str):
            return value
        if metric in {"steps", "windows"}:
            return f"{int(value)}"
        if isinstance(value, float) and np.isnan(value):
            return "-"
        if metric in {"final_time", "mass0", "max_eta_sup", "max_contraction_rho"}:
            return f"{value:.6g}"
        return f"{value:.3e}"

    formatted = summary.copy()
    formatted["value"] = [fmt(m, v) for m, v in zip(summary["metric"], summary["value"])]
    return formatted


def _ascii_trace(values: List[float], width: int = 40, rows: int = 20) -> str:
    """Bar per sampled step, scaled to the largest magnitude."""
    values = [v for v in values if not np.isnan(v)]
    if not values:
        return ""
    stride = max(1, len(values) // rows)
    sampled = values[::stride]
    max_v = max(abs(v) for v in sampled) or 1.0
    lines = []
    for i, v in enumerate(sampled):
        bar = "#" * int(abs(v) / max_v * width)
        sign = "" if v >= 0 else "-"
        lines.append(f"{i * stride:>6} {sign}{bar} ({v:+.3e})")
    return "\n".join(lines)


def _ascii_table(df: pd.DataFrame, heavy: bool = False) -> str:
    """Return a simple ASCII table; heavy box characters fall back to ASCII."""
    cols = list(df.columns)
    widths = [max(len(str(v)) for v in [c] + df[c].astype(str).tolist()) for c in cols]

    if heavy:
        try:
            "═╬║".encode(sys.stdout.encoding or "utf-8")
            h, v, c = "═", "║", "╬"
        except Exception:
            heavy = False
    if not heavy:
        h, v, c = "-", "|", "+"

    def border() -> str:
        return c + c.join(h * (w + 2) for w in widths) + c

    lines = [border(), v + v.join(f" {name.ljust(w)} " for name, w in zip(cols, widths)) + v, border()]
    for _, row in df.iterrows():
        lines.append(v + v.join(f" {str(row[name]).rjust(w)} " for name, w in zip(cols, widths)) + v)
    lines.append(border())
    return "\n".join(lines)


def to_excel(diagnostics: pd.DataFrame, summary: pd.DataFrame, path: Path | str) -> None:
    """Save diagnostics and summary to an Excel file."""
    with pd.ExcelWriter(path, engine="xlsxwriter") as writer:
        diagnostics.to_excel(writer, sheet_name="diagnostics", index=False)
        summary.to_excel(writer, sheet_name="summary", index=False)

        sheet = writer.sheets["diagnostics"]
        for i, col in enumerate(diagnostics.columns):
            width = max(12, int(len(col) * 1.2))
            sheet.set_column(i, i, width)
        writer.sheets["summary"].set_column(0, 1, 24)


def main(argv: List[str] | None = None) -> None:
    ap = argparse.ArgumentParser(description="計算結果 (diagnostics.csv / summary.json) の集計ツール")
    ap.add_argument("run_dir", help="実行結果ディレクトリ")
    ap.add_argument("--show-steps", action="store_true", help="ステップごとの表も表示")
    ap.add_argument("--trace", default=TRACE_DEFAULT, help="ASCII トレースする列 (default: mass_drift)")
    ap.add_argument("--excel", help="Excel 出力ファイル")
    args = ap.parse_args(argv)

    diagnostics, summary = load_run(args.run_dir)
    if diagnostics.empty:
        print("No diagnostics loaded.")
        return

    table = summarize(diagnostics, summary)
    print("=== Summary ===")
    for metric, value in zip(table["metric"], format_summary(table)["value"]):
        print(f"{metric:>24}: {value}")
    if summary.get("termination"):
        term = summary["termination"]
        print(f"{'termination':>24}: {term['criterion']} = {term['value']:.4g} at t={term['time']:.4g}")
    if summary.get("error"):
        print(f"{'error':>24}: {summary['error']['type']}: {summary['error']['message']}")

    if args.show_steps:
        print("\n=== Steps ===")
        print(_ascii_table(diagnostics.reset_index(drop=True), heavy=True))
    if args.trace in diagnostics.columns:
        print(f"\n=== {args.trace} ===")
        print(_ascii_trace(diagnostics[args.trace].tolist()))
    else:
        print(f"Warning: column '{args.trace}' not found.")

    if args.excel:
        to_excel(diagnostics, table, args.excel)
        print(f"Excel exported → {args.excel}")


if __name__ == "__main__":
    main()

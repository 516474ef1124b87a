#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
cli.py

Command line entry point of the solver harness.

Usage example
-------------
```bash
python -m harness.cli run --config configs/coupled_global.json --out runs/global
python -m harness.cli resume --config configs/coupled_global.json --resume runs/global/checkpoints/step_000256
python -m harness.cli validate --scenario solvent-structure
python -m harness.cli suite --quick
```

Verbs:
  run       シナリオを実行し diagnostics.csv / summary.json を出力
  resume    チェックポイントから実行を再開 (--resume 必須)
  validate  初期データの適合性 (trace, divergence, ‖η₀‖, f̃₀, compatibility) を検査
  suite     受け入れテスト一式を実行し PASS/FAIL 表を表示

Exit status: 0 成功, 1 検査失敗, 2 設定エラー, 3 ソルバー/幾何エラー, 4 入出力エラー
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List

from geometry.errors import ConfigError, IoError, SimulationError

from .config import RunConfig, default_output_root, load_config
from .persistence import write_summary
from .runner import EXIT_CONFIG, EXIT_IO, EXIT_OK, EXIT_SOLVER, SUMMARY, run
from .suite import format_table, run_suite
from .validate import validate_config

LOG_FMT = "%(asctime)s [%(levelname)s] %(message)s"
logger = logging.getLogger("polyfsi")

EXIT_CHECK_FAILED = 1


def parse_args(argv: List[str] | None = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(description="高分子溶液–弾性壁連成ソルバーの検証ハーネス")
    parser.add_argument("verb", choices=["run", "validate", "resume", "suite"], help="実行する処理")
    parser.add_argument("--config", help="JSON 設定ファイル")
    parser.add_argument("--out", help="出力ディレクトリ (default: $POLYFSI_OUTPUT_ROOT/<scenario>)")
    parser.add_argument("--resume", help="再開するチェックポイント (拡張子なし可)")
    parser.add_argument("--scenario", help="設定ファイルのシナリオを上書き")
    parser.add_argument("--seed", type=int, help="乱数シード (初期分布の摂動)")
    parser.add_argument("--quick", action="store_true", help="suite を粗い格子で実行")
    parser.add_argument("--only", type=int, nargs="*", help="suite で実行する基準番号")
    parser.add_argument("-v", "--verbose", action="store_true", help="DEBUG ログを出力")
    return parser.parse_args(argv)


def _overrides(args: argparse.Namespace) -> dict:
    overrides: dict = {}
    if args.scenario:
        overrides["scenario"] = args.scenario
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.out:
        overrides["output"] = {"dir": args.out}
    return overrides


def _config_failure(args: argparse.Namespace, exc: Exception) -> int:
    logger.error("Invalid configuration: %s", exc)
    out = Path(args.out) if args.out else default_output_root() / (args.scenario or "invalid")
    summary = {"status": "failed", "exit_code": EXIT_CONFIG, "error": {"type": type(exc).__name__, "message": str(exc)}}
    try:
        write_summary(out / SUMMARY, summary)
    except IoError:
        logger.exception("cannot write summary for the configuration error")
    return EXIT_CONFIG


def main(argv: List[str] | None = None) -> int:
    args = parse_args(argv)
    logging.basicConfig(format=LOG_FMT, level=logging.DEBUG if args.verbose else logging.INFO)

    if args.verb == "suite":
        out = Path(args.out) if args.out else default_output_root() / "suite"
        results = run_suite(out, args.only, args.quick, args.seed or 0)
        print(format_table(results))
        return EXIT_OK if bool(results["passed"].all()) else EXIT_CHECK_FAILED

    try:
        cfg = RunConfig.from_dict(load_config(args.config, _overrides(args)))
    except ConfigError as exc:
        return _config_failure(args, exc)

    if args.verb == "validate":
        report = validate_config(cfg)
        print(report.to_frame().to_string(index=False))
        print(json.dumps({"passed": report.passed}))
        return EXIT_OK if report.passed else EXIT_CHECK_FAILED

    if args.verb == "resume" and not args.resume:
        return _config_failure(args, ConfigError("resume needs --resume CHECKPOINT"))
    try:
        report = run(cfg, resume=args.resume)
    except IoError as exc:
        logger.error("cannot start run: %s", exc)
        return EXIT_IO
    except SimulationError:
        logger.exception("cannot set up scenario %s", cfg.scenario)
        return EXIT_SOLVER
    print(json.dumps({k: report.summary.get(k) for k in ("scenario", "status", "exit_code", "steps")}))
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())

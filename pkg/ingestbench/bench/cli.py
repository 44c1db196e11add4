"""コマンドラインの入口です。
run / report / export / scenarios の 4 つのサブコマンドを持ちます。
終了コードは成功 0、設定エラー 2、実行時エラー 3 です。
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional

from ingestbench.bench.config import parse_config
from ingestbench.bench.report import load_rows, summarize
from ingestbench.bench.runner import execute
from ingestbench.bench.scenarios import list_scenarios, scenario_config
from ingestbench.constants import SERIES_DIR
from ingestbench.core import ClockMode
from ingestbench.errors import ConfigError, IngestBenchError, UnknownSeries
from ingestbench.metrics.export import series_filename

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
LOG_LEVEL_ENV = "INGESTBENCH_LOG_LEVEL"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ingestbench", description="Kafka ingestion benchmark toolkit")
    parser.add_argument(
        "--log-level", default=os.getenv(LOG_LEVEL_ENV, "INFO"),
        help=f"logging level (default INFO, or ${LOG_LEVEL_ENV})",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute one run")
    source = run.add_mutually_exclusive_group(required=True)
    source.add_argument("--config", type=Path, help="run configuration file")
    source.add_argument("--scenario", help="built-in scenario name (see `scenarios`)")
    run.add_argument("--out", type=Path, help="output directory (default: [run] out_dir)")
    run.add_argument("--mode", choices=[m.value for m in ClockMode])
    run.add_argument("--seed", type=int)

    report = sub.add_parser("report", help="summarize finished runs")
    report.add_argument("--runs", type=Path, nargs="+", required=True)
    report.add_argument("--tsv", type=Path, help="also write the machine-readable summary here")

    export = sub.add_parser("export", help="print one exported series")
    export.add_argument("--run", type=Path, required=True)
    export.add_argument("--metric", required=True)

    sub.add_parser("scenarios", help="list built-in scenarios")
    return parser


def _cmd_run(args: argparse.Namespace) -> int:
    if args.scenario:
        try:
            text = scenario_config(args.scenario)
        except KeyError as exc:
            raise ConfigError(str(exc.args[0]), key="scenario") from None
    else:
        text = args.config.read_text(encoding="utf-8")
    config = parse_config(text, run_overrides={"mode": args.mode, "seed": args.seed})
    result = execute(config, args.out)
    print(summarize([result]).text, end="")
    if not result.conservation.balanced:
        logger.error("conservation check failed: %s", result.conservation)
        return EXIT_RUNTIME
    return EXIT_OK


def _cmd_report(args: argparse.Namespace) -> int:
    rows = []
    for run_dir in args.runs:
        rows.extend(load_rows(run_dir))
    report = summarize(rows)
    print(report.text, end="")
    if args.tsv:
        args.tsv.write_text(report.tsv, encoding="utf-8")
    return EXIT_OK


def _cmd_export(args: argparse.Namespace) -> int:
    path = args.run / SERIES_DIR / series_filename(args.metric)
    if not path.is_file():
        raise UnknownSeries(f"unknown series {args.metric} in {args.run}")
    sys.stdout.write(path.read_text(encoding="utf-8"))
    return EXIT_OK


def _cmd_scenarios(args: argparse.Namespace) -> int:
    for scenario in list_scenarios():
        print(f"{scenario.name:<26} {scenario.description}")
    return EXIT_OK


COMMANDS = {
    "run": _cmd_run,
    "report": _cmd_report,
    "export": _cmd_export,
    "scenarios": _cmd_scenarios,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, str(args.log_level).upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        logger.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except (IngestBenchError, OSError, ValueError) as exc:
        logger.error("run failed: %s", exc)
        return EXIT_RUNTIME

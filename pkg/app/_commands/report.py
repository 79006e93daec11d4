"""report.py

``igf-balance report`` – utility lost to diversity and to balancing, per k.

The terminal table follows the usual layout (diversity / ratio / agg per
k, whole percent); ``report.json`` keeps exact values and ``report.csv``
holds per-group fairness before and after balancing for plotting.
"""

from __future__ import annotations

import argparse
import logging

import pandas as pd

from app.services import Mode, build_report
from app.services.report import igf_frame, loss_frame
from app._commands._helpers import (
    EXIT_OK,
    EXIT_PARTIAL,
    RunConfig,
    add_common_arguments,
    add_solver_arguments,
    constraints_factory,
    fmt_percent,
    write_csv,
    write_json,
)

logger = logging.getLogger(__name__)

HELP = "utility-loss table over several output sizes"


def add_arguments(parser: argparse.ArgumentParser) -> None:
    add_common_arguments(parser, k_list=True)
    add_solver_arguments(parser, epsilon=True)
    parser.add_argument(
        "--modes",
        nargs="+",
        choices=[m.value for m in Mode],
        default=[m.value for m in Mode],
        help="fairness measures to balance (default: both)",
    )


def render_table(frame: pd.DataFrame) -> str:
    shown = frame.copy()
    for col in shown.columns[1:]:
        shown[col] = shown[col].map(lambda v: fmt_percent(None if pd.isna(v) else v))
    return shown.to_string(index=False)


def run(args: argparse.Namespace) -> int:
    config = RunConfig.from_args(args)
    dataset = config.load_dataset()
    report = build_report(
        dataset,
        constraints_factory(config, dataset),
        config.k,
        [Mode(m) for m in args.modes],
        config.epsilon,
        config.options,
    )

    write_json(config.out / "report.json", report.to_payload())
    write_csv(config.out / "report.csv", igf_frame(report))
    print(render_table(loss_frame(report)))

    if report.partial:
        print(f"aborted: {report.rows[-1].error}")
        return EXIT_PARTIAL
    return EXIT_OK

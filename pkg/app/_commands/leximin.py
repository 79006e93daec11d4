"""leximin.py

``igf-balance leximin`` – freeze groups round by round and optimise.

Outputs ``trace.json`` (rounds, checks, frozen bounds), ``ranking.json``
and ``igf.json`` with the diversity-only values next to the balanced ones.
"""

from __future__ import annotations

import argparse
import logging

from app.services import IgfBounds, InfeasibleError, SolveStatus, build_model, leximin_solve, solve_ip
from app._commands._helpers import (
    EXIT_INFEASIBLE,
    EXIT_LIMIT,
    EXIT_OK,
    RunConfig,
    add_common_arguments,
    add_solver_arguments,
    constraints_factory,
    format_value,
    write_json,
)
from app._commands.solve import igf_payload, ranking_payload, screen

logger = logging.getLogger(__name__)

HELP = "leximin-balanced ranking under diversity constraints"


def add_arguments(parser: argparse.ArgumentParser) -> None:
    add_common_arguments(parser)
    add_solver_arguments(parser, epsilon=True)


def run(args: argparse.Namespace) -> int:
    config = RunConfig.from_args(args)
    dataset = config.load_dataset()
    constraints = constraints_factory(config, dataset)(config.k[0] if config.k else None)

    diagnosis = screen(constraints, dataset)
    if diagnosis is not None:
        raise InfeasibleError("diversity constraints admit no ranking", diagnosis)

    baseline = solve_ip(build_model(dataset, constraints, IgfBounds.uniform(dataset, config.mode)), config.options)
    trace = leximin_solve(dataset, constraints, config.mode, config.epsilon, config.options, start=baseline.outcome)
    final = trace.solution

    write_json(config.out / "trace.json", trace.to_payload(dataset))
    write_json(
        config.out / "ranking.json",
        ranking_payload(final.status, dataset, constraints, trace.bounds, final.outcome),
    )
    if final.outcome is None:
        print(f"{final.status.value}: no ranking under the frozen bounds")
        return EXIT_INFEASIBLE if final.status == SolveStatus.INFEASIBLE else EXIT_LIMIT

    write_json(
        config.out / "igf.json",
        {
            "mode": config.mode.value,
            "before": igf_payload(dataset, baseline.outcome) if baseline.outcome else None,
            "after": igf_payload(dataset, final.outcome),
        },
    )
    for i, rnd in enumerate(trace.rounds, start=1):
        print(f"round {i}: q*={format_value(rnd.q)} froze {', '.join(rnd.frozen)}")
    print(f"{final.status.value}: utility {format_value(final.outcome.utility)} ({trace.solves} solves)")
    print(" ".join(final.outcome.ranking))
    return EXIT_OK if final.status == SolveStatus.OPTIMAL else EXIT_LIMIT

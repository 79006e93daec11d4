"""solve.py

``igf-balance solve`` – one integer-program solve under declared bounds.

Writes ``ranking.json`` (status, bounds, constraints, ranking, utility)
and ``igf.json`` (the achieved fairness values under both measures).
With ``--dump-lp`` the program text goes to ``program.lp``.
"""

from __future__ import annotations

import argparse
import logging

from app.services import (
    Dataset,
    DiversityConstraints,
    IgfBounds,
    Mode,
    ModelError,
    Outcome,
    SolveStatus,
    build_model,
    igf_vector,
    solve_ip,
    validate_constraints,
)
from app.services.constraints import is_ok
from app._commands._helpers import (
    EXIT_INFEASIBLE,
    EXIT_LIMIT,
    EXIT_OK,
    RunConfig,
    add_common_arguments,
    add_solver_arguments,
    constraints_factory,
    format_value,
    parse_q_flags,
    write_json,
    write_text,
)

logger = logging.getLogger(__name__)

HELP = "maximum-utility ranking under diversity and fairness bounds"


def add_arguments(parser: argparse.ArgumentParser) -> None:
    add_common_arguments(parser)
    add_solver_arguments(parser)
    parser.add_argument("--q", action="append", metavar="VALUE=Q", help="fairness lower bound for one group")
    parser.add_argument("--q-all", metavar="Q", help="fairness lower bound for every group")
    parser.add_argument("--dump-lp", action="store_true", help="also write program.lp")


def ranking_payload(
    status: SolveStatus,
    dataset: Dataset,
    constraints: DiversityConstraints,
    bounds: IgfBounds,
    outcome: Outcome | None,
) -> dict:
    """Body of ``ranking.json``; ``validate --ranking`` reads it back."""
    payload = {
        "status": status.value,
        "mode": bounds.mode.value,
        "k": constraints.k,
        "bounds": bounds.to_payload(),
        "constraints": constraints.to_payload(),
        "ranking": [],
        "utility": None,
    }
    if outcome is not None:
        payload.update(outcome.to_payload(dataset))
    return payload


def igf_payload(dataset: Dataset, outcome: Outcome) -> dict:
    return {mode.value: igf_vector(dataset, outcome, mode).to_payload()["values"] for mode in Mode}


def screen(constraints: DiversityConstraints, dataset: Dataset) -> list[dict] | None:
    """Validation diagnosis when the table is hopeless, else ``None``.

    k > n is a usage error rather than an infeasible table.
    """
    violations = validate_constraints(constraints, dataset)
    for v in violations:
        if v.kind == "k_exceeds_n":
            raise ModelError(v.message)
    if is_ok(violations):
        return None
    return [v.model_dump() for v in violations]


def run(args: argparse.Namespace) -> int:
    config = RunConfig.from_args(args)
    dataset = config.load_dataset()
    constraints = constraints_factory(config, dataset)(config.k[0] if config.k else None)
    bounds = parse_q_flags(dataset, config.mode, args.q, args.q_all)
    ranking_path = config.out / "ranking.json"

    diagnosis = screen(constraints, dataset)
    if diagnosis is not None:
        payload = ranking_payload(SolveStatus.INFEASIBLE, dataset, constraints, bounds, None)
        payload["diagnosis"] = diagnosis
        write_json(ranking_path, payload)
        for entry in diagnosis:
            print(f"{entry['severity']}: {entry['message']}")
        return EXIT_INFEASIBLE

    program = build_model(dataset, constraints, bounds)
    if args.dump_lp:
        write_text(config.out / "program.lp", program.to_lp_format())

    solution = solve_ip(program, config.options)
    logger.info("solve: status=%s nodes=%d wall=%.3fs", solution.status.value, solution.nodes, solution.wall_time)
    payload = ranking_payload(solution.status, dataset, constraints, bounds, solution.outcome)

    if solution.status == SolveStatus.INFEASIBLE:
        # screening passed, so the fairness bounds are what cannot be met
        payload["diagnosis"] = [v.model_dump() for v in validate_constraints(constraints, dataset)]
        write_json(ranking_path, payload)
        print("infeasible: no ranking meets the diversity and fairness bounds")
        return EXIT_INFEASIBLE

    write_json(ranking_path, payload)
    if solution.outcome is not None:
        write_json(config.out / "igf.json", igf_payload(dataset, solution.outcome))
        print(f"{solution.status.value}: utility {format_value(solution.outcome.utility)}")
        print(" ".join(solution.outcome.ranking))
    else:
        print(f"{solution.status.value}: no ranking found within the limits")

    return EXIT_OK if solution.status == SolveStatus.OPTIMAL else EXIT_LIMIT

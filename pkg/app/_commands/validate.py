"""validate.py

``igf-balance validate`` – screen a bound table, optionally re-check a ranking.

Without ``--ranking`` this runs the necessary-condition screening only.
With ``--ranking ranking.json`` it also replays the stored ranking against
the stored constraints and fairness bounds.
"""

from __future__ import annotations

import argparse
import json
import logging
from pathlib import Path

from app.services import (
    ConstraintError,
    Dataset,
    IgfBounds,
    Mode,
    make_outcome,
    parse_constraints,
    satisfies_bounds,
    validate_constraints,
)
from app.services.constraints import is_ok
from app.services.ordering import prefix_ok
from app._commands._helpers import (
    EXIT_INFEASIBLE,
    EXIT_INPUT,
    EXIT_OK,
    RunConfig,
    add_common_arguments,
    constraints_factory,
)

logger = logging.getLogger(__name__)

HELP = "screen constraints and re-check a stored ranking"


def add_arguments(parser: argparse.ArgumentParser) -> None:
    add_common_arguments(parser)
    parser.add_argument("--ranking", help="ranking.json written by solve or leximin")


def _bounds_from(payload: dict, dataset: Dataset) -> IgfBounds:
    unknown = sorted(set(payload["q"]) - set(dataset.attributes.values))
    if unknown:
        raise ConstraintError(f"stored bounds name unknown attribute values {unknown}")
    return IgfBounds(
        mode=Mode(payload["mode"]),
        q={v: entry["exact"] for v, entry in payload["q"].items()},
        frozen=frozenset(payload.get("frozen", [])),
    )


def check_ranking(path: Path, dataset: Dataset) -> list[str]:
    """Problems found when replaying *path*; empty means it round-trips."""
    try:
        stored = json.loads(path.read_text(encoding="utf-8"))
        ids = [entry["id"] for entry in stored["ranking"]]
        constraints = parse_constraints(stored["constraints"], dataset)
        bounds = _bounds_from(stored["bounds"], dataset)
    except FileNotFoundError:
        raise ConstraintError(f"ranking file not found: {path}") from None
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ConstraintError(f"malformed ranking file {path}: {exc}") from exc

    if not ids:
        return [f"ranking file holds no ranking (status {stored.get('status')})"]
    problems = []
    outcome = make_outcome(dataset, ids)
    if not prefix_ok(dataset, ids, constraints):
        problems.append("ranking violates a prefix diversity bound")
    if not satisfies_bounds(dataset, outcome, bounds):
        problems.append(f"ranking misses a declared {bounds.mode.value} fairness bound")
    stored_utility = stored.get("utility")
    if stored_utility and stored_utility["exact"] != str(outcome.utility):
        problems.append(f"stored utility {stored_utility['exact']} != recomputed {outcome.utility}")
    return problems


def run(args: argparse.Namespace) -> int:
    config = RunConfig.from_args(args)
    dataset = config.load_dataset()
    code = EXIT_OK

    if config.constraints is not None or config.alpha is not None or config.k:
        constraints = constraints_factory(config, dataset)(config.k[0] if config.k else None)
        violations = validate_constraints(constraints, dataset)
        for v in violations:
            print(f"{v.severity}: {v.message}")
        if not is_ok(violations):
            code = EXIT_INFEASIBLE
        elif not violations:
            print("ok: no violated necessary condition")

    if args.ranking:
        problems = check_ranking(Path(args.ranking), dataset)
        for problem in problems:
            print(f"error: {problem}")
        if problems:
            code = code or EXIT_INPUT
        else:
            print(f"ok: {args.ranking} re-validates")
    return code

"""main.py

Command-line **entry-point** for igf-balance.

Responsibilities
----------------
* Build the argument parser from the sub-command registry.
* Configure logging once (level from ``IGF_LOG_LEVEL``, raised by ``-v``).
* Map service errors to exit codes so scripts can branch on them.
"""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Optional, Sequence

from pydantic import ValidationError

from app import APP_NAME, VERSION
from app.config import settings
from app._commands import registry
from app._commands._helpers import EXIT_INFEASIBLE, EXIT_INPUT, EXIT_LIMIT
from app.services import IgfError, InfeasibleError, SolverError

logger = logging.getLogger(APP_NAME)

LOG_FORMAT = "%(levelname)-8s %(name)s: %(message)s"


# -----------------------------------------------------------------------------
# 1) Parser
# -----------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=APP_NAME, description="Exact diversity-constrained ranking with in-group fairness.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {VERSION}")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v info, -vv debug")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, command in registry.items():
        command.add_arguments(sub.add_parser(name, help=command.HELP, description=command.HELP))
    return parser


def _configure_logging(verbose: int) -> None:
    level = logging.getLevelName(settings()["IGF_LOG_LEVEL"])
    if not isinstance(level, int):
        level = logging.WARNING
    if verbose:
        level = min(level, logging.DEBUG if verbose > 1 else logging.INFO)
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr)


# -----------------------------------------------------------------------------
# 2) Routing
# -----------------------------------------------------------------------------

def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose)
    command = registry[args.command]
    try:
        return command.run(args)
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        for entry in exc.diagnosis or []:
            print(f"  {entry.get('severity', 'error')}: {entry.get('message')}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except SolverError as exc:
        logger.error("%s", exc)
        return EXIT_LIMIT
    except (IgfError, ValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()

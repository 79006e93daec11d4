"""_helpers.py

Helpers shared by the sub-commands.

1. **Shared flags** – ``add_common_arguments`` and ``add_solver_arguments``
   so every command spells its options the same way.
2. **Run configuration** – ``RunConfig`` gathers flags and ``settings()``
   defaults into one validated object; ``constraints_factory`` turns it
   into a k → bounds-table callable.
3. **Formatting / writers** – number formatting for the terminal and
   byte-stable JSON / CSV writers for result files.
"""

from __future__ import annotations

import argparse
import json
import math
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Optional

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, field_validator

from app.config import settings
from app.services import (
    ConstraintError,
    Dataset,
    DiversityConstraints,
    IgfBounds,
    Mode,
    SolverOptions,
    explicit_bounds,
    parse_constraints,
    proportional_bounds,
    read_dataset,
)
from app.services.model import to_fraction

# -----------------------------------------------------------------------------
# Exit codes
# -----------------------------------------------------------------------------
EXIT_OK = 0
EXIT_INPUT = 1
EXIT_INFEASIBLE = 2
EXIT_LIMIT = 3
EXIT_PARTIAL = 4

ZERO_DISPLAY = "--"

# -----------------------------------------------------------------------------
# 1) Shared flags
# -----------------------------------------------------------------------------

def add_common_arguments(parser: argparse.ArgumentParser, *, k_list: bool = False) -> None:
    parser.add_argument("--data", required=True, help="candidate CSV (id,score,<attr>...)")
    parser.add_argument("--schema", required=True, help="attribute schema JSON")
    parser.add_argument("--constraints", help="constraint JSON (explicit or proportional)")
    parser.add_argument("--alpha", help="proportional constraints: slack factor in (0, 1]")
    parser.add_argument("--checkpoints", type=int, nargs="+", help="proportional constraints: prefix positions")
    parser.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.RATIO.value)
    if k_list:
        parser.add_argument("--k", type=int, nargs="+", default=[20, 40, 60, 80, 100])
    else:
        parser.add_argument("--k", type=int, help="output size (taken from an explicit constraint file if omitted)")
    parser.add_argument("--out", default=None, help="output directory (default: IGF_OUT_DIR)")


def add_solver_arguments(parser: argparse.ArgumentParser, *, epsilon: bool = False) -> None:
    parser.add_argument("--time-limit", type=float, default=None, help="seconds per integer-program solve")
    parser.add_argument("--node-limit", type=int, default=None, help="branch-and-bound nodes per solve")
    parser.add_argument("--workers", type=int, default=None)
    if epsilon:
        parser.add_argument("--epsilon", default=None, help="leximin search precision (default: IGF_EPSILON)")


# -----------------------------------------------------------------------------
# 2) Run configuration
# -----------------------------------------------------------------------------

class RunConfig(BaseModel):
    """Everything one command run needs, after flags and env defaults merge."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    data: Path
    schema_path: Path
    constraints: Optional[Path] = None
    alpha: Optional[Fraction] = None
    checkpoints: list[int] = Field(default_factory=list)
    mode: Mode = Mode.RATIO
    k: list[int] = Field(default_factory=list)
    epsilon: Fraction = Fraction(1, 1000)
    options: SolverOptions = Field(default_factory=SolverOptions)
    out: Path = Path("out")

    @field_validator("data", "schema_path", "constraints")
    @classmethod
    def _exists(cls, v: Optional[Path]) -> Optional[Path]:
        if v is not None and not v.is_file():
            raise ValueError(f"file not found: {v}")
        return v

    @field_validator("alpha", "epsilon", mode="before")
    @classmethod
    def _fraction(cls, v: Any) -> Optional[Fraction]:
        return None if v is None else to_fraction(v)

    @field_validator("k")
    @classmethod
    def _positive(cls, v: list[int]) -> list[int]:
        if any(k < 1 for k in v):
            raise ValueError(f"k must be at least 1, got {v}")
        return v

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        cfg = settings()
        k = getattr(args, "k", None)
        options = SolverOptions(
            time_limit=_pick(getattr(args, "time_limit", None), cfg["IGF_TIME_LIMIT"]),
            node_limit=_pick(getattr(args, "node_limit", None), cfg["IGF_NODE_LIMIT"]),
            workers=_pick(getattr(args, "workers", None), cfg["IGF_WORKERS"]),
        )
        return cls(
            data=Path(args.data),
            schema_path=Path(args.schema),
            constraints=Path(args.constraints) if args.constraints else None,
            alpha=args.alpha,
            checkpoints=args.checkpoints or [],
            mode=Mode(args.mode),
            k=[] if k is None else (list(k) if isinstance(k, list) else [k]),
            epsilon=_pick(getattr(args, "epsilon", None), str(cfg["IGF_EPSILON"])),
            options=options,
            out=Path(args.out or cfg["IGF_OUT_DIR"]),
        )

    def load_dataset(self) -> Dataset:
        return read_dataset(self.data, self.schema_path)


def _pick(flag: Any, default: Any) -> Any:
    return default if flag is None else flag


def default_checkpoints(k: int) -> list[int]:
    """Every tenth position up to k, plus k itself."""
    return sorted({*range(10, k + 1, 10), k})


def constraints_factory(config: RunConfig, dataset: Dataset) -> Callable[[Optional[int]], DiversityConstraints]:
    """Build a ``k -> DiversityConstraints`` callable from the run's flags.

    No file and no ``--alpha`` means no diversity constraints at all.
    """
    if config.constraints is not None and config.alpha is not None:
        raise ConstraintError("--constraints and --alpha are mutually exclusive")

    if config.constraints is not None:
        try:
            raw = json.loads(config.constraints.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConstraintError(f"constraint file {config.constraints} is not JSON: {exc}") from exc
        return lambda k: parse_constraints(raw, dataset, k)

    if config.alpha is not None:
        def proportional(k: Optional[int]) -> DiversityConstraints:
            if k is None:
                raise ConstraintError("--alpha needs --k")
            points = [p for p in config.checkpoints if p <= k] or default_checkpoints(k)
            return proportional_bounds(dataset, k, points, config.alpha)
        return proportional

    def unconstrained(k: Optional[int]) -> DiversityConstraints:
        if k is None:
            raise ConstraintError("--k is required without a constraint file")
        return explicit_bounds(k, [], dataset)
    return unconstrained


def parse_q_flags(dataset: Dataset, mode: Mode, pairs: list[str] | None, q_all: Optional[str]) -> IgfBounds:
    """``--q-all Q`` then ``--q VALUE=Q`` overrides into an :class:`IgfBounds`."""
    bounds = IgfBounds.uniform(dataset, mode, q_all or 0)
    updates: dict[str, Fraction] = {}
    for pair in pairs or []:
        value, sep, q = pair.partition("=")
        if not sep or not value:
            raise ConstraintError(f"--q expects VALUE=Q, got {pair!r}")
        updates[value.strip()] = to_fraction(q)
    return bounds.with_values(updates) if updates else bounds


# -----------------------------------------------------------------------------
# 3) Formatting and writers
# -----------------------------------------------------------------------------

fmt_percent = lambda v: ZERO_DISPLAY if v is None else f"{round(float(v)):d}%"  # noqa: E731


def format_value(value: float | Fraction | None) -> str:
    """Human-readable number: two decimals from 1 up, two significant digits below."""
    if value is None:
        return ZERO_DISPLAY
    value = float(value)
    if value == 0.0:
        return "0.00"
    is_negative = value < 0
    abs_value = abs(value)
    if abs_value >= 1:
        formatted = f"{abs_value:,.2f}"
    else:
        exp = math.floor(math.log10(abs_value))
        decimals = 2 - exp - 1
        formatted = f"{round(abs_value, decimals):.{decimals}f}"
    return "-" + formatted if is_negative else formatted


def write_json(path: Path, payload: Any) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    return path


def write_csv(path: Path, frame: pd.DataFrame) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(frame.to_csv(index=False, lineterminator="\n"), encoding="utf-8")
    return path


def write_text(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return path

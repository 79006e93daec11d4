"""constraints.py

Diversity lower-bound tables ℓ_{v,p}: generation, loading and screening.

Tables are stored monotone in p. Raw input that shrinks along the prefix
is raised to the running maximum and flagged as ``normalized``.
Screening only applies necessary conditions; whether an ordering really
exists is decided by the solver.
"""

from __future__ import annotations

import json
import logging
import math
from fractions import Fraction
from pathlib import Path
from typing import Annotated, Iterable, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, ValidationError, field_validator

from .errors import ConstraintError
from .model import Dataset, DiversityConstraints, to_fraction

logger = logging.getLogger(__name__)


# -----------------------------------------------------------------------------
# Construction
# -----------------------------------------------------------------------------

def explicit_bounds(
    k: int,
    entries: Iterable[tuple[str, int, int]],
    dataset: Optional[Dataset] = None,
) -> DiversityConstraints:
    """Build a table from ``(value, position, min)`` entries.

    Entries for the same (value, position) keep the largest bound.
    With *dataset* given, unknown values are rejected.
    """
    if k < 0:
        raise ConstraintError(f"k={k} is negative")
    known = set(dataset.attributes.values) if dataset is not None else None
    raw: dict[str, dict[int, int]] = {}
    for value, position, bound in entries:
        if known is not None and value not in known:
            raise ConstraintError(f"bound names unknown value {value!r}")
        if not 1 <= position <= k:
            raise ConstraintError(f"bound for {value!r} at position {position} outside [1, {k}]")
        if bound < 0:
            raise ConstraintError(f"negative bound {bound} for {value!r} at position {position}")
        row = raw.setdefault(value, {})
        row[position] = max(bound, row.get(position, 0))

    table, normalized = _normalise(raw, k)
    if normalized:
        logger.warning("diversity bounds were not monotone in the prefix; raised to running maximum")
    return DiversityConstraints(k=k, bounds=table, normalized=normalized, source="explicit")


def _normalise(raw: dict[str, dict[int, int]], k: int) -> tuple[dict[str, tuple[int, ...]], bool]:
    table: dict[str, tuple[int, ...]] = {}
    normalized = False
    for value, points in raw.items():
        running = 0
        row = []
        for p in range(1, k + 1):
            if p in points:
                if points[p] < running:
                    normalized = True
                running = max(running, points[p])
            row.append(running)
        if any(row):
            table[value] = tuple(row)
    return table, normalized


def proportional_bounds(
    dataset: Dataset,
    k: int,
    checkpoints: Iterable[int],
    alpha: Fraction | float | str = 1,
) -> DiversityConstraints:
    """ℓ_{v,p} = floor(alpha · p · |I_v| / n) at each checkpoint p.

    Bounds are capped at min(p, |I_v|) and carried forward to later
    positions; positions before the first checkpoint stay unconstrained.
    """
    alpha = to_fraction(alpha)
    points = sorted(set(checkpoints))
    if not points:
        raise ConstraintError("checkpoint list is empty")
    if k > dataset.n:
        raise ConstraintError(f"k={k} exceeds n={dataset.n}")
    if not 0 < alpha <= 1:
        raise ConstraintError(f"alpha={alpha} outside (0, 1]")
    bad = [p for p in points if not 1 <= p <= k]
    if bad:
        raise ConstraintError(f"checkpoints {bad} outside [1, {k}]")

    raw: dict[str, dict[int, int]] = {}
    for v in dataset.attributes.values:
        size = len(dataset.members(v))
        raw[v] = {p: min(p, size, math.floor(alpha * p * size / dataset.n)) for p in points}
    table, _ = _normalise(raw, k)
    return DiversityConstraints(
        k=k,
        bounds=table,
        source="proportional",
        alpha=alpha,
        checkpoints=tuple(points),
    )


def demand_at(constraints: DiversityConstraints, value: str, position: int) -> int:
    return constraints.demand(value, position)


# -----------------------------------------------------------------------------
# Constraint files
# -----------------------------------------------------------------------------

class BoundEntry(BaseModel):
    value: str
    position: int
    min: int = Field(ge=0)


class ExplicitDocument(BaseModel):
    model_config = ConfigDict(extra="forbid")

    mode: Literal["explicit"] = "explicit"
    k: int = Field(ge=0)
    bounds: list[BoundEntry] = Field(default_factory=list)


class ProportionalDocument(BaseModel):
    model_config = ConfigDict(extra="forbid", arbitrary_types_allowed=True)

    mode: Literal["proportional"]
    alpha: Fraction
    checkpoints: list[int]
    k: Optional[int] = Field(default=None, ge=0)

    @field_validator("alpha", mode="before")
    @classmethod
    def _coerce(cls, v):
        return to_fraction(v)


ConstraintDocument = Annotated[Union[ExplicitDocument, ProportionalDocument], Field(discriminator="mode")]
_DOCUMENT = TypeAdapter(ConstraintDocument)


def parse_constraints(raw: dict, dataset: Dataset, k: Optional[int] = None) -> DiversityConstraints:
    """Build a table from a parsed constraint document.

    Proportional documents take k from the document or from *k*;
    explicit documents carry their own k, which must agree with *k* if both are set.
    """
    raw = dict(raw)
    raw.setdefault("mode", "explicit")
    try:
        document = _DOCUMENT.validate_python(raw)
    except ValidationError as exc:
        raise ConstraintError(f"invalid constraint document: {exc}") from exc

    if isinstance(document, ExplicitDocument):
        if k is not None and k != document.k:
            raise ConstraintError(f"constraint file is for k={document.k}, run asks for k={k}")
        return explicit_bounds(document.k, ((b.value, b.position, b.min) for b in document.bounds), dataset)

    size = k if k is not None else document.k
    if size is None:
        raise ConstraintError("proportional constraints need k (in the file or on the command line)")
    return proportional_bounds(dataset, size, document.checkpoints, document.alpha)


def load_constraints(path: str | Path, dataset: Dataset, k: Optional[int] = None) -> DiversityConstraints:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConstraintError(f"constraint file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConstraintError(f"constraint file {path} is not JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConstraintError(f"constraint file {path} must hold an object")
    return parse_constraints(raw, dataset, k)


# -----------------------------------------------------------------------------
# Screening
# -----------------------------------------------------------------------------

class Violation(BaseModel):
    """One screening finding; ``severity`` is ``error`` or ``warning``."""

    model_config = ConfigDict(frozen=True)

    kind: str
    message: str
    severity: Literal["error", "warning"] = "error"
    value: Optional[str] = None
    attribute: Optional[str] = None
    position: Optional[int] = None
    demand: Optional[int] = None
    limit: Optional[int] = None


def validate_constraints(constraints: DiversityConstraints, dataset: Dataset) -> list[Violation]:
    """Necessary-condition screening of a bound table.

    An empty list (or warnings only) does not certify that a ranking exists.
    """
    found: list[Violation] = []
    known = set(dataset.attributes.values)

    if constraints.k > dataset.n:
        found.append(Violation(
            kind="k_exceeds_n",
            message=f"k={constraints.k} exceeds n={dataset.n}",
            demand=constraints.k,
            limit=dataset.n,
        ))

    for v, row in constraints.bounds.items():
        if v not in known:
            found.append(Violation(kind="unknown_value", message=f"bound names unknown value {v!r}", value=v))
            continue
        size = len(dataset.members(v))
        attr = dataset.attributes.attribute_of(v)
        for p, bound in enumerate(row, start=1):
            if bound > p:
                found.append(Violation(
                    kind="bound_exceeds_prefix",
                    message=f"bound exceeds prefix: {v} needs {bound} in the top {p}",
                    value=v, attribute=attr, position=p, demand=bound, limit=p,
                ))
                break
        for p, bound in enumerate(row, start=1):
            if bound > size:
                found.append(Violation(
                    kind="bound_exceeds_group",
                    message=f"bound exceeds group: {v} needs {bound} by position {p} but has {size} members",
                    value=v, attribute=attr, position=p, demand=bound, limit=size,
                ))
                break

    for attr, values in dataset.attributes.domains.items():
        for p in range(1, constraints.k + 1):
            total = sum(constraints.demand(v, p) for v in values)
            if total > p:
                found.append(Violation(
                    kind="attribute_demand",
                    message=f"attribute demand {total} > {p} for {attr!r} at position {p}",
                    attribute=attr, position=p, demand=total, limit=p,
                ))
                break

    if constraints.normalized:
        found.append(Violation(
            kind="non_monotone",
            severity="warning",
            message="raw bounds shrink along the prefix; normalised to the running maximum",
        ))
    return found


def is_ok(violations: Iterable[Violation]) -> bool:
    return not any(v.severity == "error" for v in violations)

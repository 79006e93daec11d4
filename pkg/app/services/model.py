"""model.py

Pydantic **domain models** shared by every layer of the engine.

Scores, fairness values and bounds are exact ``Fraction`` objects: inputs
are decimal literals, and the solver's incumbent tests and the leximin
comparisons must not depend on floating-point ties. Fractions are stored
through ``arbitrary_types_allowed`` and coerced by ``mode="before"``
validators, so callers may pass strings, ints or ``Decimal`` values.
"""

from __future__ import annotations

# -----------------------------------------------------------------------------
# Standard library
# -----------------------------------------------------------------------------
import math
from decimal import Decimal, InvalidOperation
from enum import Enum
from fractions import Fraction
from typing import Any, Iterator, Optional

# Third-party
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, field_validator, model_validator

_FROZEN = ConfigDict(frozen=True, arbitrary_types_allowed=True)


def to_fraction(value: Any) -> Fraction:
    """Coerce a decimal literal, ``a/b`` string, int or Decimal into a Fraction.

    Floats go through their shortest ``repr`` so ``0.1`` becomes ``1/10``
    rather than the binary expansion.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValueError(f"not a number: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        value = repr(value)
    if isinstance(value, Decimal):
        if not value.is_finite():
            raise ValueError(f"not a finite number: {value!r}")
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if "/" in text:
            try:
                return Fraction(text)
            except (ValueError, ZeroDivisionError) as exc:
                raise ValueError(f"not a number: {value!r}") from exc
        try:
            dec = Decimal(text)
        except InvalidOperation as exc:
            raise ValueError(f"not a number: {value!r}") from exc
        if not dec.is_finite():
            raise ValueError(f"not a finite number: {value!r}")
        return Fraction(dec)
    raise ValueError(f"not a number: {value!r}")


def exact(value: Fraction | None, digits: int = 6) -> dict | None:
    """JSON payload for an exact value: the fraction text plus a rounded float."""
    if value is None:
        return None
    return {"exact": str(value), "value": round(float(value), digits)}


class Mode(str, Enum):
    """Which in-group fairness measure a run balances."""

    RATIO = "ratio"
    AGGREGATED = "agg"


# -----------------------------------------------------------------------------
# Items, schema, dataset
# -----------------------------------------------------------------------------

class Item(BaseModel):
    """One candidate: unique id, strictly positive score and its labels."""

    model_config = _FROZEN

    id: str
    score: Fraction
    labels: frozenset[str]

    @field_validator("score", mode="before")
    @classmethod
    def _coerce_score(cls, v: Any) -> Fraction:
        return to_fraction(v)

    @field_validator("score")
    @classmethod
    def _positive(cls, v: Fraction) -> Fraction:
        if v <= 0:
            raise ValueError(f"non-positive score {v}")
        return v


class AttributeSpec(BaseModel):
    """A sensitive attribute and its ordered value domain."""

    model_config = ConfigDict(frozen=True)

    name: str
    values: list[str]


class AttributeSchema(BaseModel):
    """Ordered attributes with globally unique value identifiers."""

    model_config = ConfigDict(frozen=True)

    attributes: list[AttributeSpec]

    @model_validator(mode="after")
    def _check_domains(self) -> "AttributeSchema":
        names = [a.name for a in self.attributes]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate attribute names in {names}")
        seen: dict[str, str] = {}
        for attr in self.attributes:
            for v in attr.values:
                if v in seen:
                    raise ValueError(f"value {v!r} appears in both {seen[v]!r} and {attr.name!r}")
                seen[v] = attr.name
        if not seen:
            raise ValueError("schema declares no attribute values")
        return self

    @property
    def names(self) -> list[str]:
        return [a.name for a in self.attributes]

    @property
    def domains(self) -> dict[str, list[str]]:
        return {a.name: list(a.values) for a in self.attributes}

    @property
    def values(self) -> list[str]:
        """All value identifiers (the set L) in declaration order."""
        return [v for a in self.attributes for v in a.values]

    def attribute_of(self, value: str) -> str:
        for attr in self.attributes:
            if value in attr.values:
                return attr.name
        raise KeyError(value)


class Dataset(BaseModel):
    """The item pool plus its group index.

    Build it through :func:`app.services.dataset.load_dataset`, which
    enforces the load-time rules. The group index and the lookup tables
    are derived once in ``model_post_init`` and never change afterwards.
    """

    model_config = _FROZEN

    attributes: AttributeSchema
    items: tuple[Item, ...]

    _by_id: dict[str, Item] = PrivateAttr(default_factory=dict)
    _groups: dict[str, tuple[str, ...]] = PrivateAttr(default_factory=dict)
    _order: tuple[str, ...] = PrivateAttr(default=())
    _scale: int = PrivateAttr(default=1)
    _units: dict[str, int] = PrivateAttr(default_factory=dict)
    _id_rank: dict[str, int] = PrivateAttr(default_factory=dict)

    def model_post_init(self, __context: Any) -> None:
        self._by_id = {it.id: it for it in self.items}
        # Item order: score descending, ids ascending on ties.
        self._order = tuple(it.id for it in sorted(self.items, key=lambda it: (-it.score, it.id)))
        groups: dict[str, list[str]] = {v: [] for v in self.attributes.values}
        for item_id in self._order:
            for v in self._by_id[item_id].labels:
                groups[v].append(item_id)
        self._groups = {v: tuple(ids) for v, ids in groups.items()}
        scale = math.lcm(*(it.score.denominator for it in self.items)) if self.items else 1
        self._scale = scale
        self._units = {it.id: int(it.score * scale) for it in self.items}
        self._id_rank = {item_id: r for r, item_id in enumerate(sorted(self._by_id))}

    # -- lookups -------------------------------------------------------------
    @property
    def n(self) -> int:
        return len(self.items)

    @property
    def groups(self) -> dict[str, tuple[str, ...]]:
        """Group index: value → member ids, score descending then id ascending."""
        return self._groups

    @property
    def ranked_ids(self) -> tuple[str, ...]:
        """All ids in the item order (score descending, id ascending)."""
        return self._order

    @property
    def scale(self) -> int:
        """Common denominator that turns every score into an integer."""
        return self._scale

    def item(self, item_id: str) -> Item:
        try:
            return self._by_id[item_id]
        except KeyError:
            raise KeyError(f"unknown item id {item_id!r}") from None

    def score(self, item_id: str) -> Fraction:
        return self.item(item_id).score

    def units(self, item_id: str) -> int:
        """Score scaled to an integer by :attr:`scale`."""
        return self._units[item_id]

    def members(self, value: str) -> tuple[str, ...]:
        try:
            return self._groups[value]
        except KeyError:
            raise KeyError(f"unknown attribute value {value!r}") from None

    def present_values(self) -> list[str]:
        """Values with a non-empty group, in schema order."""
        return [v for v in self.attributes.values if self._groups[v]]

    def label(self, item_id: str, attribute: str) -> str | None:
        domain = set(self.attributes.domains[attribute])
        for v in self.item(item_id).labels:
            if v in domain:
                return v
        return None

    def id_rank(self, item_id: str) -> int:
        """Position of the id in ascending id order (used by the set tie-break)."""
        return self._id_rank[item_id]

    def order_key(self, item_id: str) -> tuple[Fraction, str]:
        return (-self.score(item_id), item_id)


class DatasetStats(BaseModel):
    """Extreme scores and their ratio λ."""

    model_config = _FROZEN

    s_max: Fraction
    s_min: Fraction
    lam: Fraction   # s_max / s_min

    def to_payload(self) -> dict:
        return {"s_max": exact(self.s_max), "s_min": exact(self.s_min), "lambda": exact(self.lam)}


# -----------------------------------------------------------------------------
# Outcomes and fairness vectors
# -----------------------------------------------------------------------------

class Outcome(BaseModel):
    """A ranking of k items plus the per-group accepted / rejected split."""

    model_config = _FROZEN

    ranking: tuple[str, ...]
    accepted: dict[str, tuple[str, ...]]
    rejected: dict[str, tuple[str, ...]]
    lowest_accepted: dict[str, Optional[Fraction]]   # a_v
    highest_rejected: dict[str, Optional[Fraction]]  # b_v
    utility: Fraction

    @property
    def k(self) -> int:
        return len(self.ranking)

    @property
    def selected(self) -> frozenset[str]:
        return frozenset(self.ranking)

    def to_payload(self, dataset: "Dataset") -> dict:
        return {
            "k": self.k,
            "ranking": [
                {"position": p, "id": item_id, "score": str(dataset.score(item_id))}
                for p, item_id in enumerate(self.ranking, start=1)
            ],
            "utility": exact(self.utility),
        }


class IgfVector(BaseModel):
    """Per-group fairness values for one outcome under one measure."""

    model_config = _FROZEN

    mode: Mode
    values: dict[str, Fraction]

    @field_validator("values")
    @classmethod
    def _in_unit_interval(cls, v: dict[str, Fraction]) -> dict[str, Fraction]:
        for key, q in v.items():
            if not 0 <= q <= 1:
                raise ValueError(f"fairness value of {key!r} outside [0,1]: {q}")
        return v

    def sorted_values(self) -> list[Fraction]:
        return sorted(self.values.values())

    def minimum(self) -> Fraction:
        return min(self.values.values()) if self.values else Fraction(1)

    def to_payload(self) -> dict:
        return {"mode": self.mode.value, "values": {v: exact(q) for v, q in self.values.items()}}


# -----------------------------------------------------------------------------
# Constraints and bounds
# -----------------------------------------------------------------------------

class DiversityConstraints(BaseModel):
    """Lower-bound table ℓ_{v,p}, stored per value as a length-k tuple.

    The stored table is already monotone in p. ``normalized`` records
    whether the raw input had to be raised to get there.
    """

    model_config = _FROZEN

    k: int = Field(ge=0)
    bounds: dict[str, tuple[int, ...]] = Field(default_factory=dict)
    normalized: bool = False
    source: str = "explicit"
    alpha: Optional[Fraction] = None
    checkpoints: tuple[int, ...] = ()

    @model_validator(mode="after")
    def _check_shape(self) -> "DiversityConstraints":
        for v, row in self.bounds.items():
            if len(row) != self.k:
                raise ValueError(f"bound row of {v!r} has {len(row)} entries, expected k={self.k}")
            if any(x < 0 for x in row):
                raise ValueError(f"negative bound for {v!r}")
            if any(a > b for a, b in zip(row, row[1:])):
                raise ValueError(f"bound row of {v!r} is not monotone")
        return self

    def demand(self, value: str, position: int) -> int:
        """Normalised ℓ_{v,p}; 0 for values without a row or p outside [1,k]."""
        row = self.bounds.get(value)
        if row is None or position < 1 or position > self.k:
            return 0
        return row[position - 1]

    def final_demand(self, value: str) -> int:
        return self.demand(value, self.k)

    def entries(self) -> Iterator[tuple[str, int, int]]:
        """Yield ``(value, position, bound)`` for every positive entry."""
        for v, row in self.bounds.items():
            for p, bound in enumerate(row, start=1):
                if bound > 0:
                    yield v, p, bound

    def to_payload(self) -> dict:
        return {
            "k": self.k,
            "mode": "explicit",
            "bounds": [{"value": v, "position": p, "min": b} for v, p, b in self.entries()],
        }


class IgfBounds(BaseModel):
    """Per-group fairness lower bounds q_v and their frozen / floating status."""

    model_config = _FROZEN

    mode: Mode
    q: dict[str, Fraction]
    frozen: frozenset[str] = frozenset()

    @field_validator("q", mode="before")
    @classmethod
    def _coerce(cls, v: Any) -> dict[str, Fraction]:
        return {key: to_fraction(val) for key, val in dict(v).items()}

    @field_validator("q")
    @classmethod
    def _in_unit_interval(cls, v: dict[str, Fraction]) -> dict[str, Fraction]:
        for key, q in v.items():
            if not 0 <= q <= 1:
                raise ValueError(f"q of {key!r} outside [0,1]: {q}")
        return v

    @classmethod
    def uniform(cls, dataset: Dataset, mode: Mode, q: Any = 0) -> "IgfBounds":
        value = to_fraction(q)
        return cls(mode=mode, q={v: value for v in dataset.present_values()})

    def active(self) -> list[str]:
        """Groups whose bound is positive, in insertion order."""
        return [v for v, q in self.q.items() if q > 0]

    def floating(self) -> list[str]:
        return [v for v in self.q if v not in self.frozen]

    def with_values(self, updates: dict[str, Any], freeze: bool = False) -> "IgfBounds":
        q = dict(self.q)
        q.update({v: to_fraction(val) for v, val in updates.items()})
        frozen = self.frozen | frozenset(updates) if freeze else self.frozen
        return IgfBounds(mode=self.mode, q=q, frozen=frozen)

    def to_payload(self) -> dict:
        return {
            "mode": self.mode.value,
            "q": {v: exact(q) for v, q in self.q.items()},
            "frozen": sorted(self.frozen),
        }


# -----------------------------------------------------------------------------
# Solver I/O
# -----------------------------------------------------------------------------

class SolverOptions(BaseModel):
    """Knobs of the branch-and-bound search."""

    model_config = ConfigDict(frozen=True)

    time_limit: Optional[float] = Field(default=None, gt=0)   # seconds
    node_limit: Optional[int] = Field(default=None, gt=0)
    integrality_tol: float = Field(default=1e-6, gt=0)
    feasibility_tol: float = Field(default=1e-9, gt=0)
    restart_interval: int = Field(default=10_000, gt=0)       # best-bound restart cadence
    log_interval: int = Field(default=1_000, gt=0)
    workers: int = Field(default=1, ge=1)
    first_feasible: bool = False


class SolveStatus(str, Enum):
    OPTIMAL = "optimal"
    FEASIBLE = "feasible"          # first_feasible stop
    INFEASIBLE = "infeasible"
    LIMIT_REACHED = "limit_reached"


class Solution(BaseModel):
    """Result of one integer-program solve (or one oracle enumeration)."""

    model_config = _FROZEN

    status: SolveStatus
    outcome: Optional[Outcome] = None
    objective: Optional[Fraction] = None
    nodes: int = 0
    wall_time: float = 0.0

    @property
    def has_outcome(self) -> bool:
        return self.outcome is not None

    def to_payload(self, dataset: Dataset) -> dict:
        # nodes / wall_time stay out: they depend on scheduling.
        return {
            "status": self.status.value,
            "objective": exact(self.objective),
            "outcome": self.outcome.to_payload(dataset) if self.outcome else None,
        }


# -----------------------------------------------------------------------------
# Leximin trace
# -----------------------------------------------------------------------------

class LeximinCheck(BaseModel):
    """One feasibility query of the bisection."""

    model_config = _FROZEN

    lo: Fraction
    hi: Fraction
    q: Fraction
    feasible: bool
    achieved: Optional[Fraction] = None   # min floating IGF of the check's ranking
    limit_hit: bool = False

    def to_payload(self) -> dict:
        return {
            "lo": exact(self.lo),
            "hi": exact(self.hi),
            "q": exact(self.q),
            "feasible": self.feasible,
            "achieved": exact(self.achieved),
            "limit_hit": self.limit_hit,
        }


class LeximinRound(BaseModel):
    model_config = _FROZEN

    floating: tuple[str, ...]
    checks: tuple[LeximinCheck, ...]
    start: Fraction = Fraction(0)   # lowest level the round may settle on
    q: Fraction
    frozen: tuple[str, ...]
    fallback: bool = False   # no single binding group; froze the weakest one

    def to_payload(self) -> dict:
        return {
            "floating": list(self.floating),
            "checks": [p.to_payload() for p in self.checks],
            "start": exact(self.start),
            "q": exact(self.q),
            "frozen": list(self.frozen),
            "fallback": self.fallback,
        }


class LeximinTrace(BaseModel):
    model_config = _FROZEN

    mode: Mode
    epsilon: Fraction
    rounds: tuple[LeximinRound, ...]
    bounds: IgfBounds
    solution: Solution
    igf: Optional[IgfVector] = None
    solves: int = 0

    def to_payload(self, dataset: Dataset) -> dict:
        return {
            "mode": self.mode.value,
            "epsilon": exact(self.epsilon),
            "rounds": [r.to_payload() for r in self.rounds],
            "bounds": self.bounds.to_payload(),
            "solution": self.solution.to_payload(dataset),
            "igf": self.igf.to_payload() if self.igf else None,
            "solves": self.solves,
        }


# -----------------------------------------------------------------------------
# Synthetic populations
# -----------------------------------------------------------------------------

class ProfileValue(BaseModel):
    model_config = ConfigDict(frozen=True)

    value: str
    share: float = Field(ge=0, le=1)
    location: float = 0.0      # offset added to the base location
    spread: float = Field(gt=0)


class ProfileAttribute(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    values: list[ProfileValue]

    @model_validator(mode="after")
    def _shares_sum_to_one(self) -> "ProfileAttribute":
        total = sum(v.share for v in self.values)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"shares of {self.name!r} sum to {total}, expected 1")
        return self


class PairMultiplier(BaseModel):
    """Raises (or lowers) the odds that two values co-occur on one item."""

    model_config = ConfigDict(frozen=True)

    first: str
    second: str
    factor: float = Field(gt=0)


class GroupProfile(BaseModel):
    model_config = ConfigDict(frozen=True)

    attributes: list[ProfileAttribute]
    base_location: float = 50.0
    pairs: list[PairMultiplier] = Field(default_factory=list)
    seed: int = 0

    @model_validator(mode="after")
    def _known_pairs(self) -> "GroupProfile":
        known = {v.value for a in self.attributes for v in a.values}
        for pair in self.pairs:
            for v in (pair.first, pair.second):
                if v not in known:
                    raise ValueError(f"pair multiplier names unknown value {v!r}")
        AttributeSchema(attributes=[AttributeSpec(name=a.name, values=[v.value for v in a.values]) for a in self.attributes])
        return self

    def to_schema(self) -> AttributeSchema:
        return AttributeSchema(
            attributes=[AttributeSpec(name=a.name, values=[v.value for v in a.values]) for a in self.attributes]
        )

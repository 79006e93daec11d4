"""program.py

Integer program for diversity-constrained ranking with in-group fairness
bounds, in a solver-neutral sparse form.

Variables
---------
* ``x_i``     1 if item i is selected
* ``x_i_p``   1 if item i sits at position p
* ``a_v``, ``b_v`` (ratio mode only) lowest accepted / highest rejected
  score of group v, in [s_min, s_max]

Rows are kept as ``{variable index: coefficient}`` maps with exact
coefficients (ints or Fractions) and a provenance tag, so any 0/1
assignment can be checked exactly with :meth:`IntegerProgram.verify`.
"""

from __future__ import annotations

import logging
from fractions import Fraction
from typing import Any, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, PrivateAttr

from .dataset import better_or_equal_set, dataset_stats
from .errors import ModelError
from .model import Dataset, DiversityConstraints, IgfBounds, Mode, Outcome

logger = logging.getLogger(__name__)

Number = Union[int, Fraction]
Sense = Literal["<=", ">=", "="]


class Variable(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    name: str
    tag: tuple
    lower: Fraction = Fraction(0)
    upper: Fraction = Fraction(1)
    binary: bool = True


class Row(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    tag: tuple
    coefs: dict[int, Any]
    sense: Sense
    rhs: Any = 0

    def activity(self, values: list) -> Number:
        return sum(c * values[j] for j, c in self.coefs.items())

    def holds(self, values: list) -> bool:
        lhs = self.activity(values)
        if self.sense == "<=":
            return lhs <= self.rhs
        if self.sense == ">=":
            return lhs >= self.rhs
        return lhs == self.rhs


class IntegerProgram(BaseModel):
    """The assembled program plus the inputs it was built from.

    The solver works on the selection view of these inputs, so they are
    carried along next to the rows.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    mode: Mode
    dataset: Dataset
    constraints: DiversityConstraints
    bounds: IgfBounds
    variables: list[Variable]
    rows: list[Row]
    objective: dict[int, Any]

    _index: dict[tuple, int] = PrivateAttr(default_factory=dict)

    def model_post_init(self, __context: Any) -> None:
        self._index = {var.tag: j for j, var in enumerate(self.variables)}

    @property
    def k(self) -> int:
        return self.constraints.k

    def var(self, *tag: Any) -> int:
        """Column index of the variable with provenance *tag*."""
        try:
            return self._index[tag]
        except KeyError:
            raise ModelError(f"program has no variable {tag}") from None

    def has_var(self, *tag: Any) -> bool:
        return tag in self._index

    def rows_tagged(self, kind: str) -> list[Row]:
        return [r for r in self.rows if r.tag[0] == kind]

    def check_shape(self) -> None:
        """Raise :class:`ModelError` on dangling column references."""
        width = len(self.variables)
        for row in self.rows:
            bad = [j for j in row.coefs if not 0 <= j < width]
            if bad:
                raise ModelError(f"row {row.tag} references columns {bad} outside [0, {width})")
        bad = [j for j in self.objective if not 0 <= j < width]
        if bad:
            raise ModelError(f"objective references columns {bad} outside [0, {width})")

    # -- exact checking -----------------------------------------------------
    def assignment(self, outcome: Outcome) -> list[Number]:
        """Full variable vector of *outcome*, with feasible witnesses for a_v, b_v.

        a_v takes the lowest accepted score (s_max if none), b_v the highest
        rejected score (s_min if none).
        """
        stats = dataset_stats(self.dataset)
        values: list[Number] = [0] * len(self.variables)
        position = {item_id: p for p, item_id in enumerate(outcome.ranking, start=1)}
        for j, var in enumerate(self.variables):
            kind = var.tag[0]
            if kind == "x":
                values[j] = int(var.tag[1] in position)
            elif kind == "xp":
                values[j] = int(position.get(var.tag[1]) == var.tag[2])
            elif kind == "a":
                low = outcome.lowest_accepted.get(var.tag[1])
                values[j] = min(stats.s_max, low) if low is not None else stats.s_max
            elif kind == "b":
                high = outcome.highest_rejected.get(var.tag[1])
                values[j] = max(stats.s_min, high) if high is not None else stats.s_min
        return values

    def verify(self, values: list[Number]) -> list[tuple]:
        """Tags of every row or bound violated by *values* (exact arithmetic)."""
        if len(values) != len(self.variables):
            raise ModelError(f"assignment has {len(values)} entries, program has {len(self.variables)} variables")
        broken = [("bound", var.name) for var, x in zip(self.variables, values) if not var.lower <= x <= var.upper]
        broken += [("binary", var.name) for var, x in zip(self.variables, values) if var.binary and x not in (0, 1)]
        broken += [row.tag for row in self.rows if not row.holds(values)]
        return broken

    def objective_value(self, values: list[Number]) -> Fraction:
        return Fraction(sum(c * values[j] for j, c in self.objective.items()))

    # -- text dump -----------------------------------------------------------
    def to_lp_format(self) -> str:
        """CPLEX-LP-style text with fixed-point coefficients (6 decimals)."""
        names = [var.name for var in self.variables]

        def term_list(coefs: dict[int, Any]) -> str:
            parts = []
            for j in sorted(coefs):
                c = coefs[j]
                if c == 0:
                    continue
                sign = "-" if c < 0 else "+"
                parts.append(f"{sign} {_fixed(abs(c))} {names[j]}")
            text = " ".join(parts) or "0 " + names[0]
            return text[2:] if text.startswith("+ ") else text

        lines = [f"\\ {self.mode.value} mode, n={self.dataset.n}, k={self.k}"]
        for var in self.variables:
            if var.tag[0] == "x":
                lines.append(f"\\ {var.name} = item {var.tag[1]}")
        lines += ["Maximize", f" obj: {term_list(self.objective)}", "Subject To"]
        for r, row in enumerate(self.rows):
            lines.append(f" {_row_name(row.tag, r)}: {term_list(row.coefs)} {row.sense} {_fixed(row.rhs)}")
        lines.append("Bounds")
        for var in self.variables:
            if not var.binary:
                lines.append(f" {_fixed(var.lower)} <= {var.name} <= {_fixed(var.upper)}")
        lines.append("Binary")
        binaries = [var.name for var in self.variables if var.binary]
        for start in range(0, len(binaries), 8):
            lines.append(" " + " ".join(binaries[start:start + 8]))
        lines.append("End")
        return "\n".join(lines) + "\n"


def _fixed(value: Number) -> str:
    text = f"{float(value):.6f}"
    return "0.000000" if text == "-0.000000" else text


def _row_name(tag: tuple, r: int) -> str:
    return f"r{r}_{tag[0]}"


# -----------------------------------------------------------------------------
# Builders
# -----------------------------------------------------------------------------

class _Builder:
    """Accumulates columns and rows in a deterministic order."""

    def __init__(self, dataset: Dataset, constraints: DiversityConstraints, bounds: IgfBounds) -> None:
        self.dataset = dataset
        self.constraints = constraints
        self.bounds = bounds
        self.variables: list[Variable] = []
        self.rows: list[Row] = []
        self.col: dict[tuple, int] = {}
        self.ids = dataset.ranked_ids
        self.code = {item_id: pos for pos, item_id in enumerate(self.ids)}

    def add_var(self, name: str, tag: tuple, **kw: Any) -> int:
        self.col[tag] = len(self.variables)
        self.variables.append(Variable(name=name, tag=tag, **kw))
        return self.col[tag]

    def add_row(self, tag: tuple, coefs: dict[int, Number], sense: Sense, rhs: Number) -> None:
        self.rows.append(Row(tag=tag, coefs=coefs, sense=sense, rhs=rhs))

    def skeleton(self) -> None:
        k = self.constraints.k
        for item_id in self.ids:
            self.add_var(f"x_{self.code[item_id]}", ("x", item_id))
        for item_id in self.ids:
            for p in range(1, k + 1):
                self.add_var(f"xp_{self.code[item_id]}_{p}", ("xp", item_id, p))

        # x_i = Σ_p x_{i,p}
        for item_id in self.ids:
            coefs: dict[int, Number] = {self.col[("x", item_id)]: 1}
            for p in range(1, k + 1):
                coefs[self.col[("xp", item_id, p)]] = -1
            self.add_row(("link", item_id), coefs, "=", 0)
        for p in range(1, k + 1):
            self.add_row(("slot", p), {self.col[("xp", i, p)]: 1 for i in self.ids}, "<=", 1)
        self.add_row(("card",), {self.col[("x", i)]: 1 for i in self.ids}, "=", k)

        for value, p, bound in self.constraints.entries():
            coefs = {}
            for item_id in self.dataset.members(value):
                for q in range(1, p + 1):
                    coefs[self.col[("xp", item_id, q)]] = 1
            self.add_row(("div", value, p), coefs, ">=", bound)

    def objective(self) -> dict[int, Number]:
        return {self.col[("x", i)]: self.dataset.score(i) for i in self.ids}

    def finish(self, mode: Mode) -> IntegerProgram:
        program = IntegerProgram(
            mode=mode,
            dataset=self.dataset,
            constraints=self.constraints,
            bounds=self.bounds,
            variables=self.variables,
            rows=self.rows,
            objective=self.objective(),
        )
        logger.debug(
            "%s program: %d variables, %d rows", mode.value, len(program.variables), len(program.rows)
        )
        return program


def _check_inputs(dataset: Dataset, constraints: DiversityConstraints, bounds: IgfBounds, mode: Mode) -> None:
    if bounds.mode != mode:
        raise ModelError(f"bounds are for {bounds.mode.value} mode, builder is {mode.value}")
    if constraints.k > dataset.n:
        raise ModelError(f"k={constraints.k} exceeds n={dataset.n}")
    known = set(dataset.attributes.values)
    unknown = sorted((set(constraints.bounds) | set(bounds.q)) - known)
    if unknown:
        raise ModelError(f"unknown attribute values {unknown}")


def constrained_groups(dataset: Dataset, bounds: IgfBounds) -> list[str]:
    """Groups with q_v > 0 and at least one member, in schema order."""
    active = {v for v in bounds.active()}
    return [v for v in dataset.present_values() if v in active]


def build_ratio_model(dataset: Dataset, constraints: DiversityConstraints, bounds: IgfBounds) -> IntegerProgram:
    _check_inputs(dataset, constraints, bounds, Mode.RATIO)
    b = _Builder(dataset, constraints, bounds)
    b.skeleton()
    if dataset.n == 0:
        return b.finish(Mode.RATIO)

    stats = dataset_stats(dataset)
    lam = stats.lam
    for v in constrained_groups(dataset, bounds):
        a = b.add_var(f"a_{len(b.variables)}", ("a", v), lower=stats.s_min, upper=stats.s_max, binary=False)
        bb = b.add_var(f"b_{len(b.variables)}", ("b", v), lower=stats.s_min, upper=stats.s_max, binary=False)
        for item_id in dataset.members(v):
            s_i = dataset.score(item_id)
            x = b.col[("x", item_id)]
            # a_v ≤ (λ − (λ−1)·x_i)·s_i
            b.add_row(("gadget", v, item_id), {a: 1, x: (lam - 1) * s_i}, "<=", lam * s_i)
            # b_v ≥ (1 − x_i)·s_i
            b.add_row(("reject", v, item_id), {bb: 1, x: s_i}, ">=", s_i)
        b.add_row(("ratio", v), {a: 1, bb: -bounds.q[v]}, ">=", 0)
    return b.finish(Mode.RATIO)


def build_aggregated_model(
    dataset: Dataset, constraints: DiversityConstraints, bounds: IgfBounds
) -> IntegerProgram:
    _check_inputs(dataset, constraints, bounds, Mode.AGGREGATED)
    b = _Builder(dataset, constraints, bounds)
    b.skeleton()
    for v, item_id, row in aggregated_rows(dataset, bounds):
        b.add_row(("agg", v, item_id), {b.col[("x", h)]: c for h, c in row.items()}, ">=", 0)
    return b.finish(Mode.AGGREGATED)


def aggregated_rows(dataset: Dataset, bounds: IgfBounds):
    """Yield ``(v, i, {h: coef})`` for Σ_{I_{i,v}} s_h·x_h − q·S_{i,v}·x_i ≥ 0.

    Rows with q·S_{i,v} ≤ s_i hold whenever x_i is set and are skipped.
    """
    for v in constrained_groups(dataset, bounds):
        q = bounds.q[v]
        for item_id in dataset.members(v):
            better = better_or_equal_set(dataset, v, item_id)
            mass = sum((dataset.score(h) for h in better), Fraction(0))
            s_i = dataset.score(item_id)
            if q * mass <= s_i:
                continue
            row: dict[str, Number] = {h: dataset.score(h) for h in better}
            row[item_id] = s_i - q * mass
            yield v, item_id, row


def build_model(
    dataset: Dataset,
    constraints: DiversityConstraints,
    bounds: Optional[IgfBounds] = None,
    mode: Mode = Mode.RATIO,
) -> IntegerProgram:
    """Dispatch on the bounds' mode; no bounds means every q_v = 0."""
    if bounds is None:
        bounds = IgfBounds.uniform(dataset, Mode(mode), 0)
    if bounds.mode == Mode.RATIO:
        return build_ratio_model(dataset, constraints, bounds)
    return build_aggregated_model(dataset, constraints, bounds)

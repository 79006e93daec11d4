"""report.py

Utility-loss accounting across output sizes.

For every k the report solves three problems on the same pool:

* unconstrained top-k,
* the diversity-constrained optimum (all q_v = 0),
* the leximin-balanced optimum, once per fairness measure,

and records the percentage of utility each step gives up, together with
the per-group fairness values before and after balancing.
"""

from __future__ import annotations

import logging
from fractions import Fraction
from typing import Callable, Iterable, Optional

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from .dataset import top_k
from .errors import IgfError
from .leximin import leximin_solve
from .metrics import igf_vector, leximin_compare
from .model import Dataset, DiversityConstraints, IgfBounds, Mode, SolverOptions, SolveStatus, exact
from .program import build_model
from .solver import solve_ip

logger = logging.getLogger(__name__)

HUNDRED = Fraction(100)


class ReportRow(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    k: int
    unconstrained: Fraction
    diversity: Optional[Fraction] = None
    leximin: dict[str, Optional[Fraction]] = Field(default_factory=dict)
    diversity_loss: Optional[Fraction] = None
    balance_loss: dict[str, Optional[Fraction]] = Field(default_factory=dict)
    igf_before: dict[str, dict[str, Fraction]] = Field(default_factory=dict)
    igf_after: dict[str, dict[str, Fraction]] = Field(default_factory=dict)
    # leximin_compare of sorted IGF after vs before: 1 better, 0 same, -1 worse
    balance_gain: dict[str, int] = Field(default_factory=dict)
    solves: dict[str, int] = Field(default_factory=dict)
    statuses: dict[str, str] = Field(default_factory=dict)
    error: Optional[str] = None

    def to_payload(self) -> dict:
        return {
            "k": self.k,
            "utility": {
                "unconstrained": exact(self.unconstrained),
                "diversity": exact(self.diversity),
                **{f"leximin_{m}": exact(u) for m, u in self.leximin.items()},
            },
            "loss_percent": {
                "diversity": exact(self.diversity_loss),
                **{f"balance_{m}": exact(l) for m, l in self.balance_loss.items()},
            },
            "igf_before": {m: {v: exact(q) for v, q in vals.items()} for m, vals in self.igf_before.items()},
            "igf_after": {m: {v: exact(q) for v, q in vals.items()} for m, vals in self.igf_after.items()},
            "balance_gain": dict(self.balance_gain),
            "solves": dict(self.solves),
            "statuses": dict(self.statuses),
            "error": self.error,
        }


class Report(BaseModel):
    model_config = ConfigDict(frozen=True)

    rows: list[ReportRow]
    modes: list[str]
    partial: bool = False

    def to_payload(self) -> dict:
        return {"modes": self.modes, "partial": self.partial, "rows": [r.to_payload() for r in self.rows]}


def loss_percent(reference: Fraction, value: Fraction) -> Fraction:
    """Share of *reference* given up by *value*, in percent."""
    if reference == 0:
        return Fraction(0)
    return (reference - value) / reference * HUNDRED


def build_report(
    dataset: Dataset,
    constraints_for: Callable[[int], DiversityConstraints],
    ks: Iterable[int],
    modes: Iterable[Mode] = (Mode.RATIO, Mode.AGGREGATED),
    epsilon: Fraction | float | str | None = None,
    options: Optional[SolverOptions] = None,
) -> Report:
    """Run the three solves per k; stop at the first failing k.

    The failing row keeps whatever finished and carries the error; the
    report is flagged ``partial``.
    """
    modes = [Mode(m) for m in modes]
    options = options or SolverOptions()
    rows: list[ReportRow] = []
    partial = False

    for k in ks:
        logger.info("report: k=%d", k)
        fields: dict = {"k": k, "unconstrained": Fraction(0)}
        try:
            fields["unconstrained"] = top_k(dataset, k).utility
            constraints = constraints_for(k)
            program = build_model(dataset, constraints, IgfBounds.uniform(dataset, modes[0] if modes else Mode.RATIO))
            div = solve_ip(program, options)
            fields["solves"] = {"diversity": 1}
            fields["statuses"] = {"diversity": div.status.value}
            if div.status != SolveStatus.OPTIMAL:
                raise IgfError(f"diversity-only solve at k={k} ended {div.status.value}")
            fields["diversity"] = div.outcome.utility
            fields["diversity_loss"] = loss_percent(fields["unconstrained"], div.outcome.utility)

            fields.update(leximin={}, balance_loss={}, igf_before={}, igf_after={}, balance_gain={})
            for mode in modes:
                before = igf_vector(dataset, div.outcome, mode)
                fields["igf_before"][mode.value] = dict(before.values)
                trace = leximin_solve(dataset, constraints, mode, epsilon, options, start=div.outcome)
                fields["solves"][f"leximin_{mode.value}"] = trace.solves
                fields["statuses"][f"leximin_{mode.value}"] = trace.solution.status.value
                if trace.solution.status != SolveStatus.OPTIMAL:
                    raise IgfError(f"leximin ({mode.value}) at k={k} ended {trace.solution.status.value}")
                utility = trace.solution.outcome.utility
                fields["leximin"][mode.value] = utility
                fields["balance_loss"][mode.value] = loss_percent(div.outcome.utility, utility)
                fields["igf_after"][mode.value] = dict(trace.igf.values)
                fields["balance_gain"][mode.value] = leximin_compare(trace.igf.sorted_values(), before.sorted_values())
        except IgfError as exc:
            logger.error("report aborted at k=%d: %s", k, exc)
            fields["error"] = str(exc)
            rows.append(ReportRow(**fields))
            partial = True
            break
        rows.append(ReportRow(**fields))

    return Report(rows=rows, modes=[m.value for m in modes], partial=partial)


# -----------------------------------------------------------------------------
# Tabular views
# -----------------------------------------------------------------------------

def loss_frame(report: Report) -> pd.DataFrame:
    """One row per k: diversity loss and the balance loss per measure (percent)."""
    records = []
    for row in report.rows:
        rec = {"k": row.k, "diversity": _as_float(row.diversity_loss)}
        for mode in report.modes:
            rec[mode] = _as_float(row.balance_loss.get(mode))
        records.append(rec)
    return pd.DataFrame.from_records(records, columns=["k", "diversity", *report.modes])


def igf_frame(report: Report) -> pd.DataFrame:
    """Long format: one row per (k, mode, phase, group) for external plotting."""
    records = []
    for row in report.rows:
        for phase, table in (("before", row.igf_before), ("after", row.igf_after)):
            for mode, values in table.items():
                for value, q in values.items():
                    records.append({
                        "k": row.k,
                        "mode": mode,
                        "phase": phase,
                        "value": value,
                        "igf": str(q),
                        "igf_float": round(float(q), 6),
                    })
    return pd.DataFrame.from_records(records, columns=["k", "mode", "phase", "value", "igf", "igf_float"])


def _as_float(value: Optional[Fraction]) -> Optional[float]:
    return None if value is None else float(value)

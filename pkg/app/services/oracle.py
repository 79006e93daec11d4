"""oracle.py

Brute-force reference solver for desk-sized instances.

It never looks at the integer program: fairness is checked with the
metrics and orderings with the prefix search, so agreement with
:func:`app.services.solver.solve_ip` is an independent check of the model
and of the branch-and-bound.
"""

from __future__ import annotations

import itertools
import logging
import math
import time
from typing import Iterator, Optional

from app.config import settings

from .dataset import make_outcome
from .errors import InstanceTooLarge
from .metrics import satisfies_bounds
from .model import Dataset, DiversityConstraints, IgfBounds, Mode, Outcome, Solution, SolveStatus
from .ordering import check_prefix_feasible, smallest_ordering

logger = logging.getLogger(__name__)


def _check_budget(dataset: Dataset, k: int, budget: Optional[int]) -> None:
    budget = settings()["IGF_ORACLE_BUDGET"] if budget is None else budget
    count = math.comb(dataset.n, k) if 0 <= k <= dataset.n else 0
    if count > budget:
        raise InstanceTooLarge(f"C({dataset.n},{k}) = {count} subsets exceed the oracle budget of {budget}")


def _subsets_by_key(dataset: Dataset, k: int) -> list[tuple[str, ...]]:
    """All k-subsets, best (utility, then smallest sorted ids) first."""
    ids = sorted(dataset.ranked_ids)   # ascending ids, so combinations come out sorted
    subsets = list(itertools.combinations(ids, k))
    # utility descending; the stable sort keeps lexicographic order within ties
    subsets.sort(key=lambda s: -sum(dataset.units(i) for i in s))
    return subsets


def _feasible(
    dataset: Dataset, subset: tuple[str, ...], constraints: DiversityConstraints, bounds: IgfBounds
) -> bool:
    if not satisfies_bounds(dataset, make_outcome(dataset, subset), bounds):
        return False
    return check_prefix_feasible(dataset, subset, constraints) is not None


def brute_force_solve(
    dataset: Dataset,
    constraints: DiversityConstraints,
    bounds: Optional[IgfBounds] = None,
    mode: Mode = Mode.RATIO,
    budget: Optional[int] = None,
) -> Solution:
    """Exact optimum by enumeration, with the same tie-break as the solver."""
    bounds = bounds or IgfBounds.uniform(dataset, Mode(mode), 0)
    k = constraints.k
    _check_budget(dataset, k, budget)
    started = time.monotonic()
    if k > dataset.n:
        return Solution(status=SolveStatus.INFEASIBLE)

    checked = 0
    for subset in _subsets_by_key(dataset, k):
        checked += 1
        if _feasible(dataset, subset, constraints, bounds):
            ordering = smallest_ordering(dataset, subset, constraints)
            outcome = make_outcome(dataset, ordering)
            logger.debug("oracle optimum after %d subsets", checked)
            return Solution(
                status=SolveStatus.OPTIMAL,
                outcome=outcome,
                objective=outcome.utility,
                nodes=checked,
                wall_time=time.monotonic() - started,
            )
    return Solution(status=SolveStatus.INFEASIBLE, nodes=checked, wall_time=time.monotonic() - started)


def feasible_outcomes(
    dataset: Dataset,
    constraints: DiversityConstraints,
    bounds: Optional[IgfBounds] = None,
    budget: Optional[int] = None,
) -> Iterator[Outcome]:
    """Every feasible set (as its smallest ordering), best key first."""
    bounds = bounds or IgfBounds.uniform(dataset, Mode.RATIO, 0)
    k = constraints.k
    _check_budget(dataset, k, budget)
    if k > dataset.n:
        return
    for subset in _subsets_by_key(dataset, k):
        if _feasible(dataset, subset, constraints, bounds):
            yield make_outcome(dataset, smallest_ordering(dataset, subset, constraints))

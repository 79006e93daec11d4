"""leximin.py

Leximin balancing of in-group fairness across groups.

Each round raises one common bound q on every floating group as far as
it stays feasible (bisection over feasibility checks), then freezes the
groups that cannot go higher. Rounds repeat until every group is frozen;
a last optimising solve returns the utility-maximising outcome under the
frozen bounds.
"""

from __future__ import annotations

import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Optional

from app.config import settings

from .constraints import validate_constraints
from .errors import InfeasibleError, ModelError, SolverError
from .metrics import igf_vector
from .model import (
    Dataset,
    DiversityConstraints,
    IgfBounds,
    LeximinCheck,
    LeximinRound,
    LeximinTrace,
    Mode,
    Outcome,
    Solution,
    SolveStatus,
    SolverOptions,
    to_fraction,
)
from .ordering import prefix_ok
from .program import build_model
from .solver import solve_ip

logger = logging.getLogger(__name__)

ONE = Fraction(1)


class _Checker:
    """Feasibility queries for one (dataset, constraints) pair; counts solves."""

    def __init__(self, dataset: Dataset, constraints: DiversityConstraints, options: SolverOptions) -> None:
        self.dataset = dataset
        self.constraints = constraints
        self.options = options
        self.check_options = options.model_copy(update={"first_feasible": True, "workers": 1})
        self.solves = 0
        self._lock = threading.Lock()

    def _count(self) -> None:
        with self._lock:
            self.solves += 1

    def check(self, bounds: IgfBounds) -> Solution:
        self._count()
        return solve_ip(build_model(self.dataset, self.constraints, bounds), self.check_options)

    def optimise(self, bounds: IgfBounds) -> Solution:
        self._count()
        return solve_ip(build_model(self.dataset, self.constraints, bounds), self.options)


def _feasible(sol: Solution) -> bool:
    return sol.outcome is not None


def _floating_min(dataset: Dataset, outcome: Outcome, mode: Mode, floating: list[str]) -> Fraction:
    values = igf_vector(dataset, outcome, mode).values
    return min((values[v] for v in floating), default=ONE)


def _raise(bounds: IgfBounds, q: Fraction, floating: list[str]) -> IgfBounds:
    return bounds.with_values({v: q for v in floating})


def maximin_q(
    dataset: Dataset,
    constraints: DiversityConstraints,
    mode: Mode,
    frozen: IgfBounds,
    epsilon: Fraction | float | str,
    options: Optional[SolverOptions] = None,
    *,
    floor: Optional[Fraction] = None,
    _checker: Optional[_Checker] = None,
) -> tuple[Fraction, list[LeximinCheck]]:
    """Largest common bound q on the floating groups, to within *epsilon*.

    The search interval starts at [lo, 1], where lo is the lowest bound
    already set on a floating group, raised to *floor* when given. Both
    must be levels some feasible ranking reaches. A feasible check moves
    the lower end to the smallest floating value its ranking reaches.
    """
    eps = to_fraction(epsilon)
    checker = _checker or _Checker(dataset, constraints, options or SolverOptions())
    floating = frozen.floating()
    checks: list[LeximinCheck] = []
    if not floating:
        return ONE, checks
    start = max(min(frozen.q[v] for v in floating), floor or Fraction(0))
    if start >= 1:
        return ONE, checks

    top = checker.check(_raise(frozen, ONE, floating))
    checks.append(LeximinCheck(
        lo=start, hi=ONE, q=ONE, feasible=_feasible(top),
        achieved=_floating_min(dataset, top.outcome, mode, floating) if top.outcome else None,
        limit_hit=top.status == SolveStatus.LIMIT_REACHED and top.outcome is None,
    ))
    if _feasible(top):
        return ONE, checks

    lo, hi = start, ONE
    while hi - lo >= eps:
        q = (lo + hi) / 2
        sol = checker.check(_raise(frozen, q, floating))
        limit_hit = sol.status == SolveStatus.LIMIT_REACHED and sol.outcome is None
        achieved = None
        if _feasible(sol):
            achieved = _floating_min(dataset, sol.outcome, mode, floating)
            lo = max(q, min(achieved, hi))
        else:
            hi = q
        checks.append(LeximinCheck(lo=lo, hi=hi, q=q, feasible=achieved is not None, achieved=achieved,
                                   limit_hit=limit_hit))
        logger.info("check q=%.6f feasible=%s interval=[%.6f, %.6f]", float(q), achieved is not None,
                    float(lo), float(hi))
    return lo, checks


def binding_groups(
    dataset: Dataset,
    constraints: DiversityConstraints,
    mode: Mode,
    frozen: IgfBounds,
    q_star: Fraction,
    epsilon: Fraction | float | str,
    options: Optional[SolverOptions] = None,
    *,
    _checker: Optional[_Checker] = None,
) -> tuple[list[str], bool]:
    """Floating groups that cannot be raised to q* + epsilon; ``(groups, fallback)``.

    When no single group is blocked, the group with the smallest value in
    the optimal outcome at q* is returned (ties in schema order) and
    ``fallback`` is True.
    """
    eps = to_fraction(epsilon)
    options = options or SolverOptions()
    checker = _checker or _Checker(dataset, constraints, options)
    floating = frozen.floating()
    if q_star >= 1:
        return list(floating), False

    level = _raise(frozen, q_star, floating)
    target = min(ONE, q_star + eps)

    def blocked(v: str) -> bool:
        return not _feasible(checker.check(level.with_values({v: target})))

    if options.workers > 1:
        with ThreadPoolExecutor(max_workers=options.workers) as pool:
            flags = list(pool.map(blocked, floating))
    else:
        flags = [blocked(v) for v in floating]
    binding = [v for v, flag in zip(floating, flags) if flag]
    if binding:
        return binding, False

    best = checker.optimise(level)
    if best.outcome is None:
        # q* was feasible a moment ago; only a solver limit gets here
        raise SolverError("optimal solve at the maximin level found no ranking")
    values = igf_vector(dataset, best.outcome, mode).values
    weakest = min(floating, key=lambda v: (values[v], floating.index(v)))
    return [weakest], True


def leximin_solve(
    dataset: Dataset,
    constraints: DiversityConstraints,
    mode: Mode,
    epsilon: Fraction | float | str | None = None,
    options: Optional[SolverOptions] = None,
    start: Optional[Outcome] = None,
) -> LeximinTrace:
    """Freeze groups round by round, then optimise utility under the frozen bounds.

    *start* is a ranking known to meet the diversity constraints, such as
    the diversity-only optimum. The first round never settles below its
    weakest group, so the result's minimum is at least that ranking's.
    Without it the diversity-only check's ranking plays that part.
    """
    mode = Mode(mode)
    eps = to_fraction(settings()["IGF_EPSILON"] if epsilon is None else epsilon)
    if not 0 < eps < 1:
        raise ValueError(f"epsilon={eps} outside (0, 1)")
    if start is not None and not prefix_ok(dataset, start.ranking, constraints):
        raise ModelError("start ranking does not meet the diversity constraints")
    options = options or SolverOptions()
    checker = _Checker(dataset, constraints, options)

    bounds = IgfBounds.uniform(dataset, mode, 0)
    base = checker.check(bounds)
    if base.outcome is None:
        if base.status == SolveStatus.LIMIT_REACHED:
            raise SolverError("diversity-only check hit the solver limit before finding a ranking")
        diagnosis = [v.model_dump() for v in validate_constraints(constraints, dataset)]
        raise InfeasibleError("diversity constraints admit no ranking", diagnosis)

    floor: Optional[Fraction] = igf_vector(dataset, start or base.outcome, mode).minimum()
    rounds: list[LeximinRound] = []
    while bounds.floating():
        floating = bounds.floating()
        level = max(min(bounds.q[v] for v in floating), floor or Fraction(0))
        q_star, checks = maximin_q(dataset, constraints, mode, bounds, eps, options, floor=floor, _checker=checker)
        floor = None
        binding, fallback = binding_groups(dataset, constraints, mode, bounds, q_star, eps, options, _checker=checker)
        bounds = bounds.with_values({v: q_star for v in floating if v not in binding})
        bounds = bounds.with_values({v: q_star for v in binding}, freeze=True)
        rounds.append(LeximinRound(
            floating=tuple(floating),
            checks=tuple(checks),
            start=level,
            q=q_star,
            frozen=tuple(binding),
            fallback=fallback,
        ))
        logger.info("round %d: q*=%.6f froze %s%s", len(rounds), float(q_star), binding,
                    " (fallback)" if fallback else "")

    final = checker.optimise(bounds)
    igf = igf_vector(dataset, final.outcome, mode) if final.outcome else None
    return LeximinTrace(
        mode=mode,
        epsilon=eps,
        rounds=tuple(rounds),
        bounds=bounds,
        solution=final,
        igf=igf,
        solves=checker.solves,
    )

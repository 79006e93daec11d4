"""solver.py

Exact branch-and-bound for the ranking program.

Utility depends only on *which* items are chosen, so the search runs over
the selection variables x_i. It uses the cardinality row, every group's
full-prefix demand and the in-group fairness rows in 0/1-equivalent form:

* ratio mode: taking x_i forces every member j of i's groups with
  q_v·s_j > s_i, and transitively what those force. With C(i) that
  closure, one row per item: Σ_{j∈C(i)} x_j ≥ |C(i)|·x_i. Items with
  |C(i)| ≥ k are fixed to 0 at the root;
* aggregated mode: the program's own Σ s_h·x_h ≥ q_v·S_{i,v}·x_i rows.

Fairness rows enter the node LP only once the LP point violates them.
Every integral point is settled exactly (metrics plus prefix ordering) and
then split into exclusion children, so equal-utility sets are still seen
and the tie-break below decides between them.

Tie-break: among maximum-utility sets the one with the lexicographically
smallest sorted id tuple wins, then its lexicographically smallest
feasible ordering.
"""

from __future__ import annotations

import logging
import math
import threading
import time
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Any, Mapping, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict

from .dataset import make_outcome
from .errors import ModelError, SolverError
from .metrics import satisfies_bounds
from .model import Mode, Solution, SolverOptions, SolveStatus
from .ordering import check_prefix_feasible, smallest_ordering
from .program import IntegerProgram, aggregated_rows, constrained_groups
from .simplex import LpResult, solve_lp

logger = logging.getLogger(__name__)

VIOLATION_TOL = 1e-7
ROWS_PER_ROUND = 64


# -----------------------------------------------------------------------------
# LP relaxation of the full program
# -----------------------------------------------------------------------------

class Relaxation(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    status: str
    bound: Optional[float] = None
    point: Optional[dict[str, float]] = None


def solve_lp_relaxation(
    program: IntegerProgram,
    fixings: Optional[Mapping[Any, int]] = None,
    options: Optional[SolverOptions] = None,
) -> Relaxation:
    """Relax every binary of *program* to [0, 1] and solve.

    *fixings* maps item ids (fixing x_i) or variable names to 0 or 1.
    The returned bound dominates the value of any integral completion.
    """
    options = options or SolverOptions()
    program.check_shape()
    names = {var.name: j for j, var in enumerate(program.variables)}
    lower = np.array([float(var.lower) for var in program.variables])
    upper = np.array([float(var.upper) for var in program.variables])
    for key, value in (fixings or {}).items():
        if value not in (0, 1):
            raise ModelError(f"fixing of {key!r} must be 0 or 1, got {value!r}")
        if program.has_var("x", key):
            j = program.var("x", key)
        elif key in names:
            j = names[key]
        else:
            raise ModelError(f"fixing names unknown variable {key!r}")
        if not program.variables[j].binary:
            raise ModelError(f"cannot fix continuous variable {key!r}")
        lower[j] = upper[j] = float(value)

    width = len(program.variables)
    A = np.zeros((len(program.rows), width))
    for r, row in enumerate(program.rows):
        for j, coef in row.coefs.items():
            A[r, j] = float(coef)
    c = np.zeros(width)
    for j, coef in program.objective.items():
        c[j] = float(coef)
    result = solve_lp(
        c,
        A,
        [row.sense for row in program.rows],
        [float(row.rhs) for row in program.rows],
        lower,
        upper,
        tol=options.feasibility_tol,
        deadline=time.monotonic() + options.time_limit if options.time_limit else None,
    )
    if result.status != "optimal":
        return Relaxation(status=result.status)
    point = {var.name: float(result.x[j]) for j, var in enumerate(program.variables)}
    return Relaxation(status="optimal", bound=result.value, point=point)


# -----------------------------------------------------------------------------
# Selection view and lazy fairness rows
# -----------------------------------------------------------------------------

class _Selection:
    """Everything the search needs, indexed by item position in item order."""

    def __init__(self, program: IntegerProgram) -> None:
        ds = program.dataset
        self.program = program
        self.dataset = ds
        self.constraints = program.constraints
        self.bounds = program.bounds
        self.k = program.k
        self.ids = ds.ranked_ids
        self.n = len(self.ids)
        self.pos = {item_id: i for i, item_id in enumerate(self.ids)}
        self.units = [ds.units(i) for i in self.ids]
        self.cost = np.array(self.units, dtype=float)
        self.weight = [1 << (self.n - 1 - ds.id_rank(i)) for i in self.ids]
        # branching tie-break: ascending item id
        self.id_rank = np.array([ds.id_rank(i) for i in self.ids])

        rows = [np.ones(self.n)]
        senses = ["="]
        rhs = [float(self.k)]
        for v in ds.attributes.values:
            need = self.constraints.final_demand(v)
            if need > 0:
                row = np.zeros(self.n)
                row[[self.pos[h] for h in ds.members(v)]] = 1.0
                rows.append(row)
                senses.append(">=")
                rhs.append(float(need))
        self.base_A = np.vstack(rows)
        self.base_senses = senses
        self.base_b = rhs

        self.root_fix = np.full(self.n, -1, dtype=np.int8)
        self.pool_keys: list[tuple] = []
        self.pool_rows = np.zeros((0, self.n))
        if program.mode == Mode.RATIO:
            self._ratio_pool()
        else:
            self._aggregated_pool()

    def _ratio_pool(self) -> None:
        ds = self.dataset
        # bitmask over positions of the members x_i directly forces
        direct = [0] * self.n
        for v in constrained_groups(ds, self.bounds):
            q = self.bounds.q[v]
            members = ds.members(v)
            scores = [ds.score(h) for h in members]
            prefix = 0
            cnt = 0
            for i, s_i in enumerate(scores):
                # scores descend, so the forced prefix only grows
                while cnt < len(members) and q * scores[cnt] > s_i:
                    prefix |= 1 << self.pos[members[cnt]]
                    cnt += 1
                direct[self.pos[members[i]]] |= prefix

        # forced members score strictly higher, so they come earlier in item order
        closure = [0] * self.n
        rows = []
        for i in range(self.n):
            mask = direct[i]
            rest = mask
            while rest:
                low = rest & -rest
                mask |= closure[low.bit_length() - 1]
                rest ^= low
            closure[i] = mask
            size = mask.bit_count()
            if size == 0:
                continue
            if size >= self.k:
                self.root_fix[i] = 0
                continue
            row = np.zeros(self.n)
            row[[j for j in range(i) if mask >> j & 1]] = 1.0 / size
            row[i] = -1.0
            rows.append(row)
            self.pool_keys.append(("imp", self.ids[i]))
        if rows:
            self.pool_rows = np.vstack(rows)
        fixed = int((self.root_fix == 0).sum())
        if fixed:
            logger.debug("ratio closure fixes %d of %d items to 0", fixed, self.n)

    def _aggregated_pool(self) -> None:
        rows = []
        for v, item_id, coefs in aggregated_rows(self.dataset, self.bounds):
            s_i = self.dataset.score(item_id)
            # coefs hold the better-or-equal members in descending score order
            others = [c for h, c in coefs.items() if h != item_id]
            if s_i + sum(others[: max(self.k - 1, 0)]) < s_i - coefs[item_id]:
                # even the k - 1 best partners cannot carry q·S_{i,v}
                self.root_fix[self.pos[item_id]] = 0
                continue
            row = np.zeros(self.n)
            for h, c in coefs.items():
                row[self.pos[h]] = float(c)
            row /= np.abs(row).max()
            rows.append(row)
            self.pool_keys.append(("agg", v, item_id))
        if rows:
            self.pool_rows = np.vstack(rows)
        fixed = int((self.root_fix == 0).sum())
        if fixed:
            logger.debug("aggregated mass bound fixes %d of %d items to 0", fixed, self.n)

    def violated(self, x: np.ndarray, active: set[tuple]) -> list[tuple[float, tuple, np.ndarray]]:
        """Fairness rows (``a·x >= 0`` form) the point *x* violates."""
        if not self.pool_keys:
            return []
        act = self.pool_rows @ x
        found = [
            (-float(act[r]), self.pool_keys[r], self.pool_rows[r])
            for r in np.flatnonzero(act < -VIOLATION_TOL)
            if self.pool_keys[r] not in active
        ]
        found.sort(key=lambda f: (-f[0], f[1]))
        return found

    def key_of(self, chosen: list[int]) -> tuple[int, int]:
        return (sum(self.units[i] for i in chosen), sum(self.weight[i] for i in chosen))

    def settle(self, chosen: list[int]) -> Optional[tuple[str, ...]]:
        """Exact feasibility of an integral selection; returns an ordering."""
        if len(chosen) != self.k:
            return None
        sel = [self.ids[i] for i in chosen]
        if not satisfies_bounds(self.dataset, make_outcome(self.dataset, sel), self.bounds):
            return None
        return check_prefix_feasible(self.dataset, sel, self.constraints)


class _Cuts:
    """Per-worker set of activated fairness rows."""

    def __init__(self) -> None:
        self.keys: set[tuple] = set()
        self.rows: list[np.ndarray] = []

    def add(self, key: tuple, row: np.ndarray) -> None:
        self.keys.add(key)
        self.rows.append(row)


# -----------------------------------------------------------------------------
# Search
# -----------------------------------------------------------------------------

class _Node:
    __slots__ = ("bound", "depth", "fix")

    def __init__(self, bound: float, depth: int, fix: np.ndarray) -> None:
        self.bound = bound
        self.depth = depth
        self.fix = fix   # -1 free, 0 or 1 fixed


class _Search:
    def __init__(self, sel: _Selection, options: SolverOptions) -> None:
        self.sel = sel
        self.options = options
        self.lock = threading.Lock()
        self.best_key: Optional[tuple[int, int]] = None
        self.best_set: Optional[tuple[int, ...]] = None
        self.nodes = 0
        self.limit_hit = False
        self.found_first = False
        self.started = time.monotonic()
        self.deadline = self.started + options.time_limit if options.time_limit else None

    # -- shared state -----------------------------------------------------------
    def _tick(self) -> bool:
        """Count a node; False once a limit is reached or the search should stop."""
        with self.lock:
            if self.limit_hit or self.found_first:
                return False
            if self.options.node_limit is not None and self.nodes >= self.options.node_limit:
                self.limit_hit = True
                return False
            if self.deadline is not None and time.monotonic() > self.deadline:
                self.limit_hit = True
                return False
            self.nodes += 1
            return True

    def _stop(self) -> None:
        with self.lock:
            if not self.limit_hit:
                logger.info("time limit reached inside a node LP after %d nodes", self.nodes)
            self.limit_hit = True

    def _offer(self, chosen: list[int]) -> None:
        key = self.sel.key_of(chosen)
        with self.lock:
            if self.best_key is None or key > self.best_key:
                self.best_key = key
                self.best_set = tuple(sorted(chosen))
                logger.debug("incumbent utility=%d units after %d nodes", key[0], self.nodes)
            if self.options.first_feasible:
                self.found_first = True

    def _pruned(self, bound: float) -> bool:
        with self.lock:
            best = self.best_key
        if best is None or not math.isfinite(bound):
            return False
        return math.floor(bound + 1e-6 * max(1.0, abs(bound))) < best[0]

    # -- node processing -------------------------------------------------------
    def _relax(self, node: _Node, cuts: _Cuts) -> Optional[LpResult]:
        sel = self.sel
        lower = (node.fix == 1).astype(float)
        upper = (node.fix != 0).astype(float)
        while True:
            A = sel.base_A if not cuts.rows else np.vstack([sel.base_A, *cuts.rows])
            senses = sel.base_senses + [">="] * len(cuts.rows)
            b = sel.base_b + [0.0] * len(cuts.rows)
            res = solve_lp(
                sel.cost, A, senses, b, lower, upper, tol=self.options.feasibility_tol, deadline=self.deadline
            )
            if res.status == "time_limit":
                self._stop()
                return None
            if res.status != "optimal":
                return None
            found = sel.violated(res.x, cuts.keys)
            if not found:
                return res
            for _, key, row in found[:ROWS_PER_ROUND]:
                cuts.add(key, row)

    def process(self, node: _Node, cuts: _Cuts) -> list[_Node]:
        """Solve one node; return its children in push order (last is explored first)."""
        if self._pruned(node.bound):
            return []
        res = self._relax(node, cuts)
        if res is None or self._pruned(res.value):
            return []
        x = res.x
        tol = self.options.integrality_tol
        frac = np.abs(x - np.round(x))
        if frac.max() > tol:
            # most fractional, ties by ascending id
            closeness = np.round(np.abs(x - 0.5), 9)
            cand = np.flatnonzero(frac > tol)
            best = min(cand, key=lambda i: (closeness[i], self.sel.id_rank[i]))
            zero, one = node.fix.copy(), node.fix.copy()
            zero[best], one[best] = 0, 1
            return [_Node(res.value, node.depth + 1, zero), _Node(res.value, node.depth + 1, one)]

        chosen = [int(i) for i in np.flatnonzero(x > 0.5)]
        if self.sel.settle(chosen) is not None:
            self._offer(chosen)
        # exclusion children: child t keeps free picks 1..t-1 and drops pick t
        free = [i for i in chosen if node.fix[i] == -1]
        children = []
        fix = node.fix.copy()
        for i in free:
            child = fix.copy()
            child[i] = 0
            children.append(_Node(res.value, node.depth + 1, child))
            fix[i] = 1
        # the last child keeps the most picks and is explored first
        return children

    def dfs(self, stack: list[_Node], cuts: _Cuts) -> None:
        local = 0
        while stack:
            if not self._tick():
                return
            local += 1
            if local % self.options.restart_interval == 0:
                stack.sort(key=lambda nd: nd.bound)
            if self.nodes % self.options.log_interval == 0:
                self._log(stack)
            node = stack.pop()
            stack.extend(self.process(node, cuts))

    def _log(self, stack: list[_Node]) -> None:
        best = self.best_key[0] / self.sel.dataset.scale if self.best_key else None
        top = max((nd.bound for nd in stack), default=float("nan")) / self.sel.dataset.scale
        depth = stack[-1].depth if stack else 0
        logger.info("nodes=%d bound=%.4f incumbent=%s depth=%d open=%d", self.nodes, top, best, depth, len(stack))

    def run(self) -> None:
        root = _Node(math.inf, 0, self.sel.root_fix.copy())
        workers = self.options.workers
        if workers <= 1 or self.options.first_feasible:
            self.dfs([root], _Cuts())
            return

        # breadth-first split into subtrees, then explore them in parallel
        frontier: deque[_Node] = deque([root])
        cuts = _Cuts()
        while frontier and len(frontier) < 4 * workers:
            if not self._tick():
                return
            frontier.extend(reversed(self.process(frontier.popleft(), cuts)))
        subtrees = list(frontier)

        def explore(node: _Node) -> None:
            local = _Cuts()
            local.keys = set(cuts.keys)
            local.rows = list(cuts.rows)
            self.dfs([node], local)

        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(explore, subtrees))


def solve_ip(program: IntegerProgram, options: Optional[SolverOptions] = None) -> Solution:
    """Maximum-utility ranking of *program*, with the deterministic tie-break."""
    options = options or SolverOptions()
    program.check_shape()
    started = time.monotonic()
    sel = _Selection(program)
    search = _Search(sel, options)
    search.run()
    wall = time.monotonic() - started

    if search.best_set is None:
        status = SolveStatus.LIMIT_REACHED if search.limit_hit else SolveStatus.INFEASIBLE
        logger.info("solve finished: %s after %d nodes (%.2fs)", status.value, search.nodes, wall)
        return Solution(status=status, nodes=search.nodes, wall_time=wall)

    if search.found_first:
        status = SolveStatus.FEASIBLE
    elif search.limit_hit:
        status = SolveStatus.LIMIT_REACHED
    else:
        status = SolveStatus.OPTIMAL

    chosen = [sel.ids[i] for i in search.best_set]
    ordering = smallest_ordering(program.dataset, chosen, program.constraints)
    if ordering is None:
        raise SolverError(f"accepted set {sorted(chosen)} has no feasible ordering")
    outcome = make_outcome(program.dataset, ordering)
    broken = program.verify(program.assignment(outcome))
    if broken:
        raise SolverError(f"solution violates program rows {broken[:5]}")
    if not satisfies_bounds(program.dataset, outcome, program.bounds):
        raise SolverError("solution misses an in-group fairness bound")

    logger.info(
        "solve finished: %s utility=%s after %d nodes (%.2fs)", status.value, outcome.utility, search.nodes, wall
    )
    return Solution(
        status=status,
        outcome=outcome,
        objective=Fraction(outcome.utility),
        nodes=search.nodes,
        wall_time=wall,
    )

"""simplex.py

Dense bounded-variable primal simplex (two phases, numpy tableau).

Solves ``max c·x`` subject to ``A x (<=|>=|=) b`` and ``lower <= x <= upper``
with finite lower bounds. Nonbasic columns rest at either bound, so 0/1
fixings from branch-and-bound are plain bound changes.

Pricing is Dantzig (largest reduced cost). After a run of degenerate
pivots the solve switches to Bland's rule for the remainder, which rules
out cycling.
"""

from __future__ import annotations

import logging
import time
from typing import Literal, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict

from .errors import SolverError

logger = logging.getLogger(__name__)

PIVOT_TOL = 1e-9
DEGENERATE_STREAK = 50


class LpResult(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    status: Literal["optimal", "infeasible", "unbounded", "time_limit"]
    x: Optional[np.ndarray] = None
    value: Optional[float] = None
    iterations: int = 0


class _Tableau:
    def __init__(self, M: np.ndarray, x: np.ndarray, lo: np.ndarray, hi: np.ndarray, basis: np.ndarray) -> None:
        self.M = M
        self.x = x
        self.lo = lo
        self.hi = hi
        self.basis = basis
        self.is_basic = np.zeros(M.shape[1], dtype=bool)
        self.is_basic[basis] = True
        self.at_upper = np.zeros(M.shape[1], dtype=bool)
        self.iterations = 0

    def pivot(self, r: int, j: int) -> None:
        M = self.M
        M[r] /= M[r, j]
        col = M[:, j].copy()
        col[r] = 0.0
        M -= np.outer(col, M[r])
        self.is_basic[self.basis[r]] = False
        self.basis[r] = j
        self.is_basic[j] = True

    def run(
        self, cost: np.ndarray, allowed: np.ndarray, tol: float, max_iter: int, deadline: Optional[float] = None
    ) -> str:
        """Primal simplex on the current basis; returns ``optimal``, ``unbounded`` or ``time_limit``."""
        M, x, lo, hi = self.M, self.x, self.lo, self.hi
        m = M.shape[0]
        d = cost - cost[self.basis] @ M if m else cost.copy()
        movable = allowed & (hi - lo > tol)
        bland = False
        streak = 0

        while True:
            if self.iterations >= max_iter:
                raise SolverError(f"simplex exceeded {max_iter} iterations")
            if deadline is not None and time.monotonic() > deadline:
                return "time_limit"
            free = movable & ~self.is_basic
            up = free & ~self.at_upper & (d > tol)
            down = free & self.at_upper & (d < -tol)
            cand = np.flatnonzero(up | down)
            if cand.size == 0:
                return "optimal"
            j = int(cand[0]) if bland else int(cand[np.argmax(np.abs(d[cand]))])
            delta = 1.0 if up[j] else -1.0

            g = delta * M[:, j]
            xb = x[self.basis]
            limits = np.full(m, np.inf)
            pos = g > PIVOT_TOL
            neg = g < -PIVOT_TOL
            limits[pos] = (xb[pos] - lo[self.basis][pos]) / g[pos]
            limits[neg] = (hi[self.basis][neg] - xb[neg]) / -g[neg]
            np.maximum(limits, 0.0, out=limits)
            step_row = float(limits.min()) if m else np.inf
            step_flip = hi[j] - lo[j]

            if not np.isfinite(step_row) and not np.isfinite(step_flip):
                return "unbounded"

            self.iterations += 1
            if step_flip <= step_row:
                t = step_flip
                x[self.basis] = xb - g * t
                self.at_upper[j] = delta > 0
                x[j] = hi[j] if delta > 0 else lo[j]
            else:
                t = step_row
                ties = np.flatnonzero(limits <= step_row + tol)
                if bland:
                    r = int(ties[np.argmin(self.basis[ties])])
                else:
                    r = int(ties[np.argmax(np.abs(g[ties]))])
                leaving = int(self.basis[r])
                x[self.basis] = xb - g * t
                entering_value = (lo[j] if delta > 0 else hi[j]) + delta * t
                if g[r] > 0:
                    x[leaving] = lo[leaving]
                    self.at_upper[leaving] = False
                else:
                    x[leaving] = hi[leaving]
                    self.at_upper[leaving] = True
                self.pivot(r, j)
                x[j] = entering_value
                self.at_upper[j] = False
                d = d - d[j] * M[r]

            streak = streak + 1 if t <= tol else 0
            if not bland and streak > DEGENERATE_STREAK:
                logger.debug("degenerate streak of %d pivots; switching to Bland's rule", streak)
                bland = True


def solve_lp(
    c: Sequence[float],
    A: np.ndarray,
    senses: Sequence[str],
    b: Sequence[float],
    lower: Sequence[float],
    upper: Sequence[float],
    *,
    tol: float = 1e-9,
    max_iter: Optional[int] = None,
    deadline: Optional[float] = None,
) -> LpResult:
    """Maximise ``c·x`` over the box-bounded polyhedron.

    ``senses`` holds ``"<="``, ``">="`` or ``"="`` per row. Upper bounds may
    be ``inf``; lower bounds must be finite. *deadline* is a
    ``time.monotonic()`` instant; past it the solve stops with status
    ``time_limit``.
    """
    c = np.asarray(c, dtype=float)
    n = c.size
    A = np.asarray(A, dtype=float).reshape(-1, n)
    b = np.asarray(b, dtype=float)
    m = A.shape[0]
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    if len(senses) != m or b.size != m or lower.size != n or upper.size != n:
        raise SolverError(f"LP dimension mismatch: {m} rows, {len(senses)} senses, {b.size} rhs, {n} columns")
    if not np.all(np.isfinite(lower)):
        raise SolverError("LP lower bounds must be finite")
    if np.any(lower > upper + tol):
        return LpResult(status="infeasible")

    slack_rows = [(i, 1.0 if s == "<=" else -1.0) for i, s in enumerate(senses) if s != "="]
    bad = [s for s in senses if s not in ("<=", ">=", "=")]
    if bad:
        raise SolverError(f"unknown row senses {sorted(set(bad))}")
    ns = len(slack_rows)
    width = n + ns + m
    full = np.zeros((m, width))
    full[:, :n] = A
    for k, (i, sign) in enumerate(slack_rows):
        full[i, n + k] = sign

    lo = np.concatenate([lower, np.zeros(ns + m)])
    hi = np.concatenate([upper, np.full(ns + m, np.inf)])
    x = lo.copy()
    resid = b - full[:, : n + ns] @ x[: n + ns]
    sign = np.where(resid >= 0, 1.0, -1.0)
    art = np.arange(n + ns, width)
    full[np.arange(m), art] = sign
    M = full * sign[:, None]
    x[art] = np.abs(resid)

    tab = _Tableau(M, x, lo, hi, art.copy())
    limit = max_iter or 50 * (m + width) + 1000
    scale = max(1.0, float(np.abs(b).max()) if m else 1.0)

    # phase 1: drive the artificials to zero
    if m:
        cost1 = np.zeros(width)
        cost1[art] = -1.0
        if tab.run(cost1, np.ones(width, dtype=bool), tol, limit, deadline) == "time_limit":
            return LpResult(status="time_limit", iterations=tab.iterations)
        if x[art].sum() > 1e-7 * scale:
            return LpResult(status="infeasible", iterations=tab.iterations)
        for r in range(m):
            if tab.basis[r] >= n + ns:
                row = np.abs(tab.M[r, : n + ns])
                row[tab.is_basic[: n + ns]] = 0.0
                j = int(np.argmax(row)) if row.size else 0
                if row.size and row[j] > 1e-7:
                    leaving = int(tab.basis[r])
                    tab.pivot(r, j)
                    x[leaving] = 0.0
        x[art] = 0.0
        hi[art] = 0.0

    # phase 2
    cmax = float(np.abs(c).max()) if n else 0.0
    cost2 = np.zeros(width)
    if cmax > 0:
        cost2[:n] = c / cmax
    allowed = np.zeros(width, dtype=bool)
    allowed[: n + ns] = True
    status = tab.run(cost2, allowed, tol, limit, deadline)
    if status != "optimal":
        return LpResult(status=status, iterations=tab.iterations)
    sol = np.clip(x[:n], lower, upper)
    return LpResult(status="optimal", x=sol, value=float(c @ sol), iterations=tab.iterations)

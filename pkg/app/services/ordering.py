"""ordering.py

Prefix feasibility: can a selected set be ordered so that every prefix p
holds at least ℓ_{v,p} members of each value v?

Items that carry the same demanded labels are interchangeable for this
question, so the exact search runs over counts per label signature and
memoises dead states. A cheap earliest-deadline greedy is tried first.
"""

from __future__ import annotations

import logging
from typing import Iterable, Optional

from .errors import ConstraintError
from .model import Dataset, DiversityConstraints

logger = logging.getLogger(__name__)

_NO_URGENCY = 1 << 30


class PrefixSearch:
    """Exact ordering search for one (set, constraints) pair."""

    def __init__(self, dataset: Dataset, selected: Iterable[str], constraints: DiversityConstraints) -> None:
        self.dataset = dataset
        self.k = constraints.k
        self.items = sorted(selected, key=dataset.order_key)
        if len(set(self.items)) != len(self.items):
            raise ConstraintError("selected set repeats ids")
        if len(self.items) != self.k:
            raise ConstraintError(f"set has {len(self.items)} items, constraints are for k={self.k}")
        for item_id in self.items:
            dataset.item(item_id)

        self.demand = {v: row for v, row in constraints.bounds.items() if any(row)}
        self.values = list(self.demand)
        self.attrs: dict[str, list[str]] = {}
        for v in self.values:
            self.attrs.setdefault(dataset.attributes.attribute_of(v), []).append(v)

        sig_of: dict[str, tuple[str, ...]] = {}
        for item_id in self.items:
            labels = dataset.item(item_id).labels
            sig_of[item_id] = tuple(v for v in self.values if v in labels)
        self.sig_of = sig_of
        self.signatures = sorted(set(sig_of.values()))
        self.sig_index = {s: n for n, s in enumerate(self.signatures)}
        self.initial = tuple(sum(1 for i in self.items if sig_of[i] == s) for s in self.signatures)
        self._dead: set[tuple[int, ...]] = set()

    # -- helpers -------------------------------------------------------------
    def _counts(self, rem: tuple[int, ...]) -> dict[str, int]:
        placed = {v: 0 for v in self.values}
        for s, (start, left) in zip(self.signatures, zip(self.initial, rem)):
            for v in s:
                placed[v] += start - left
        return placed

    def _remaining(self, rem: tuple[int, ...]) -> dict[str, int]:
        left = {v: 0 for v in self.values}
        for s, count in zip(self.signatures, rem):
            for v in s:
                left[v] += count
        return left

    def _promising(self, rem: tuple[int, ...]) -> bool:
        """Necessary conditions for completing the order from state *rem*."""
        p = self.k - sum(rem)
        placed = self._counts(rem)
        left = self._remaining(rem)
        for v, row in self.demand.items():
            if placed[v] < (row[p - 1] if p >= 1 else 0):
                return False
            for q in range(p + 1, self.k + 1):
                if row[q - 1] - placed[v] > min(q - p, left[v]):
                    return False
        for values in self.attrs.values():
            for q in range(p + 1, self.k + 1):
                need = sum(max(0, self.demand[v][q - 1] - placed[v]) for v in values)
                if need > q - p:
                    return False
        return True

    def completes(self, rem: tuple[int, ...]) -> bool:
        """True if the positions after state *rem* can be filled."""
        if rem in self._dead:
            return False
        if not self._promising(rem):
            self._dead.add(rem)
            return False
        if sum(rem) == 0:
            return True
        for s, count in enumerate(rem):
            if count and self.completes(rem[:s] + (count - 1,) + rem[s + 1:]):
                return True
        self._dead.add(rem)
        return False

    # -- public --------------------------------------------------------------
    def greedy(self) -> Optional[tuple[str, ...]]:
        """Earliest-deadline greedy; ``None`` when it paints itself into a corner."""
        placed = {v: 0 for v in self.values}
        pool = list(self.items)
        order: list[str] = []
        width = max(1, len(self.attrs))
        for p in range(1, self.k + 1):
            slack: dict[str, int] = {}
            for v, row in self.demand.items():
                tight = _NO_URGENCY
                for q in range(p, self.k + 1):
                    deficit = row[q - 1] - placed[v]
                    if deficit > 0:
                        tight = min(tight, (q - p + 1) - deficit)
                slack[v] = tight

            def urgency(item_id: str) -> tuple[int, ...]:
                own = sorted(slack[v] for v in self.sig_of[item_id])
                return tuple(own + [_NO_URGENCY] * (width - len(own)))

            choice = min(pool, key=urgency)   # min keeps item order on ties
            pool.remove(choice)
            order.append(choice)
            for v in self.sig_of[choice]:
                placed[v] += 1
            if any(placed[v] < row[p - 1] for v, row in self.demand.items()):
                return None
        return tuple(order)

    def smallest(self) -> Optional[tuple[str, ...]]:
        """Lexicographically smallest feasible order under the item order."""
        rem = self.initial
        if not self.completes(rem):
            return None
        taken: set[str] = set()
        order: list[str] = []
        for _ in range(self.k):
            for item_id in self.items:
                if item_id in taken:
                    continue
                s = self.sig_index[self.sig_of[item_id]]
                nxt = rem[:s] + (rem[s] - 1,) + rem[s + 1:]
                if self.completes(nxt):
                    order.append(item_id)
                    taken.add(item_id)
                    rem = nxt
                    break
            else:  # pragma: no cover - completes() guaranteed a successor
                return None
        return tuple(order)


def check_prefix_feasible(
    dataset: Dataset, selected: Iterable[str], constraints: DiversityConstraints
) -> Optional[tuple[str, ...]]:
    """Some ordering of *selected* meeting every prefix bound, or ``None``."""
    search = PrefixSearch(dataset, selected, constraints)
    order = search.greedy()
    if order is not None:
        return order
    return search.smallest()


def smallest_ordering(
    dataset: Dataset, selected: Iterable[str], constraints: DiversityConstraints
) -> Optional[tuple[str, ...]]:
    return PrefixSearch(dataset, selected, constraints).smallest()


def prefix_ok(dataset: Dataset, ranking: Iterable[str], constraints: DiversityConstraints) -> bool:
    """Direct check of a concrete ordering against every ℓ_{v,p}."""
    ranking = list(ranking)
    if len(ranking) != constraints.k:
        return False
    counts = {v: 0 for v in constraints.bounds}
    for p, item_id in enumerate(ranking, start=1):
        labels = dataset.item(item_id).labels
        for v in counts:
            if v in labels:
                counts[v] += 1
        if any(counts[v] < constraints.demand(v, p) for v in counts):
            return False
    return True

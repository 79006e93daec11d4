"""metrics.py

In-group fairness of an outcome, per group and as a vector.

Both measures are exact fractions in [0, 1]. A group with no accepted
member or no rejected member is vacuously fair (value 1).
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .errors import DatasetError
from .model import Dataset, IgfBounds, IgfVector, Mode, Outcome

ONE = Fraction(1)


def _check_group(dataset: Dataset, value: str) -> tuple[str, ...]:
    try:
        members = dataset.members(value)
    except KeyError:
        raise DatasetError(f"unknown attribute value {value!r}") from None
    if not members:
        raise DatasetError(f"group {value!r} is empty")
    return members


def igf_ratio(dataset: Dataset, outcome: Outcome, value: str) -> Fraction:
    """Lowest accepted over highest rejected score, clamped at 1."""
    _check_group(dataset, value)
    a_v = outcome.lowest_accepted.get(value)
    b_v = outcome.highest_rejected.get(value)
    if a_v is None or b_v is None:
        return ONE
    return min(ONE, a_v / b_v)


def igf_aggregated(dataset: Dataset, outcome: Outcome, value: str) -> Fraction:
    """Worst accepted-mass share over the accepted members of the group."""
    members = _check_group(dataset, value)
    chosen = outcome.selected
    if not any(h in chosen for h in members):
        return ONE

    worst = ONE
    idx = 0
    mass_all = Fraction(0)
    mass_acc = Fraction(0)
    # Walk score-descending; every tie block is folded in before evaluating.
    while idx < len(members):
        score = dataset.score(members[idx])
        block_end = idx
        while block_end < len(members) and dataset.score(members[block_end]) == score:
            h = members[block_end]
            mass_all += score
            if h in chosen:
                mass_acc += score
            block_end += 1
        if any(members[j] in chosen for j in range(idx, block_end)):
            worst = min(worst, mass_acc / mass_all)
        idx = block_end
    return worst


_MEASURES = {Mode.RATIO: igf_ratio, Mode.AGGREGATED: igf_aggregated}


def igf(dataset: Dataset, outcome: Outcome, value: str, mode: Mode) -> Fraction:
    return _MEASURES[Mode(mode)](dataset, outcome, value)


def igf_vector(dataset: Dataset, outcome: Outcome, mode: Mode) -> IgfVector:
    """Measure every non-empty group, in schema order."""
    mode = Mode(mode)
    measure = _MEASURES[mode]
    return IgfVector(mode=mode, values={v: measure(dataset, outcome, v) for v in dataset.present_values()})


def sorted_igf(vector: IgfVector) -> list[Fraction]:
    return vector.sorted_values()


def leximin_compare(u: Sequence[Fraction], w: Sequence[Fraction], slack: Fraction | float = 0) -> int:
    """Compare two sorted vectors leximin-wise.

    Returns 1 if *u* is better, -1 if *w* is, 0 if every coordinate lies
    within *slack* of its counterpart.
    """
    if len(u) != len(w):
        raise ValueError(f"vectors differ in length: {len(u)} vs {len(w)}")
    slack = Fraction(slack) if not isinstance(slack, Fraction) else slack
    for a, b in zip(u, w):
        if a > b + slack:
            return 1
        if b > a + slack:
            return -1
    return 0


def satisfies_bounds(dataset: Dataset, outcome: Outcome, bounds: IgfBounds) -> bool:
    """Exact check that every group meets its q_v under the bounds' measure."""
    measure = _MEASURES[bounds.mode]
    for v, q in bounds.q.items():
        if q > 0 and dataset.members(v) and measure(dataset, outcome, v) < q:
            return False
    return True

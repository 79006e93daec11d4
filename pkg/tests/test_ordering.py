import itertools

import numpy as np
import pytest

from app.services import ConstraintError, check_prefix_feasible, explicit_bounds, smallest_ordering
from app.services.ordering import PrefixSearch, prefix_ok


def test_final_position_bounds_keep_item_order(candidates, example_constraints):
    assert smallest_ordering(candidates, {"K", "G", "B", "A"}, example_constraints) == ("A", "B", "G", "K")


def test_early_bounds_pull_items_forward(candidates):
    table = explicit_bounds(4, [("Female", 1, 1), ("Male", 2, 1), ("Female", 3, 2)], candidates)
    assert smallest_ordering(candidates, ["A", "B", "C", "D"], table) == ("C", "A", "D", "B")
    order = check_prefix_feasible(candidates, ["A", "B", "C", "D"], table)
    assert prefix_ok(candidates, order, table)


def test_unorderable_set(candidates):
    table = explicit_bounds(4, [("Female", 4, 2)], candidates)
    assert check_prefix_feasible(candidates, ["A", "B", "C", "E"], table) is None
    assert not prefix_ok(candidates, ["A", "B", "C", "E"], table)


def test_size_mismatch(candidates, example_constraints):
    with pytest.raises(ConstraintError, match="k=4"):
        PrefixSearch(candidates, ["A", "B"], example_constraints)
    assert not prefix_ok(candidates, ["A", "B"], example_constraints)


def _check_against_permutations(make_instance, seed, trials, max_k):
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        k = int(rng.integers(1, max_k + 1))
        dataset, table = make_instance(rng, 8, k)
        chosen = [str(i) for i in rng.choice(list(dataset.ranked_ids), size=k, replace=False)]
        rank = {item_id: r for r, item_id in enumerate(dataset.ranked_ids)}
        feasible = sorted(
            (perm for perm in itertools.permutations(chosen) if prefix_ok(dataset, perm, table)),
            key=lambda perm: [rank[i] for i in perm],
        )
        search = PrefixSearch(dataset, chosen, table)
        found = search.smallest()
        if feasible:
            assert found == feasible[0]
        else:
            assert found is None
            assert search.greedy() is None
        greedy = search.greedy()
        if greedy is not None:
            assert prefix_ok(dataset, greedy, table)


def test_matches_exhaustive_search(make_instance):
    _check_against_permutations(make_instance, 7, 60, 5)


@pytest.mark.slow
def test_matches_exhaustive_search_up_to_six(make_instance):
    _check_against_permutations(make_instance, 8, 500, 6)

from fractions import Fraction

import numpy as np
import pytest

from app.services import (
    IgfBounds,
    InstanceTooLarge,
    Mode,
    SolveStatus,
    brute_force_solve,
    build_model,
    feasible_outcomes,
    solve_ip,
)

Q_LEVELS = [Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), Fraction(1)]


def test_oracle_on_worked_example(candidates, example_constraints):
    sol = brute_force_solve(candidates, example_constraints)
    assert sol.status == SolveStatus.OPTIMAL
    assert sol.outcome.ranking == ("A", "B", "G", "K")


def test_feasible_outcomes_best_first(candidates, example_constraints):
    outcomes = list(feasible_outcomes(candidates, example_constraints))
    assert outcomes[0].utility == 373
    assert [o.utility for o in outcomes] == sorted((o.utility for o in outcomes), reverse=True)
    # equal utility: smallest sorted ids first, so ABHK comes before ACEK
    runners_up = [o.ranking for o in outcomes if o.utility == 372]
    assert runners_up[0] == ("A", "B", "H", "K")
    assert ("A", "C", "E", "K") in runners_up


def test_budget(candidates, example_constraints):
    with pytest.raises(InstanceTooLarge, match="C\\(12,4\\) = 495"):
        brute_force_solve(candidates, example_constraints, budget=100)


def _agree(dataset, table, bounds):
    expected = brute_force_solve(dataset, table, bounds)
    got = solve_ip(build_model(dataset, table, bounds))
    assert got.status == expected.status
    if expected.status == SolveStatus.OPTIMAL:
        assert got.outcome.utility == expected.outcome.utility
        assert got.outcome.ranking == expected.outcome.ranking


@pytest.mark.parametrize("mode", list(Mode))
def test_solver_agrees_with_oracle(make_instance, mode):
    rng = np.random.default_rng(11 if mode == Mode.RATIO else 12)
    for _ in range(15):
        dataset, table = make_instance(rng, 9, int(rng.integers(1, 4)))
        q = Q_LEVELS[int(rng.integers(0, len(Q_LEVELS)))]
        _agree(dataset, table, IgfBounds.uniform(dataset, mode, q))


@pytest.mark.slow
def test_solver_agrees_with_oracle_at_scale(make_instance):
    rng = np.random.default_rng(2024)
    for trial in range(200):
        mode = list(Mode)[trial % 2]
        dataset, table = make_instance(rng, int(rng.integers(6, 13)), int(rng.integers(1, 5)))
        q = Q_LEVELS[int(rng.integers(0, len(Q_LEVELS)))]
        _agree(dataset, table, IgfBounds.uniform(dataset, mode, q))

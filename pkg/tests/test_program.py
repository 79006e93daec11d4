from fractions import Fraction

import numpy as np
import pytest

from app.services import (
    IgfBounds,
    Mode,
    ModelError,
    build_model,
    build_ratio_model,
    explicit_bounds,
    igf_vector,
    make_outcome,
    satisfies_bounds,
    solve_ip,
)
from app.services.ordering import prefix_ok
from app.services.program import aggregated_rows


def test_skeleton_shape(candidates, example_constraints):
    program = build_model(candidates, example_constraints)
    n, k = candidates.n, example_constraints.k
    assert len(program.variables) == n + n * k
    assert len(program.rows_tagged("link")) == n
    assert len(program.rows_tagged("slot")) == k
    assert len(program.rows_tagged("card")) == 1
    assert len(program.rows_tagged("div")) == 5
    assert program.objective[program.var("x", "A")] == 99


def test_feasible_outcome_verifies(candidates, example_constraints):
    bounds = IgfBounds.uniform(candidates, Mode.RATIO, Fraction(86, 96))
    program = build_model(candidates, example_constraints, bounds)
    outcome = make_outcome(candidates, ["A", "B", "G", "K"])
    values = program.assignment(outcome)
    assert program.verify(values) == []
    assert program.objective_value(values) == 373


def test_ratio_bound_rejects_unfair_outcome(candidates, example_constraints):
    bounds = IgfBounds.uniform(candidates, Mode.RATIO, Fraction(9, 10))
    program = build_model(candidates, example_constraints, bounds)
    broken = program.verify(program.assignment(make_outcome(candidates, ["A", "B", "G", "K"])))
    assert ("ratio", "Female") in broken


def test_diversity_row_catches_bad_order(candidates):
    table = explicit_bounds(4, [("Female", 1, 1)], candidates)
    program = build_model(candidates, table)
    broken = program.verify(program.assignment(make_outcome(candidates, ["A", "C", "B", "D"])))
    assert ("div", "Female", 1) in broken
    assert program.verify(program.assignment(make_outcome(candidates, ["C", "A", "B", "D"]))) == []


def test_aggregated_rows_match_metric(candidates, example_constraints):
    q = Fraction(1, 2)
    bounds = IgfBounds.uniform(candidates, Mode.AGGREGATED, q)
    program = build_model(candidates, example_constraints, bounds)
    assert program.mode == Mode.AGGREGATED
    # the top member of every group holds its own row trivially
    assert ("agg", "Black", "E") not in [r.tag for r in program.rows_tagged("agg")]
    broken = program.verify(program.assignment(make_outcome(candidates, ["A", "B", "G", "K"])))
    assert ("agg", "Black", "G") in broken


def test_aggregated_row_coefficients(candidates):
    bounds = IgfBounds.uniform(candidates, Mode.AGGREGATED, Fraction(1, 2))
    rows = {(v, i): row for v, i, row in aggregated_rows(candidates, bounds)}
    row = rows[("Black", "G")]
    # 91 x_E + 91 x_F + (90 - 272/2) x_G >= 0
    assert row == {"E": 91, "F": 91, "G": 90 - 136}


def test_input_checks(candidates, example_constraints):
    with pytest.raises(ModelError, match="bounds are for"):
        build_ratio_model(candidates, example_constraints, IgfBounds.uniform(candidates, Mode.AGGREGATED))
    with pytest.raises(ModelError, match="exceeds n"):
        build_model(candidates, explicit_bounds(13, []))
    with pytest.raises(ModelError, match="unknown attribute values"):
        build_model(candidates, explicit_bounds(4, [("Purple", 1, 1)]))


def test_lp_dump(candidates, example_constraints):
    text = build_model(candidates, example_constraints, IgfBounds.uniform(candidates, Mode.RATIO, "0.5")).to_lp_format()
    lines = text.splitlines()
    assert lines[0] == "\\ ratio mode, n=12, k=4"
    assert "Maximize" in lines and "Subject To" in lines and "Binary" in lines
    assert lines[-1] == "End"
    assert " obj: 99.000000 x_0 + 98.000000 x_1" in text
    assert "Bounds" in lines


def test_verified_assignments_are_exactly_the_fair_diverse_rankings(make_instance):
    rng = np.random.default_rng(21)
    levels = [Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), Fraction(9, 10), Fraction(1)]
    accepted = rejected = 0
    for trial in range(40):
        k = int(rng.integers(2, 5))
        dataset, table = make_instance(rng, 8, k)
        mode = list(Mode)[trial % 2]
        bounds = IgfBounds.uniform(dataset, mode, levels[int(rng.integers(0, len(levels)))])
        program = build_model(dataset, table, bounds)
        for _ in range(15):
            ranking = [dataset.ranked_ids[i] for i in rng.permutation(dataset.n)[:k]]
            outcome = make_outcome(dataset, ranking)
            holds = program.verify(program.assignment(outcome)) == []
            expected = prefix_ok(dataset, outcome.ranking, table) and satisfies_bounds(dataset, outcome, bounds)
            assert holds == expected
            if holds:
                assert igf_vector(dataset, outcome, mode).minimum() >= min(bounds.q.values())
                accepted += 1
            else:
                rejected += 1
    assert accepted > 0
    assert rejected > 0


def test_solved_rankings_meet_their_bounds(make_instance):
    rng = np.random.default_rng(22)
    solved = 0
    for trial in range(20):
        dataset, table = make_instance(rng, 8, 3)
        mode = list(Mode)[trial % 2]
        bounds = IgfBounds.uniform(dataset, mode, Fraction(int(rng.integers(1, 10)), 10))
        program = build_model(dataset, table, bounds)
        sol = solve_ip(program)
        if sol.outcome is None:
            continue
        assert program.verify(program.assignment(sol.outcome)) == []
        assert satisfies_bounds(dataset, sol.outcome, bounds)
        assert prefix_ok(dataset, sol.outcome.ranking, table)
        solved += 1
    assert solved > 0

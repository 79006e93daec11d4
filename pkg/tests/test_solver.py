from fractions import Fraction

import pytest

from app.services import (
    IgfBounds,
    Mode,
    ModelError,
    SolverOptions,
    SolveStatus,
    build_model,
    explicit_bounds,
    generate,
    igf_vector,
    make_outcome,
    preset,
    proportional_bounds,
    solve_ip,
    solve_lp_relaxation,
)
from app.services.ordering import prefix_ok


def test_worked_example_optimum(candidates, example_constraints):
    sol = solve_ip(build_model(candidates, example_constraints))
    assert sol.status == SolveStatus.OPTIMAL
    assert sol.outcome.ranking == ("A", "B", "G", "K")
    assert sol.outcome.utility == 373
    assert sol.objective == 373


def test_runner_up_is_feasible_and_worse(candidates, example_constraints):
    program = build_model(candidates, example_constraints)
    runner_up = make_outcome(candidates, ["A", "C", "E", "K"])
    assert runner_up.utility == 372
    assert program.verify(program.assignment(runner_up)) == []


def test_no_constraints_gives_top_k(candidates):
    sol = solve_ip(build_model(candidates, explicit_bounds(4, [], candidates)))
    assert sol.outcome.ranking == ("A", "B", "C", "D")
    assert sol.outcome.utility == 388


def test_utility_ties_break_on_smallest_ids(candidates):
    # E and F tie at 91: the set with E wins
    table = explicit_bounds(1, [("Black", 1, 1)], candidates)
    assert solve_ip(build_model(candidates, table)).outcome.ranking == ("E",)


def test_fairness_bound_changes_the_set(candidates, example_constraints):
    bounds = IgfBounds.uniform(candidates, Mode.RATIO, Fraction(9, 10))
    sol = solve_ip(build_model(candidates, example_constraints, bounds))
    assert sol.status == SolveStatus.OPTIMAL
    assert sol.outcome.ranking == ("A", "C", "E", "K")
    assert sol.outcome.utility == 372
    assert min(igf_vector(candidates, sol.outcome, Mode.RATIO).values.values()) >= Fraction(9, 10)
    assert prefix_ok(candidates, sol.outcome.ranking, example_constraints)


def test_aggregated_bound(candidates, example_constraints):
    bounds = IgfBounds.uniform(candidates, Mode.AGGREGATED, Fraction(3, 10))
    sol = solve_ip(build_model(candidates, example_constraints, bounds))
    assert sol.status == SolveStatus.OPTIMAL
    assert sol.outcome.ranking == ("A", "B", "G", "K")
    assert igf_vector(candidates, sol.outcome, Mode.AGGREGATED).minimum() == Fraction(90, 281)


def test_aggregated_half_is_out_of_reach(candidates, example_constraints):
    # two men and two women: any pair of men or of women leaves one side under half
    bounds = IgfBounds.uniform(candidates, Mode.AGGREGATED, Fraction(1, 2))
    assert solve_ip(build_model(candidates, example_constraints, bounds)).status == SolveStatus.INFEASIBLE


def test_infeasible_table(candidates):
    table = explicit_bounds(4, [("Male", 4, 3), ("Female", 4, 2)], candidates)
    sol = solve_ip(build_model(candidates, table))
    assert sol.status == SolveStatus.INFEASIBLE
    assert sol.outcome is None


def test_first_feasible_stops_early(candidates, example_constraints):
    sol = solve_ip(build_model(candidates, example_constraints), SolverOptions(first_feasible=True))
    assert sol.status in (SolveStatus.FEASIBLE, SolveStatus.OPTIMAL)
    assert prefix_ok(candidates, sol.outcome.ranking, example_constraints)


def test_worker_count_does_not_change_result(candidates, example_constraints):
    bounds = IgfBounds.uniform(candidates, Mode.RATIO, Fraction(9, 10))
    program = build_model(candidates, example_constraints, bounds)
    one = solve_ip(program, SolverOptions(workers=1))
    four = solve_ip(program, SolverOptions(workers=4))
    assert one.outcome.ranking == four.outcome.ranking
    assert one.status == four.status


def test_relaxation_bounds_the_optimum(candidates, example_constraints):
    program = build_model(candidates, example_constraints)
    relax = solve_lp_relaxation(program)
    assert relax.status == "optimal"
    assert relax.bound >= 373 - 1e-6
    fixed = solve_lp_relaxation(program, {"A": 0})
    assert fixed.bound <= relax.bound + 1e-6
    assert fixed.point["x_0"] == pytest.approx(0.0)


def test_relaxation_rejects_bad_fixing(candidates, example_constraints):
    program = build_model(candidates, example_constraints)
    with pytest.raises(ModelError):
        solve_lp_relaxation(program, {"A": 2})
    with pytest.raises(ModelError):
        solve_lp_relaxation(program, {"nope": 1})


def test_time_limit_stops_before_any_incumbent(candidates, example_constraints):
    sol = solve_ip(build_model(candidates, example_constraints), SolverOptions(time_limit=1e-9))
    assert sol.status == SolveStatus.LIMIT_REACHED
    assert sol.outcome is None


def test_time_limit_holds_on_a_large_ratio_instance():
    dataset = generate(preset("minority"), 200, seed=3)
    table = proportional_bounds(dataset, 20, [10, 20], 1)
    bounds = IgfBounds.uniform(dataset, Mode.RATIO, Fraction(9, 10))
    sol = solve_ip(build_model(dataset, table, bounds), SolverOptions(time_limit=2))
    assert sol.status in (SolveStatus.OPTIMAL, SolveStatus.LIMIT_REACHED, SolveStatus.INFEASIBLE)
    assert sol.wall_time < 10
    if sol.outcome is not None:
        assert igf_vector(dataset, sol.outcome, Mode.RATIO).minimum() >= Fraction(9, 10)


def test_relaxation_honours_the_time_limit(candidates, example_constraints):
    relax = solve_lp_relaxation(build_model(candidates, example_constraints), options=SolverOptions(time_limit=1e-9))
    assert relax.status == "time_limit"
    assert relax.bound is None

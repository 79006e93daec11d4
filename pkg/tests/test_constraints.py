import json

import pytest

from app.services import (
    ConstraintError,
    demand_at,
    explicit_bounds,
    load_constraints,
    parse_constraints,
    proportional_bounds,
    validate_constraints,
)
from app.services.constraints import is_ok


def test_explicit_table_is_carried_forward(candidates, example_constraints):
    assert example_constraints.bounds["Male"] == (0, 0, 0, 2)
    assert demand_at(example_constraints, "Black", 4) == 1
    assert demand_at(example_constraints, "Black", 3) == 0
    assert demand_at(example_constraints, "Male", 9) == 0
    assert not example_constraints.normalized


def test_non_monotone_input_is_raised_and_flagged(candidates, caplog):
    table = explicit_bounds(4, [("Female", 2, 2), ("Female", 4, 1)], candidates)
    assert table.bounds["Female"] == (0, 2, 2, 2)
    assert table.normalized
    assert "not monotone" in caplog.text
    kinds = [v.kind for v in validate_constraints(table, candidates)]
    assert kinds == ["non_monotone"]
    assert is_ok(validate_constraints(table, candidates))


@pytest.mark.parametrize(
    "entries, message",
    [
        ([("Purple", 1, 1)], "unknown value"),
        ([("Male", 5, 1)], "outside"),
        ([("Male", 0, 1)], "outside"),
        ([("Male", 2, -1)], "negative"),
    ],
)
def test_explicit_rejects_bad_entries(candidates, entries, message):
    with pytest.raises(ConstraintError, match=message):
        explicit_bounds(4, entries, candidates)


def test_proportional_matches_worked_example(candidates, example_constraints):
    table = proportional_bounds(candidates, 4, [4], 1)
    assert table.bounds == example_constraints.bounds
    assert table.source == "proportional"


def test_proportional_alpha_scales_down(candidates):
    table = proportional_bounds(candidates, 12, [6, 12], "0.5")
    # floor(0.5 * 6 * 6 / 12) = 1 at p=6, floor(0.5 * 12 * 6 / 12) = 3 at p=12
    assert demand_at(table, "Female", 6) == 1
    assert demand_at(table, "Female", 12) == 3
    assert demand_at(table, "Female", 5) == 0


@pytest.mark.parametrize(
    "k, points, alpha, message",
    [
        (4, [], 1, "empty"),
        (13, [4], 1, "exceeds n"),
        (4, [4], 0, "alpha"),
        (4, [4], "1.5", "alpha"),
        (4, [5], 1, "outside"),
    ],
)
def test_proportional_rejects_bad_parameters(candidates, k, points, alpha, message):
    with pytest.raises(ConstraintError, match=message):
        proportional_bounds(candidates, k, points, alpha)


def test_parse_both_document_kinds(candidates, example_constraints):
    explicit = parse_constraints(example_constraints.to_payload(), candidates)
    assert explicit.bounds == example_constraints.bounds
    proportional = parse_constraints({"mode": "proportional", "alpha": "1", "checkpoints": [4]}, candidates, k=4)
    assert proportional.bounds == example_constraints.bounds


def test_parse_errors(candidates, example_constraints):
    with pytest.raises(ConstraintError, match="k=4"):
        parse_constraints(example_constraints.to_payload(), candidates, k=5)
    with pytest.raises(ConstraintError, match="need k"):
        parse_constraints({"mode": "proportional", "alpha": 1, "checkpoints": [4]}, candidates)
    with pytest.raises(ConstraintError, match="invalid constraint document"):
        parse_constraints({"mode": "explicit", "k": 4, "bounds": [{"value": "Male"}]}, candidates)


def test_load_constraints(candidates, candidate_files, tmp_path):
    table = load_constraints(candidate_files["constraints"], candidates)
    assert table.k == 4
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps([1, 2]), encoding="utf-8")
    with pytest.raises(ConstraintError, match="must hold an object"):
        load_constraints(bad, candidates)
    with pytest.raises(ConstraintError, match="not found"):
        load_constraints(tmp_path / "missing.json", candidates)


def test_screening_passes_worked_example(candidates, example_constraints):
    assert validate_constraints(example_constraints, candidates) == []


def test_screening_names_oversubscribed_attribute(candidates):
    table = explicit_bounds(4, [("Male", 4, 3), ("Female", 4, 2)], candidates)
    found = validate_constraints(table, candidates)
    assert [v.kind for v in found] == ["attribute_demand"]
    assert found[0].attribute == "gender"
    assert found[0].message == "attribute demand 5 > 4 for 'gender' at position 4"
    assert not is_ok(found)


def test_screening_prefix_and_group_limits(candidates):
    table = explicit_bounds(6, [("Black", 2, 3), ("Asian", 6, 5)], candidates)
    kinds = {v.kind: v for v in validate_constraints(table, candidates)}
    assert kinds["bound_exceeds_prefix"].value == "Black"
    assert kinds["bound_exceeds_prefix"].position == 2
    assert kinds["bound_exceeds_group"].value == "Asian"
    assert kinds["bound_exceeds_group"].limit == 4

from fractions import Fraction

import pytest

from app.services import (
    DatasetError,
    better_or_equal_set,
    dataset_stats,
    export_csv,
    group_mass,
    load_dataset,
    make_outcome,
    read_dataset,
    top_k,
)
from app.services.dataset import decimal_text

from conftest import candidate_rows


def test_items_are_ordered_by_score_then_id(candidates):
    assert candidates.ranked_ids[:4] == ("A", "B", "C", "D")
    # E and F tie at 91
    assert candidates.ranked_ids[4:6] == ("E", "F")
    assert candidates.id_rank("E") < candidates.id_rank("F")


def test_groups_and_stats(candidates):
    assert candidates.members("Black") == ("E", "F", "G", "H")
    assert len(candidates.members("Female")) == 6
    stats = dataset_stats(candidates)
    assert stats.s_max == 99
    assert stats.s_min == 83
    assert stats.lam == Fraction(99, 83)


def test_better_or_equal_set_includes_ties(candidates):
    assert better_or_equal_set(candidates, "Black", "F") == ["E", "F"]
    assert better_or_equal_set(candidates, "Black", "G") == ["E", "F", "G"]
    assert group_mass(candidates, "Black", "G") == 272


def test_better_or_equal_set_rejects_foreign_item(candidates):
    with pytest.raises(DatasetError, match="not in group"):
        better_or_equal_set(candidates, "Black", "A")


@pytest.mark.parametrize(
    "patch, message",
    [
        ({"score": "0"}, "non-positive"),
        ({"score": "-3"}, "non-positive"),
        ({"score": "abc"}, "non-numeric"),
        ({"race": ""}, "missing value"),
        ({"race": "Purple"}, "not in schema"),
        ({"id": ""}, "missing id"),
    ],
)
def test_bad_rows_are_rejected(schema, patch, message):
    rows = candidate_rows()
    rows[0] = {**rows[0], **patch}
    with pytest.raises(DatasetError, match=message):
        load_dataset(rows, schema)


def test_duplicate_ids_are_rejected(schema):
    rows = candidate_rows()
    rows.append(dict(rows[0]))
    with pytest.raises(DatasetError, match="duplicate id 'A'"):
        load_dataset(rows, schema)


def test_decimal_scores_stay_exact(schema):
    rows = candidate_rows()
    rows[0]["score"] = "0.1"
    rows[1]["score"] = "0.2"
    ds = load_dataset(rows, schema)
    assert ds.score("A") + ds.score("B") == Fraction(3, 10)
    assert decimal_text(Fraction(3, 10)) == "0.3"
    assert decimal_text(Fraction(1, 3)) == "1/3"


def test_outcome_partitions(candidates):
    outcome = make_outcome(candidates, ["A", "B", "G", "K"])
    assert outcome.utility == 373
    assert outcome.accepted["Female"] == ("G", "K")
    assert outcome.lowest_accepted["Female"] == 86
    assert outcome.highest_rejected["Female"] == 96
    assert outcome.highest_rejected["White"] == 96


def test_outcome_rejects_bad_rankings(candidates):
    with pytest.raises(DatasetError, match="repeats"):
        make_outcome(candidates, ["A", "A"])
    with pytest.raises(DatasetError, match="unknown id"):
        make_outcome(candidates, ["A", "Z"])


def test_top_k(candidates):
    assert top_k(candidates, 4).utility == 388
    assert top_k(candidates, 0).ranking == ()
    with pytest.raises(DatasetError):
        top_k(candidates, 13)


def test_csv_round_trip(candidate_files, candidates):
    ds = read_dataset(candidate_files["data"], candidate_files["schema"])
    assert ds.ranked_ids == candidates.ranked_ids
    text = export_csv(ds)
    assert text.splitlines()[0] == "id,score,gender,race"
    assert text.splitlines()[1] == "A,99,Male,White"


def test_missing_csv_column(tmp_path, candidate_files):
    bad = tmp_path / "bad.csv"
    bad.write_text("id,score,gender\nA,1,Male\n", encoding="utf-8")
    with pytest.raises(DatasetError, match="missing columns"):
        read_dataset(bad, candidate_files["schema"])

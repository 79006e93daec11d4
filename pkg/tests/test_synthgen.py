import json
from statistics import mean

import pytest

from app.services import ConstraintError, export_csv, generate, load_profile, preset
from app.services.synthgen import MIN_SCORE, PRESETS


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_presets_generate_valid_pools(name):
    dataset = generate(preset(name), 300, seed=5)
    assert dataset.n == 300
    assert all(item.score >= MIN_SCORE for item in dataset.items)
    assert all(item.score.denominator in (1, 2, 4, 5, 10, 20, 25, 50, 100) for item in dataset.items)
    assert len(dataset.attributes.names) == 2


def test_same_seed_same_bytes():
    profile = preset("minority")
    assert export_csv(generate(profile, 200, seed=3)) == export_csv(generate(profile, 200, seed=3))
    assert export_csv(generate(profile, 200, seed=3)) != export_csv(generate(profile, 200, seed=4))


def test_shifted_group_scores_lower():
    dataset = generate(preset("minority"), 2000, seed=1)
    minority = [float(dataset.score(i)) for i in dataset.members("Minority")]
    majority = [float(dataset.score(i)) for i in dataset.members("Majority")]
    assert minority and mean(minority) < mean(majority) - 10


def test_pair_multiplier_raises_co_occurrence():
    dataset = generate(preset("minority"), 4000, seed=2)
    minority = set(dataset.members("Minority"))
    young = set(dataset.members("Young"))
    share_in_minority = len(minority & young) / len(minority)
    # base share of Young is 0.4
    assert share_in_minority > 0.45


def test_ids_are_zero_padded():
    dataset = generate(preset("cs-like"), 120, seed=0)
    assert sorted(dataset.ranked_ids)[0] == "c001"


def test_bad_inputs(tmp_path):
    with pytest.raises(ConstraintError, match="unknown preset"):
        preset("nope")
    with pytest.raises(ConstraintError, match="at least 1"):
        generate(preset("cs-like"), 0)
    bad = tmp_path / "profile.json"
    bad.write_text(json.dumps({"attributes": [{"name": "a", "values": [
        {"value": "x", "share": 0.3, "location": 0, "spread": 1}]}]}), encoding="utf-8")
    with pytest.raises(ConstraintError, match="invalid profile"):
        load_profile(bad)


def test_profile_file_round_trip(tmp_path):
    path = tmp_path / "profile.json"
    path.write_text(preset("meps-like").model_dump_json(), encoding="utf-8")
    assert load_profile(path) == preset("meps-like")

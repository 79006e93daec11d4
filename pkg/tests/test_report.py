from fractions import Fraction

from app.services import Mode, build_report, explicit_bounds, proportional_bounds
from app.services.report import igf_frame, loss_frame, loss_percent

from conftest import EXAMPLE_BOUNDS


def _table(dataset):
    return lambda k: explicit_bounds(k, EXAMPLE_BOUNDS, dataset)


def test_loss_percent():
    assert loss_percent(Fraction(388), Fraction(373)) == Fraction(1500, 388)
    assert loss_percent(Fraction(0), Fraction(0)) == 0


def test_worked_example_row(candidates):
    report = build_report(candidates, _table(candidates), [4], epsilon="0.01")
    assert not report.partial
    row = report.rows[0]
    assert row.unconstrained == 388
    assert row.diversity == 373
    assert row.diversity_loss == Fraction(375, 97)
    for mode in ("ratio", "agg"):
        assert row.leximin[mode] <= row.diversity <= row.unconstrained
        assert 0 <= row.balance_loss[mode] <= 100
        assert row.solves[f"leximin_{mode}"] >= 2
    assert row.igf_before["agg"]["Female"] == Fraction(90, 281)
    assert min(row.igf_after["agg"].values()) > Fraction(90, 281)


def test_abort_keeps_finished_rows(candidates):
    report = build_report(candidates, _table(candidates), [4, 13, 8], modes=[Mode.RATIO], epsilon="0.01")
    assert report.partial
    assert [r.k for r in report.rows] == [4, 13]
    assert report.rows[-1].error
    assert report.to_payload()["partial"] is True


def test_frames(candidates):
    report = build_report(
        candidates, lambda k: proportional_bounds(candidates, k, [k], 1), [4], modes=[Mode.RATIO], epsilon="0.01"
    )
    losses = loss_frame(report)
    assert list(losses.columns) == ["k", "diversity", "ratio"]
    assert losses.loc[0, "diversity"] == float(Fraction(375, 97))
    long = igf_frame(report)
    assert list(long.columns) == ["k", "mode", "phase", "value", "igf", "igf_float"]
    assert set(long["phase"]) == {"before", "after"}
    assert len(long) == 2 * len(candidates.present_values())


def test_balance_gain_compares_sorted_vectors(candidates):
    report = build_report(candidates, _table(candidates), [4], epsilon="0.01")
    row = report.rows[0]
    # the aggregated floor lifts strictly above 90/281
    assert row.balance_gain["agg"] == 1
    # ratio leximin reaches 86/95 against 86/96 before
    assert row.balance_gain["ratio"] == 1
    assert min(row.igf_after["ratio"].values()) >= Fraction(9, 10)
    assert report.to_payload()["rows"][0]["balance_gain"] == {"ratio": 1, "agg": 1}

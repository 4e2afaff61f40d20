"""Likert item statistics and the SEU/SDR composites, including
reproduction of the bundled questionnaire dataset."""

import pytest
from hypothesis import given, strategies as st

from telemgmt.survey import (
    DEFAULT_COMPOSITES,
    CompositeSpec,
    EmptyItem,
    LikertItem,
    SurveyFormatError,
    UnknownItem,
    analyze_survey,
    bundled_dataset_text,
    composite,
    item_mean,
    item_mode,
    parse_dataset,
    percent_agreement,
    render_survey_report,
)


def test_item_mean_q3():
    assert item_mean([0, 2, 2, 20, 26]) == 4.40


def test_item_mean_unanimous():
    for n in (1, 7, 50):
        assert item_mean([0, 0, 0, 0, n]) == 5.00


def test_item_mean_q8_recomputes_to_418():
    # 209/50; the dataset prints 4.30 for this distribution
    assert item_mean([1, 1, 2, 30, 16]) == 4.18


def test_item_mean_rejects_empty():
    with pytest.raises(EmptyItem):
        item_mean([0, 0, 0, 0, 0])


def test_item_mode_values():
    assert item_mode([0, 2, 2, 20, 26]) == 5
    assert item_mode([0, 1, 3, 30, 16]) == 4
    assert item_mode([1, 1, 1, 1, 1]) == 5  # tie resolves upward


def test_percent_agreement_values():
    assert percent_agreement([0, 2, 2, 20, 26]) == 92.00
    assert percent_agreement([10, 5, 0, 0, 0]) == 0.00
    assert percent_agreement([2, 2, 2, 30, 14]) == 88.00


@given(
    counts=st.lists(st.integers(0, 50), min_size=5, max_size=5).filter(lambda c: sum(c) > 0),
    k=st.integers(1, 9),
)
def test_statistics_invariant_under_count_scaling(counts, k):
    scaled = [c * k for c in counts]
    assert item_mean(scaled) == item_mean(counts)
    assert percent_agreement(scaled) == percent_agreement(counts)
    assert item_mode(scaled) == item_mode(counts)
    assert 1.0 <= item_mean(counts) <= 5.0
    assert 0.0 <= percent_agreement(counts) <= 100.0


# -- dataset parsing --------------------------------------------------------

def test_parse_bundled_dataset():
    items = parse_dataset(bundled_dataset_text())
    assert sorted(items) == [f"Q{i}" for i in range(10, 12)] + [f"Q{i}" for i in range(3, 10)]
    assert all(item.respondents == 50 for item in items.values())


def test_parse_rejects_garbage():
    with pytest.raises(SurveyFormatError, match="line 2"):
        parse_dataset("Q1\tprompt\t1\t1\t1\t1\t1\nQ2\tprompt\t1\tx\t1\t1\t1\n")
    with pytest.raises(SurveyFormatError, match="duplicate"):
        parse_dataset("Q1\tp\t1\t1\t1\t1\t1\nQ1\tp\t1\t1\t1\t1\t1\n")
    with pytest.raises(SurveyFormatError):
        parse_dataset("# only comments\n")


# -- composites -------------------------------------------------------------

@pytest.fixture(scope="module")
def items():
    return parse_dataset(bundled_dataset_text())


def test_seu_as_printed_reproduces_published_row(items):
    seu = next(c for c in DEFAULT_COMPOSITES if c.name == "SEU")
    assert composite(seu, items, "as-printed") == (4.22, 90.67)


def test_sdr_as_printed_reproduces_published_row(items):
    sdr = next(c for c in DEFAULT_COMPOSITES if c.name == "SDR")
    assert composite(sdr, items, "as-printed") == (4.20, 88.00)


def test_sdr_recomputed_shifts_mean(items):
    sdr = next(c for c in DEFAULT_COMPOSITES if c.name == "SDR")
    assert composite(sdr, items, "recomputed") == (4.18, 88.00)


def test_composite_unknown_member(items):
    with pytest.raises(UnknownItem):
        composite(CompositeSpec("X", ["Q99"]), items)


def test_composite_empty_members_rejected():
    with pytest.raises(SurveyFormatError):
        CompositeSpec("X", [])


# -- full analysis ----------------------------------------------------------

def test_analysis_flags_only_q8(items):
    report = analyze_survey(items)
    flagged = [s.item.item_id for s in report.stats if s.mean_discrepancy]
    assert flagged == ["Q8"]
    assert any("Q8" in d and "4.30" in d and "4.18" in d for d in report.discrepancies)


def test_recomputed_means_match_printed_for_other_items(items):
    report = analyze_survey(items)
    for s in report.stats:
        if s.item.item_id == "Q8":
            continue
        assert abs(float(s.item.printed_mean) - s.mean) <= 0.005, s.item.item_id


def test_modes_match_printed(items):
    report = analyze_survey(items)
    for s in report.stats:
        assert s.mode == s.item.printed_mode, s.item.item_id


def test_report_rendering_includes_composites_and_flags(items):
    text = render_survey_report(analyze_survey(items))
    assert "SEU as-printed: mean 4.22, agreement 90.67%" in text
    assert "SDR as-printed: mean 4.20, agreement 88.00%" in text
    assert "Q8" in text and "!" in text


def test_report_to_dict_machine_readable(items):
    doc = analyze_survey(items).to_dict()
    assert doc["composites"]["SEU"]["as_printed"]["mean"] == 4.22
    assert doc["composites"]["SDR"]["recomputed"]["mean"] == 4.18
    assert len(doc["items"]) == 9

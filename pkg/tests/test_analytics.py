"""Distribution reports and the transition matrix on hand-built corpora."""

from __future__ import annotations

import json

import numpy as np
import pytest

from mred.analytics import (
    DistributionReport,
    borderline_breakdown,
    category_distribution,
    length_bin_of,
    length_category_breakdown,
    length_rating_breakdown,
    occurrence_by_score,
    render_report_svg,
    render_transition_svg,
    report_payload,
    report_to_csv,
    report_to_json,
    score_bin_of,
    segments,
    transition_matrix,
    transition_payload,
    transition_to_csv,
    transition_to_json,
)
from mred.corpus import (
    Corpus,
    Decision,
    LabeledSentence,
    MetaReview,
    Review,
    Submission,
)
from mred.labels import ALL_LABELS, CategoryLabel

A = CategoryLabel.ABSTRACT
W = CategoryLabel.WEAKNESS
D = CategoryLabel.DECISION


def meta(labels, decision=Decision.ACCEPT, words_per_sentence=3):
    sentences = tuple(
        LabeledSentence(" ".join(f"w{i}{j}" for j in range(words_per_sentence)), l)
        for i, l in enumerate(labels)
    )
    return MetaReview(sentences, decision)


def sub(sid, labels, decision=Decision.ACCEPT, ratings=(6,), words=3):
    reviews = tuple(
        Review(f"R{i}", "looks fine to me", rating=r)
        for i, r in enumerate(ratings)
    )
    return Submission(sid, 2019, reviews, meta(labels, decision, words))


def corpus_of(*subs):
    return Corpus(tuple(subs))


# ---------------------------------------------------------------------------
# Segments and transitions
# ---------------------------------------------------------------------------

def test_segments_collapse_adjacent_runs():
    m = meta([A, A, W, A])
    assert segments(m) == (A, W, A)


def test_segments_single_label():
    assert segments(meta([D])) == (D,)


def test_transition_single_path():
    tm = transition_matrix(corpus_of(sub("s1", [A, W, D])))
    for a, b in [("<start>", "abstract"), ("abstract", "weakness"),
                 ("weakness", "decision"), ("decision", "<end>")]:
        assert tm.counts[tm.index_of(a), tm.index_of(b)] == 1
        assert tm.probs[tm.index_of(a), tm.index_of(b)] == 1.0
    assert tm.counts.sum() == 4


def test_transition_probabilities_split_between_followers():
    tm = transition_matrix(corpus_of(
        sub("s1", [A, W, D]), sub("s2", [A, D], decision=Decision.REJECT)
    ))
    row = tm.index_of("abstract")
    assert tm.probs[row, tm.index_of("weakness")] == 0.5
    assert tm.probs[row, tm.index_of("decision")] == 0.5


def test_transition_rows_stochastic_and_markers_clean():
    tm = transition_matrix(corpus_of(
        sub("s1", [A, W, D]),
        sub("s2", [A, D]),
        sub("s3", [W, W, D], decision=Decision.REJECT),
    ))
    active = tm.counts.sum(axis=1) > 0
    assert np.allclose(tm.probs[active].sum(axis=1), 1.0, atol=1e-9)
    assert not tm.counts[-1].any()      # <end> emits nothing
    assert not tm.counts[:, 0].any()    # nothing enters <start>
    assert tm.labels[0] == "<start>" and tm.labels[-1] == "<end>"
    assert len(tm.labels) == 11


def test_transition_collapses_runs_before_counting():
    tm = transition_matrix(corpus_of(sub("s1", [A, A, A, D])))
    a = tm.index_of("abstract")
    assert tm.counts[a, a] == 0
    assert tm.counts[a, tm.index_of("decision")] == 1


def test_transition_empty_corpus_rejected():
    with pytest.raises(ValueError):
        transition_matrix(Corpus(()))


# ---------------------------------------------------------------------------
# Binning helpers
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("n,want", [
    (1, "<=50"), (50, "<=50"), (51, "51-100"), (100, "51-100"),
    (101, "101-150"), (150, "101-150"), (151, ">150"), (400, ">150"),
])
def test_length_bins(n, want):
    assert length_bin_of(n) == want


@pytest.mark.parametrize("avg,want", [
    (1.0, "<2"), (1.99, "<2"), (2.0, "2-3"), (2.99, "2-3"),
    (5.5, "5-6"), (7.0, "7-8"), (7.99, "7-8"), (8.0, ">=8"), (9.5, ">=8"),
])
def test_score_bins(avg, want):
    assert score_bin_of(avg) == want


# ---------------------------------------------------------------------------
# Distribution reports
# ---------------------------------------------------------------------------

def test_category_distribution_counts_by_decision():
    report = category_distribution(corpus_of(
        sub("s1", [A, A, D], decision=Decision.ACCEPT),
        sub("s2", [W, D], decision=Decision.REJECT),
        sub("s3", [A, W], decision=Decision.REJECT),
    ))
    assert report.count("accept", "abstract") == 2
    assert report.count("accept", "decision") == 1
    assert report.count("reject", "weakness") == 2
    assert report.count("reject", "abstract") == 1
    assert report.percentage("accept", "abstract") == pytest.approx(200 / 3)


def test_length_rating_breakdown_bins_and_exclusions():
    c = corpus_of(
        sub("s1", [A] * 10, ratings=(7, 8), words=4),      # 40 words, avg 7.5
        sub("s2", [A] * 30, ratings=(3,), words=4),        # 120 words, avg 3
        sub("s3", [A], ratings=(None,)),                   # unrated -> excluded
    )
    report = length_rating_breakdown(c)
    assert report.count("7-8", "<=50") == 1
    assert report.count("3-4", "101-150") == 1
    assert report.excluded == 1
    assert report.group_sizes["7-8"] == 1


def test_length_category_breakdown_shares():
    c = corpus_of(sub("s1", [A, A, W, D], words=10))  # 40 words -> <=50 bin
    report = length_category_breakdown(c)
    assert report.count("<=50", "abstract") == 2
    assert report.percentage("<=50", "abstract") == pytest.approx(50.0)
    assert report.percentage("<=50", "weakness") == pytest.approx(25.0)


def test_borderline_breakdown_band_is_half_open():
    c = corpus_of(
        sub("s1", [A], ratings=(4,)),        # 4.0 below band
        sub("s2", [W], ratings=(5,)),        # 5.0 inside
        sub("s3", [D], ratings=(6,)),        # 6.0 outside (exclusive upper)
        sub("s4", [A, W], ratings=(4, 5)),   # 4.5 inside (inclusive lower)
    )
    report = borderline_breakdown(c)
    assert report.count("accept", "weakness") == 2
    assert report.count("accept", "abstract") == 1
    assert report.count("accept", "decision") == 0


def test_occurrence_counts_each_category_once_per_review():
    c = corpus_of(
        sub("s1", [A, A, A, W], ratings=(8,)),            # accept/high
        sub("s2", [A], ratings=(8, 9)),                    # accept/high
        sub("s3", [W], decision=Decision.REJECT, ratings=(2,)),  # reject/low
    )
    report = occurrence_by_score(c)
    assert report.count("accept/high", "abstract") == 2
    assert report.count("accept/high", "weakness") == 1
    assert report.group_sizes["accept/high"] == 2
    assert report.percentage("accept/high", "abstract") == pytest.approx(100.0)
    assert report.percentage("accept/high", "weakness") == pytest.approx(50.0)
    assert report.count("reject/low", "weakness") == 1
    assert not report.normalized


def test_occurrence_score_bands():
    c = corpus_of(
        sub("s1", [A], ratings=(5,)),   # 5.0 -> low (<= 5.5)
        sub("s2", [A], ratings=(6,)),   # 6.0 -> mid
        sub("s3", [A], ratings=(7,)),   # 7.0 -> high (>= 6.5)
    )
    report = occurrence_by_score(c)
    assert report.group_sizes["accept/low"] == 1
    assert report.group_sizes["accept/mid"] == 1
    assert report.group_sizes["accept/high"] == 1


def test_distribution_report_validates_percentage_sum():
    with pytest.raises(ValueError):
        DistributionReport(
            group_by="x", groups=("g",), columns=("a", "b"),
            counts={"g": {"a": 1, "b": 1}},
            percentages={"g": {"a": 80.0, "b": 10.0}},
            group_sizes={"g": 2},
        )


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def _report():
    return category_distribution(corpus_of(sub("s1", [A, W, D])))


def test_report_json_payload_shape():
    payload = json.loads(report_to_json(_report()))
    assert payload["group_by"] == "decision"
    assert payload["columns"] == [l.value for l in ALL_LABELS]
    assert payload["groups"]["accept"]["counts"]["abstract"] == 1
    assert payload == report_payload(_report())


def test_report_csv_has_header_and_rows():
    lines = report_to_csv(_report()).strip().splitlines()
    assert lines[0] == "group,group_size,column,count,percentage"
    assert any(line.startswith("accept,") for line in lines[1:])


def test_transition_payload_round_trip():
    tm = transition_matrix(corpus_of(sub("s1", [A, D])))
    payload = json.loads(transition_to_json(tm))
    assert payload == transition_payload(tm)
    assert payload["labels"][0] == "<start>"
    i, j = tm.index_of("<start>"), tm.index_of("abstract")
    assert payload["counts"][i][j] == 1
    assert payload["probs"][i][j] == 1.0


def test_transition_csv_is_square():
    tm = transition_matrix(corpus_of(sub("s1", [A, D])))
    lines = transition_to_csv(tm).strip().splitlines()
    assert len(lines) == 12  # header + 11 rows
    assert lines[0].split(",")[1] == "<start>"


def test_svg_renderers_return_svg_text():
    tm = transition_matrix(corpus_of(sub("s1", [A, W, D])))
    assert "<svg" in render_transition_svg(tm)
    assert "<svg" in render_report_svg(_report())

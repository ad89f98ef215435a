"""Corpus model, JSONL round-trips, segmentation, filtering and splitting."""

from __future__ import annotations

import json

import pytest

from mred.corpus import (
    Corpus,
    CorpusError,
    Decision,
    LabeledSentence,
    MetaReview,
    Review,
    Split,
    SplitTooSmallError,
    Submission,
    filter_and_split,
    load_corpus,
    segment_sentences,
    word_count,
    write_corpus,
)
from mred.labels import CategoryLabel


def make_submission(sid="s1", year=2020, n_words=30, rating=6):
    body = " ".join(["word"] * max(1, n_words - 2))
    sentences = (
        LabeledSentence(f"Summary {body}.", CategoryLabel.ABSTRACT),
        LabeledSentence("Reject.", CategoryLabel.DECISION),
    )
    return Submission(
        id=sid,
        year=year,
        reviews=(
            Review("r1", "Solid work overall.", rating=rating, confidence=4),
            Review("r2", "Needs more experiments.", rating=rating, confidence=3),
        ),
        meta_review=MetaReview(sentences, Decision.REJECT),
    )


class TestModel:
    def test_rejects_out_of_range_year(self):
        with pytest.raises(CorpusError):
            make_submission(year=2017)

    def test_rejects_out_of_range_rating(self):
        with pytest.raises(CorpusError):
            Review("r1", "text", rating=11)

    def test_rejects_empty_review_text(self):
        with pytest.raises(CorpusError):
            Review("r1", "   ")

    def test_rejects_duplicate_ids(self):
        with pytest.raises(CorpusError):
            Corpus((make_submission("a"), make_submission("a")))

    def test_average_rating(self):
        sub = make_submission()
        assert sub.average_rating == 6.0
        unrated = Submission(
            id="u",
            year=2020,
            reviews=(Review("r1", "no score given"),),
            meta_review=sub.meta_review,
        )
        assert unrated.average_rating is None

    def test_corpus_counts(self):
        corpus = Corpus((make_submission("a"), make_submission("b")))
        assert len(corpus) == 2
        assert corpus.n_reviews == 4
        assert corpus.n_labeled_sentences == 4


class TestSerialization:
    def test_round_trip(self, tmp_path):
        corpus = Corpus(
            tuple(make_submission(f"s{i}") for i in range(5)),
            provenance="unit-test",
        )
        path = tmp_path / "corpus.jsonl"
        write_corpus(corpus, path)
        loaded = load_corpus(path)
        assert loaded == corpus  # provenance is excluded from equality
        assert loaded.provenance == str(path)

    def test_round_trip_preserves_split(self, tmp_path):
        corpus = filter_and_split(
            Corpus(tuple(make_submission(f"s{i}") for i in range(12)))
        )
        path = tmp_path / "split.jsonl"
        write_corpus(corpus, path)
        assert load_corpus(path) == corpus

    def test_error_reports_line_number(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        good = json.dumps(
            {
                "id": "ok",
                "year": 2020,
                "decision": "accept",
                "reviews": [{"reviewer_id": "r", "text": "fine", "rating": 7}],
                "meta_review": [{"text": "Accept.", "label": "decision"}],
            }
        )
        path.write_text(good + "\n" + good.replace('"accept"', '"maybe"', 1) + "\n")
        with pytest.raises(CorpusError, match="line 2"):
            load_corpus(path)

    def test_error_on_unknown_label(self, tmp_path):
        path = tmp_path / "bad_label.jsonl"
        rec = {
            "id": "x",
            "year": 2020,
            "decision": "reject",
            "reviews": [{"reviewer_id": "r", "text": "fine"}],
            "meta_review": [{"text": "Hm.", "label": "mood"}],
        }
        path.write_text(json.dumps(rec) + "\n")
        with pytest.raises(CorpusError, match="line 1"):
            load_corpus(path)

    def test_error_on_invalid_json(self, tmp_path):
        path = tmp_path / "broken.jsonl"
        path.write_text("{not json\n")
        with pytest.raises(CorpusError, match="line 1"):
            load_corpus(path)


class TestSegmentation:
    def test_plain_sentences(self):
        text = "The paper is clear. Results look strong. I vote accept."
        assert segment_sentences(text) == [
            "The paper is clear.",
            "Results look strong.",
            "I vote accept.",
        ]

    def test_abbreviations_do_not_split(self):
        text = "Baselines (e.g. Smith et al. 2019) are missing. See Fig. 3 for details."
        assert segment_sentences(text) == [
            "Baselines (e.g. Smith et al. 2019) are missing.",
            "See Fig. 3 for details.",
        ]

    def test_no_split_inside_brackets_or_quotes(self):
        text = 'He wrote "Run it. Then report." in the rebuttal (see Sec. 4. No change). Done now.'
        out = segment_sentences(text)
        assert out == [
            'He wrote "Run it. Then report." in the rebuttal (see Sec. 4. No change).',
            "Done now.",
        ]

    def test_terminator_runs_collapse(self):
        text = "Really?! Yes... The authors agreed."
        assert segment_sentences(text) == [
            "Really?!",
            "Yes...",
            "The authors agreed.",
        ]

    def test_numbers_do_not_split(self):
        text = "The score moved from 3.5 to 6.0 after rebuttal. 4 reviewers agreed."
        assert segment_sentences(text) == [
            "The score moved from 3.5 to 6.0 after rebuttal.",
            "4 reviewers agreed.",
        ]

    def test_lowercase_continuation_does_not_split(self):
        text = "It works well. but only on toy data."
        assert segment_sentences(text) == [text]

    def test_concatenation_invariant(self):
        texts = [
            "A strong paper. Accept!",
            "Mixed reviews (scores 4, 6, 7). The rebuttal helped... somewhat. Reject.",
            'One reviewer said "Borderline." and kept the score.',
            "No terminator at all",
        ]
        for text in texts:
            joined = "".join(segment_sentences(text)).replace(" ", "")
            assert joined == text.replace(" ", "")

    def test_empty_and_whitespace(self):
        assert segment_sentences("") == []
        assert segment_sentences("   \n\t ") == []


class TestWordCount:
    def test_basic(self):
        assert word_count("one two  three\nfour") == 4

    def test_empty(self):
        assert word_count("") == 0
        assert word_count("   ") == 0


class TestFilterAndSplit:
    def test_length_bounds_are_inclusive(self):
        sizes = {"lo": 19, "at_lo": 20, "mid": 200, "at_hi": 400, "hi": 401}
        subs = tuple(make_submission(k, n_words=n) for k, n in sizes.items())
        padding = tuple(make_submission(f"p{i}", n_words=50) for i in range(8))
        out = filter_and_split(Corpus(subs + padding))
        kept = {s.id for s in out.submissions}
        assert {"at_lo", "mid", "at_hi"} <= kept
        assert "lo" not in kept and "hi" not in kept

    def test_ten_submissions_split_8_1_1(self):
        corpus = Corpus(tuple(make_submission(f"s{i}") for i in range(10)))
        out = filter_and_split(corpus)
        counts = {w: len(out.split(w)) for w in Split}
        assert counts[Split.TRAIN] == 8
        assert counts[Split.VALIDATION] == 1
        assert counts[Split.TEST] == 1

    def test_split_sizes_track_ratio(self):
        corpus = Corpus(tuple(make_submission(f"s{i}") for i in range(647)))
        out = filter_and_split(corpus)
        n = len(out)
        assert n == 647
        assert len(out.split(Split.TRAIN)) == round(n * 0.8)
        assert len(out.split(Split.VALIDATION)) == round(n * 0.9) - round(n * 0.8)

    def test_same_seed_same_assignment(self):
        corpus = Corpus(tuple(make_submission(f"s{i}") for i in range(40)))
        a = filter_and_split(corpus, seed=0)
        b = filter_and_split(corpus, seed=0)
        c = filter_and_split(corpus, seed=1)
        assert a == b
        assert [s.split for s in a.submissions] != [s.split for s in c.submissions]

    def test_too_few_survivors_raises(self):
        corpus = Corpus(tuple(make_submission(f"s{i}") for i in range(6)))
        with pytest.raises(SplitTooSmallError):
            filter_and_split(corpus)

    def test_order_is_preserved_only_split_changes(self):
        corpus = Corpus(tuple(make_submission(f"s{i}") for i in range(15)))
        out = filter_and_split(corpus)
        assert [s.id for s in out.submissions] == [s.id for s in corpus.submissions]

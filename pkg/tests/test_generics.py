"""Generic sentence banks: filtering, ranking, assembly, persistence."""

from __future__ import annotations

import warnings

import pytest

from mred.control import ControlSequence, Granularity
from mred.corpus import (
    Corpus,
    Decision,
    LabeledSentence,
    MetaReview,
    Review,
    Submission,
)
from mred.extract import EngineConfig, textrank_scores
from mred.generics import (
    GenericBank,
    GenericBankError,
    assemble_generic,
    build_generic_bank,
    load_bank,
    save_bank,
)
from mred.labels import ALL_LABELS, CategoryLabel
from mred.tagger import train

A = CategoryLabel.ABSTRACT
W = CategoryLabel.WEAKNESS
D = CategoryLabel.DECISION


def ctrl(*labels):
    return ControlSequence(tuple(labels), Granularity.SENT)


def sub(sid, pairs, ratings=(6,), decision=Decision.ACCEPT, review="a review"):
    return Submission(
        sid, 2019,
        tuple(Review(f"R{i}", review, rating=r) for i, r in enumerate(ratings)),
        MetaReview(tuple(LabeledSentence(t, l) for t, l in pairs), decision),
    )


def bank_of(**categories):
    """Handmade bank; unnamed categories are empty."""
    filled = {l: () for l in ALL_LABELS}
    for name, sents in categories.items():
        filled[CategoryLabel(name.replace("_", " "))] = tuple(sents)
    return GenericBank(side="target", score_filter="all", categories=filled)


# ---------------------------------------------------------------------------
# Rating filters
# ---------------------------------------------------------------------------

def test_filter_thresholds_are_inclusive():
    subs = [
        sub("hi", [("high praise here.", A)], ratings=(7, 8)),   # avg 7.5
        sub("lo", [("low remark here.", A)], ratings=(3,)),      # avg 3.0
        sub("mid", [("middle remark.", A)], ratings=(5,)),
        sub("none", [("unrated remark.", A)], ratings=(None,)),
    ]
    high = build_generic_bank(subs, "target", "high")
    assert high.ranked(A) == ("high praise here.",)
    low = build_generic_bank(subs, "target", "low")
    assert low.ranked(A) == ("low remark here.",)
    everything = build_generic_bank(subs, "target", "all")
    assert len(everything.ranked(A)) == 4


def test_filter_with_no_survivors_errors():
    subs = [sub("mid", [("middle.", A)], ratings=(5,))]
    with pytest.raises(GenericBankError, match="no submissions pass"):
        build_generic_bank(subs, "target", "high")


def test_unrated_submission_fails_high_and_low():
    subs = [sub("none", [("text.", A)], ratings=(None,))]
    with pytest.raises(GenericBankError):
        build_generic_bank(subs, "target", "high")
    with pytest.raises(GenericBankError):
        build_generic_bank(subs, "target", "low")


# ---------------------------------------------------------------------------
# Bank construction
# ---------------------------------------------------------------------------

def test_target_bank_groups_by_gold_label():
    subs = [
        sub("s1", [("about the paper.", A), ("a flaw found.", W)]),
        sub("s2", [("more about work.", A)]),
    ]
    bank = build_generic_bank(subs, "target")
    assert set(bank.ranked(A)) == {"about the paper.", "more about work."}
    assert bank.ranked(W) == ("a flaw found.",)
    assert bank.ranked(D) == ()  # empty category stays empty


def test_rank_one_is_centrality_argmax():
    texts = [
        "the model performs well on tasks.",
        "the model performs well on most tasks overall.",
        "completely unrelated sentence.",
    ]
    subs = [sub(f"s{i}", [(t, A)]) for i, t in enumerate(texts)]
    bank = build_generic_bank(subs, "target")
    scores = textrank_scores(texts, EngineConfig()).scores()
    best = max(range(len(texts)), key=lambda i: (scores[i], -i))
    assert bank.ranked(A)[0] == texts[best]


def test_bank_rank_order_matches_textrank_scores():
    texts = [f"sentence number {i} about results and methods." for i in range(6)]
    subs = [sub(f"s{i}", [(t, W)]) for i, t in enumerate(texts)]
    bank = build_generic_bank(subs, "target")
    scores = textrank_scores(texts, EngineConfig()).scores()
    want = [texts[i] for i in sorted(range(6), key=lambda i: (-scores[i], i))]
    assert list(bank.ranked(W)) == want


def test_bank_is_deterministic():
    subs = [
        sub("s1", [("alpha beta gamma.", A), ("delta epsilon.", W)]),
        sub("s2", [("alpha beta delta.", A)]),
    ]
    first = build_generic_bank(subs, "target")
    second = build_generic_bank(subs, "target")
    assert first.categories == second.categories


def test_source_bank_requires_labeling_route():
    subs = [sub("s1", [("meta.", A)])]
    with pytest.raises(GenericBankError, match="source side requires"):
        build_generic_bank(subs, "source")


def test_source_bank_uses_tagger_predictions():
    train_subs = []
    for i in range(6):
        train_subs.append(sub(f"t{i}", [
            (f"This paper studies parsing problem {i}.", A),
            (f"The weakness is missing ablation {i}.", W),
        ]))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        model = train(train_subs)
    subs = [sub("s1", [("meta.", A)],
                review="The weakness is missing ablation yet again.")]
    bank = build_generic_bank(subs, "source", tagger_model=model)
    all_sentences = [s for l in ALL_LABELS for s in bank.ranked(l)]
    assert all_sentences == ["The weakness is missing ablation yet again."]


# ---------------------------------------------------------------------------
# Assembly
# ---------------------------------------------------------------------------

def test_assemble_repeated_label_walks_down_ranking():
    bank = bank_of(abstract=("first pick.", "second pick.", "third pick."))
    out = assemble_generic(bank, ctrl(A, A, A))
    assert out.sentences == ("first pick.", "second pick.", "third pick.")
    assert out.text == "first pick. second pick. third pick."
    assert out.labels == (A, A, A)
    assert out.warnings == ()


def test_assemble_output_follows_control_order():
    bank = bank_of(abstract=("a1.",), weakness=("w1.",), decision=("d1.",))
    out = assemble_generic(bank, ctrl(D, A, W))
    assert out.sentences == ("d1.", "a1.", "w1.")
    assert out.labels == (D, A, W)


def test_assemble_skips_empty_category_with_warning():
    bank = bank_of(abstract=("a1.",))
    out = assemble_generic(bank, ctrl(A, D))
    assert out.sentences == ("a1.",)
    assert out.labels == (A,)
    assert out.warnings == ("slot 1: category 'decision' empty; skipped",)


def test_assemble_exhausted_category_warns():
    bank = bank_of(weakness=("only one.",))
    out = assemble_generic(bank, ctrl(W, W))
    assert out.sentences == ("only one.",)
    assert out.warnings == ("slot 1: category 'weakness' exhausted; skipped",)


def test_assemble_never_reuses_a_string_across_categories():
    shared = "appears under two labels."
    bank = bank_of(abstract=(shared, "alpha."), weakness=(shared, "beta."))
    out = assemble_generic(bank, ctrl(A, W))
    assert out.sentences == (shared, "beta.")
    assert len(set(out.sentences)) == len(out.sentences)


def test_assemble_duplicate_within_category_skipped():
    bank = bank_of(abstract=("dup.", "dup.", "fresh."))
    out = assemble_generic(bank, ctrl(A, A))
    assert out.sentences == ("dup.", "fresh.")


def test_assemble_is_deterministic():
    bank = bank_of(abstract=("x.", "y."), weakness=("z.",))
    control = ctrl(A, W, A)
    assert assemble_generic(bank, control) == assemble_generic(bank, control)


# ---------------------------------------------------------------------------
# Persistence and validation
# ---------------------------------------------------------------------------

def test_bank_save_load_round_trip(tmp_path):
    bank = bank_of(abstract=("a1.", "a2."), decision=("d1.",))
    path = tmp_path / "bank.json"
    save_bank(bank, path)
    loaded = load_bank(path)
    assert loaded.side == bank.side
    assert loaded.score_filter == bank.score_filter
    assert loaded.categories == bank.categories


def test_load_bank_rejects_bad_version(tmp_path):
    path = tmp_path / "bank.json"
    save_bank(bank_of(), path)
    import json
    payload = json.loads(path.read_text())
    payload["format_version"] = 0
    path.write_text(json.dumps(payload))
    with pytest.raises(GenericBankError, match="format"):
        load_bank(path)


def test_load_bank_rejects_invalid_json(tmp_path):
    path = tmp_path / "bank.json"
    path.write_text("nope")
    with pytest.raises(GenericBankError, match="JSON"):
        load_bank(path)


def test_generic_bank_validates_fields():
    cats = {l: () for l in ALL_LABELS}
    with pytest.raises(GenericBankError, match="side"):
        GenericBank(side="middle", score_filter="all", categories=cats)
    with pytest.raises(GenericBankError, match="filter"):
        GenericBank(side="target", score_filter="top", categories=cats)
    with pytest.raises(GenericBankError, match="lacks"):
        GenericBank(side="target", score_filter="all",
                    categories={A: ()})


def test_build_generic_bank_validates_arguments():
    subs = [sub("s1", [("meta.", A)])]
    with pytest.raises(GenericBankError, match="unknown side"):
        build_generic_bank(subs, "both")
    with pytest.raises(GenericBankError, match="unknown score filter"):
        build_generic_bank(subs, "target", "extreme")

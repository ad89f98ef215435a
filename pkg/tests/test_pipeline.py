"""End-to-end extraction pipeline: candidates, modes, records, compliance."""

from __future__ import annotations

import json
import warnings

import pytest

from mred.combine import SEPARATOR, combine_reviews
from mred.control import ControlSequence, Granularity
from mred.corpus import (
    Corpus,
    Decision,
    LabeledSentence,
    MetaReview,
    Review,
    Split,
    Submission,
    review_sentences,
)
from mred.extract import EngineConfig
from mred.labels import CategoryLabel
from mred.pipeline import (
    CandidateOrigin,
    GenerationRecord,
    PipelineError,
    candidate_sentences,
    candidates_with_origins,
    generate_for_submission,
    generate_from_reviews,
    rank_sentences,
    read_outputs,
    read_references,
    records_to_outputs,
    references_for_split,
    run_split,
    structure_compliance,
    write_records,
)
from mred.tagger import LabelAssignment, train

A = CategoryLabel.ABSTRACT
S = CategoryLabel.STRENGTH
W = CategoryLabel.WEAKNESS
D = CategoryLabel.DECISION

_PHRASES = {
    A: "This paper proposes a new graph method",
    S: "The strengths include novel clear formulation",
    W: "A weakness is the missing baseline comparison",
    D: "Therefore I recommend acceptance overall",
}


def meta(labels, decision=Decision.ACCEPT):
    return MetaReview(
        tuple(LabeledSentence(f"{_PHRASES[l]} {i}.", l)
              for i, l in enumerate(labels)),
        decision,
    )


def review_text():
    return (
        f"{_PHRASES[A]} one. {_PHRASES[S]} two.\n\n"
        f"{_PHRASES[W]} three. {_PHRASES[D]} four."
    )


def sub(sid, labels=(A, W, D), split=Split.TEST):
    return Submission(
        sid, 2019,
        (Review("R1", review_text(), rating=6),
         Review("R2", f"{_PHRASES[W]} five. {_PHRASES[A]} six.", rating=4)),
        meta(list(labels)),
        split=split,
    )


@pytest.fixture(scope="module")
def model():
    subs = [sub(f"t{i}", (A, S, W, D), split=Split.TRAIN) for i in range(8)]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return train(subs)


def ctrl(*labels):
    return ControlSequence(tuple(labels), Granularity.SENT)


# ---------------------------------------------------------------------------
# Candidate enumeration
# ---------------------------------------------------------------------------

def test_candidate_sentences_split_on_separator():
    text = f"End of one review.{SEPARATOR}Start of the next."
    assert candidate_sentences(text) == [
        "End of one review.", "Start of the next."
    ]


def test_candidate_sentences_blank_lines_are_boundaries():
    text = "Paragraph without terminator\n\nNext paragraph here."
    assert candidate_sentences(text) == [
        "Paragraph without terminator", "Next paragraph here."
    ]


def test_origins_match_review_side_indexing():
    reviews = [Review("R1", review_text(), rating=6),
               Review("R2", "Lone remark.", rating=4)]
    combined = combine_reviews("concat", reviews)
    sentences, origins = candidates_with_origins(combined, reviews)
    assert len(sentences) == len(origins)
    r1_sents = review_sentences(reviews[0].text)
    for sent, origin in zip(sentences, origins):
        assert origin is not None
        if origin.review_id == "R1":
            assert r1_sents[origin.sentence_index] == sent
        else:
            assert origin == CandidateOrigin("R2", 0)
            assert sent == "Lone remark."


def test_origins_rating_prefix_has_none_origin():
    reviews = [Review("R1", "Only sentence.", rating=7),
               Review("R2", "Another one.", rating=3)]
    combined = combine_reviews("rate-concat", reviews)
    sentences, origins = candidates_with_origins(combined, reviews)
    assert sentences[0] == "R1 rating score: 7, R2 rating score: 3."
    assert origins[0] is None
    assert origins[1:] == [CandidateOrigin("R1", 0), CandidateOrigin("R2", 0)]


@pytest.mark.parametrize("strategy", ["concat", "rate-concat", "merge",
                                      "rate-merge", "longest"])
def test_origins_consistent_across_strategies(strategy):
    reviews = [Review("R1", review_text(), rating=6),
               Review("R2", f"{_PHRASES[W]} again. Final note.", rating=4)]
    combined = combine_reviews(strategy, reviews)
    sentences, origins = candidates_with_origins(combined, reviews)
    by_review = {r.reviewer_id: review_sentences(r.text) for r in reviews}
    for sent, origin in zip(sentences, origins):
        if origin is None:
            continue  # rating prefix
        assert by_review[origin.review_id][origin.sentence_index] == sent


def test_rank_sentences_unknown_engine():
    with pytest.raises(PipelineError, match="unknown engine"):
        rank_sentences("bert", ["a b"], EngineConfig())


# ---------------------------------------------------------------------------
# Generation modes
# ---------------------------------------------------------------------------

def test_generate_requires_exactly_one_mode(model):
    reviews = [Review("R1", review_text())]
    with pytest.raises(PipelineError, match="exactly one"):
        generate_from_reviews(reviews, "textrank", "concat", model)
    with pytest.raises(PipelineError, match="exactly one"):
        generate_from_reviews(reviews, "textrank", "concat", model,
                              control=ctrl(A), k=2)


def test_generate_controlled_record(model):
    reviews = [Review("R1", review_text())]
    rec = generate_from_reviews(
        reviews, "textrank", "concat", model,
        control=ctrl(A, W, D), record_id="p1",
    )
    assert rec.id == "p1"
    assert rec.control == (A, W, D)
    assert len(rec.selected) == 3
    assert rec.text == " ".join(rec.sentences)
    assert all(not slot.fallback for slot in rec.selected)
    assert rec.labels == (A, W, D)


def test_generate_unctrl_k_sentences(model):
    reviews = [Review("R1", review_text())]
    rec = generate_from_reviews(
        reviews, "textrank", "concat", model, k=2, record_id="p1",
    )
    assert rec.control is None
    assert len(rec.selected) == 2
    # unctrl slots still carry tagger labels for downstream evaluation
    assert all(slot.label is not None for slot in rec.selected)
    # document order
    assert [s.index for s in rec.selected] == sorted(s.index for s in rec.selected)


def test_generate_external_labels_take_precedence(model):
    reviews = [Review("R1", "First note here. Second note here.")]
    n = len(review_sentences(reviews[0].text))
    assignment = LabelAssignment({
        ("p1", "R1", i): CategoryLabel.MISC for i in range(n)
    })
    rec = generate_from_reviews(
        reviews, "textrank", "concat", model,
        control=ctrl(CategoryLabel.MISC, CategoryLabel.MISC),
        record_id="p1", assignment=assignment,
    )
    assert rec.labels == (CategoryLabel.MISC, CategoryLabel.MISC)
    assert not any(slot.fallback for slot in rec.selected)


def test_generate_for_submission_modes(model):
    s = sub("p9")
    controlled = generate_for_submission(s, "lexrank", "sent-ctrl", "concat", model)
    assert controlled.control == s.meta_review.labels
    un = generate_for_submission(s, "lexrank", "unctrl", "concat", model)
    assert un.control is None
    assert len(un.selected) == len(s.meta_review.labels)  # k = |gold labels|
    with pytest.raises(PipelineError, match="unknown mode"):
        generate_for_submission(s, "lexrank", "seg", "concat", model)


def test_run_split_and_compliance(model):
    corpus = Corpus((sub("p1"), sub("p2"), sub("p3", split=Split.TRAIN)))
    records = run_split(corpus, Split.TEST, "textrank", "sent-ctrl", "concat", model)
    assert [r.id for r in records] == ["p1", "p2"]
    assert structure_compliance(records) == 1.0


def test_run_split_empty_split_rejected(model):
    corpus = Corpus((sub("p1", split=Split.TRAIN),))
    with pytest.raises(PipelineError, match="empty"):
        run_split(corpus, Split.TEST, "textrank", "unctrl", "concat", model)


def test_structure_compliance_excludes_fallback_slots():
    from mred.extract import SelectedSlot
    rec = GenerationRecord(
        id="x", control=(A, W),
        selected=(
            SelectedSlot(0, 0, A, fallback=False),
            SelectedSlot(1, 1, D, fallback=True),  # mismatch but excluded
        ),
        sentences=("a.", "d."), text="a. d.",
    )
    assert structure_compliance([rec]) == 1.0


def test_structure_compliance_sees_label_violations():
    from mred.extract import SelectedSlot
    rec = GenerationRecord(
        id="x", control=(A, W),
        selected=(
            SelectedSlot(0, 0, A, fallback=False),
            SelectedSlot(1, 1, D, fallback=False),
        ),
        sentences=("a.", "d."), text="a. d.",
    )
    assert structure_compliance([rec]) == pytest.approx(0.5)


def test_structure_compliance_needs_controlled_records():
    rec = GenerationRecord(id="x", control=None, selected=(), sentences=(), text="")
    with pytest.raises(PipelineError):
        structure_compliance([rec])


# ---------------------------------------------------------------------------
# Files
# ---------------------------------------------------------------------------

def test_record_file_round_trip(tmp_path, model):
    corpus = Corpus((sub("p1"), sub("p2")))
    records = run_split(corpus, Split.TEST, "textrank", "sent-ctrl", "concat", model)
    path = tmp_path / "records.jsonl"
    write_records(records, path)

    raw = [json.loads(line) for line in path.read_text().splitlines()]
    assert raw[0]["id"] == "p1"
    assert raw[0]["control"] == [l.value for l in records[0].control]
    assert [s["index"] for s in raw[0]["selected"]] == \
        [s.index for s in records[0].selected]
    assert all(set(s) == {"index", "text", "label", "fallback"}
               for s in raw[0]["selected"])

    outputs = read_outputs(path)
    assert outputs[0]["id"] == "p1"
    assert outputs[0]["text"] == records[0].text
    assert outputs[0]["labels"] == list(records[0].labels)


def test_read_outputs_accepts_bare_rows(tmp_path):
    path = tmp_path / "outs.jsonl"
    rows = [
        {"id": "a", "text": "alpha."},
        {"id": "b", "text": "beta.", "labels": ["weakness"]},
    ]
    path.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
    outputs = read_outputs(path)
    assert "labels" not in outputs[0]
    assert outputs[1]["labels"] == [W]


def test_read_outputs_line_errors(tmp_path):
    path = tmp_path / "outs.jsonl"
    path.write_text('{"id": "a"}\n')
    with pytest.raises(PipelineError, match="line 1"):
        read_outputs(path)
    path.write_text(json.dumps({"id": "a", "text": "t"}) + "\nnot json\n")
    with pytest.raises(PipelineError, match="line 2"):
        read_outputs(path)


def test_references_round_trip(tmp_path):
    corpus = Corpus((sub("p1"),))
    refs = references_for_split(corpus, Split.TEST)
    assert refs[0]["decision"] == "accept"
    assert refs[0]["labels"] == ["abstract", "weakness", "decision"]
    path = tmp_path / "refs.jsonl"
    path.write_text("\n".join(json.dumps(r) for r in refs) + "\n")
    loaded = read_references(path)
    assert loaded[0]["id"] == "p1"
    assert loaded[0]["labels"] == [A, W, D]
    assert loaded[0]["decision"] == "accept"


def test_read_references_requires_decision(tmp_path):
    path = tmp_path / "refs.jsonl"
    path.write_text(json.dumps({"id": "a", "text": "t"}) + "\n")
    with pytest.raises(PipelineError, match="line 1"):
        read_references(path)


def test_records_to_outputs_shape(model):
    rec = generate_from_reviews(
        [Review("R1", review_text())], "mmr", "concat", model,
        k=2, record_id="p1",
    )
    rows = records_to_outputs([rec])
    assert rows == [{"id": "p1", "text": rec.text,
                     "labels": [l.value for l in rec.labels]}]

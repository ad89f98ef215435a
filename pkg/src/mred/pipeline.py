"""End-to-end extractive generation: combine, segment, tag, rank, select.

One record per submission: the combined reviews are segmented into candidate
sentences, labeled by the tagger, ranked by the chosen engine, and selected
either uncontrolled (k = gold sentence count) or along the gold sentence
control — the two modes consume the same ranked input.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .combine import SEPARATOR, CombinedInput, combine_reviews, split_paragraphs
from .control import ControlSequence, Granularity, sent_ctrl
from .corpus import Corpus, Review, Split, Submission, review_sentences
from .extract import (
    EngineConfig,
    RankingResult,
    SelectedSlot,
    lexrank_scores,
    mmr_rank,
    select_ctrl,
    select_unctrl,
    textrank_scores,
)
from .labels import CategoryLabel, parse_label
from .metrics import structure_similarity
from .tagger import LabelAssignment, TaggerModel, predict

MODES = ("unctrl", "sent-ctrl")


class PipelineError(ValueError):
    pass


def candidate_sentences(text: str) -> list[str]:
    """Segment combined review text, treating the review separator and blank
    lines as hard boundaries so no candidate spans two sources."""
    sentences: list[str] = []
    for chunk in text.split(SEPARATOR):
        sentences.extend(review_sentences(chunk))
    return sentences


@dataclass(frozen=True)
class CandidateOrigin:
    """Where a combined-text sentence came from, in review-side indexing."""

    review_id: str
    sentence_index: int


def candidates_with_origins(
    combined: CombinedInput, reviews: list[Review]
) -> tuple[list[str], list[CandidateOrigin | None]]:
    """Enumerate candidate sentences span by span, tracking provenance.

    The sentence index is the position within review_sentences(review.text),
    i.e. the same indexing external label files use.  The synthesized rating
    prefix has no origin.
    """
    offsets: dict[str, dict[int, int]] = {}
    for review in reviews:
        cursor = 0
        per_par: dict[int, int] = {}
        for par in split_paragraphs(review):
            per_par[par.index] = cursor
            cursor += len(review_sentences(par.text))
        offsets[review.reviewer_id] = per_par
    sentences: list[str] = []
    origins: list[CandidateOrigin | None] = []
    if combined.rating_prefix:
        for sent in review_sentences(combined.rating_prefix):
            sentences.append(sent)
            origins.append(None)
    for span in combined.spans:
        base = offsets[span.review_id][span.paragraph_index]
        for j, sent in enumerate(review_sentences(combined.span_text(span))):
            sentences.append(sent)
            origins.append(CandidateOrigin(span.review_id, base + j))
    return sentences, origins


def rank_sentences(
    engine: str, sentences: list[str], config: EngineConfig
) -> RankingResult:
    if engine == "lexrank":
        return lexrank_scores(sentences, config)
    if engine == "textrank":
        return textrank_scores(sentences, config)
    if engine == "mmr":
        return mmr_rank(sentences, config)
    raise PipelineError(f"unknown engine {engine!r}")


@dataclass(frozen=True)
class GenerationRecord:
    id: str
    control: tuple[CategoryLabel, ...] | None
    selected: tuple[SelectedSlot, ...]
    sentences: tuple[str, ...]
    text: str
    warnings: tuple[str, ...] = ()

    @property
    def labels(self) -> tuple[CategoryLabel, ...]:
        return tuple(slot.label for slot in self.selected)


def generate_from_reviews(
    reviews: list[Review],
    engine: str,
    strategy: str,
    tagger_model: TaggerModel,
    control: ControlSequence | None = None,
    k: int | None = None,
    config: EngineConfig | None = None,
    record_id: str = "",
    assignment: LabelAssignment | None = None,
) -> GenerationRecord:
    """Produce one extractive draft from raw reviews.

    Exactly one of control / k selects the mode.  Sentence labels come from
    the tagger, with any external label assignment (keyed by review sentence
    index) taking precedence where it covers.
    """
    if (control is None) == (k is None):
        raise PipelineError("exactly one of control / k must be given")
    config = config or EngineConfig()
    combined = combine_reviews(strategy, reviews)
    sentences, origins = candidates_with_origins(combined, reviews)
    if not sentences:
        raise PipelineError("combined reviews contain no sentences")
    tagged = predict(tagger_model, sentences)
    labels = list(tagged.labels)
    if assignment is not None:
        for i, origin in enumerate(origins):
            if origin is None:
                continue
            external = assignment.get(
                record_id, origin.review_id, origin.sentence_index
            )
            if external is not None:
                labels[i] = external
    ranking = rank_sentences(engine, sentences, config)
    if control is not None:
        selection = select_ctrl(ranking, labels, control)
    else:
        selection = select_unctrl(ranking, k)
    slots = tuple(
        slot if slot.label is not None else SelectedSlot(
            slot.position, slot.index, labels[slot.index], slot.fallback, slot.score
        )
        for slot in selection.slots
    )
    chosen = tuple(sentences[slot.index] for slot in slots)
    notes = list(selection.warnings)
    if not ranking.converged:
        notes.append(
            f"{engine} did not converge within {ranking.iterations} iterations"
        )
    return GenerationRecord(
        id=record_id,
        control=tuple(control.labels) if control is not None else None,
        selected=slots,
        sentences=chosen,
        text=" ".join(chosen),
        warnings=tuple(notes),
    )


def generate_for_submission(
    sub: Submission,
    engine: str,
    mode: str,
    strategy: str,
    tagger_model: TaggerModel,
    config: EngineConfig | None = None,
    assignment: LabelAssignment | None = None,
) -> GenerationRecord:
    if mode not in MODES:
        raise PipelineError(f"unknown mode {mode!r}")
    gold = sent_ctrl(sub.meta_review)
    if mode == "sent-ctrl":
        control, k = gold, None
    else:
        control, k = None, len(gold)
    return generate_from_reviews(
        list(sub.reviews),
        engine=engine,
        strategy=strategy,
        tagger_model=tagger_model,
        control=control,
        k=k,
        config=config,
        record_id=sub.id,
        assignment=assignment,
    )


def run_split(
    corpus: Corpus,
    split: Split,
    engine: str,
    mode: str,
    strategy: str,
    tagger_model: TaggerModel,
    config: EngineConfig | None = None,
    assignment: LabelAssignment | None = None,
) -> list[GenerationRecord]:
    subs = corpus.split(split)
    if not subs:
        raise PipelineError(f"split {split.value!r} is empty")
    return [
        generate_for_submission(
            sub, engine, mode, strategy, tagger_model, config, assignment
        )
        for sub in subs
    ]


def references_for_split(corpus: Corpus, split: Split) -> list[dict]:
    """Gold-side records consumed by the evaluation suite."""
    return [
        {
            "id": sub.id,
            "text": sub.meta_review.text,
            "labels": [l.value for l in sub.meta_review.labels],
            "decision": sub.meta_review.decision.value,
        }
        for sub in corpus.split(split)
    ]


def records_to_outputs(records: list[GenerationRecord]) -> list[dict]:
    """Prediction-side records consumed by the evaluation suite."""
    return [
        {
            "id": rec.id,
            "text": rec.text,
            "labels": [l.value for l in rec.labels],
        }
        for rec in records
    ]


def structure_compliance(records: list[GenerationRecord]) -> float:
    """Mean sentence-level structure similarity of outputs to their controls,
    with fallback slots dropped from both sides.  1.0 by construction unless
    selection misbehaves; guards the pipeline."""
    scored = []
    for rec in records:
        if rec.control is None:
            continue
        kept = [slot for slot in rec.selected if not slot.fallback]
        if not kept:
            continue
        pred = [slot.label for slot in kept]
        ctrl = [rec.control[slot.position] for slot in kept]
        scored.append(structure_similarity(pred, ctrl))
    if not scored:
        raise PipelineError("no controlled records to score")
    return sum(scored) / len(scored)


# ---------------------------------------------------------------------------
# Record files
# ---------------------------------------------------------------------------

def record_payload(rec: GenerationRecord) -> dict:
    return {
        "id": rec.id,
        "control": [l.value for l in rec.control] if rec.control is not None else None,
        "selected": [
            {
                "index": slot.index,
                "text": rec.sentences[i],
                "label": slot.label.value,
                "fallback": slot.fallback,
            }
            for i, slot in enumerate(rec.selected)
        ],
        "text": rec.text,
        "warnings": list(rec.warnings),
    }


def write_records(records: list[GenerationRecord], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(record_payload(rec)) + "\n")


def read_outputs(path: str | Path) -> list[dict]:
    """Read generation records (or bare {id, text[, labels]} rows) for
    evaluation."""
    out: list[dict] = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                rec = json.loads(raw)
                row = {"id": str(rec["id"]), "text": str(rec["text"])}
                if rec.get("labels") is not None:
                    row["labels"] = [parse_label(l) for l in rec["labels"]]
                elif rec.get("selected") is not None:
                    row["labels"] = [
                        parse_label(s["label"]) for s in rec["selected"]
                    ]
                out.append(row)
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise PipelineError(f"line {lineno}: {exc}") from exc
    return out


def read_references(path: str | Path) -> list[dict]:
    out: list[dict] = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                rec = json.loads(raw)
                row = {
                    "id": str(rec["id"]),
                    "text": str(rec["text"]),
                    "decision": str(rec["decision"]),
                }
                if rec.get("labels") is not None:
                    row["labels"] = [parse_label(l) for l in rec["labels"]]
                out.append(row)
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise PipelineError(f"line {lineno}: {exc}") from exc
    return out

"""Generic-sentence baselines: per-category banks assembled along a control.

Banks group training sentences by category (gold labels on the target side,
tagger predictions on the source side), rank each group by TextRank
centrality, and assembly walks the control sequence taking the next unused
sentence of each requested category.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .control import ControlSequence
from .corpus import Submission, review_sentences
from .extract import EngineConfig, textrank_scores
from .labels import ALL_LABELS, CategoryLabel, parse_label
from .tagger import LabelAssignment, TaggerModel, predict

BANK_FORMAT_VERSION = 1

SIDES = ("target", "source")
SCORE_FILTERS = ("all", "high", "low")
HIGH_RATING_MIN = 7.0
LOW_RATING_MAX = 3.0

# Ranking a category is quadratic in its group size, so groups are capped to
# a deterministic prefix (document order) before TextRank; sentences beyond
# the cap never enter the bank.  Controls consume at most a few dozen ranks,
# and stored lists are truncated accordingly.
RANK_POOL_CAP = 10_000
BANK_DEPTH = 1_000


class GenericBankError(ValueError):
    pass


@dataclass(frozen=True)
class GenericBank:
    side: str
    score_filter: str
    categories: dict[CategoryLabel, tuple[str, ...]]

    def __post_init__(self):
        if self.side not in SIDES:
            raise GenericBankError(f"unknown side {self.side!r}")
        if self.score_filter not in SCORE_FILTERS:
            raise GenericBankError(f"unknown score filter {self.score_filter!r}")
        missing = [l for l in ALL_LABELS if l not in self.categories]
        if missing:
            raise GenericBankError(
                f"bank lacks categories: {[l.value for l in missing]}"
            )

    def ranked(self, label: CategoryLabel) -> tuple[str, ...]:
        return self.categories[label]


def _passes_filter(sub: Submission, score_filter: str) -> bool:
    if score_filter == "all":
        return True
    rating = sub.average_rating
    if rating is None:
        return False
    if score_filter == "high":
        return rating >= HIGH_RATING_MIN
    return rating <= LOW_RATING_MAX


def _target_groups(submissions) -> dict[CategoryLabel, list[str]]:
    groups: dict[CategoryLabel, list[str]] = {l: [] for l in ALL_LABELS}
    for sub in submissions:
        for sent in sub.meta_review.sentences:
            groups[sent.label].append(sent.text)
    return groups


def _source_groups(
    submissions,
    tagger_model: TaggerModel | None,
    labels: LabelAssignment | None,
) -> dict[CategoryLabel, list[str]]:
    groups: dict[CategoryLabel, list[str]] = {l: [] for l in ALL_LABELS}
    for sub in submissions:
        for review in sub.reviews:
            sentences = review_sentences(review.text)
            predicted: list[CategoryLabel | None] = [None] * len(sentences)
            if labels is not None:
                for i in range(len(sentences)):
                    predicted[i] = labels.get(sub.id, review.reviewer_id, i)
            if tagger_model is not None and None in predicted:
                tagged = predict(tagger_model, sentences)
                for i, ts in enumerate(tagged.sentences):
                    if predicted[i] is None:
                        predicted[i] = ts.label
            for text, label in zip(sentences, predicted):
                if label is not None:
                    groups[label].append(text)
    return groups


def _rank_group(sentences: list[str], config: EngineConfig) -> tuple[str, ...]:
    pool = sentences[:RANK_POOL_CAP]
    if not pool:
        return ()
    scores = textrank_scores(pool, config).sentences
    order = sorted(range(len(pool)), key=lambda i: (-scores[i].score, i))
    return tuple(pool[i] for i in order[:BANK_DEPTH])


def build_generic_bank(
    submissions,
    side: str,
    score_filter: str = "all",
    tagger_model: TaggerModel | None = None,
    labels: LabelAssignment | None = None,
    config: EngineConfig | None = None,
) -> GenericBank:
    """Group, filter by average rating, and TextRank-rank each category.

    The target side uses gold meta-review labels; the source side labels
    review sentences with the supplied tagger model and/or external label
    assignment.  Empty groups stay empty.
    """
    if side not in SIDES:
        raise GenericBankError(f"unknown side {side!r}")
    if score_filter not in SCORE_FILTERS:
        raise GenericBankError(f"unknown score filter {score_filter!r}")
    submissions = [s for s in submissions if _passes_filter(s, score_filter)]
    if not submissions:
        raise GenericBankError(
            f"no submissions pass the {score_filter!r} rating filter"
        )
    if side == "source":
        if tagger_model is None and labels is None:
            raise GenericBankError("source side requires a tagger model or labels")
        groups = _source_groups(submissions, tagger_model, labels)
    else:
        groups = _target_groups(submissions)

    config = config or EngineConfig()
    with ThreadPoolExecutor(max_workers=2) as pool:
        futures = {
            label: pool.submit(_rank_group, group, config)
            for label, group in groups.items()
        }
        ranked = {label: future.result() for label, future in futures.items()}
    return GenericBank(side=side, score_filter=score_filter, categories=ranked)


@dataclass(frozen=True)
class AssembledGeneric:
    text: str
    labels: tuple[CategoryLabel, ...]
    sentences: tuple[str, ...]
    warnings: tuple[str, ...] = field(default=())


def assemble_generic(bank: GenericBank, control: ControlSequence) -> AssembledGeneric:
    """Fill each control slot with the next unused sentence of its category.

    The i-th occurrence of a label takes the rank-i sentence unless that
    string already appeared (duplicates skip down the ranking).  An empty or
    exhausted category skips the slot with a warning; no sentence string is
    ever emitted twice.
    """
    used: set[str] = set()
    cursors: dict[CategoryLabel, int] = {}
    sentences: list[str] = []
    realized: list[CategoryLabel] = []
    notes: list[str] = []
    for position, label in enumerate(control):
        ranked = bank.ranked(label)
        i = cursors.get(label, 0)
        while i < len(ranked) and ranked[i] in used:
            i += 1
        if i >= len(ranked):
            cursors[label] = i
            reason = "empty" if not ranked else "exhausted"
            notes.append(f"slot {position}: category {label.value!r} {reason}; skipped")
            continue
        sentences.append(ranked[i])
        realized.append(label)
        used.add(ranked[i])
        cursors[label] = i + 1
    return AssembledGeneric(
        text=" ".join(sentences),
        labels=tuple(realized),
        sentences=tuple(sentences),
        warnings=tuple(notes),
    )


def save_bank(bank: GenericBank, path: str | Path) -> None:
    payload = {
        "format_version": BANK_FORMAT_VERSION,
        "side": bank.side,
        "filter": bank.score_filter,
        "categories": {
            label.value: list(bank.categories[label]) for label in ALL_LABELS
        },
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload), encoding="utf-8")


def load_bank(path: str | Path) -> GenericBank:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise GenericBankError(f"bank file is not valid JSON: {exc}") from exc
    if payload.get("format_version") != BANK_FORMAT_VERSION:
        raise GenericBankError(
            f"unsupported bank format {payload.get('format_version')!r}"
        )
    try:
        categories = {
            parse_label(name): tuple(str(s) for s in sents)
            for name, sents in payload["categories"].items()
        }
        return GenericBank(
            side=str(payload["side"]),
            score_filter=str(payload["filter"]),
            categories=categories,
        )
    except (KeyError, TypeError) as exc:
        raise GenericBankError(f"malformed bank file: {exc}") from exc

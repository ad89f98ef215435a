"""Corpus data model, JSONL (de)serialization, sentence segmentation, filtering.

The on-disk corpus format is UTF-8 JSON lines, one submission per line:

    {"id": ..., "year": ..., "decision": "accept"|"reject",
     "reviews": [{"reviewer_id", "text", "rating", "confidence"}],
     "meta_review": [{"text", "label"}]}

A "split" field ("train"|"validation"|"test") is written when assigned and
accepted on load; everything else is required.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from random import Random

from .labels import CategoryLabel, parse_label


class CorpusError(ValueError):
    """Malformed corpus data; carries the 1-based line number when known."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class Decision(str, Enum):
    ACCEPT = "accept"
    REJECT = "reject"


class Split(str, Enum):
    TRAIN = "train"
    VALIDATION = "validation"
    TEST = "test"
    UNASSIGNED = "unassigned"


MIN_YEAR = 2018
MAX_YEAR = 2021


@dataclass(frozen=True)
class Review:
    reviewer_id: str
    text: str
    rating: int | None = None
    confidence: int | None = None

    def __post_init__(self):
        if not self.text.strip():
            raise CorpusError("review text must be nonempty")
        if self.rating is not None and not 1 <= self.rating <= 10:
            raise CorpusError(f"rating {self.rating} outside [1, 10]")


@dataclass(frozen=True)
class LabeledSentence:
    text: str
    label: CategoryLabel

    def __post_init__(self):
        if not self.text.strip():
            raise CorpusError("sentence text must be nonempty")


@dataclass(frozen=True)
class MetaReview:
    sentences: tuple[LabeledSentence, ...]
    decision: Decision

    def __post_init__(self):
        if not self.sentences:
            raise CorpusError("meta-review must have at least one sentence")

    @property
    def text(self) -> str:
        return " ".join(s.text for s in self.sentences)

    @property
    def labels(self) -> tuple[CategoryLabel, ...]:
        return tuple(s.label for s in self.sentences)


@dataclass(frozen=True)
class Submission:
    id: str
    year: int
    reviews: tuple[Review, ...]
    meta_review: MetaReview
    split: Split = Split.UNASSIGNED

    def __post_init__(self):
        if not MIN_YEAR <= self.year <= MAX_YEAR:
            raise CorpusError(
                f"year {self.year} outside [{MIN_YEAR}, {MAX_YEAR}]"
            )
        if not self.reviews:
            raise CorpusError("submission must have at least one review")

    @property
    def average_rating(self) -> float | None:
        rated = [r.rating for r in self.reviews if r.rating is not None]
        if not rated:
            return None
        return sum(rated) / len(rated)


@dataclass(frozen=True)
class Corpus:
    submissions: tuple[Submission, ...]
    # provenance describes where the data came from; it is deliberately
    # excluded from equality so that write/load round-trips compare equal.
    provenance: str = field(default="", compare=False)

    def __post_init__(self):
        seen: set[str] = set()
        for sub in self.submissions:
            if sub.id in seen:
                raise CorpusError(f"duplicate submission id: {sub.id!r}")
            seen.add(sub.id)

    def __len__(self) -> int:
        return len(self.submissions)

    def split(self, which: Split) -> tuple[Submission, ...]:
        return tuple(s for s in self.submissions if s.split == which)

    @property
    def n_reviews(self) -> int:
        return sum(len(s.reviews) for s in self.submissions)

    @property
    def n_labeled_sentences(self) -> int:
        return sum(len(s.meta_review.sentences) for s in self.submissions)


# ---------------------------------------------------------------------------
# JSONL serialization
# ---------------------------------------------------------------------------

def submission_to_record(sub: Submission) -> dict:
    rec = {
        "id": sub.id,
        "year": sub.year,
        "decision": sub.meta_review.decision.value,
        "reviews": [
            {
                "reviewer_id": r.reviewer_id,
                "text": r.text,
                "rating": r.rating,
                "confidence": r.confidence,
            }
            for r in sub.reviews
        ],
        "meta_review": [
            {"text": s.text, "label": s.label.value}
            for s in sub.meta_review.sentences
        ],
    }
    if sub.split != Split.UNASSIGNED:
        rec["split"] = sub.split.value
    return rec


def submission_from_record(rec: dict, line: int | None = None) -> Submission:
    try:
        decision = Decision(rec["decision"])
        reviews = tuple(
            Review(
                reviewer_id=str(r.get("reviewer_id", "")),
                text=r["text"],
                rating=r.get("rating"),
                confidence=r.get("confidence"),
            )
            for r in rec["reviews"]
        )
        sentences = tuple(
            LabeledSentence(text=s["text"], label=parse_label(s["label"]))
            for s in rec["meta_review"]
        )
        split = Split(rec.get("split", "unassigned"))
        return Submission(
            id=str(rec["id"]),
            year=int(rec["year"]),
            reviews=reviews,
            meta_review=MetaReview(sentences=sentences, decision=decision),
            split=split,
        )
    except CorpusError as exc:
        if exc.line is None:
            raise CorpusError(str(exc), line) from None
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise CorpusError(f"malformed submission record: {exc}", line) from exc


def load_corpus(path: str | Path) -> Corpus:
    """Parse a JSONL corpus file; errors report the offending line number."""
    path = Path(path)
    submissions = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                rec = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"invalid JSON: {exc.msg}", lineno) from exc
            submissions.append(submission_from_record(rec, lineno))
    return Corpus(submissions=tuple(submissions), provenance=str(path))


def write_corpus(corpus: Corpus, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for sub in corpus.submissions:
            fh.write(json.dumps(submission_to_record(sub), ensure_ascii=False))
            fh.write("\n")


# ---------------------------------------------------------------------------
# Sentence segmentation
# ---------------------------------------------------------------------------

# Tokens before a period that never end a sentence.  Single letters (initials,
# list markers) are guarded separately.
_ABBREVIATIONS = {
    "e.g", "i.e", "etc", "cf", "vs", "al", "et al", "resp", "approx",
    "fig", "figs", "eq", "eqs", "sec", "secs", "tab", "no", "vol", "pp",
    "dr", "mr", "mrs", "ms", "prof", "st",
}

_OPENERS = "([{"
_CLOSERS = ")]}"
_TERMINATORS = ".!?"


def _word_before(text: str, i: int) -> str:
    """The token immediately preceding position i (letters, digits, dots)."""
    j = i
    while j > 0 and (text[j - 1].isalnum() or text[j - 1] == "."):
        j -= 1
    return text[j:i]


def _is_boundary(text: str, i: int) -> bool:
    """True when the terminator run ending at index i closes a sentence."""
    k = i + 1
    # absorb closing quotes/brackets that belong to the sentence
    while k < len(text) and text[k] in "\"'" + _CLOSERS:
        k += 1
    if k >= len(text) or not text[k].isspace():
        return False
    k += 1
    while k < len(text) and text[k].isspace():
        k += 1
    if k >= len(text):
        return False
    nxt = text[k]
    if nxt in "\"'" + _OPENERS and k + 1 < len(text):
        nxt = text[k + 1]
    if not (nxt.isupper() or nxt.isdigit()):
        return False
    if text[i] == ".":
        word = _word_before(text, i).rstrip(".")
        bare = word.lower()
        if bare in _ABBREVIATIONS or bare.replace(".", "") in {
            a.replace(".", "").replace(" ", "") for a in _ABBREVIATIONS
        }:
            return False
        if len(word) == 1 and word.isalpha():  # initials, list markers
            return False
    return True


def _split_end(text: str, i: int) -> int:
    """End index (exclusive) of the sentence whose last terminator is at i."""
    k = i + 1
    while k < len(text) and text[k] in "\"'" + _CLOSERS:
        k += 1
    return k


def segment_sentences(text: str) -> list[str]:
    """Deterministic rule-based sentence splitter.

    Splits on ., ! or ? followed by whitespace and an uppercase/digit start,
    with an abbreviation guard and no splits inside brackets or double
    quotes.  Joining the output (ignoring whitespace) reproduces the input
    (ignoring whitespace).
    """
    sentences: list[str] = []
    start = 0
    depth = 0
    in_quote = False
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch in _OPENERS:
            depth += 1
        elif ch in _CLOSERS:
            depth = max(0, depth - 1)
        elif ch == '"':
            in_quote = not in_quote
        elif ch in _TERMINATORS and depth == 0 and not in_quote:
            # collapse a run of terminators ("?!", "...") to its last char
            j = i
            while j + 1 < n and text[j + 1] in _TERMINATORS:
                j += 1
            if _is_boundary(text, j):
                end = _split_end(text, j)
                piece = text[start:end].strip()
                if piece:
                    sentences.append(piece)
                start = end
            i = j
        i += 1
    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences


_BLANK_LINES = re.compile(r"\n\s*\n")


def review_sentences(text: str) -> list[str]:
    """Sentences of a (possibly multi-paragraph) review.

    Blank lines are hard boundaries, so a paragraph that lacks a final
    terminator never merges with the next one.  This is the canonical
    sentence indexing for review-side label files.
    """
    out: list[str] = []
    for para in _BLANK_LINES.split(text):
        out.extend(segment_sentences(para))
    return out


_WS = re.compile(r"\s+")


def word_count(text: str) -> int:
    """Number of whitespace-delimited tokens."""
    stripped = text.strip()
    if not stripped:
        return 0
    return len(_WS.split(stripped))


# ---------------------------------------------------------------------------
# Filtering and splitting
# ---------------------------------------------------------------------------

class SplitTooSmallError(ValueError):
    pass


def filter_and_split(
    corpus: Corpus,
    min_words: int = 20,
    max_words: int = 400,
    ratio: tuple[int, ...] = (8, 1, 1),
    seed: int = 0,
) -> Corpus:
    """Keep submissions whose meta-review length is in bounds; assign splits.

    The shuffle is deterministic under ``seed``; split sizes follow the ratio
    with cumulative rounding, so 10 submissions under (8, 1, 1) come out
    exactly 8/1/1.  Raises SplitTooSmallError when fewer than sum(ratio)
    submissions survive the filter.
    """
    if min_words > max_words:
        raise ValueError("min_words must not exceed max_words")
    if len(ratio) != 3 or any(r <= 0 for r in ratio):
        raise ValueError("ratio must be three positive integers")

    kept = [
        sub
        for sub in corpus.submissions
        if min_words <= word_count(sub.meta_review.text) <= max_words
    ]
    if len(kept) < sum(ratio):
        raise SplitTooSmallError(
            f"only {len(kept)} submissions survive the length filter; "
            f"need at least {sum(ratio)} for a {ratio} split"
        )

    order = list(range(len(kept)))
    Random(seed).shuffle(order)
    total = sum(ratio)
    n = len(kept)
    b1 = round(n * ratio[0] / total)
    b2 = round(n * (ratio[0] + ratio[1]) / total)
    assignment: dict[int, Split] = {}
    for pos, idx in enumerate(order):
        if pos < b1:
            assignment[idx] = Split.TRAIN
        elif pos < b2:
            assignment[idx] = Split.VALIDATION
        else:
            assignment[idx] = Split.TEST

    out = tuple(
        replace(sub, split=assignment[i]) for i, sub in enumerate(kept)
    )
    return Corpus(submissions=out, provenance=corpus.provenance)

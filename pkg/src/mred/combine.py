"""Review combination: linearize a submission's reviews into one input text.

Five strategies: plain concatenation with a review separator, the same with a
synthesized reviewer-rating sentence up front, similarity-based paragraph
merging into the longest review, rated merging, and longest-review-only.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import Review, word_count
from .similarity import cosine_matrix, tfidf_vectors

SEPARATOR = " <REVBREAK> "

_BLANK_LINE = re.compile(r"\n[ \t]*\n+")
_INNER_NEWLINES = re.compile(r"\s*\n\s*")


class CombineError(ValueError):
    pass


class MissingRatingError(CombineError):
    def __init__(self, reviewer_id: str):
        super().__init__(f"review {reviewer_id!r} has no rating")
        self.reviewer_id = reviewer_id


@dataclass(frozen=True)
class Paragraph:
    review_id: str
    index: int
    text: str  # reflowed: inner newline runs collapsed to single spaces
    raw_start: int  # char range of the paragraph in its source review text
    raw_end: int


@dataclass(frozen=True)
class Span:
    """Half-open char range of one source paragraph inside the combined text."""

    start: int
    end: int
    review_id: str
    paragraph_index: int


@dataclass(frozen=True)
class CombinedInput:
    text: str
    spans: tuple[Span, ...]
    rating_prefix: str | None = None

    def __post_init__(self):
        last = -1
        seen: set[tuple[str, int]] = set()
        for span in self.spans:
            if not 0 <= span.start <= span.end <= len(self.text):
                raise CombineError("span outside the combined text")
            if span.start < last:
                raise CombineError("spans overlap or are out of order")
            last = span.end
            key = (span.review_id, span.paragraph_index)
            if key in seen:
                raise CombineError(f"span duplicates source paragraph {key}")
            seen.add(key)

    def span_text(self, span: Span) -> str:
        return self.text[span.start : span.end]


def split_paragraphs(review: Review) -> list[Paragraph]:
    """Blank-line-separated paragraphs, each reflowed to a single line."""
    source = review.text
    pieces: list[tuple[int, int]] = []
    prev = 0
    for m in _BLANK_LINE.finditer(source):
        pieces.append((prev, m.start()))
        prev = m.end()
    pieces.append((prev, len(source)))

    out: list[Paragraph] = []
    for start, end in pieces:
        chunk = source[start:end]
        stripped = chunk.strip()
        if not stripped:
            continue
        lead = len(chunk) - len(chunk.lstrip())
        trail = len(chunk) - len(chunk.rstrip())
        out.append(
            Paragraph(
                review_id=review.reviewer_id,
                index=len(out),
                text=_INNER_NEWLINES.sub(" ", stripped),
                raw_start=start + lead,
                raw_end=end - trail,
            )
        )
    return out


@dataclass(frozen=True)
class SimilarityProvider:
    """Pairwise paragraph similarity: local TF-IDF cosine, or vectors from file.

    External vectors reproduce runs made with a stronger sentence encoder;
    they are keyed by (review id, paragraph index).
    """

    kind: str = "tfidf_cosine"
    vectors: dict[tuple[str, int], np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("tfidf_cosine", "external_vectors"):
            raise CombineError(f"unknown similarity provider kind {self.kind!r}")

    def matrix(self, paragraphs: list[Paragraph]) -> np.ndarray:
        """Symmetric similarity matrix over the given paragraphs."""
        if self.kind == "tfidf_cosine":
            return cosine_matrix(tfidf_vectors([p.text for p in paragraphs]))
        rows = []
        for p in paragraphs:
            key = (p.review_id, p.index)
            if key not in self.vectors:
                raise CombineError(f"no external vector for paragraph {key}")
            rows.append(np.asarray(self.vectors[key], dtype=float))
        return cosine_matrix(np.vstack(rows))


def load_vectors(path: str | Path) -> SimilarityProvider:
    """Read {review_id, paragraph_index, vector} JSON lines."""
    vectors: dict[tuple[str, int], np.ndarray] = {}
    with Path(path).open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                rec = json.loads(raw)
                key = (str(rec["review_id"]), int(rec["paragraph_index"]))
                vec = np.asarray(rec["vector"], dtype=float)
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise CombineError(f"line {lineno}: bad vector record: {exc}") from exc
            if vec.ndim != 1 or vec.size == 0:
                raise CombineError(f"line {lineno}: vector must be a flat list")
            vectors[key] = vec
    return SimilarityProvider(kind="external_vectors", vectors=vectors)


def _require_reviews(reviews: list[Review]) -> None:
    if not reviews:
        raise CombineError("at least one review required")
    ids = [r.reviewer_id for r in reviews]
    if len(set(ids)) != len(ids):
        raise CombineError("reviewer ids must be unique within a submission")


def _verbatim_spans(reviews: list[Review]) -> tuple[str, list[Span]]:
    """Join review texts with the separator; spans locate raw paragraphs."""
    parts: list[str] = []
    spans: list[Span] = []
    pos = 0
    for i, review in enumerate(reviews):
        if i > 0:
            parts.append(SEPARATOR)
            pos += len(SEPARATOR)
        parts.append(review.text)
        for para in split_paragraphs(review):
            spans.append(
                Span(pos + para.raw_start, pos + para.raw_end,
                     para.review_id, para.index)
            )
        pos += len(review.text)
    return "".join(parts), spans


def concat(reviews: list[Review]) -> CombinedInput:
    """Join review texts verbatim with the literal separator, in input order."""
    _require_reviews(reviews)
    text, spans = _verbatim_spans(reviews)
    return CombinedInput(text=text, spans=tuple(spans))


def rating_sentence(reviews: list[Review]) -> str:
    """"R1 rating score: S1, ..., Rn rating score: Sn." over input order."""
    _require_reviews(reviews)
    parts = []
    for i, review in enumerate(reviews, start=1):
        if review.rating is None:
            raise MissingRatingError(review.reviewer_id)
        parts.append(f"R{i} rating score: {review.rating}")
    return ", ".join(parts) + "."


def _with_prefix(prefix: str, combined: CombinedInput) -> CombinedInput:
    shift = len(prefix) + 1
    spans = tuple(
        Span(s.start + shift, s.end + shift, s.review_id, s.paragraph_index)
        for s in combined.spans
    )
    return CombinedInput(
        text=f"{prefix} {combined.text}", spans=spans, rating_prefix=prefix
    )


def rate_concat(reviews: list[Review]) -> CombinedInput:
    return _with_prefix(rating_sentence(reviews), concat(reviews))


def longest_review(reviews: list[Review]) -> CombinedInput:
    """The review with the most words, verbatim; ties go to the earliest."""
    _require_reviews(reviews)
    best = max(reviews, key=lambda r: word_count(r.text))
    text, spans = _verbatim_spans([best])
    return CombinedInput(text=text, spans=tuple(spans))


def _join_paragraphs(ordered: list[Paragraph]) -> tuple[str, list[Span]]:
    parts: list[str] = []
    spans: list[Span] = []
    pos = 0
    for i, para in enumerate(ordered):
        if i > 0:
            parts.append("\n\n")
            pos += 2
        parts.append(para.text)
        spans.append(Span(pos, pos + len(para.text), para.review_id, para.index))
        pos += len(para.text)
    return "".join(parts), spans


def merge(
    reviews: list[Review], provider: SimilarityProvider | None = None
) -> CombinedInput:
    """Insert every non-backbone paragraph after its most similar backbone one.

    The backbone is the longest review; its paragraph order is preserved.
    Paragraphs attached to the same backbone paragraph keep (review order,
    paragraph order).  Similarity ties resolve to the earliest backbone
    paragraph.
    """
    _require_reviews(reviews)
    provider = provider or SimilarityProvider()
    backbone_pos = min(
        range(len(reviews)),
        key=lambda i: (-word_count(reviews[i].text), i),
    )
    backbone_paras = split_paragraphs(reviews[backbone_pos])
    foreign = [
        para
        for i, review in enumerate(reviews)
        if i != backbone_pos
        for para in split_paragraphs(review)
    ]
    if not backbone_paras:
        raise CombineError("backbone review has no paragraphs")
    if not foreign:
        text, spans = _join_paragraphs(backbone_paras)
        return CombinedInput(text=text, spans=tuple(spans))

    sim = provider.matrix(backbone_paras + foreign)
    nb = len(backbone_paras)
    attached: list[list[Paragraph]] = [[] for _ in range(nb)]
    for j, para in enumerate(foreign, start=nb):
        # np.argmax returns the first maximum: earliest backbone paragraph
        target = int(np.argmax(sim[j, :nb]))
        attached[target].append(para)

    ordered: list[Paragraph] = []
    for i, backbone_para in enumerate(backbone_paras):
        ordered.append(backbone_para)
        ordered.extend(attached[i])
    text, spans = _join_paragraphs(ordered)
    return CombinedInput(text=text, spans=tuple(spans))


def rate_merge(
    reviews: list[Review], provider: SimilarityProvider | None = None
) -> CombinedInput:
    return _with_prefix(rating_sentence(reviews), merge(reviews, provider))


STRATEGIES = ("concat", "rate-concat", "merge", "rate-merge", "longest")


def combine_reviews(
    strategy: str,
    reviews: list[Review],
    provider: SimilarityProvider | None = None,
) -> CombinedInput:
    if strategy == "concat":
        return concat(reviews)
    if strategy == "rate-concat":
        return rate_concat(reviews)
    if strategy == "merge":
        return merge(reviews, provider)
    if strategy == "rate-merge":
        return rate_merge(reviews, provider)
    if strategy == "longest":
        return longest_review(reviews)
    raise CombineError(
        f"unknown strategy {strategy!r}; expected one of {STRATEGIES}"
    )

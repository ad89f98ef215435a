"""Extractive ranking engines and controlled/uncontrolled sentence selection.

LexRank scores are the stationary distribution of a damped, row-normalized
similarity matrix.  TextRank runs the unnormalized random-surfer update over
word-overlap edges.  MMR greedily trades centroid relevance against maximum
similarity to already-selected sentences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from ._text import tokenize
from .control import ControlSequence
from .labels import CategoryLabel
from .similarity import cosine_matrix, tfidf_vectors

#: stop storing a dense word-overlap matrix beyond this many bytes; recompute
#: row blocks per iteration instead (slower, bounded memory)
MAX_DENSE_BYTES = 512 * 1024 * 1024
_BLOCK_ROWS = 1024


class ExtractError(ValueError):
    pass


@dataclass(frozen=True)
class EngineConfig:
    """Free parameters the source algorithms leave open.

    ``similarity`` selects LexRank's edge weights; TextRank is word-overlap
    by definition and MMR needs a vector space, so both ignore it.
    """

    damping: float = 0.85
    tolerance: float = 1e-6
    max_iterations: int = 100
    mmr_lambda: float = 0.5
    similarity: str = "tfidf_cosine"

    def __post_init__(self):
        if not 0.0 < self.damping < 1.0:
            raise ExtractError("damping must lie in (0, 1)")
        if self.tolerance <= 0.0:
            raise ExtractError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ExtractError("max_iterations must be >= 1")
        if not 0.0 <= self.mmr_lambda <= 1.0:
            raise ExtractError("mmr_lambda must lie in [0, 1]")
        if self.similarity not in ("tfidf_cosine", "word_overlap"):
            raise ExtractError(f"unknown similarity {self.similarity!r}")


@dataclass(frozen=True)
class RankedSentence:
    index: int
    score: float
    label: CategoryLabel | None = None

    def __post_init__(self):
        if not math.isfinite(self.score):
            raise ExtractError(f"non-finite score for sentence {self.index}")


@dataclass(frozen=True)
class RankingResult:
    """Ranked sentences plus convergence bookkeeping.

    For LexRank/TextRank `sentences` follows document order; for MMR it is
    the greedy selection order.  `converged` is False when the iteration hit
    max_iterations first — the last iterate is still returned.
    """

    sentences: tuple[RankedSentence, ...]
    converged: bool = True
    iterations: int = 0

    def scores(self) -> np.ndarray:
        return np.array([s.score for s in self.sentences])


@dataclass(frozen=True)
class ExtractRequest:
    """One controlled or uncontrolled extraction instance."""

    sentences: tuple[str, ...]
    labels: tuple[CategoryLabel, ...] | None = None
    control: ControlSequence | None = None
    k: int | None = None

    def __post_init__(self):
        if not self.sentences:
            raise ExtractError("at least one sentence required")
        if (self.control is None) == (self.k is None):
            raise ExtractError("supply exactly one of control / k")
        if self.control is not None and self.labels is None:
            raise ExtractError("controlled extraction requires sentence labels")
        if self.labels is not None and len(self.labels) != len(self.sentences):
            raise ExtractError("labels must align with sentences")
        if self.k is not None and self.k < 1:
            raise ExtractError("k must be >= 1")


def _require_sentences(sentences) -> list[str]:
    sentences = list(sentences)
    if not sentences:
        raise ExtractError("at least one sentence required")
    return sentences


# ---------------------------------------------------------------------------
# LexRank
# ---------------------------------------------------------------------------

def _edge_matrix(sentences: list[str], cfg: EngineConfig) -> np.ndarray:
    if cfg.similarity == "tfidf_cosine":
        sim = cosine_matrix(tfidf_vectors(sentences))
        sim = np.maximum(sim, 0.0)
    else:
        sim = _word_overlap_dense(sentences)
    np.fill_diagonal(sim, 0.0)
    return sim


def lexrank_scores(sentences, cfg: EngineConfig = EngineConfig()) -> RankingResult:
    """Stationary distribution of the damped row-normalized similarity walk."""
    sentences = _require_sentences(sentences)
    n = len(sentences)
    if n == 1:
        return RankingResult((RankedSentence(0, 1.0),), True, 0)

    sim = _edge_matrix(sentences, cfg)
    row_sums = sim.sum(axis=1)
    P = np.empty_like(sim)
    dangling = row_sums == 0.0
    P[dangling] = 1.0 / n
    P[~dangling] = sim[~dangling] / row_sums[~dangling, None]

    d = cfg.damping
    x = np.full(n, 1.0 / n)
    converged = False
    iterations = 0
    for iterations in range(1, cfg.max_iterations + 1):
        new = d * (P.T @ x) + (1.0 - d) / n
        if np.abs(new - x).sum() < cfg.tolerance:
            x = new
            converged = True
            break
        x = new
    x = x / x.sum()
    ranked = tuple(RankedSentence(i, float(x[i])) for i in range(n))
    return RankingResult(ranked, converged, iterations)


# ---------------------------------------------------------------------------
# TextRank
# ---------------------------------------------------------------------------

def _overlap_blocks(sentences: list[str]):
    """Yield (row range, dense weight block) of the word-overlap graph.

    Weight(a, b) = |shared unique words| / (log|a| + log|b|), zero when the
    log-length denominator is not positive (single-token sentences) and on
    the diagonal.
    """
    token_lists = [tokenize(s) for s in sentences]
    vocab: dict[str, int] = {}
    rows, cols = [], []
    for i, toks in enumerate(token_lists):
        for t in set(toks):
            rows.append(i)
            cols.append(vocab.setdefault(t, len(vocab)))
    n = len(sentences)
    incidence = sparse.csr_matrix(
        (np.ones(len(rows), dtype=np.float32), (rows, cols)),
        shape=(n, max(1, len(vocab))),
    )
    log_len = np.array(
        [math.log(len(t)) if len(t) > 0 else 0.0 for t in token_lists]
    )
    for start in range(0, n, _BLOCK_ROWS):
        stop = min(n, start + _BLOCK_ROWS)
        overlap = np.asarray((incidence[start:stop] @ incidence.T).todense())
        denom = log_len[start:stop, None] + log_len[None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            block = np.where(denom > 0.0, overlap / denom, 0.0)
        for i in range(start, stop):
            block[i - start, i] = 0.0
        yield start, stop, block.astype(np.float32)


def _word_overlap_dense(sentences: list[str]) -> np.ndarray:
    n = len(sentences)
    out = np.empty((n, n), dtype=np.float32)
    for start, stop, block in _overlap_blocks(sentences):
        out[start:stop] = block
    return out.astype(float)


def textrank_scores(sentences, cfg: EngineConfig = EngineConfig()) -> RankingResult:
    """Unnormalized random-surfer scores over the word-overlap graph.

    Vertices with no edges keep the baseline score 1 - damping.
    """
    sentences = _require_sentences(sentences)
    n = len(sentences)
    d = cfg.damping
    if n == 1:
        return RankingResult((RankedSentence(0, 1.0 - d),), True, 0)

    dense = n * n * 4 <= MAX_DENSE_BYTES
    W = _word_overlap_dense(sentences) if dense else None

    def matvec(vec: np.ndarray) -> np.ndarray:
        if W is not None:
            return W @ vec
        out = np.empty(n)
        for start, stop, block in _overlap_blocks(sentences):
            out[start:stop] = block @ vec
        return out

    deg = matvec(np.ones(n))  # weighted degree; symmetric graph
    safe_deg = np.where(deg > 0.0, deg, 1.0)

    scores = np.ones(n)
    converged = False
    iterations = 0
    for iterations in range(1, cfg.max_iterations + 1):
        new = (1.0 - d) + d * matvec(scores / safe_deg)
        if np.abs(new - scores).max() < cfg.tolerance:
            scores = new
            converged = True
            break
        scores = new
    ranked = tuple(RankedSentence(i, float(scores[i])) for i in range(n))
    return RankingResult(ranked, converged, iterations)


# ---------------------------------------------------------------------------
# MMR
# ---------------------------------------------------------------------------

def mmr_rank(sentences, cfg: EngineConfig = EngineConfig()) -> RankingResult:
    """Greedy max-marginal-relevance ordering with step scores.

    Step score = lambda * sim(s, centroid) - (1 - lambda) * max similarity to
    anything already selected; the redundancy term is 0 for the first pick.
    Ties go to the lower sentence index.
    """
    sentences = _require_sentences(sentences)
    n = len(sentences)
    vectors = tfidf_vectors(sentences)
    centroid = vectors.mean(axis=0, keepdims=True)
    relevance = cosine_matrix(np.vstack([vectors, centroid]))[:-1, -1]
    sim = cosine_matrix(vectors)

    lam = cfg.mmr_lambda
    remaining = list(range(n))
    max_to_selected = np.zeros(n)
    picks: list[RankedSentence] = []
    while remaining:
        best = None
        best_score = -np.inf
        for i in remaining:  # ascending index, so strict > keeps the lowest
            score = lam * relevance[i] - (1.0 - lam) * max_to_selected[i]
            if score > best_score:
                best, best_score = i, score
        picks.append(RankedSentence(best, float(best_score)))
        remaining.remove(best)
        max_to_selected = np.maximum(max_to_selected, sim[:, best])
    return RankingResult(tuple(picks), True, len(picks))


ENGINES = {
    "lexrank": lexrank_scores,
    "textrank": textrank_scores,
    "mmr": mmr_rank,
}


# ---------------------------------------------------------------------------
# Selection policies
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SelectedSlot:
    position: int  # slot index in the control sequence (0 for unctrl picks)
    index: int  # source sentence index
    label: CategoryLabel | None
    fallback: bool = False
    score: float = 0.0


@dataclass(frozen=True)
class SelectionResult:
    slots: tuple[SelectedSlot, ...]
    warnings: tuple[str, ...] = ()

    @property
    def indices(self) -> list[int]:
        return [slot.index for slot in self.slots]


def _by_rank(candidates) -> list[RankedSentence]:
    return sorted(candidates, key=lambda r: (-r.score, r.index))


def select_unctrl(ranking: RankingResult, k: int) -> SelectionResult:
    """Top-k by score (ties to the lower index), in document order."""
    if k < 1:
        raise ExtractError("k must be >= 1")
    ranked = ranking.sentences
    warnings = ()
    if k > len(ranked):
        warnings = (f"k={k} exceeds {len(ranked)} sentences; selecting all",)
        k = len(ranked)
    chosen = sorted(_by_rank(ranked)[:k], key=lambda r: r.index)
    slots = tuple(
        SelectedSlot(position=pos, index=r.index, label=r.label, score=r.score)
        for pos, r in enumerate(chosen)
    )
    return SelectionResult(slots, warnings)


def select_ctrl(
    ranking: RankingResult,
    labels,
    control: ControlSequence,
) -> SelectionResult:
    """One sentence per control slot, in control order.

    Each slot takes the best unused sentence of the requested label; a label
    with no unused sentences left backfills with the best unused sentence
    overall and flags the slot as a fallback.  When the control sequence is
    longer than the input, surplus slots are skipped (sentences never repeat).
    """
    labels = tuple(labels)
    ranked = ranking.sentences
    if len(labels) != len(ranked):
        raise ExtractError("labels must align with ranked sentences")
    by_label: dict[CategoryLabel, list[RankedSentence]] = {}
    for sent, label in zip(ranked, labels):
        by_label.setdefault(label, []).append(sent)
    for group in by_label.values():
        group.sort(key=lambda r: (-r.score, r.index))
    pool = _by_rank(ranked)
    used: set[int] = set()
    slots: list[SelectedSlot] = []
    warnings: list[str] = []
    for position, wanted in enumerate(control):
        pick = next(
            (r for r in by_label.get(wanted, []) if r.index not in used), None
        )
        if pick is not None:
            slots.append(
                SelectedSlot(position, pick.index, wanted, False, pick.score)
            )
        elif (backfill := next(
            (r for r in pool if r.index not in used), None
        )) is not None:
            slots.append(
                SelectedSlot(position, backfill.index, labels[backfill.index],
                             True, backfill.score)
            )
            warnings.append(
                f"slot {position}: no unused {wanted.value!r} sentence; "
                f"backfilled with sentence {backfill.index}"
            )
        else:
            warnings.append(
                f"slot {position}: all {len(ranked)} sentences used; skipped"
            )
            continue
        used.add(slots[-1].index)
    return SelectionResult(tuple(slots), tuple(warnings))

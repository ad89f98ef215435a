"""Sentence-intent tagging: sparse logistic emissions + Viterbi over transitions.

The emission model is multinomial logistic regression over stemmed unigrams,
recurring bigrams, a relative-position bucket, and a digit flag.  Transitions
come from gold segment sequences with add-one smoothing.  Externally
predicted labels (e.g. from a neural tagger) can be ingested from file and
take precedence over the built-in model wherever they cover.
"""

from __future__ import annotations

import json
import math
import re
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import sparse

from ._text import stemmed_tokens
from .corpus import Corpus, Decision, Submission, review_sentences
from .labels import (
    ALL_LABELS,
    CategoryLabel,
    PRIORITY_ORDER,
    parse_label,
)

MODEL_FORMAT_VERSION = 1

START_STATE = 0
N_STATES = len(ALL_LABELS) + 2  # <start> + 9 labels + <end>
END_STATE = N_STATES - 1

_DIGIT = re.compile(r"\d")
_SCORE_TIE = 1e-9
_MIN_BIGRAM_COUNT = 3

_LABEL_TO_STATE = {label: i + 1 for i, label in enumerate(ALL_LABELS)}
_STATE_TO_LABEL = {i + 1: label for i, label in enumerate(ALL_LABELS)}


class TaggerError(ValueError):
    pass


def sentence_features(text: str, position: int, total: int) -> set[str]:
    """Binary feature names for one sentence at a known position."""
    toks = stemmed_tokens(text)
    feats = {f"u={t}" for t in toks}
    feats.update(f"b={a}_{b}" for a, b in zip(toks, toks[1:]))
    bucket = min(4, 5 * position // total) if total > 0 else 0
    feats.add(f"pos={bucket}")
    if _DIGIT.search(text):
        feats.add("has_digit")
    return feats


@dataclass(frozen=True, eq=False)
class TaggerModel:
    vocabulary: dict[str, int]
    weights: np.ndarray  # (9, n_features)
    bias: np.ndarray  # (9,)
    transition_log_probs: np.ndarray  # (11, 11); <start>, labels, <end>
    priors: np.ndarray  # (9,) log label frequencies

    def __post_init__(self):
        if not np.isfinite(self.weights).all() or not np.isfinite(self.bias).all():
            raise TaggerError("non-finite emission weights")
        # every non-end row must be a proper distribution over its targets
        rows = np.exp(self.transition_log_probs[:END_STATE, 1:]).sum(axis=1)
        if not np.allclose(rows, 1.0, atol=1e-9):
            raise TaggerError("transition rows must sum to 1")

    def encode(self, sentences: list[str]) -> sparse.csr_matrix:
        rows, cols = [], []
        total = len(sentences)
        for i, text in enumerate(sentences):
            for feat in sentence_features(text, i, total):
                j = self.vocabulary.get(feat)
                if j is not None:
                    rows.append(i)
                    cols.append(j)
        return sparse.csr_matrix(
            (np.ones(len(rows)), (rows, cols)),
            shape=(total, len(self.vocabulary)),
        )

    def emission_log_probs(self, sentences: list[str]) -> np.ndarray:
        """(n_sentences, 9) log P(label | features)."""
        if not sentences:
            return np.zeros((0, len(ALL_LABELS)))
        logits = self.encode(sentences) @ self.weights.T + self.bias
        logits -= logits.max(axis=1, keepdims=True)
        return logits - np.log(np.exp(logits).sum(axis=1, keepdims=True))


@dataclass(frozen=True)
class TaggedSentence:
    text: str
    label: CategoryLabel
    confidence: float


@dataclass(frozen=True)
class TaggedReview:
    sentences: tuple[TaggedSentence, ...]

    @property
    def labels(self) -> tuple[CategoryLabel, ...]:
        return tuple(s.label for s in self.sentences)


def _segment_transition_counts(submissions: list[Submission]) -> np.ndarray:
    from .analytics import segments  # local import avoids a module cycle

    counts = np.zeros((N_STATES, N_STATES), dtype=np.int64)
    for sub in submissions:
        states = [START_STATE]
        states += [_LABEL_TO_STATE[l] for l in segments(sub.meta_review)]
        states.append(END_STATE)
        for a, b in zip(states, states[1:]):
            counts[a, b] += 1
    return counts


def _smoothed_log_transitions(counts: np.ndarray) -> np.ndarray:
    """Add-one smoothing over each state's legal targets (labels + <end>)."""
    T = np.full((N_STATES, N_STATES), -np.inf)
    targets = np.arange(1, N_STATES)  # <start> is never a target
    for s in range(END_STATE):  # <end> has no outgoing row
        row = counts[s, targets] + 1.0
        T[s, targets] = np.log(row / row.sum())
    return T


def train(
    submissions,
    max_epochs: int = 200,
    tolerance: float = 1e-6,
    l2: float = 1e-4,
    seed: int = 0,
) -> TaggerModel:
    """Fit emissions by full-batch gradient ascent and transitions by counting.

    Ascent uses an adaptive step (grow on improvement, halve and retry on
    regression) and stops when the mean log-likelihood moves less than the
    tolerance.  A small L2 penalty keeps weights finite on separable data.
    """
    submissions = list(submissions)
    if not submissions:
        raise TaggerError("training split is empty")

    texts: list[str] = []
    labels: list[CategoryLabel] = []
    featsets: list[set[str]] = []
    for sub in submissions:
        sentences = sub.meta_review.sentences
        for i, sent in enumerate(sentences):
            texts.append(sent.text)
            labels.append(sent.label)
            featsets.append(sentence_features(sent.text, i, len(sentences)))

    bigram_counts: dict[str, int] = {}
    for feats in featsets:
        for f in feats:
            if f.startswith("b="):
                bigram_counts[f] = bigram_counts.get(f, 0) + 1
    vocabulary: dict[str, int] = {}
    for feats in featsets:
        for f in sorted(feats):
            if f.startswith("b=") and bigram_counts[f] < _MIN_BIGRAM_COUNT:
                continue
            vocabulary.setdefault(f, len(vocabulary))

    n = len(texts)
    k = len(ALL_LABELS)
    rows, cols = [], []
    for i, feats in enumerate(featsets):
        for f in feats:
            j = vocabulary.get(f)
            if j is not None:
                rows.append(i)
                cols.append(j)
    X = sparse.csr_matrix(
        (np.ones(len(rows)), (rows, cols)), shape=(n, len(vocabulary))
    )
    y = np.array([ALL_LABELS.index(l) for l in labels])
    Y = np.zeros((n, k))
    Y[np.arange(n), y] = 1.0

    label_counts = Y.sum(axis=0)
    for label, count in zip(ALL_LABELS, label_counts):
        if count == 0:
            warnings.warn(
                f"label {label.value!r} absent from training data; "
                "its emissions fall back to the smoothed prior",
                stacklevel=2,
            )
    priors = np.log((label_counts + 1.0) / (n + k))

    rng = np.random.default_rng(seed)
    W = rng.normal(scale=1e-3, size=(k, X.shape[1]))
    b = priors.copy()

    def mean_ll(Wc, bc):
        logits = X @ Wc.T + bc
        logits -= logits.max(axis=1, keepdims=True)
        log_probs = logits - np.log(np.exp(logits).sum(axis=1, keepdims=True))
        return float(log_probs[np.arange(n), y].mean())

    lr = 0.5
    current = mean_ll(W, b)
    for _ in range(max_epochs):
        logits = X @ W.T + b
        logits -= logits.max(axis=1, keepdims=True)
        P = np.exp(logits)
        P /= P.sum(axis=1, keepdims=True)
        resid = Y - P
        grad_W = (resid.T @ X) / n - l2 * W
        grad_b = resid.mean(axis=0)
        stepped_W = W + lr * grad_W
        stepped_b = b + lr * grad_b
        candidate = mean_ll(stepped_W, stepped_b)
        if candidate < current - tolerance:
            lr *= 0.5  # overshoot: reject the step and retry smaller
            if lr < 1e-8:
                break
            continue
        improved = candidate - current
        W, b = stepped_W, stepped_b
        current = candidate
        lr *= 1.05
        if abs(improved) < tolerance:
            break

    transitions = _smoothed_log_transitions(_segment_transition_counts(submissions))
    return TaggerModel(
        vocabulary=vocabulary,
        weights=W,
        bias=b,
        transition_log_probs=transitions,
        priors=priors,
    )


def _tie_rank(decision: Decision | None) -> dict[CategoryLabel, int]:
    order = list(PRIORITY_ORDER)
    if decision == Decision.REJECT:
        si = order.index(CategoryLabel.STRENGTH)
        wi = order.index(CategoryLabel.WEAKNESS)
        order[si], order[wi] = order[wi], order[si]
    return {label: i for i, label in enumerate(order)}


def predict(
    model: TaggerModel,
    sentences: list[str],
    decision: Decision | None = None,
) -> TaggedReview:
    """Viterbi-decode the argmax label path; deterministic.

    Path scores within 1e-9 tie-break to the annotation priority order; for
    strength-vs-weakness ties the final decision, when known, overrides it.
    """
    if not sentences:
        return TaggedReview(())
    emissions = model.emission_log_probs(sentences)
    T = model.transition_log_probs
    rank = _tie_rank(decision)
    state_rank = np.array(
        [0] + [rank[_STATE_TO_LABEL[s]] for s in range(1, END_STATE)] + [0]
    )
    n = len(sentences)
    k = len(ALL_LABELS)
    delta = np.zeros((n, k))
    back = np.zeros((n, k), dtype=np.int64)
    delta[0] = T[START_STATE, 1:END_STATE] + emissions[0]
    for i in range(1, n):
        # candidate[p, l] = delta[i-1, p] + T[p+1, l+1]
        candidate = delta[i - 1][:, None] + T[1:END_STATE, 1:END_STATE]
        best_prev = _argmax_with_ties(candidate, state_rank[1:END_STATE], axis=0)
        back[i] = best_prev
        delta[i] = candidate[best_prev, np.arange(k)] + emissions[i]
    final = delta[n - 1] + T[1:END_STATE, END_STATE]
    last = int(_argmax_with_ties(final[None, :].T, state_rank[1:END_STATE], axis=0)[0])

    path = [0] * n
    path[n - 1] = last
    for i in range(n - 1, 0, -1):
        path[i - 1] = int(back[i, path[i]])

    posterior = np.exp(emissions)
    tagged = tuple(
        TaggedSentence(
            text=text,
            label=ALL_LABELS[path[i]],
            confidence=float(posterior[i, path[i]]),
        )
        for i, text in enumerate(sentences)
    )
    return TaggedReview(tagged)


def _argmax_with_ties(matrix: np.ndarray, ranks: np.ndarray, axis: int) -> np.ndarray:
    """Argmax along axis; entries within 1e-9 of the max lose to lower rank."""
    if axis != 0:
        raise ValueError("only axis=0 supported")
    top = matrix.max(axis=0)
    tied = matrix >= top[None, :] - _SCORE_TIE
    # among tied rows pick the one with the smallest priority rank
    penalty = np.where(tied, ranks[:, None], np.iinfo(np.int64).max)
    return penalty.argmin(axis=0)


@dataclass(frozen=True)
class TaggerEval:
    micro_f1: float
    macro_f1: float
    per_category: dict[str, float]
    support: dict[str, int]
    majority_share: float


def evaluate(model: TaggerModel, submissions) -> TaggerEval:
    """Score meta-review sentence predictions against gold labels."""
    submissions = list(submissions)
    if not submissions:
        raise TaggerError("evaluation split is empty")
    gold: list[CategoryLabel] = []
    pred: list[CategoryLabel] = []
    for sub in submissions:
        texts = [s.text for s in sub.meta_review.sentences]
        tagged = predict(model, texts, decision=sub.meta_review.decision)
        gold.extend(sub.meta_review.labels)
        pred.extend(tagged.labels)

    total = len(gold)
    correct = sum(g == p for g, p in zip(gold, pred))
    micro = correct / total

    present = sorted(
        {l for l in gold} | {l for l in pred}, key=list(ALL_LABELS).index
    )
    per_category: dict[str, float] = {}
    support: dict[str, int] = {}
    for label in present:
        tp = sum(1 for g, p in zip(gold, pred) if g == label and p == label)
        fp = sum(1 for g, p in zip(gold, pred) if g != label and p == label)
        fn = sum(1 for g, p in zip(gold, pred) if g == label and p != label)
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = (
            2 * precision * recall / (precision + recall)
            if precision + recall
            else 0.0
        )
        per_category[label.value] = f1
        support[label.value] = tp + fn
    macro = sum(per_category.values()) / len(per_category)
    majority = max(support.values()) / total if support else 0.0
    return TaggerEval(
        micro_f1=micro,
        macro_f1=macro,
        per_category=per_category,
        support=support,
        majority_share=majority,
    )


# ---------------------------------------------------------------------------
# Model persistence
# ---------------------------------------------------------------------------

def save_model(model: TaggerModel, path: str | Path) -> None:
    payload = {
        "format_version": MODEL_FORMAT_VERSION,
        "labels": [l.value for l in ALL_LABELS],
        "vocabulary": model.vocabulary,
        "weights": model.weights.tolist(),
        "bias": model.bias.tolist(),
        "transition_log_probs": [
            [None if math.isinf(v) else v for v in row]
            for row in model.transition_log_probs.tolist()
        ],
        "priors": model.priors.tolist(),
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload), encoding="utf-8")


def load_model(path: str | Path) -> TaggerModel:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise TaggerError(f"model file is not valid JSON: {exc}") from exc
    if payload.get("format_version") != MODEL_FORMAT_VERSION:
        raise TaggerError(
            f"unsupported model format {payload.get('format_version')!r}"
        )
    if payload.get("labels") != [l.value for l in ALL_LABELS]:
        raise TaggerError("model label set does not match this build")
    transitions = np.array(
        [
            [-np.inf if v is None else v for v in row]
            for row in payload["transition_log_probs"]
        ]
    )
    return TaggerModel(
        vocabulary={str(k): int(v) for k, v in payload["vocabulary"].items()},
        weights=np.array(payload["weights"]),
        bias=np.array(payload["bias"]),
        transition_log_probs=transitions,
        priors=np.array(payload["priors"]),
    )


# ---------------------------------------------------------------------------
# External label ingestion
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LabelCoverage:
    total: int
    covered: int
    missing: tuple[tuple[str, str, int], ...]

    @property
    def fraction(self) -> float:
        return self.covered / self.total if self.total else 1.0


@dataclass(frozen=True)
class LabelAssignment:
    """External predictions keyed by (submission id, review id, sentence index)."""

    labels: dict[tuple[str, str, int], CategoryLabel]

    def get(self, submission_id: str, review_id: str, index: int):
        return self.labels.get((submission_id, review_id, index))

    def coverage(self, corpus: Corpus) -> LabelCoverage:
        total = 0
        covered = 0
        missing: list[tuple[str, str, int]] = []
        for sub in corpus.submissions:
            for review in sub.reviews:
                for i in range(len(review_sentences(review.text))):
                    total += 1
                    if (sub.id, review.reviewer_id, i) in self.labels:
                        covered += 1
                    else:
                        missing.append((sub.id, review.reviewer_id, i))
        return LabelCoverage(total, covered, tuple(missing))


def load_labels(path: str | Path, corpus: Corpus | None = None) -> LabelAssignment:
    """Read {submission_id, review_id, sentence_index, label} JSON lines.

    With a corpus supplied, every record must point at an existing review
    sentence; without one, only the label strings are validated.
    """
    index: dict[str, Submission] = (
        {s.id: s for s in corpus.submissions} if corpus else {}
    )
    out: dict[tuple[str, str, int], CategoryLabel] = {}
    with Path(path).open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                rec = json.loads(raw)
                key = (
                    str(rec["submission_id"]),
                    str(rec["review_id"]),
                    int(rec["sentence_index"]),
                )
                label = parse_label(rec["label"])
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise TaggerError(f"line {lineno}: {exc}") from exc
            if key[2] < 0:
                raise TaggerError(f"line {lineno}: negative sentence index")
            if corpus is not None:
                sub = index.get(key[0])
                if sub is None:
                    raise TaggerError(
                        f"line {lineno}: unknown submission {key[0]!r}"
                    )
                review = next(
                    (r for r in sub.reviews if r.reviewer_id == key[1]), None
                )
                if review is None:
                    raise TaggerError(
                        f"line {lineno}: unknown review {key[1]!r} "
                        f"in submission {key[0]!r}"
                    )
                n_sentences = len(review_sentences(review.text))
                if key[2] >= n_sentences:
                    raise TaggerError(
                        f"line {lineno}: sentence index {key[2]} out of range "
                        f"(review has {n_sentences} sentences)"
                    )
            out[key] = label
    return LabelAssignment(out)

"""Corpus analyses: category distributions, transition matrices, breakdowns.

Every report here is a pure fold over the corpus, so results are independent
of submission order and safe to recompute concurrently.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np

from .corpus import Corpus, Decision, MetaReview, word_count
from .labels import ALL_LABELS, LABEL_COLORS, CategoryLabel, collapse_runs

START_MARKER = "<start>"
END_MARKER = "<end>"

#: word-count bin upper edges; produce bins <=50, 51-100, 101-150, >150
DEFAULT_LENGTH_EDGES: tuple[int, ...] = (50, 100, 150)
#: average-score bin edges; produce bins <2, 2-3, ..., 7-8, >=8
DEFAULT_SCORE_EDGES: tuple[int, ...] = (2, 3, 4, 5, 6, 7, 8)

#: average-score boundaries for the low/mid/high occurrence grouping
LOW_SCORE_MAX = 5.5
HIGH_SCORE_MIN = 6.5

#: borderline band of average scores (inclusive lower, exclusive upper)
BORDERLINE_RANGE: tuple[float, float] = (4.5, 6.0)


def segments(meta_review: MetaReview) -> tuple[CategoryLabel, ...]:
    """Label sequence with maximal same-label runs collapsed to one entry."""
    return collapse_runs(meta_review.labels)


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    """Segment-to-segment transition counts and row-stochastic probabilities.

    Rows/columns are ordered <start>, the 9 categories, <end>.  The <end>
    row has no outgoing transitions and the <start> column no incoming ones.
    """

    labels: tuple[str, ...]
    counts: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        n = len(self.labels)
        if self.counts.shape != (n, n) or self.probs.shape != (n, n):
            raise ValueError("matrix shape does not match label count")
        if (self.counts < 0).any():
            raise ValueError("negative transition count")
        if self.counts[-1].any():
            raise ValueError("end marker must have no outgoing transitions")
        if self.counts[:, 0].any():
            raise ValueError("start marker must have no incoming transitions")
        row_counts = self.counts.sum(axis=1)
        row_probs = self.probs.sum(axis=1)
        active = row_counts > 0
        if not np.allclose(row_probs[active], 1.0, atol=1e-9):
            raise ValueError("active probability rows must sum to 1")

    def index_of(self, label: str | CategoryLabel) -> int:
        return self.labels.index(str(label))


def transition_matrix(corpus: Corpus) -> TransitionMatrix:
    """Aggregate start->first, segment->segment, last->end over all meta-reviews."""
    if not corpus.submissions:
        raise ValueError("transition matrix of an empty corpus")
    labels = (START_MARKER, *(l.value for l in ALL_LABELS), END_MARKER)
    index = {name: i for i, name in enumerate(labels)}
    counts = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for sub in corpus.submissions:
        path = [START_MARKER, *(l.value for l in segments(sub.meta_review)), END_MARKER]
        for a, b in zip(path, path[1:]):
            counts[index[a], index[b]] += 1
    totals = counts.sum(axis=1, keepdims=True)
    probs = np.divide(
        counts, totals, out=np.zeros_like(counts, dtype=float), where=totals > 0
    )
    return TransitionMatrix(labels=labels, counts=counts, probs=probs)


@dataclass(frozen=True)
class DistributionReport:
    """Counts and percentages per column, for each group of submissions.

    When ``normalized`` is true every group's percentages sum to 100 (its
    columns partition the group); otherwise percentages are per-column rates
    against ``group_sizes`` (occurrence semantics) and need not sum to 100.
    """

    group_by: str
    groups: tuple[str, ...]
    columns: tuple[str, ...]
    counts: dict[str, dict[str, int]]
    percentages: dict[str, dict[str, float]]
    group_sizes: dict[str, int]
    normalized: bool = True
    excluded: int = 0

    def __post_init__(self):
        if self.normalized:
            for group in self.groups:
                total = sum(self.counts[group].values())
                if total == 0:
                    continue
                spread = sum(self.percentages[group].values())
                if abs(spread - 100.0) > 0.1:
                    raise ValueError(
                        f"percentages for group {group!r} sum to {spread}"
                    )

    def percentage(self, group: str, column: str) -> float:
        return self.percentages[group][column]

    def count(self, group: str, column: str) -> int:
        return self.counts[group][column]


def _build_report(
    group_by: str,
    groups: list[str],
    columns: list[str],
    counts: dict[str, dict[str, int]],
    group_sizes: dict[str, int] | None = None,
    normalized: bool = True,
    excluded: int = 0,
) -> DistributionReport:
    if group_sizes is None:
        group_sizes = {g: sum(counts[g].values()) for g in groups}
    percentages: dict[str, dict[str, float]] = {}
    for g in groups:
        denom = group_sizes[g]
        percentages[g] = {
            c: (100.0 * counts[g][c] / denom if denom else 0.0) for c in columns
        }
    return DistributionReport(
        group_by=group_by,
        groups=tuple(groups),
        columns=tuple(columns),
        counts=counts,
        percentages=percentages,
        group_sizes=group_sizes,
        normalized=normalized,
        excluded=excluded,
    )


def _zero_rows(groups: list[str], columns: list[str]) -> dict[str, dict[str, int]]:
    return {g: {c: 0 for c in columns} for g in groups}


def category_distribution(corpus: Corpus) -> DistributionReport:
    """Labeled-sentence counts per category, split by final decision."""
    groups = [d.value for d in Decision]
    columns = [l.value for l in ALL_LABELS]
    counts = _zero_rows(groups, columns)
    for sub in corpus.submissions:
        row = counts[sub.meta_review.decision.value]
        for sentence in sub.meta_review.sentences:
            row[sentence.label.value] += 1
    return _build_report("decision", groups, columns, counts)


def length_bin_labels(edges: tuple[int, ...] = DEFAULT_LENGTH_EDGES) -> list[str]:
    labels = [f"<={edges[0]}"]
    labels += [f"{lo + 1}-{hi}" for lo, hi in zip(edges, edges[1:])]
    labels.append(f">{edges[-1]}")
    return labels


def length_bin_of(n: int, edges: tuple[int, ...] = DEFAULT_LENGTH_EDGES) -> str:
    names = length_bin_labels(edges)
    for i, hi in enumerate(edges):
        if n <= hi:
            return names[i]
    return names[-1]


def score_bin_labels(edges: tuple[int, ...] = DEFAULT_SCORE_EDGES) -> list[str]:
    labels = [f"<{edges[0]}"]
    labels += [f"{lo}-{hi}" for lo, hi in zip(edges, edges[1:])]
    labels.append(f">={edges[-1]}")
    return labels


def score_bin_of(avg: float, edges: tuple[int, ...] = DEFAULT_SCORE_EDGES) -> str:
    names = score_bin_labels(edges)
    if avg < edges[0]:
        return names[0]
    for i, (lo, hi) in enumerate(zip(edges, edges[1:])):
        if lo <= avg < hi:
            return names[i + 1]
    return names[-1]


def length_rating_breakdown(
    corpus: Corpus,
    length_edges: tuple[int, ...] = DEFAULT_LENGTH_EDGES,
    score_edges: tuple[int, ...] = DEFAULT_SCORE_EDGES,
) -> DistributionReport:
    """Meta-review length distribution within each average-score bin.

    Submissions with no rated review cannot be score-binned; they are
    excluded and surfaced through ``excluded``.
    """
    groups = score_bin_labels(score_edges)
    columns = length_bin_labels(length_edges)
    counts = _zero_rows(groups, columns)
    excluded = 0
    for sub in corpus.submissions:
        avg = sub.average_rating
        if avg is None:
            excluded += 1
            continue
        g = score_bin_of(avg, score_edges)
        c = length_bin_of(word_count(sub.meta_review.text), length_edges)
        counts[g][c] += 1
    return _build_report("score bin", groups, columns, counts, excluded=excluded)


def length_category_breakdown(
    corpus: Corpus, length_edges: tuple[int, ...] = DEFAULT_LENGTH_EDGES
) -> DistributionReport:
    """Per length bin, the category share of its labeled sentences."""
    groups = length_bin_labels(length_edges)
    columns = [l.value for l in ALL_LABELS]
    counts = _zero_rows(groups, columns)
    for sub in corpus.submissions:
        g = length_bin_of(word_count(sub.meta_review.text), length_edges)
        for sentence in sub.meta_review.sentences:
            counts[g][sentence.label.value] += 1
    return _build_report("length bin", groups, columns, counts)


def borderline_breakdown(
    corpus: Corpus, score_range: tuple[float, float] = BORDERLINE_RANGE
) -> DistributionReport:
    """Category share of sentences from borderline-scored submissions."""
    lo, hi = score_range
    groups = [d.value for d in Decision]
    columns = [l.value for l in ALL_LABELS]
    counts = _zero_rows(groups, columns)
    excluded = 0
    for sub in corpus.submissions:
        avg = sub.average_rating
        if avg is None:
            excluded += 1
            continue
        if not lo <= avg < hi:
            continue
        row = counts[sub.meta_review.decision.value]
        for sentence in sub.meta_review.sentences:
            row[sentence.label.value] += 1
    return _build_report("decision", groups, columns, counts, excluded=excluded)


def _score_band(avg: float) -> str:
    if avg <= LOW_SCORE_MAX:
        return "low"
    if avg >= HIGH_SCORE_MIN:
        return "high"
    return "mid"


def occurrence_by_score(corpus: Corpus) -> DistributionReport:
    """Share of meta-reviews containing each category at least once.

    Groups are decision x {low, mid, high} average-score bands; a category
    counts once per meta-review no matter how many sentences carry it, so
    group percentages do not sum to 100.
    """
    groups = [
        f"{d.value}/{band}" for d in Decision for band in ("low", "mid", "high")
    ]
    columns = [l.value for l in ALL_LABELS]
    counts = _zero_rows(groups, columns)
    sizes = {g: 0 for g in groups}
    excluded = 0
    for sub in corpus.submissions:
        avg = sub.average_rating
        if avg is None:
            excluded += 1
            continue
        g = f"{sub.meta_review.decision.value}/{_score_band(avg)}"
        sizes[g] += 1
        for label in set(sub.meta_review.labels):
            counts[g][label.value] += 1
    return _build_report(
        "decision/score band",
        groups,
        columns,
        counts,
        group_sizes=sizes,
        normalized=False,
        excluded=excluded,
    )


# ---------------------------------------------------------------------------
# Serialization and plotting
# ---------------------------------------------------------------------------

def report_payload(report: DistributionReport) -> dict:
    return {
        "group_by": report.group_by,
        "columns": list(report.columns),
        "groups": {
            g: {
                "size": report.group_sizes[g],
                "counts": dict(report.counts[g]),
                "percentages": dict(report.percentages[g]),
            }
            for g in report.groups
        },
        "normalized": report.normalized,
        "excluded": report.excluded,
    }


def report_to_json(report: DistributionReport) -> str:
    return json.dumps(report_payload(report), indent=2)


def report_to_csv(report: DistributionReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["group", "group_size", "column", "count", "percentage"])
    for g in report.groups:
        for c in report.columns:
            writer.writerow(
                [g, report.group_sizes[g], c, report.counts[g][c],
                 f"{report.percentages[g][c]:.4f}"]
            )
    return buf.getvalue()


def transition_payload(matrix: TransitionMatrix) -> dict:
    return {
        "labels": list(matrix.labels),
        "counts": matrix.counts.tolist(),
        "probs": matrix.probs.tolist(),
    }


def transition_to_json(matrix: TransitionMatrix) -> str:
    return json.dumps(transition_payload(matrix), indent=2)


def transition_to_csv(matrix: TransitionMatrix) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["from\\to", *matrix.labels])
    for name, row in zip(matrix.labels, matrix.probs):
        writer.writerow([name, *(f"{p:.6f}" for p in row)])
    return buf.getvalue()


def _matplotlib():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def render_transition_svg(matrix: TransitionMatrix) -> str:
    plt = _matplotlib()
    fig, ax = plt.subplots(figsize=(7.5, 6.5))
    im = ax.imshow(matrix.probs, cmap="Blues", vmin=0.0, vmax=1.0)
    ax.set_xticks(range(len(matrix.labels)), matrix.labels, rotation=45, ha="right")
    ax.set_yticks(range(len(matrix.labels)), matrix.labels)
    ax.set_xlabel("to")
    ax.set_ylabel("from")
    for i in range(len(matrix.labels)):
        for j in range(len(matrix.labels)):
            p = matrix.probs[i, j]
            if p >= 0.005:
                ax.text(j, i, f"{p:.2f}", ha="center", va="center",
                        fontsize=7, color="black" if p < 0.6 else "white")
    fig.colorbar(im, ax=ax, shrink=0.8)
    fig.tight_layout()
    buf = io.StringIO()
    fig.savefig(buf, format="svg")
    plt.close(fig)
    return buf.getvalue()


def render_report_svg(report: DistributionReport) -> str:
    plt = _matplotlib()
    fig, ax = plt.subplots(figsize=(9, 5))
    x = np.arange(len(report.groups))
    color_by_name = {l.value: c for l, c in LABEL_COLORS.items()}
    if report.normalized:
        bottom = np.zeros(len(report.groups))
        for c in report.columns:
            vals = np.array([report.percentages[g][c] for g in report.groups])
            ax.bar(x, vals, bottom=bottom, label=c,
                   color=color_by_name.get(c))
            bottom += vals
        ax.set_ylabel("percentage")
    else:
        width = 0.8 / max(1, len(report.columns))
        for i, c in enumerate(report.columns):
            vals = [report.percentages[g][c] for g in report.groups]
            ax.bar(x + i * width, vals, width=width, label=c,
                   color=color_by_name.get(c))
        ax.set_ylabel("occurrence %")
    ax.set_xticks(x + (0 if report.normalized else 0.4), report.groups,
                  rotation=30, ha="right")
    ax.set_xlabel(report.group_by)
    ax.legend(fontsize=7, ncols=3)
    fig.tight_layout()
    buf = io.StringIO()
    fig.savefig(buf, format="svg")
    plt.close(fig)
    return buf.getvalue()

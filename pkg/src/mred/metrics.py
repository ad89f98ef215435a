"""Evaluation suite: ROUGE-1/2/L, structure similarity, decision correctness.

ROUGE operates on lowercased alphanumeric tokens passed through the Porter
stemmer.  Structure similarity is 1 minus the normalized label edit distance.
Decision correctness replaces human judgment with a versioned cue lexicon and
is flagged as an approximation wherever it is reported.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import re
from collections import Counter
from dataclasses import dataclass
from importlib import resources
from typing import Iterable, NamedTuple, Sequence

from ._kernels import lcs_length, levenshtein, token_ids
from ._text import stemmed_tokens
from .corpus import Decision
from .labels import collapse_runs


class RougeScore(NamedTuple):
    precision: float
    recall: float
    f1: float


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def rouge_n(candidate: str, reference: str, n: int) -> RougeScore:
    """Clipped n-gram overlap F1 over stemmed tokens; 0 when a side is empty."""
    if n < 1:
        raise ValueError("n must be >= 1")
    cand = _ngrams(stemmed_tokens(candidate), n)
    ref = _ngrams(stemmed_tokens(reference), n)
    total_cand = sum(cand.values())
    total_ref = sum(ref.values())
    overlap = sum((cand & ref).values())
    precision = overlap / total_cand if total_cand else 0.0
    recall = overlap / total_ref if total_ref else 0.0
    return RougeScore(precision, recall, _f1(precision, recall))


def rouge_l(candidate: str, reference: str) -> RougeScore:
    """Longest-common-subsequence F1 over the same stemmed token stream."""
    cand = stemmed_tokens(candidate)
    ref = stemmed_tokens(reference)
    if not cand or not ref:
        return RougeScore(0.0, 0.0, 0.0)
    ids_cand, ids_ref = token_ids(cand, ref)
    lcs = lcs_length(ids_cand, ids_ref)
    precision = lcs / len(cand)
    recall = lcs / len(ref)
    return RougeScore(precision, recall, _f1(precision, recall))


def structure_similarity(pred: Sequence, gold: Sequence) -> float:
    """1 - edit_distance(pred, gold) / max(|pred|, |gold|), labels as tokens."""
    if not gold:
        raise ValueError("gold label sequence must be nonempty")
    pred_ids, gold_ids = token_ids([str(l) for l in pred], [str(l) for l in gold])
    distance = levenshtein(pred_ids, gold_ids)
    return 1.0 - distance / max(len(pred_ids), len(gold_ids))


# ---------------------------------------------------------------------------
# Decision correctness
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CueLexicon:
    """Versioned accept/reject cue phrases with containment suppression."""

    version: int
    accept: tuple[str, ...]
    reject: tuple[str, ...]

    def _matches(self, text: str, phrases: tuple[str, ...]) -> list[tuple[int, int]]:
        spans = []
        for phrase in phrases:
            pattern = r"\b" + r"\s+".join(map(re.escape, phrase.split())) + r"\b"
            for m in re.finditer(pattern, text):
                spans.append((m.start(), m.end()))
        return spans

    def polarity(self, text: str) -> tuple[bool, bool]:
        """(accept fires, reject fires) after suppressing contained matches.

        A cue match swallowed by a longer opposite-polarity match does not
        count: "cannot recommend acceptance" is one reject cue, not also an
        accept cue.
        """
        low = text.lower()
        accept_spans = self._matches(low, self.accept)
        reject_spans = self._matches(low, self.reject)

        def survives(span, others):
            return not any(
                o != span and o[0] <= span[0] and span[1] <= o[1] for o in others
            )

        accept_fires = any(survives(s, reject_spans) for s in accept_spans)
        reject_fires = any(survives(s, accept_spans) for s in reject_spans)
        return accept_fires, reject_fires


def load_cue_lexicon() -> CueLexicon:
    raw = resources.files("mred.data").joinpath("decision_cues.json").read_text()
    data = json.loads(raw)
    return CueLexicon(
        version=int(data["version"]),
        accept=tuple(data["accept"]),
        reject=tuple(data["reject"]),
    )


_DEFAULT_LEXICON: CueLexicon | None = None


def _lexicon() -> CueLexicon:
    global _DEFAULT_LEXICON
    if _DEFAULT_LEXICON is None:
        _DEFAULT_LEXICON = load_cue_lexicon()
    return _DEFAULT_LEXICON


def decision_correctness(
    generated_text: str,
    gold_decision: Decision | str,
    lexicon: CueLexicon | None = None,
) -> int:
    """1 iff exactly the gold polarity's cues fire; contradictions score 0."""
    gold = Decision(gold_decision)
    accept_fires, reject_fires = (lexicon or _lexicon()).polarity(generated_text)
    if accept_fires and reject_fires:
        return 0
    if gold == Decision.ACCEPT:
        return int(accept_fires)
    return int(reject_fires)


# ---------------------------------------------------------------------------
# Run aggregation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EvalReport:
    """Arithmetic means of per-instance metrics over an evaluation run.

    Structure similarities are averaged over the instances that carry label
    sequences (n_structured of n_instances); they are None when no instance
    does.
    """

    r1: float
    r2: float
    rl: float
    structure_sim_sent: float | None
    structure_sim_seg: float | None
    decision_correct: float
    n_instances: int
    n_structured: int

    def __post_init__(self):
        bounded = [self.r1, self.r2, self.rl, self.decision_correct]
        bounded += [
            v for v in (self.structure_sim_sent, self.structure_sim_seg)
            if v is not None
        ]
        for value in bounded:
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"metric value {value} outside [0, 1]")
        if self.n_structured > self.n_instances:
            raise ValueError("n_structured cannot exceed n_instances")


class MisalignedRunError(ValueError):
    pass


def _labels_of(record: dict) -> list[str] | None:
    labels = record.get("labels")
    if labels is None:
        return None
    return [str(l) for l in labels]


def evaluate_run(
    outputs: Iterable[dict],
    references: Iterable[dict],
    lexicon: CueLexicon | None = None,
) -> EvalReport:
    """Score outputs against references matched by instance id.

    outputs: {id, text, labels?}; references: {id, text, labels?, decision}.
    """
    outputs = list(outputs)
    ref_by_id = {}
    for rec in references:
        rid = str(rec["id"])
        if rid in ref_by_id:
            raise MisalignedRunError(f"duplicate reference id {rid!r}")
        ref_by_id[rid] = rec
    if len(outputs) != len(ref_by_id):
        raise MisalignedRunError(
            f"{len(outputs)} outputs vs {len(ref_by_id)} references"
        )

    r1 = r2 = rl = dec = 0.0
    sent_sum = seg_sum = 0.0
    n_structured = 0
    seen: set[str] = set()
    for out in outputs:
        oid = str(out["id"])
        if oid not in ref_by_id:
            raise MisalignedRunError(f"output id {oid!r} has no reference")
        if oid in seen:
            raise MisalignedRunError(f"duplicate output id {oid!r}")
        seen.add(oid)
        ref = ref_by_id[oid]
        r1 += rouge_n(out["text"], ref["text"], 1).f1
        r2 += rouge_n(out["text"], ref["text"], 2).f1
        rl += rouge_l(out["text"], ref["text"]).f1
        dec += decision_correctness(out["text"], ref["decision"], lexicon)
        out_labels = _labels_of(out)
        ref_labels = _labels_of(ref)
        if out_labels is not None and ref_labels:
            sent_sum += structure_similarity(out_labels, ref_labels)
            seg_sum += structure_similarity(
                collapse_runs(out_labels), collapse_runs(ref_labels)
            )
            n_structured += 1

    n = len(outputs)
    if n == 0:
        raise MisalignedRunError("empty evaluation run")
    return EvalReport(
        r1=r1 / n,
        r2=r2 / n,
        rl=rl / n,
        structure_sim_sent=sent_sum / n_structured if n_structured else None,
        structure_sim_seg=seg_sum / n_structured if n_structured else None,
        decision_correct=dec / n,
        n_instances=n,
        n_structured=n_structured,
    )


def fingerprint(payload: dict) -> str:
    """Stable short hash of a JSON-serializable configuration."""
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def metric_config(lexicon: CueLexicon | None = None) -> dict:
    lex = lexicon or _lexicon()
    return {
        "rouge_tokenizer": "lowercase-alnum-porter",
        "structure_denominator": "max-length",
        "decision_method": "cue-lexicon heuristic (automated approximation)",
        "cue_lexicon_version": lex.version,
    }


def report_payload(report: EvalReport, extra_config: dict | None = None) -> dict:
    config = metric_config()
    if extra_config:
        config.update(extra_config)
    return {
        "r1": report.r1,
        "r2": report.r2,
        "rl": report.rl,
        "structure_sim_sent": report.structure_sim_sent,
        "structure_sim_seg": report.structure_sim_seg,
        "decision_correct": report.decision_correct,
        "n_instances": report.n_instances,
        "n_structured": report.n_structured,
        "config": config,
        "config_hash": fingerprint(config),
    }


def report_to_json(report: EvalReport, extra_config: dict | None = None) -> str:
    return json.dumps(report_payload(report, extra_config), indent=2)


def report_to_csv(report: EvalReport, extra_config: dict | None = None) -> str:
    payload = report_payload(report, extra_config)
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["metric", "value"])
    for key in ("r1", "r2", "rl", "structure_sim_sent", "structure_sim_seg",
                "decision_correct", "n_instances", "n_structured",
                "config_hash"):
        writer.writerow([key, payload[key]])
    return buf.getvalue()

"""Control sequences and the control-prefixed input encoding.

A control sequence prescribes the category structure of a generated
meta-review, either one label per output sentence (sent granularity) or one
label per maximal same-label run (seg granularity).  The encoded form is

    abstract | weakness | decision ==> <input text>

and an uncontrolled input is just the text itself.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .corpus import MetaReview
from .labels import CategoryLabel, collapse_runs, parse_label

SEPARATOR = " | "
PREFIX_MARK = "==>"


class Granularity(str, Enum):
    SENT = "sent"
    SEG = "seg"


@dataclass(frozen=True)
class ControlSequence:
    labels: tuple[CategoryLabel, ...]
    granularity: Granularity

    def __post_init__(self):
        if not self.labels:
            raise ValueError("control sequence must be nonempty")
        if self.granularity == Granularity.SEG:
            for a, b in zip(self.labels, self.labels[1:]):
                if a == b:
                    raise ValueError(
                        "seg-granularity control cannot repeat adjacent labels"
                    )

    def __len__(self) -> int:
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    def surface(self) -> str:
        return SEPARATOR.join(l.value for l in self.labels)


def sent_ctrl(meta_review: MetaReview) -> ControlSequence:
    """One control label per meta-review sentence, in order."""
    return ControlSequence(meta_review.labels, Granularity.SENT)


def seg_ctrl(meta_review: MetaReview) -> ControlSequence:
    """sent_ctrl collapsed to maximal same-label runs."""
    return ControlSequence(collapse_runs(meta_review.labels), Granularity.SEG)


def encode_prefix(ctrl: ControlSequence | None, text: str) -> str:
    """Prefix the input with the control surface; no control leaves it alone."""
    if ctrl is None:
        return text
    return f"{ctrl.surface()} {PREFIX_MARK} {text}"


def decode_prefix(encoded: str) -> tuple[tuple[CategoryLabel, ...] | None, str]:
    """Inverse of encode_prefix up to granularity, which is not encoded.

    Exact only when the body does not itself contain the prefix mark.
    """
    mark = f" {PREFIX_MARK} "
    if mark not in encoded:
        return None, encoded
    head, body = encoded.split(mark, 1)
    labels = tuple(parse_label(part) for part in head.split(SEPARATOR))
    return labels, body


class PrefixBudgetError(ValueError):
    """Token limit too small to retain the control prefix."""


def truncate_encoded(encoded: str, limit: int) -> str:
    """Cut the body to fit a whitespace-token budget; never cut the prefix."""
    tokens = encoded.split()
    if len(tokens) <= limit:
        return encoded
    prefix_len = tokens.index(PREFIX_MARK) + 1 if PREFIX_MARK in tokens else 0
    if limit < prefix_len:
        raise PrefixBudgetError(
            f"limit {limit} cannot hold the {prefix_len}-token control prefix"
        )
    return " ".join(tokens[:limit])


# ---------------------------------------------------------------------------
# Handoff records for external abstractive trainers
# ---------------------------------------------------------------------------

class HandoffFormatError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def handoff_record(
    instance_id: str,
    ctrl: ControlSequence | None,
    input_text: str,
    reference: str,
) -> dict:
    return {
        "id": instance_id,
        "control": None if ctrl is None else [l.value for l in ctrl.labels],
        "input": encode_prefix(ctrl, input_text),
        "reference": reference,
    }


def write_handoff(records, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False))
            fh.write("\n")


def read_handoff(path: str | Path) -> list[dict]:
    """Load and structurally validate a handoff file."""
    out = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                rec = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise HandoffFormatError(f"invalid JSON: {exc.msg}", lineno) from exc
            missing = {"id", "control", "input", "reference"} - rec.keys()
            if missing:
                raise HandoffFormatError(f"missing fields {sorted(missing)}", lineno)
            if not isinstance(rec["input"], str) or not isinstance(
                rec["reference"], str
            ):
                raise HandoffFormatError("input/reference must be strings", lineno)
            if rec["control"] is not None:
                if not isinstance(rec["control"], list) or not rec["control"]:
                    raise HandoffFormatError(
                        "control must be null or a nonempty list", lineno
                    )
                try:
                    for part in rec["control"]:
                        parse_label(part)
                except ValueError as exc:
                    raise HandoffFormatError(str(exc), lineno) from exc
            out.append(rec)
    return out

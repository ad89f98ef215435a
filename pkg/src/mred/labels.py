"""The closed 9-way sentence-intent vocabulary and its canonical surface forms."""

from __future__ import annotations

from enum import Enum


class CategoryLabel(str, Enum):
    """Intent category of a single meta-review sentence.

    Values are the canonical lowercase surface forms used in control
    sequences and serialized files ("rating summary", not "rating_summary").
    """

    ABSTRACT = "abstract"
    STRENGTH = "strength"
    WEAKNESS = "weakness"
    RATING_SUMMARY = "rating summary"
    AC_DISAGREEMENT = "ac disagreement"
    REBUTTAL_PROCESS = "rebuttal process"
    SUGGESTION = "suggestion"
    DECISION = "decision"
    MISC = "misc"

    def __str__(self) -> str:  # str(label) == surface form
        return self.value


#: All labels in their canonical listing order.
ALL_LABELS: tuple[CategoryLabel, ...] = tuple(CategoryLabel)

#: Annotation priority order used to break exact ties (highest first).
PRIORITY_ORDER: tuple[CategoryLabel, ...] = (
    CategoryLabel.DECISION,
    CategoryLabel.RATING_SUMMARY,
    CategoryLabel.STRENGTH,
    CategoryLabel.WEAKNESS,
    CategoryLabel.AC_DISAGREEMENT,
    CategoryLabel.REBUTTAL_PROCESS,
    CategoryLabel.ABSTRACT,
    CategoryLabel.SUGGESTION,
    CategoryLabel.MISC,
)

#: priority rank per label; lower rank wins a tie.
PRIORITY_RANK: dict[CategoryLabel, int] = {
    label: i for i, label in enumerate(PRIORITY_ORDER)
}

#: Fixed display palette, shared between CLI SVG output and the web console.
LABEL_COLORS: dict[CategoryLabel, str] = {
    CategoryLabel.ABSTRACT: "#4c78a8",
    CategoryLabel.STRENGTH: "#59a14f",
    CategoryLabel.WEAKNESS: "#e45756",
    CategoryLabel.RATING_SUMMARY: "#f58518",
    CategoryLabel.AC_DISAGREEMENT: "#b279a2",
    CategoryLabel.REBUTTAL_PROCESS: "#72b7b2",
    CategoryLabel.SUGGESTION: "#eeca3b",
    CategoryLabel.DECISION: "#9c755f",
    CategoryLabel.MISC: "#9d9d9d",
}

_ALIASES = {
    "miscellaneous": CategoryLabel.MISC,
}


def collapse_runs(labels):
    """Collapse maximal runs of equal adjacent items to a single item.

    [a, a, b, a] -> (a, b, a); works on any equality-comparable sequence.
    """
    out = []
    for item in labels:
        if not out or out[-1] != item:
            out.append(item)
    return tuple(out)


class UnknownLabelError(ValueError):
    """Raised when a label string is not one of the 9 categories."""


def parse_label(raw: str) -> CategoryLabel:
    """Map a label string to its CategoryLabel; reject anything unknown.

    Accepts the canonical surface form, the underscore variant, and
    "miscellaneous" as an alias for "misc".
    """
    norm = " ".join(raw.strip().lower().replace("_", " ").split())
    if norm in _ALIASES:
        return _ALIASES[norm]
    try:
        return CategoryLabel(norm)
    except ValueError:
        raise UnknownLabelError(f"unknown category label: {raw!r}") from None

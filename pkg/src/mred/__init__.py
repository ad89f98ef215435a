"""Structure-controllable meta-review generation toolkit.

Corpus ingestion and analytics, sentence-intent tagging, multi-review
combination, controlled/uncontrolled extractive generation, generic-sentence
baselines, and an automatic evaluation suite — as a library, CLI, and HTTP
service.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .labels import ALL_LABELS, CategoryLabel, parse_label
from .corpus import (
    Corpus,
    Decision,
    LabeledSentence,
    MetaReview,
    Review,
    Split,
    Submission,
    filter_and_split,
    load_corpus,
    segment_sentences,
    word_count,
    write_corpus,
)
from .control import ControlSequence, Granularity, seg_ctrl, sent_ctrl
from .combine import combine_reviews
from .extract import EngineConfig, lexrank_scores, mmr_rank, textrank_scores
from .metrics import evaluate_run, rouge_l, rouge_n, structure_similarity
from .tagger import load_model, predict, save_model, train

__all__ = [
    "ALL_LABELS",
    "CategoryLabel",
    "ControlSequence",
    "Corpus",
    "Decision",
    "EngineConfig",
    "Granularity",
    "LabeledSentence",
    "MetaReview",
    "Review",
    "Split",
    "Submission",
    "combine_reviews",
    "evaluate_run",
    "filter_and_split",
    "lexrank_scores",
    "load_corpus",
    "load_model",
    "mmr_rank",
    "parse_label",
    "predict",
    "rouge_l",
    "rouge_n",
    "save_model",
    "seg_ctrl",
    "segment_sentences",
    "sent_ctrl",
    "structure_similarity",
    "textrank_scores",
    "train",
    "word_count",
    "write_corpus",
    "__version__",
]

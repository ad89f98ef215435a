"""Shared tokenization used by metrics, similarity, and the tagger."""

from __future__ import annotations

import re

from ._stem import stem

_TOKEN = re.compile(r"[0-9a-z]+")


def tokenize(text: str) -> list[str]:
    """Lowercased alphanumeric tokens; punctuation splits and is dropped."""
    return _TOKEN.findall(text.lower())


def stemmed_tokens(text: str) -> list[str]:
    return [stem(t) for t in tokenize(text)]

"""TF-IDF vectors and cosine similarities over short text collections.

Vectors are fit per call on the texts given (a submission's paragraphs or
sentences), not on a global corpus, so similarity scores are self-contained
and reproducible from the inputs alone.
"""

from __future__ import annotations

import numpy as np
from sklearn.feature_extraction.text import TfidfVectorizer

from ._text import stemmed_tokens


def tfidf_vectors(texts: list[str]) -> np.ndarray:
    """Dense l2-normalized TF-IDF rows over stemmed unigrams.

    Texts with no alphanumeric content get all-zero rows; an entirely empty
    vocabulary yields a zero matrix with a single dummy column.
    """
    if not texts:
        return np.zeros((0, 1))
    vec = TfidfVectorizer(analyzer=stemmed_tokens)
    try:
        return np.asarray(vec.fit_transform(texts).todense())
    except ValueError:  # nothing tokenizable anywhere
        return np.zeros((len(texts), 1))


def cosine_matrix(vectors: np.ndarray) -> np.ndarray:
    """Pairwise cosine similarity of row vectors; zero rows stay zero."""
    norms = np.linalg.norm(vectors, axis=1)
    safe = np.where(norms == 0.0, 1.0, norms)
    unit = vectors / safe[:, None]
    sim = np.clip(unit @ unit.T, -1.0, 1.0)
    # pin self-similarity of nonempty rows to exactly 1
    diag = np.where(norms > 0.0, 1.0, 0.0)
    np.fill_diagonal(sim, diag)
    return sim


def tfidf_cosine_matrix(texts: list[str]) -> np.ndarray:
    return cosine_matrix(tfidf_vectors(texts))

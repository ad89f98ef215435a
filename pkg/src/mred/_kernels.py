"""Hot numeric kernels: Levenshtein distance and LCS length over id arrays.

Both kernels are quadratic dynamic programs that sit on the critical path of
run evaluation (LCS backs ROUGE-L for every candidate/reference pair, and
Levenshtein backs structure similarity).  Each has two interchangeable
backends:

* ``numba`` — @njit two-loop DP, used by default when numba imports.
* ``numpy`` — row-vectorized DP using running min/max accumulation.

Set ``MRED_NO_NUMBA=1`` before import (or call :func:`set_backend`) to force
the numpy path.  ``benchmarks/bench_kernels.py`` compares the two.
"""

from __future__ import annotations

import os

import numpy as np


def _env_flag(name: str) -> bool:
    return os.environ.get(name, "").strip().lower() in {"1", "true", "yes", "on"}


# ---------------------------------------------------------------------------
# numpy backend
# ---------------------------------------------------------------------------

def _levenshtein_numpy(a: np.ndarray, b: np.ndarray) -> int:
    n, m = len(a), len(b)
    if n == 0:
        return m
    if m == 0:
        return n
    prev = np.arange(m + 1, dtype=np.int64)
    idx = np.arange(m + 1, dtype=np.int64)
    for i in range(n):
        cost = (b != a[i]).astype(np.int64)
        # ext[0] is the deletion column; ext[j] = min(prev[j]+1, prev[j-1]+cost)
        ext = np.empty(m + 1, dtype=np.int64)
        ext[0] = i + 1
        np.minimum(prev[1:] + 1, prev[:-1] + cost, out=ext[1:])
        # fold in the left-to-right insertion chain:
        # cur[j] = min_{k<=j} (ext[k] + (j-k)) = j + runmin(ext - idx)
        np.subtract(ext, idx, out=ext)
        np.minimum.accumulate(ext, out=ext)
        np.add(ext, idx, out=ext)
        prev = ext
    return int(prev[m])


def _lcs_length_numpy(a: np.ndarray, b: np.ndarray) -> int:
    n, m = len(a), len(b)
    if n == 0 or m == 0:
        return 0
    prev = np.zeros(m + 1, dtype=np.int64)
    for i in range(n):
        t = np.where(b == a[i], prev[:-1] + 1, prev[1:])
        np.maximum.accumulate(t, out=t)
        prev[1:] = t
    return int(prev[m])


# ---------------------------------------------------------------------------
# numba backend
# ---------------------------------------------------------------------------

try:  # pragma: no cover - exercised indirectly through the dispatch tests
    from numba import njit

    @njit(cache=True)
    def _levenshtein_numba(a: np.ndarray, b: np.ndarray) -> int:
        n, m = len(a), len(b)
        if n == 0:
            return m
        if m == 0:
            return n
        prev = np.arange(m + 1)
        cur = np.empty(m + 1, dtype=np.int64)
        for i in range(n):
            cur[0] = i + 1
            for j in range(1, m + 1):
                cost = 0 if a[i] == b[j - 1] else 1
                best = prev[j] + 1
                if cur[j - 1] + 1 < best:
                    best = cur[j - 1] + 1
                if prev[j - 1] + cost < best:
                    best = prev[j - 1] + cost
                cur[j] = best
            prev, cur = cur, prev
        return int(prev[m])

    @njit(cache=True)
    def _lcs_length_numba(a: np.ndarray, b: np.ndarray) -> int:
        n, m = len(a), len(b)
        if n == 0 or m == 0:
            return 0
        prev = np.zeros(m + 1, dtype=np.int64)
        cur = np.zeros(m + 1, dtype=np.int64)
        for i in range(n):
            for j in range(1, m + 1):
                if a[i] == b[j - 1]:
                    cur[j] = prev[j - 1] + 1
                else:
                    cur[j] = max(prev[j], cur[j - 1])
            prev, cur = cur, prev
        return int(prev[m])

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False


_BACKEND = "numpy" if (_env_flag("MRED_NO_NUMBA") or not _HAVE_NUMBA) else "numba"


def available_backends() -> tuple[str, ...]:
    return ("numba", "numpy") if _HAVE_NUMBA else ("numpy",)


def active_backend() -> str:
    return _BACKEND


def set_backend(name: str) -> None:
    """Select the kernel backend at runtime ("numba" or "numpy")."""
    global _BACKEND
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown kernel backend: {name!r}")
    if name == "numba" and not _HAVE_NUMBA:
        raise ValueError("numba backend requested but numba is not importable")
    _BACKEND = name


def _as_ids(seq) -> np.ndarray:
    arr = np.asarray(seq, dtype=np.int64)
    if arr.ndim != 1:
        raise ValueError("kernel inputs must be 1-D id arrays")
    return arr


def levenshtein(a, b) -> int:
    """Edit distance (insert/delete/substitute, unit costs) between id arrays."""
    a, b = _as_ids(a), _as_ids(b)
    if _BACKEND == "numba":
        return _levenshtein_numba(a, b)
    return _levenshtein_numpy(a, b)


def lcs_length(a, b) -> int:
    """Length of the longest common subsequence of two id arrays."""
    a, b = _as_ids(a), _as_ids(b)
    if _BACKEND == "numba":
        return _lcs_length_numba(a, b)
    return _lcs_length_numpy(a, b)


def token_ids(*seqs) -> list[np.ndarray]:
    """Map arbitrary hashable tokens to shared integer ids, one array per seq."""
    table: dict = {}
    out = []
    for seq in seqs:
        ids = np.empty(len(seq), dtype=np.int64)
        for i, tok in enumerate(seq):
            ids[i] = table.setdefault(tok, len(table))
        out.append(ids)
    return out

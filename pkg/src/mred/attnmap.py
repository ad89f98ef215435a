"""Attribution math over externally supplied cross-attention tensors.

Aggregation is mean over layers, max-pool over the input tokens of each
input sentence, then sum over the output tokens of each output sentence.
No neural model lives here; tensors arrive from file.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class AttentionError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class AttentionTensor:
    """(layers, output_tokens, input_tokens) non-negative weights."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 3 or min(v.shape) < 1:
            raise AttentionError(
                f"tensor must be (layers, T, S) with all dims >= 1, got {v.shape}"
            )
        if not np.isfinite(v).all():
            raise AttentionError("tensor contains non-finite values")
        if (v < 0).any():
            raise AttentionError("tensor contains negative weights")
        object.__setattr__(self, "values", v)

    @property
    def layers(self) -> int:
        return self.values.shape[0]

    @property
    def output_tokens(self) -> int:
        return self.values.shape[1]

    @property
    def input_tokens(self) -> int:
        return self.values.shape[2]

    def layer_mean(self) -> np.ndarray:
        return self.values.mean(axis=0)


@dataclass(frozen=True)
class SentenceBoundaries:
    """Half-open token ranges, one per sentence, tiling [0, token_count)."""

    ranges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if not self.ranges:
            raise AttentionError("boundaries must contain at least one range")
        cursor = 0
        for start, stop in self.ranges:
            if start != cursor:
                raise AttentionError(
                    f"ranges must tile the token span; "
                    f"expected start {cursor}, got {start}"
                )
            if stop <= start:
                raise AttentionError(f"empty range [{start}, {stop})")
            cursor = stop

    @property
    def token_count(self) -> int:
        return self.ranges[-1][1]

    def __len__(self) -> int:
        return len(self.ranges)


def aggregate(
    tensor: AttentionTensor,
    src: SentenceBoundaries,
    tgt: SentenceBoundaries,
) -> np.ndarray:
    """(output_sentences, input_sentences) sentence-level attention.

    Mean over layers, then per output token the max over each input
    sentence's tokens, then a sum over each output sentence's tokens.
    """
    if src.token_count != tensor.input_tokens:
        raise AttentionError(
            f"input boundaries cover {src.token_count} tokens, "
            f"tensor has {tensor.input_tokens}"
        )
    if tgt.token_count != tensor.output_tokens:
        raise AttentionError(
            f"output boundaries cover {tgt.token_count} tokens, "
            f"tensor has {tensor.output_tokens}"
        )
    mean = tensor.layer_mean()  # (T, S)
    pooled = np.column_stack(
        [mean[:, a:b].max(axis=1) for a, b in src.ranges]
    )  # (T, input_sentences)
    return np.vstack([pooled[a:b].sum(axis=0) for a, b in tgt.ranges])


def top_k_inputs(matrix: np.ndarray, output_sentence_index: int, k: int = 3) -> list[int]:
    """Indices of the k largest row entries, descending; ties keep lower index."""
    matrix = np.asarray(matrix)
    if k < 1:
        raise AttentionError("k must be >= 1")
    if not 0 <= output_sentence_index < matrix.shape[0]:
        raise AttentionError(
            f"output sentence {output_sentence_index} out of range "
            f"(matrix has {matrix.shape[0]} rows)"
        )
    row = matrix[output_sentence_index]
    k = min(k, row.shape[0])
    order = sorted(range(row.shape[0]), key=lambda i: (-row[i], i))
    return order[:k]


def normalize_for_display(
    layer_mean: np.ndarray,
    selected_ranges: list[tuple[int, int]],
    control_range: tuple[int, int] | None = None,
    output_token_range: tuple[int, int] | None = None,
) -> dict[int, float]:
    """Min-max heat values over the selected input tokens (plus control span).

    Token weight = the layer-mean attention summed over the chosen output
    tokens (all of them by default).  Constant weights normalize to zero.
    """
    layer_mean = np.asarray(layer_mean, dtype=float)
    if layer_mean.ndim != 2:
        raise AttentionError("layer mean must be 2-D (output_tokens, input_tokens)")
    if not selected_ranges:
        raise AttentionError("selection must be nonempty")
    ranges = list(selected_ranges)
    if control_range is not None:
        ranges.append(control_range)
    tokens: list[int] = []
    seen: set[int] = set()
    for start, stop in ranges:
        if not 0 <= start < stop <= layer_mean.shape[1]:
            raise AttentionError(f"range [{start}, {stop}) outside input tokens")
        for t in range(start, stop):
            if t not in seen:
                seen.add(t)
                tokens.append(t)
    if output_token_range is None:
        weights = layer_mean[:, tokens].sum(axis=0)
    else:
        a, b = output_token_range
        if not 0 <= a < b <= layer_mean.shape[0]:
            raise AttentionError(f"range [{a}, {b}) outside output tokens")
        weights = layer_mean[a:b, tokens].sum(axis=0)
    lo, hi = float(weights.min()), float(weights.max())
    if hi - lo <= 0.0:
        heat = np.zeros_like(weights)
    else:
        heat = (weights - lo) / (hi - lo)
    return {t: float(h) for t, h in zip(tokens, heat)}


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------

def read_tensor(path: str | Path) -> AttentionTensor:
    """Text format: header "layers T S", then whitespace-separated floats."""
    text = Path(path).read_text(encoding="utf-8").split()
    if len(text) < 3:
        raise AttentionError("tensor file is missing its shape header")
    try:
        layers, t, s = (int(x) for x in text[:3])
    except ValueError as exc:
        raise AttentionError(f"bad shape header: {exc}") from exc
    expected = layers * t * s
    body = text[3:]
    if len(body) != expected:
        raise AttentionError(
            f"expected {expected} values for shape ({layers}, {t}, {s}), "
            f"found {len(body)}"
        )
    try:
        flat = np.array([float(x) for x in body])
    except ValueError as exc:
        raise AttentionError(f"bad tensor value: {exc}") from exc
    return AttentionTensor(flat.reshape(layers, t, s))


def write_tensor(tensor: AttentionTensor, path: str | Path) -> None:
    v = tensor.values
    lines = [f"{v.shape[0]} {v.shape[1]} {v.shape[2]}"]
    lines += [
        " ".join(repr(float(x)) for x in row) for row in v.reshape(-1, v.shape[2])
    ]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_boundaries(path: str | Path) -> tuple[SentenceBoundaries, SentenceBoundaries]:
    """JSON {"input": [[start, stop], ...], "output": [[start, stop], ...]}."""
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        src = SentenceBoundaries(
            tuple((int(a), int(b)) for a, b in payload["input"])
        )
        tgt = SentenceBoundaries(
            tuple((int(a), int(b)) for a, b in payload["output"])
        )
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, AttentionError):
            raise
        raise AttentionError(f"malformed boundaries file: {exc}") from exc
    return src, tgt


def attribution_payload(
    tensor: AttentionTensor,
    src: SentenceBoundaries,
    tgt: SentenceBoundaries,
    k: int = 3,
) -> dict:
    """Full analysis bundle: matrix, per-row top-k, display heat values."""
    matrix = aggregate(tensor, src, tgt)
    top = [top_k_inputs(matrix, i, k) for i in range(matrix.shape[0])]
    mean = tensor.layer_mean()
    heat = [
        normalize_for_display(mean, [src.ranges[j] for j in top[i]],
                              output_token_range=tgt.ranges[i])
        for i in range(matrix.shape[0])
    ]
    return {
        "matrix": matrix.tolist(),
        "top_inputs": top,
        "heat": [{str(t): v for t, v in row.items()} for row in heat],
    }

"""Compare the numba and numpy kernel backends on the hot DP kernels.

Runs levenshtein and lcs_length over random id arrays at several sizes,
checks that both backends agree on every pair, and prints a timing table.

    python3 benchmarks/bench_kernels.py [--sizes 16,64,256,1024] [--repeat 5]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from mred._kernels import (
    active_backend,
    available_backends,
    lcs_length,
    levenshtein,
    set_backend,
)

KERNELS = {"levenshtein": levenshtein, "lcs_length": lcs_length}


def make_pairs(rng: np.random.Generator, size: int, count: int):
    return [
        (rng.integers(0, 50, size=size), rng.integers(0, 50, size=size))
        for _ in range(count)
    ]


def time_backend(kernel, pairs, repeat: int) -> float:
    """Best-of-``repeat`` wall time for one pass over all pairs, in seconds."""
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        for a, b in pairs:
            kernel(a, b)
        best = min(best, time.perf_counter() - start)
    return best


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="16,64,256,1024",
                        help="comma-separated sequence lengths")
    parser.add_argument("--pairs", type=int, default=20,
                        help="random pairs per size")
    parser.add_argument("--repeat", type=int, default=5,
                        help="timed passes; best one is reported")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    original = active_backend()
    backends = available_backends()
    if "numba" not in backends:
        print("numba is not importable; timing the numpy backend only")

    rng = np.random.default_rng(args.seed)
    suites = {size: make_pairs(rng, size, args.pairs) for size in sizes}

    # JIT compilation happens on first call; keep it out of the timings.
    if "numba" in backends:
        set_backend("numba")
        for kernel in KERNELS.values():
            kernel(np.array([1, 2, 3]), np.array([2, 3]))

    results: dict[tuple[str, int, str], float] = {}
    for backend in backends:
        set_backend(backend)
        for name, kernel in KERNELS.items():
            for size, pairs in suites.items():
                results[name, size, backend] = time_backend(
                    kernel, pairs, args.repeat
                )

    mismatches = 0
    if len(backends) == 2:
        for name, kernel in KERNELS.items():
            for pairs in suites.values():
                for a, b in pairs:
                    set_backend("numba")
                    got_numba = kernel(a, b)
                    set_backend("numpy")
                    if got_numba != kernel(a, b):
                        mismatches += 1

    header = f"{'kernel':<12} {'n':>6} " + "".join(
        f"{b + ' (ms)':>14}" for b in backends
    )
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for name in KERNELS:
        for size in sizes:
            row = f"{name:<12} {size:>6} "
            row += "".join(
                f"{results[name, size, b] * 1e3:>14.3f}" for b in backends
            )
            if len(backends) == 2:
                ratio = results[name, size, "numpy"] / results[name, size, "numba"]
                row += f"{ratio:>9.1f}x"
            print(row)

    if len(backends) == 2:
        verdict = "agree" if mismatches == 0 else f"{mismatches} MISMATCHES"
        print(f"\nbackends {verdict} on "
              f"{len(sizes) * args.pairs * len(KERNELS)} pairs")
    set_backend(original)
    return 1 if mismatches else 0


if __name__ == "__main__":
    raise SystemExit(main())

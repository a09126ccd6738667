#!/usr/bin/env python3
"""Benchmark the compiled string kernels against the pure-Python fallback.

Run after installing the package:

    python benchmarks/bench_kernels.py [--pairs N]

Workload mirrors drug linking: similarity between lexicon names and noisy
sentence windows, plus the bounded edit-distance used for fuzzy first-token
lookup.
"""

import argparse
import random
import time

from ordonnance import _kernels_py
from ordonnance.druglink import default_lexicon

try:
    from ordonnance import _kernels

    BACKENDS = [("cython", _kernels), ("python", _kernels_py)]
except ImportError:
    _kernels = None
    BACKENDS = [("python", _kernels_py)]


def make_pairs(n: int, seed: int = 7) -> list[tuple[str, str]]:
    rng = random.Random(seed)
    names = [e.norm_name for e in default_lexicon().entries]
    pairs = []
    for _ in range(n):
        a = rng.choice(names)
        chars = list(a)
        for _ in range(rng.randint(0, 3)):
            pos = rng.randrange(len(chars))
            chars[pos] = rng.choice("abcdefope 01")
        pairs.append((a, "".join(chars)[: rng.randint(5, len(chars))]))
    return pairs


def bench(fn, pairs, repeats: int = 3) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        for a, b in pairs:
            fn(a, b)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--pairs", type=int, default=20_000)
    args = ap.parse_args()
    pairs = make_pairs(args.pairs)

    tokens = [(a.split()[0], b.split()[0] if b.split() else "") for a, b in pairs]

    print(f"{args.pairs} name/window pairs, best of 3 runs\n")
    print(f"{'kernel':<24}{'backend':<10}{'time':>10}{'pairs/s':>14}")
    results = {}
    for name, mod in BACKENDS:
        dt = bench(mod.similarity, pairs)
        results[("similarity", name)] = dt
        print(f"{'similarity':<24}{name:<10}{dt:>9.3f}s{args.pairs / dt:>14,.0f}")
    for name, mod in BACKENDS:
        dt = bench(mod.levenshtein_leq1, tokens)
        results[("levenshtein_leq1", name)] = dt
        print(f"{'levenshtein_leq1':<24}{name:<10}{dt:>9.3f}s{args.pairs / dt:>14,.0f}")

    if _kernels is not None:
        for kernel in ("similarity", "levenshtein_leq1"):
            speedup = results[(kernel, "python")] / results[(kernel, "cython")]
            print(f"\n{kernel}: compiled is {speedup:.1f}x the pure-Python fallback")
    else:
        print("\ncompiled kernels unavailable; only the fallback was measured")

    # sanity: backends must agree bit-for-bit
    if _kernels is not None:
        for a, b in pairs[:2000]:
            assert _kernels.similarity(a, b) == _kernels_py.similarity(a, b)
        print("agreement check passed (2000 pairs)")


if __name__ == "__main__":
    main()

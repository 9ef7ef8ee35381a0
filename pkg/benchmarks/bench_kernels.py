"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat N] [--scale S]

Prints one row per kernel with the best-of-N time for each backend and
the speedup. Both backends are called on identical inputs, and results are
compared before timing.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from skcv import kernels


def cases(scale: float):
    rng = np.random.default_rng(0)
    n = int(2000 * scale)
    feats = rng.normal(size=(n, 12))
    query = rng.normal(size=(1, 12))
    batch = rng.normal(size=(200, 12))
    coords = rng.uniform(0, 1000, (n, 2))
    targets = coords[rng.choice(n, n // 10, replace=False)]
    z = rng.normal(size=n)
    lows = np.arange(0, 300, 10.0)
    highs = lows + 10.0
    return {
        "knn_query (1 query)": lambda be: kernels.knn_query(feats, query, 9, backend=be),
        "knn_query (200 queries)": lambda be: kernels.knn_query(feats, batch, 9, backend=be),
        "column_stats": lambda be: kernels.column_stats(feats, backend=be),
        "standardized_knn": lambda be: kernels.standardized_knn(feats, query, 9, True, backend=be),
        "min_dist_to_set": lambda be: kernels.min_dist_to_set(coords, targets, backend=be),
        "lag_sums": lambda be: kernels.lag_sums(coords, z, lows, highs, backend=be),
    }


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--scale", type=float, default=1.0, help="multiplies the point count (2000)")
    args = ap.parse_args()
    if kernels.BACKEND != "cython":
        raise SystemExit("compiled extension not available; build with pip install -e .")
    print(f"{'kernel':<26}{'cython ms':>12}{'python ms':>12}{'speedup':>10}")
    for name, fn in cases(args.scale).items():
        a, b = fn("cython"), fn("python")
        for x, y in zip(a, b):
            if x is not None and name != "lag_sums":
                np.testing.assert_array_equal(x, y)
        best = {}
        for be in ("cython", "python"):
            t = timeit.Timer(lambda: fn(be))
            loops, _ = t.autorange()
            best[be] = min(t.repeat(args.repeat, loops)) / loops * 1e3
        print(f"{name:<26}{best['cython']:>12.3f}{best['python']:>12.3f}"
              f"{best['python'] / best['cython']:>9.1f}x")


if __name__ == "__main__":
    main()

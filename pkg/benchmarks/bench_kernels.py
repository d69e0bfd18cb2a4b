"""Compare the compiled histogram/MI kernel against the numpy fallback.

The pairwise-NMI pass is the pipeline's hot loop: R*(R-1)/2 joint histograms
over every VOI cell. Run:

    python3 benchmarks/bench_kernels.py [--realizations 60] [--voi 4000]
"""

import argparse
import time

import numpy as np

from repsel import _kernels


def time_call(fn, *args, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - start)
    return best, result


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--realizations", type=int, default=60)
    parser.add_argument("--voi", type=int, default=4000,
                        help="number of VOI cells")
    parser.add_argument("--bins", type=int, default=32)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    codes = rng.integers(0, args.bins,
                         size=(args.realizations, args.voi), dtype=np.int64)
    pairs = args.realizations * (args.realizations - 1) // 2
    print(f"pairwise NMI: R={args.realizations} ({pairs} pairs), "
          f"|VOI|={args.voi}, B={args.bins}")

    rows = []
    results = {}
    for name in ("fallback", "compiled"):
        try:
            backend = _kernels.load_backend(name)
        except ImportError:
            print(f"  {name:>9}: not built")
            continue
        elapsed, result = time_call(backend.pairwise_nmi, codes, args.bins)
        results[name] = result
        rows.append((name, elapsed))
        print(f"  {name:>9}: {elapsed * 1e3:8.1f} ms "
              f"({elapsed / pairs * 1e6:6.1f} us/pair)")

    if len(rows) == 2:
        speedup = rows[0][1] / rows[1][1]
        print(f"  speedup: {speedup:.1f}x (compiled over fallback)")
        gap = float(np.abs(results["fallback"] - results["compiled"]).max())
        print(f"  max |difference|: {gap:.3g}")


if __name__ == "__main__":
    main()

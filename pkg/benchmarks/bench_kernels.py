"""Benchmark the compiled permutation kernels against the pure-Python fallback.

The kernels are the hot path of market generation: every daycare unit
draws a full Mallows permutation over all children, so instance
generation performs thousands of decode calls.  Run:

    python benchmarks/bench_kernels.py [--sizes 500 3000 10000] [--repeats 5]

The script times both backends on identical inputs and prints one table
row per (kernel, size).  It also times end-to-end instance generation
under each backend via the SIBMATCH_PURE_PYTHON switch semantics.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from sibmatch._kernels import _pyimpl

try:
    from sibmatch._kernels import _speedups
except ImportError:
    _speedups = None


def time_call(fn, *args, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def bench_decode(sizes, repeats):
    rng = np.random.default_rng(0)
    print(f"{'kernel':<18}{'n':>8}{'python':>12}{'compiled':>12}{'speedup':>10}")
    for n in sizes:
        v = [int(rng.integers(0, i + 1)) for i in range(n)]
        py = time_call(_pyimpl.decode_insertions, v, repeats=repeats)
        if _speedups is not None:
            cy = time_call(_speedups.decode_insertions, v, repeats=repeats)
            assert _speedups.decode_insertions(v) == _pyimpl.decode_insertions(v)
            print(f"{'decode_insertions':<18}{n:>8}{py * 1e3:>10.2f}ms{cy * 1e3:>10.2f}ms{py / cy:>9.1f}x")
        else:
            print(f"{'decode_insertions':<18}{n:>8}{py * 1e3:>10.2f}ms{'n/a':>12}{'':>10}")

    for n in sizes:
        seq = list(rng.permutation(n))
        py = time_call(_pyimpl.count_inversions, seq, repeats=repeats)
        if _speedups is not None:
            cy = time_call(_speedups.count_inversions, seq, repeats=repeats)
            assert _speedups.count_inversions(seq) == _pyimpl.count_inversions(seq)
            print(f"{'count_inversions':<18}{n:>8}{py * 1e3:>10.2f}ms{cy * 1e3:>10.2f}ms{py / cy:>9.1f}x")
        else:
            print(f"{'count_inversions':<18}{n:>8}{py * 1e3:>10.2f}ms{'n/a':>12}{'':>10}")


def bench_generation(sizes, repeats):
    # swap the backend functions in-place so one process measures both
    import sibmatch._kernels as kernels
    from sibmatch.market import MarketConfig, gen_instance

    # phi=1 is the decoder's worst case: displacements are uniform, so the
    # fallback's list inserts hit the middle instead of the cheap tail
    print()
    print(f"{'gen (phi=1)':<18}{'n':>8}{'python':>12}{'compiled':>12}{'speedup':>10}")
    for n in sizes:
        cfg = MarketConfig(n=n, phi=1.0, seed=1)
        original = (kernels.decode_insertions, kernels.count_inversions)
        try:
            kernels.decode_insertions = _pyimpl.decode_insertions
            kernels.count_inversions = _pyimpl.count_inversions
            py = time_call(gen_instance, cfg, repeats=repeats)
        finally:
            kernels.decode_insertions, kernels.count_inversions = original
        if _speedups is not None:
            cy = time_call(gen_instance, cfg, repeats=repeats)
            print(f"{'':<18}{n:>8}{py:>11.2f}s{cy:>11.2f}s{py / cy:>9.1f}x")
        else:
            print(f"{'':<18}{n:>8}{py:>11.2f}s{'n/a':>12}{'':>10}")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", type=int, nargs="+", default=[500, 3000, 10000])
    parser.add_argument("--gen-sizes", type=int, nargs="+", default=[500, 3000])
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()
    if _speedups is None:
        print("compiled backend unavailable; timing the fallback only\n")
    bench_decode(args.sizes, args.repeats)
    bench_generation(args.gen_sizes, args.repeats)


if __name__ == "__main__":
    main()

"""Compiled vs NumPy combination kernel.

    python benchmarks/bench_fme.py [--repeat N]

Times the raw pairwise kernel on random integer blocks, then syntactic
eliminations of random systems with each kernel swapped into the
eliminator.  Outputs are compared for equality.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from causal_entropy.polyhedra import Budget, InequalitySystem, eliminate, fme
from causal_entropy.polyhedra import _kernels_py

try:
    from causal_entropy.polyhedra import _kernels
except ImportError:  # pragma: no cover
    _kernels = None

LIMIT = 2 ** 62


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def kernel_blocks(rng, rows, width):
    pos = rng.integers(-6, 7, size=(rows, width)).astype(np.int64)
    neg = rng.integers(-6, 7, size=(rows, width)).astype(np.int64)
    pos[:, 0] = rng.integers(1, 4, size=rows)
    neg[:, 0] = -rng.integers(1, 4, size=rows)
    return np.ascontiguousarray(pos), np.ascontiguousarray(neg)


def bench_kernel(repeat):
    rng = np.random.default_rng(1)
    print(f"{'rows':>6} {'width':>6} {'numpy ms':>10} {'cython ms':>10} {'speedup':>8}")
    for rows, width in [(50, 16), (100, 32), (200, 32), (300, 48)]:
        pos, neg = kernel_blocks(rng, rows, width)
        tp, (a, _) = best_of(lambda: _kernels_py.combine(pos, neg, 0, LIMIT), repeat)
        tc, (b, _) = best_of(lambda: _kernels.combine(pos, neg, 0, LIMIT), repeat)
        assert np.array_equal(a, np.asarray(b))
        print(f"{rows:>6} {width:>6} {tp * 1e3:>10.2f} {tc * 1e3:>10.2f} {tp / tc:>8.1f}")


def random_system(rng, rows, width):
    a = rng.integers(-4, 5, size=(rows, width))
    return InequalitySystem(tuple(f"c{i}" for i in range(width)),
                            tuple((tuple(int(v) for v in r), 0) for r in a))


def bench_elimination(repeat):
    rng = np.random.default_rng(5)
    print(f"{'rows':>6} {'width':>6} {'elim':>5} {'out':>8} {'numpy s':>9} {'cython s':>9} {'speedup':>8}")
    for rows, width, elim in [(300, 16, 1), (600, 24, 1), (40, 10, 2)]:
        system = random_system(rng, rows, width)
        keep = system.columns[elim:]
        timings = {}
        for name, kernel in (("numpy", _kernels_py.combine), ("cython", _kernels.combine)):
            saved = fme.combine
            fme.combine = kernel
            try:
                timings[name] = best_of(lambda: eliminate(system, keep, redundancy="syntactic",
                                                          budget=Budget(max_rows=10 ** 7)), repeat)
            finally:
                fme.combine = saved
        (tp, a), (tc, b) = timings["numpy"], timings["cython"]
        assert a == b
        print(f"{rows:>6} {width:>6} {elim:>5} {len(a.ineqs):>8} {tp:>9.3f} {tc:>9.3f} {tp / tc:>8.2f}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if _kernels is None:
        raise SystemExit("compiled kernel not built; run pip install -e . first")
    bench_kernel(args.repeat)
    bench_elimination(args.repeat)


if __name__ == "__main__":
    main()

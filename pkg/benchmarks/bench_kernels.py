"""Time the numba and numpy kernels against each other.

    python benchmarks/bench_kernels.py [--atoms 10 14 18] [--repeat 5]

Each kernel is first run once per backend (numba compiles on first call)
and the outputs are compared before timing.
"""
import argparse
import timeit

import numpy as np

from essimage import _accel, kernels


def cases(n, rng):
    values = rng.integers(0, 1 << n, size=n).astype(np.uint64)
    f = rng.integers(0, n, size=n)
    table = kernels.join_table([1 << int(t) for t in f], backend="numpy")
    zeta_in = rng.integers(0, 1 << 30, size=1 << n).astype(np.uint64)
    return {
        "join_table": lambda b: kernels.join_table(values, backend=b),
        "sum_table": lambda b: kernels.sum_table(values.astype(np.int64), backend=b),
        "orbit_unions": lambda b: kernels.orbit_unions(table, 3, 4, backend=b),
        "subset_or": lambda b: kernels.subset_or(zeta_in, backend=b),
    }


def _same(x, y):
    if isinstance(x, tuple):
        return all(np.array_equal(a, b) for a, b in zip(x, y))
    return np.array_equal(x, y)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--atoms", type=int, nargs="+", default=[10, 14, 18])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if not _accel.NUMBA_AVAILABLE:
        raise SystemExit("numba is not installed; nothing to compare")

    rng = np.random.default_rng(0)
    print(f"{'kernel':<14}{'atoms':>6}{'numba ms':>12}{'numpy ms':>12}{'speedup':>9}")
    for n in args.atoms:
        for name, fn in cases(n, rng).items():
            if not _same(fn("numba"), fn("numpy")):
                raise SystemExit(f"{name}: backends disagree at n={n}")
            t = {b: min(timeit.repeat(lambda: fn(b), number=1, repeat=args.repeat)) * 1e3
                 for b in ("numba", "numpy")}
            print(f"{name:<14}{n:>6}{t['numba']:>12.3f}{t['numpy']:>12.3f}"
                  f"{t['numpy'] / t['numba']:>8.1f}x")


if __name__ == "__main__":
    main()

"""Compare the numba and numpy kernel backends on synthetic workloads.

Both variants are imported directly (the ``*_numba`` / ``*_numpy`` names),
so the environment variable that picks the default backend is irrelevant
here.  Every workload is checked for identical output before it is timed.

    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --scale 2 --repeat 5 --json
"""

import argparse
import json
import statistics
import sys
import time

import numpy as np

from algvar import kernels


def successor_workload(rng, n, k, classes):
    """Random unary maps plus an initial labelling with a few classes."""
    succ = rng.integers(0, n, size=(n, k), dtype=np.int64)
    # pad a tenth of the entries, as multi-sorted algebras do
    succ[rng.random((n, k)) < 0.1] = -1
    init = rng.integers(0, classes, size=n, dtype=np.int64)
    return init, succ


def preorder_workload(rng, n, k):
    init = rng.random((n, n)) < 0.9
    np.fill_diagonal(init, True)
    succ = rng.integers(0, n, size=(n, k), dtype=np.int64)
    return init, succ


def full_transformation_monoid(points):
    """Multiplication table of all maps on ``points`` points (first f, then g)."""
    maps = np.array(np.meshgrid(*[np.arange(points)] * points, indexing="ij")).reshape(points, -1).T
    index = {tuple(m): i for i, m in enumerate(maps.tolist())}
    n = len(maps)
    table = np.empty((n, n), dtype=np.int64)
    for i, f in enumerate(maps):
        composed = maps[:, f]  # row j: g after f, read as f then g
        table[i] = [index[tuple(row)] for row in composed.tolist()]
    return table


def workloads(scale):
    rng = np.random.default_rng(0)
    n_part = 5000 * scale
    n_pre = 150 * scale
    init_p, succ_p = successor_workload(rng, n_part, 4, 3)
    init_o, succ_o = preorder_workload(rng, n_pre, 3)
    table = full_transformation_monoid(4 if scale < 2 else 5)
    yield (f"refine_partition n={n_part} k=4",
           lambda: kernels.refine_partition_numba(init_p, succ_p),
           lambda: kernels.refine_partition_numpy(init_p, succ_p))
    yield (f"refine_preorder n={n_pre} k=3",
           lambda: kernels.refine_preorder_numba(init_o, succ_o),
           lambda: kernels.refine_preorder_numpy(init_o, succ_o))
    yield (f"idempotent_powers n={table.shape[0]}",
           lambda: kernels.idempotent_powers_numba(table),
           lambda: kernels.idempotent_powers_numpy(table))
    yield ("associative_tables n=4 unit",
           lambda: kernels.associative_tables_numba(4, True),
           lambda: kernels.associative_tables_numpy(4, True))


def timed(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return statistics.median(times)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--scale", type=int, default=1, help="workload size multiplier")
    parser.add_argument("--repeat", type=int, default=3, help="timed runs per backend (median reported)")
    parser.add_argument("--json", action="store_true", help="print results as JSON")
    args = parser.parse_args(argv)

    rows = []
    for name, fast, slow in workloads(args.scale):
        a = fast()  # also triggers compilation
        b = slow()
        if not np.array_equal(a, b):
            print(f"backends disagree on {name}", file=sys.stderr)
            return 1
        t_numba = timed(fast, args.repeat)
        t_numpy = timed(slow, args.repeat)
        rows.append({"workload": name, "numba_s": t_numba, "numpy_s": t_numpy,
                     "speedup": t_numpy / t_numba if t_numba else float("inf")})

    if args.json:
        print(json.dumps(rows, indent=2))
    else:
        width = max(len(r["workload"]) for r in rows)
        print(f"{'workload':<{width}}  {'numba':>10}  {'numpy':>10}  {'speedup':>8}")
        for r in rows:
            print(f"{r['workload']:<{width}}  {r['numba_s']:>9.4f}s  {r['numpy_s']:>9.4f}s  {r['speedup']:>7.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_backends.py [--repeats 5] [--csv out.csv]

Prints one row per (kernel, size) with the median time of each backend and
the speed-up.  Both backends must return identical results; the script
checks that before timing.
"""
import argparse
import csv
import statistics
import sys
import time

import numpy as np

from procal import _backend


def median_time(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def workloads(rng):
    for n in (8, 32, 64):
        b = rng.standard_normal((n, n))
        a = np.ascontiguousarray(b @ b.T)
        yield "jacobi_eigh", f"n={n}", lambda k, a=a: k.jacobi_eigh(a, 1e-12, 100)
    for m, kp in ((2000, 10), (5000, 100)):
        x = rng.standard_normal((m, 10))
        u = rng.random(-(-m // kp))
        yield "group_by_size", f"m={m},k'={kp}", lambda k, x=x, kp=kp, u=u: k.group_by_size(x, kp, u)
    for m in (20000, 100000):
        x = rng.standard_normal((m, 20))
        c = np.ascontiguousarray(x[:10])
        yield "assign_nearest", f"m={m},k=10", lambda k, x=x, c=c: k.assign_nearest(x, c)


def same(a, b):
    if isinstance(a, tuple):
        return all(same(p, q) for p, q in zip(a, b))
    return np.array_equal(a, b)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--csv", default=None)
    args = ap.parse_args(argv)

    found = _backend.available()
    if "cython" not in found:
        print("compiled kernels are not built; only the fallback is available", file=sys.stderr)
        return 1
    py, cy = found["python"], found["cython"]
    rows = []
    for name, size, fn in workloads(np.random.default_rng(args.seed)):
        if not same(fn(py), fn(cy)):
            print(f"{name} {size}: backends disagree", file=sys.stderr)
            return 1
        tp = median_time(lambda: fn(py), args.repeats)
        tc = median_time(lambda: fn(cy), args.repeats)
        rows.append((name, size, tp, tc, tp / tc))

    print(f"{'kernel':<16}{'size':<16}{'python s':>12}{'cython s':>12}{'speed-up':>10}")
    for name, size, tp, tc, sp in rows:
        print(f"{name:<16}{size:<16}{tp:>12.5f}{tc:>12.5f}{sp:>9.1f}x")
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["kernel", "size", "python_seconds", "cython_seconds", "speedup"])
            w.writerows(rows)
    return 0


if __name__ == "__main__":
    sys.exit(main())

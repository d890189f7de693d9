"""Timing comparison between the numba and numpy paths of nldiff._fastops.

Times the three hot per-node kernels (exact absorption update, power-sum for
the mass ledger, periodic interpolation) on both backends and prints a small
table with the speedup.  The numba path is compiled on a warmup call before
timing.  Run with NLDIFF_NUMBA=0 to disable the numba path entirely, in which
case only the numpy fallback is timed.

Usage:
    python3 benchmarks/bench_backends.py [--points N] [--queries M] [--repeats R]
"""

import argparse
import time

import numpy as np

from nldiff import _fastops


def best_of(fn, args, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best * 1000.0


def build_cases(points, queries, p):
    rng = np.random.default_rng(20240817)
    u = rng.random(points)
    u[:: points // 64] = -1e-12  # exercise the clamp branch
    side = 1 << max(1, (points.bit_length() - 1) // 2)
    field2 = rng.random((side, side))
    half_length = 32.0
    q1 = rng.uniform(-half_length, half_length, queries)
    q2 = rng.uniform(-half_length, half_length, (queries, 2))
    return [
        ("absorb", _fastops.absorb, _fastops.absorb_numpy,
         (u, p, 0.01, 1.0)),
        ("power_mass", _fastops.power_mass, _fastops.power_mass_numpy,
         (u, p)),
        ("interp 1-d", _fastops.interp_periodic, _fastops.interp_periodic_numpy,
         (u, half_length, q1)),
        ("interp 2-d", _fastops.interp_periodic, _fastops.interp_periodic_numpy,
         (field2, half_length, q2)),
    ]


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--points", type=int, default=1 << 20,
                        help="array length for absorb and power_mass")
    parser.add_argument("--queries", type=int, default=1 << 18,
                        help="number of interpolation queries")
    parser.add_argument("--repeats", type=int, default=7,
                        help="repetitions per case, best time kept")
    parser.add_argument("--p", type=float, default=3.0,
                        help="absorption exponent used in the kernels")
    args = parser.parse_args(argv)

    cases = build_cases(args.points, args.queries, args.p)
    print(f"active backend: {_fastops.backend_name()}")
    print(f"points={args.points}  queries={args.queries}  "
          f"repeats={args.repeats}  p={args.p}")

    if not _fastops.USE_NUMBA:
        print("numba path disabled; timing the numpy fallback only")
        print(f"{'case':<12}  {'numpy (ms)':>12}")
        for name, _, fallback, call_args in cases:
            t_np = best_of(fallback, call_args, args.repeats)
            print(f"{name:<12}  {t_np:>12.3f}")
        return 0

    # compile the jitted kernels outside the timed region
    for name, fast, _, call_args in cases:
        fast(*call_args)

    print(f"{'case':<12}  {'numba (ms)':>12}  {'numpy (ms)':>12}  {'speedup':>8}")
    for name, fast, fallback, call_args in cases:
        t_nb = best_of(fast, call_args, args.repeats)
        t_np = best_of(fallback, call_args, args.repeats)
        print(f"{name:<12}  {t_nb:>12.3f}  {t_np:>12.3f}  {t_np / t_nb:>8.2f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

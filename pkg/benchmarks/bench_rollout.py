#!/usr/bin/env python3
"""Benchmark the compiled rollout kernel against the pure-Python fallback.

The per-step slide update dominates Monte-Carlo evaluation runtime, so
this measures exactly that loop, with and without trajectory recording.

Usage: python benchmarks/bench_rollout.py [--steps N] [--repeats K]
"""

import argparse
import time

from vib2move import _reference

try:
    from vib2move import _native
except ImportError:
    _native = None

ARGS = (
    0.012, 0.02, 0.0,      # object pose
    0.0, 0.0, 0.0,         # finger pose
    0.001, -0.0005,        # pressure center offset
    0.003, 0.002,          # com offset
    0.045, 0.075,          # half extents
    0.09, 9.81, 0.009,     # mass, gravity, a3
)


def run(kernel, n_steps, record):
    t0 = time.perf_counter()
    status, n_done, *_ = kernel.rollout_core(*ARGS, 2e-5, n_steps, -1.0, record)
    dt = time.perf_counter() - t0
    assert status == 0 and n_done == n_steps
    return dt


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--steps", type=int, default=200_000)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    print(f"rollout kernel benchmark: {args.steps} steps, best of {args.repeats}")
    rows = []
    for name, kernel in (("python", _reference),) + ((("native", _native),) if _native else ()):
        for record in (False, True):
            best = min(run(kernel, args.steps, record) for _ in range(args.repeats))
            rows.append((name, record, best, args.steps / best))
            print(f"  {name:7s} record={str(record):5s}  {best * 1e3:9.1f} ms   "
                  f"{args.steps / best / 1e6:8.2f} Msteps/s")
    if _native is None:
        print("  (compiled kernel not built; install with Cython + a C compiler)")
        return
    for record in (False, True):
        py = next(r for r in rows if r[0] == "python" and r[1] == record)
        nat = next(r for r in rows if r[0] == "native" and r[1] == record)
        print(f"  speedup (record={record}): {py[2] / nat[2]:.1f}x")


if __name__ == "__main__":
    main()

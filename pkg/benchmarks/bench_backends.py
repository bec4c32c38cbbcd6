#!/usr/bin/env python3
"""Time the numba kernels against their pure-numpy fallbacks.

Usage:
    python benchmarks/bench_backends.py [--steps N] [--agents N] [--repeats R] [--json PATH]

Both backends are exercised in one process through the ``backend=`` switch
on each kernel; the first numba call per kernel is excluded as compile time.
"""
import argparse
import json
import time

import numpy as np

import pressure_consensus as pc
from pressure_consensus import kernels


def ring_system(n, rng):
    adj = np.zeros((n, n))
    for i in range(n):
        adj[i, (i + 1) % n] = adj[(i + 1) % n, i] = 1.0
    return pc.build_system(adj, rng.uniform(0.5, 2.0, n), rng.uniform(0, 1, n))


def timed(func, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        func()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--steps", type=int, default=10_000)
    parser.add_argument("--agents", type=int, default=2)
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--json", default=None, help="also write results here")
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    system = pc.k2_system() if args.agents == 2 else ring_system(args.agents, rng)
    rhos = pc.PressureSchedule.exp_sqrt(2.0).values(args.steps)
    logs = np.log(rhos / (1.0 + rhos))

    cases = {
        "iterate": lambda b: kernels.iterate(
            system.adjacency, system.stubbornness, system.preferred, system.row_sums,
            rhos, system.preferred, backend=b),
        "spectral_norms": lambda b: kernels.spectral_norms(
            system.adjacency, system.stubbornness, system.row_sums, rhos, backend=b),
        "compensated_cumsum": lambda b: kernels.compensated_cumsum(logs, backend=b),
    }
    backends = ["numpy"] + (["numba"] if pc.NUMBA_ENABLED else [])
    results = {}
    print(f"agents={system.n} steps={args.steps} repeats={args.repeats}")
    print(f"{'kernel':<20}" + "".join(f"{b:>14}" for b in backends) + ("   speedup" if len(backends) == 2 else ""))
    for name, case in cases.items():
        row = {}
        for b in backends:
            if b == "numba":
                t0 = time.perf_counter()
                case(b)
                row["numba_compile_s"] = time.perf_counter() - t0
            row[b] = timed(lambda: case(b), args.repeats)
        results[name] = row
        line = f"{name:<20}" + "".join(f"{row[b] * 1e3:>12.3f}ms" for b in backends)
        if len(backends) == 2:
            line += f"   {row['numpy'] / row['numba']:>6.1f}x"
        print(line)
    if not pc.NUMBA_ENABLED:
        print("numba disabled; only the numpy fallback was timed")
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump({"agents": system.n, "steps": args.steps, "results": results}, fh, indent=2)


if __name__ == "__main__":
    main()

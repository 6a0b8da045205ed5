"""Solve-time distribution of a closed-loop run; prints Markdown tables.

Usage: python3 benchmarks/solve_times.py [--scenario NAME] [--backend NAME]
"""

import argparse

import numpy as np

from ellipmpc import _backend, kinematics, ocp, overlap, solver
from ellipmpc.scenario import BUNDLED, bundled
from ellipmpc.simulation import run

EDGES_MS = [0, 1, 5, 10, 20, 50, 100, 180, 200, np.inf]


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--scenario", choices=BUNDLED, default="omni_three_obstacles")
    p.add_argument("--backend", choices=_backend.available(), default=_backend.BACKEND)
    args = p.parse_args()
    mod = _backend.load(args.backend)
    for user in (kinematics, ocp, overlap, solver):
        user.kernels = mod
    log = run(bundled(args.scenario))
    ms = log.solve_time * 1e3
    q = np.percentile(ms, [50, 90, 95, 99, 100])
    print(f"{args.scenario}, {args.backend} backend, {len(ms)} solves\n")
    print("| median | p90 | p95 | p99 | max |")
    print("|---|---|---|---|---|")
    print("| " + " | ".join(f"{v:.2f} ms" for v in q) + " |\n")
    counts, _ = np.histogram(ms, EDGES_MS)
    print("| solve time (ms) | solves |")
    print("|---|---|")
    for lo, hi, c in zip(EDGES_MS, EDGES_MS[1:], counts):
        label = f">= {lo}" if np.isinf(hi) else f"{lo} to {hi}"
        print(f"| {label} | {c} |")
    statuses = {s: log.status.count(s) for s in dict.fromkeys(log.status)}
    print("\nstatuses: " + ", ".join(f"{k} {v}" for k, v in statuses.items()))


if __name__ == "__main__":
    main()

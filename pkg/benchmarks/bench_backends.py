"""Compare the compiled and pure-Python kernels on the hot paths.

Usage: python3 benchmarks/bench_backends.py [--repeat N] [--steps N]
"""

import argparse
from dataclasses import replace
import time

import numpy as np

from ellipmpc import _backend, kinematics, ocp, oracles, overlap, solver
from ellipmpc.ocp import constraint_values
from ellipmpc.scenario import bundled
from ellipmpc.simulation import run

_USERS = (kinematics, ocp, overlap, solver)


def use(name):
    mod = _backend.load(name)
    for user in _USERS:
        user.kernels = mod


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(repeat, steps):
    rng = np.random.default_rng(0)
    pairs = [oracles.random_pair(rng) for _ in range(1000)]
    scen = bundled("omni_three_obstacles")
    spec = scen.ocp()
    z = rng.uniform(*spec.bounds())
    x0 = scen.x0.as_array()
    short = replace(scen, duration=steps * scen.model.dt)
    return {
        "kappa_star x1000": lambda: [overlap.kappa_star(a, b) for a, b in pairs],
        "constraints+jacobian": lambda: constraint_values(spec, x0, z),
        "al value+gradient": lambda: solver.augmented_lagrangian_value(
            spec, x0, z, np.zeros((11, 3)), 10.0),
        "first solve": lambda: solver.solve(spec, x0),
        f"closed loop {steps} steps": lambda: run(short),
    }


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--steps", type=int, default=40)
    args = p.parse_args()
    names = _backend.available()
    results = {}
    for name in names:
        use(name)
        for label, fn in cases(args.repeat, args.steps).items():
            results.setdefault(label, {})[name] = best_of(fn, args.repeat)
    use(_backend.BACKEND)
    print(f"{'case':<26}" + "".join(f"{n:>14}" for n in names)
          + ("   speedup" if len(names) > 1 else ""))
    for label, row in results.items():
        line = f"{label:<26}" + "".join(f"{row[n] * 1e3:>11.3f} ms" for n in names)
        if len(names) > 1:
            line += f"  {row['python'] / row['cython']:>7.1f}x"
        print(line)


if __name__ == "__main__":
    main()

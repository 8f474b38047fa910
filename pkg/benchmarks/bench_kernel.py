"""Time the compiled kernels against the pure-Python fallback.

Usage::

    python benchmarks/bench_kernel.py [--repeat 3]

Both kernels run on identical inputs; the script reports the best wall time
of each and the maximum difference between their outputs.
"""

import argparse
import time

import numpy as np

from lambdawg import kernel
from lambdawg.model import TWO_PI, ChannelParams, SingleAtomConfig
from lambdawg.oracle import grid_for_config


def best_of(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - start)
    return best, out


def dde_case(n_steps):
    inst = np.array([[-1.0 + 0j]])
    tgt = np.array([0, 0], dtype=np.int64)
    src = np.array([0, 0], dtype=np.int64)
    coef = np.array([0.5 + 0j, 0.5 * np.exp(0.7j)])
    delay = np.array([1.0, 1.7])
    dt = 1e-3
    return (inst, 0, np.zeros(4), np.zeros(0), np.zeros(0), tgt, src, coef, delay,
            np.array([1.0 + 0j]), dt, n_steps)


def mode_case(n_modes, n_steps):
    cfg = SingleAtomConfig(ChannelParams(1.0, TWO_PI, 1.0), ChannelParams(1.0, TWO_PI, 1.0))
    x0, grid = grid_for_config(cfg, n_modes=n_modes)
    det = np.concatenate([grid.k.detunings, grid.q.detunings])
    w = np.concatenate([np.full(n_modes, grid.k.spacing), np.full(n_modes, grid.q.spacing)])
    G = np.array([np.concatenate([grid.k.couplings(x0), grid.q.couplings(x0)])])
    dt = 0.1 / grid.window
    return (det, G, w, np.array([1.0 + 0j]), dt, n_steps, 10, 0, np.zeros(4), np.zeros(0), np.zeros(0), 1.0)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--dde-steps", type=int, default=20_000)
    ap.add_argument("--modes", type=int, default=4001)
    ap.add_argument("--mode-steps", type=int, default=400)
    args = ap.parse_args()

    print(f"compiled backend: {kernel.BACKEND}")
    rows = []
    a = dde_case(args.dde_steps)
    tc, (yc, _, _) = best_of(lambda: kernel.integrate_linear_dde(*a), args.repeat)
    tp, (yp, _, _) = best_of(lambda: kernel.python_integrate_linear_dde(*a), args.repeat)
    rows.append(("delay equation", args.dde_steps, tc, tp, float(np.max(np.abs(yc - yp)))))

    m = mode_case(args.modes, args.mode_steps)
    tc, oc = best_of(lambda: kernel.evolve_modes_rk4(*m), args.repeat)
    tp, op = best_of(lambda: kernel.python_evolve_modes_rk4(*m), args.repeat)
    rows.append(("mode oracle", args.mode_steps, tc, tp, float(np.max(np.abs(oc[4] - op[4])))))

    print(f"{'kernel':<16}{'steps':>8}{'compiled [s]':>14}{'python [s]':>12}{'speedup':>9}{'max diff':>11}")
    for name, steps, tc, tp, diff in rows:
        print(f"{name:<16}{steps:>8}{tc:>14.4f}{tp:>12.4f}{tp / tc:>9.1f}{diff:>11.1e}")


if __name__ == "__main__":
    main()

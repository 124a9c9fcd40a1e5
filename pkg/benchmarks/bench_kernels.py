"""Time the numba and numpy time-stepping kernels on the same problem.

    python3 benchmarks/bench_kernels.py [--n 2001] [--steps 2000] [--repeat 3]

Both backends start from the same perturbed supersonic profile; the
script checks that they agree before printing timings.
"""
import argparse
import math
import time

import numpy as np

from halfspace_ns.evolution import (GaussianBump, PerturbationSpec, SchemeConfig, build_initial,
                                    kernels, reference_rate, stable_dt)
from halfspace_ns.evolution.scheme import _consts
from halfspace_ns.model import BoundaryData, dimensionless
from halfspace_ns.stationary import GridSpec, solve_stationary


def setup(n):
    p = dimensionless(5 / 3, 1.0, 1.0, 2.0)
    bd = BoundaryData.from_offset(-0.1 * math.cos(0.3), 0.1 * math.sin(0.3))
    pr = solve_stationary(bd, p, GridSpec(100.0, n))
    st = build_initial(pr, PerturbationSpec(0.01, GaussianBump(5.0, 1.0)))
    ref = reference_rate(pr, st.grid, p)
    dt = stable_dt(st, st.grid, p, SchemeConfig())
    return p, st, ref, dt


def run(fn, p, st, ref, dt, steps, order):
    rho, u, th = st.rho.copy(), st.u.copy(), st.theta.copy()
    t0 = time.perf_counter()
    status, done = fn(rho, u, th, ref, dt, steps, order, kernels.FAR_DIRICHLET, st.grid.dx, *_consts(p))
    elapsed = time.perf_counter() - t0
    assert status == 0 and done == steps
    return elapsed, np.vstack([rho, u, th])


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=2001)
    ap.add_argument("--steps", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if kernels.advance_numba is None:
        raise SystemExit("numba backend disabled (HALFSPACE_NS_NUMBA=0 or numba missing)")
    p, st, ref, dt = setup(args.n)
    # first call compiles (or loads the on-disk cache)
    t0 = time.perf_counter()
    run(kernels.advance_numba, p, st, ref, dt, 1, 2)
    print(f"numba warm-up {time.perf_counter() - t0:.2f} s")
    print(f"n = {args.n}, steps = {args.steps}, dt = {dt:.3e}")
    for order in (2, 4):
        best = {}
        out = {}
        for name, fn in (("numpy", kernels.advance_numpy), ("numba", kernels.advance_numba)):
            times = []
            for _ in range(args.repeat):
                el, out[name] = run(fn, p, st, ref, dt, args.steps, order)
                times.append(el)
            best[name] = min(times)
        diff = float(np.max(np.abs(out["numpy"] - out["numba"])))
        assert diff < 1e-12, diff
        print(f"RK{order}: numpy {best['numpy']:.3f} s, numba {best['numba']:.3f} s, "
              f"speedup {best['numpy'] / best['numba']:.1f}x, max diff {diff:.1e}")


if __name__ == "__main__":
    main()

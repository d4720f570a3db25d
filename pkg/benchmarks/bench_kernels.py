#!/usr/bin/env python3
"""Compare the compiled simplex kernel against the pure-NumPy fallback.

Times raw LP solves on master-shaped problems at a few sizes, then a full
constraint-generation run on a synthetic sensor instance with each kernel.

    python benchmarks/bench_kernels.py [--repeats 5]
"""

from __future__ import annotations

import argparse
import os
import time

import numpy as np

from ksubmax import DcgConfig, entropy_oracle, solve
from ksubmax._kernels import available_kernels
from ksubmax.instances import InstanceSpec, sample_instance, synthetic_readings
from ksubmax.simplex import solve_bounded_lp


def master_shaped_lp(rng, n_cols, n_rows):
    """Random LP with the master's shape: eta plus box variables, all rows <=."""
    A = np.zeros((n_rows, n_cols + 1))
    A[:, :n_cols] = rng.normal(size=(n_rows, n_cols))
    A[:, n_cols] = 1.0  # eta column
    b = rng.uniform(0.5, 3.0, size=n_rows)
    c = np.zeros(n_cols + 1)
    c[n_cols] = 1.0
    lo = np.concatenate([np.zeros(n_cols), [-100.0]])
    hi = np.concatenate([np.ones(n_cols), [np.inf]])
    return A, b, c, lo, hi


def bench_lp(repeats):
    rng = np.random.default_rng(0)
    sizes = [(40, 60), (40, 200), (80, 400), (120, 800)]
    print(f"{'cols x rows':>14} | " + " | ".join(f"{k:>10}" for k in available_kernels()))
    print("-" * (17 + 13 * len(available_kernels())))
    for n_cols, n_rows in sizes:
        problems = [master_shaped_lp(rng, n_cols, n_rows) for _ in range(repeats)]
        cells = []
        objs = {}
        for name, kernel in available_kernels().items():
            t0 = time.perf_counter()
            vals = []
            for A, b, c, lo, hi in problems:
                res = solve_bounded_lp(A, b, c, lo, hi, kernel=kernel)
                vals.append(res.obj)
            per = (time.perf_counter() - t0) / repeats
            cells.append(f"{per * 1e3:8.2f}ms")
            objs[name] = vals
        ref = list(objs.values())[0]
        for vals in objs.values():
            assert np.allclose(vals, ref, atol=1e-7), "kernels disagree"
        print(f"{n_cols:>6} x {n_rows:>5} | " + " | ".join(f"{c:>10}" for c in cells))


def bench_solver():
    raw = synthetic_readings(n_locations=54, t_samples=400, k_features=2, seed=1)
    spec = InstanceSpec(
        n=20, t=50, k=2, bounds=(2, 2), bins=(2, 3), rng_seed=1,
        selected_locations=(), selected_samples=(),
    )
    obs, region, _ = sample_instance(raw, spec)
    print("\nfull solve, synthetic n=20 t=50 B=(2,2):")
    values = {}
    for name in available_kernels():
        os.environ.pop("KSUBMAX_PURE_PYTHON", None)
        if name == "python":
            os.environ["KSUBMAX_PURE_PYTHON"] = "1"
        oracle = entropy_oracle(obs)
        t0 = time.perf_counter()
        report = solve(oracle, region, DcgConfig(epsilon=1e-6))
        elapsed = time.perf_counter() - t0
        values[name] = report.lb
        print(
            f"  {name:>9}: {elapsed:6.2f}s  ({report.cuts_added} cuts, "
            f"{report.total_bb_nodes} nodes, value {report.lb:.6f})"
        )
    os.environ.pop("KSUBMAX_PURE_PYTHON", None)
    vals = list(values.values())
    assert all(abs(v - vals[0]) < 1e-9 for v in vals), "kernels disagree on the optimum"


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()
    kernels = available_kernels()
    print(f"kernels available: {', '.join(kernels)}")
    if len(kernels) == 1:
        print("compiled kernel not built; timing the fallback only")
    bench_lp(args.repeats)
    bench_solver()


if __name__ == "__main__":
    main()

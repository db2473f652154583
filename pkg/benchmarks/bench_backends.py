"""Compiled kernels against the pure-Python fallback.

    python benchmarks/bench_backends.py [--repeat 5] [--quick]

Times the three kernels in isolation and two end-to-end runs (a 1025-node
solve and a reference shooting solve), checks the backends agree, and
prints one row per case.
"""
import argparse
from contextlib import contextmanager
import time

import numpy as np

from stolarskyfv import _kernels
from stolarskyfv.config import merge
from stolarskyfv.linsolve import solve_problem
from stolarskyfv.means import SG, MeanSpec
from stolarskyfv.mesh import Box, build_vertex_mesh
from stolarskyfv.reference import shoot_reference


@contextmanager
def backend(mod):
    saved = (_kernels.log_weight, _kernels.thomas, _kernels.rk4_linear)
    _kernels.log_weight, _kernels.thomas, _kernels.rk4_linear = mod.log_weight, mod.thomas, mod.rk4_linear
    try:
        yield
    finally:
        _kernels.log_weight, _kernels.thomas, _kernels.rk4_linear = saved


def best_of(fn, repeat):
    times, out = [], None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def cases(quick):
    rng = np.random.default_rng(0)
    s = rng.uniform(0.0, 40.0, 20_000 if quick else 200_000)
    n = 20_000 if quick else 200_000
    lower, upper = -rng.uniform(0.5, 1.0, n), -rng.uniform(0.5, 1.0, n)
    diag = 2.5 + rng.uniform(0.0, 1.0, n)
    rhs = rng.standard_normal(n)
    m = 2 * (5_000 if quick else 50_000) + 1
    x = np.linspace(0.0, 1.0, m)
    f, ik, dV = x * (1 - x), np.ones(m), 4 * np.pi * np.cos(2 * np.pi * x)
    problem = merge({"preset": "example1"}).problem()
    mesh = build_vertex_mesh(Box((0.0,), (1.0,)), 1025)
    mean = MeanSpec.general(3.2, 1.0)
    grid = 10_001 if quick else 136_474
    return [
        ("log_weight", lambda: _kernels.log_weight(3.2, 1.0, s)),
        ("thomas", lambda: _kernels.thomas(lower, diag, upper, rhs)),
        ("rk4_linear", lambda: _kernels.rk4_linear(1.0 / (m - 1), 0.0, 0.1, f, ik, dV)[0]),
        ("solve n=1025", lambda: solve_problem(problem, mesh, mean).U),
        (f"reference n_grid={grid}", lambda: shoot_reference(problem, n_grid=grid).u),
        ("solve sg n=1025", lambda: solve_problem(problem, mesh, SG).U),
    ]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--quick", action="store_true", help="smaller inputs")
    args = ap.parse_args(argv)
    backends = _kernels.available_backends()
    if "cython" not in backends:
        print("compiled backend not built; only the fallback is available")
    print(f"{'case':<26}{'python [s]':>12}{'cython [s]':>12}{'speedup':>10}{'max diff':>12}")
    for name, fn in cases(args.quick):
        res = {}
        for key, mod in backends.items():
            with backend(mod):
                res[key] = best_of(fn, args.repeat)
        tp, op = res["python"]
        if "cython" in res:
            tc, oc = res["cython"]
            diff = float(np.max(np.abs(np.asarray(op) - np.asarray(oc))))
            print(f"{name:<26}{tp:>12.4f}{tc:>12.4f}{tp / tc:>10.1f}{diff:>12.1e}")
        else:
            print(f"{name:<26}{tp:>12.4f}{'-':>12}{'-':>10}{'-':>12}")


if __name__ == "__main__":
    main()

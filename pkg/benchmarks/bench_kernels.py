"""Compare the compiled and pure-Python kernel backends.

Usage::

    python3 benchmarks/bench_kernels.py [--n 5] [--batch 200] [--repeat 5]

Prints the best-of-``repeat`` time per call for each backend, the speedup,
and the largest difference between the two outputs.
"""
from __future__ import annotations

import argparse
import sys
import timeit

import numpy as np

from plspin import kernels, sampling as sp


def cases(n: int, batch: int, rng: np.random.Generator) -> dict:
    q = sp.random_regular_phases(rng, n)
    qd = np.exp(1j * q)
    X = sp.complex_normal(rng, (n, n))
    X -= np.trace(X) / n * np.eye(n)
    lam = sp.random_unipotent(rng, n)
    qds = np.array([np.exp(1j * sp.random_regular_phases(rng, n)) for _ in range(batch)])
    lams = np.array([sp.random_unipotent(rng, n) for _ in range(batch)])
    p = sp.random_traceless_real(rng, n)
    half = 0.5 * q
    return {
        "manin_split": (X,),
        "r_apply": (qd, X),
        "zeta_solve": (qd, lam),
        "zeta_solve_batch": (qds, lams),
        "rs_bplus": (qd, 0.7),
        "rs_bplus_batch": (qds, 0.7),
        "rs_theta": (half, p, 0.7),
        "rs_momenta": (half, p, 0.7),
        "rs_hamiltonians": (half, p, 0.7),
        "sutherland_potential": (q, np.triu(X, 1)),
    }


def _max_diff(a, b) -> float:
    if isinstance(a, tuple):
        return max(_max_diff(x, y) for x, y in zip(a, b))
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def best_time(fn, args, repeat: int) -> float:
    timer = timeit.Timer(lambda: fn(*args))
    number, _ = timer.autorange()
    return min(timer.repeat(repeat=repeat, number=number)) / number


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=5)
    ap.add_argument("--batch", type=int, default=200)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    if kernels.compiled_backend is None:
        print("compiled backend not available; build it with `pip install -e . --no-build-isolation`")
        return 1
    py, cy = kernels.python_backend, kernels.compiled_backend
    rng = sp.rng_for(args.seed)
    print(f"n={args.n} batch={args.batch}")
    print(f"{'kernel':<22}{'python [us]':>14}{'compiled [us]':>16}{'speedup':>10}{'max diff':>12}")
    for name, cargs in cases(args.n, args.batch, rng).items():
        f_py, f_cy = getattr(py, name), getattr(cy, name)
        diff = _max_diff(f_py(*cargs), f_cy(*cargs))
        t_py = best_time(f_py, cargs, args.repeat)
        t_cy = best_time(f_cy, cargs, args.repeat)
        print(f"{name:<22}{t_py * 1e6:>14.2f}{t_cy * 1e6:>16.2f}{t_py / t_cy:>10.1f}{diff:>12.1e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

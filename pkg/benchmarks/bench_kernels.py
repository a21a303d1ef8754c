"""Compiled kernels against the NumPy fallback on the public eigensolver API.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 3] [--scale 1.0] [--json PATH]

Each workload runs once per backend (best of ``--repeat``); the results of
the two backends are compared so that a speedup never hides a wrong answer.
The default sizes take a few minutes, mostly in the fallback; ``--scale 0.2``
gives a quick run.
"""
from __future__ import annotations

import argparse
import json
import sys
import timeit

import numpy as np

import specx.eig as eig
from specx.eig import _fallback

try:
    from specx.eig import _kernels
except ImportError:  # extension not built
    _kernels = None


def _tridiag(n: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    return rng.standard_normal(n), rng.standard_normal(n - 1)


def workloads(scale: float):
    n_big = max(1000, int(100_000 * scale))
    n_ql = max(50, int(600 * scale))
    n_dense = max(50, int(300 * scale))
    d, e = _tridiag(n_big)
    dq, eq = _tridiag(n_ql, 1)
    a = np.random.default_rng(2).standard_normal((n_dense, n_dense))
    a = (a + a.T) / 2
    lo, hi = eig.gershgorin_bounds(d, e)
    shifts = np.linspace(lo, hi, 2000)
    idx = np.linspace(0, n_big - 1, 200).astype(np.int64)
    lam = eig.eigenvalues_by_index(d, e, idx[:40])
    return {
        f"sturm_count  N={n_big}, 2000 shifts": lambda: eig.sturm_count(d, e, shifts),
        f"bisection    N={n_big}, 200 eigenvalues": lambda: eig.eigenvalues_by_index(d, e, idx),
        f"inverse it.  N={n_big}, 40 vectors": lambda: np.abs(eig.inverse_iteration(d, e, lam)),
        f"QL implicit  n={n_ql}, with vectors": lambda: eig.tridiag_eigen(dq, eq, True).eigenvalues,
        f"Householder  n={n_dense}, with vectors": lambda: eig.dense_sym_eigen(a, True).eigenvalues,
    }


def _run(fn, repeat: int):
    out = fn()
    best = min(timeit.repeat(fn, number=1, repeat=repeat))
    return best, np.asarray(out)


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--scale", type=float, default=1.0, help="problem-size multiplier")
    p.add_argument("--json", metavar="PATH", help="also write the results as JSON")
    args = p.parse_args(argv)
    if _kernels is None:
        print("compiled extension not built; only the fallback is available", file=sys.stderr)
        return 1

    rows = []
    for name, fn in workloads(args.scale).items():
        eig.kernels = _kernels
        t_c, r_c = _run(fn, args.repeat)
        eig.kernels = _fallback
        t_f, r_f = _run(fn, args.repeat)
        eig.kernels = _kernels
        diff = float(np.max(np.abs(r_c - r_f))) if r_c.shape == r_f.shape else float("nan")
        rows.append({"workload": name, "compiled_s": t_c, "fallback_s": t_f,
                     "speedup": t_f / t_c, "max_abs_diff": diff})

    width = max(len(r["workload"]) for r in rows)
    print(f"{'workload':<{width}}  {'compiled':>10}  {'fallback':>10}  {'speedup':>8}  {'max |diff|':>10}")
    for r in rows:
        print(f"{r['workload']:<{width}}  {r['compiled_s']:>9.4f}s  {r['fallback_s']:>9.4f}s  "
              f"{r['speedup']:>7.1f}x  {r['max_abs_diff']:>10.1e}")
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(rows, fh, indent=2)
    return 0


if __name__ == "__main__":
    sys.exit(main())

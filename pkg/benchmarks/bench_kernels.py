"""Compare the compiled kernels with the numpy fallback.

Run ``python benchmarks/bench_kernels.py``; each row reports the best of
``--repeat`` timings per backend, the speedup and the largest disagreement.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from gammakit import _pykernels
from gammakit.polynomials import kv_polynomial, reduce_symmetric

try:
    from gammakit import _kernels
except ImportError:  # extension not built
    _kernels = None


def _best(fn, repeat: int) -> tuple[float, object]:
    best, out = np.inf, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def _diff(a, b) -> float:
    if isinstance(a, tuple):  # (values, indices) from the grid scan
        return float(np.max(np.abs(np.sort(a[0]) - np.sort(b[0]))))
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def cases(rng: np.random.Generator):
    Z = rng.normal(size=(200_000, 5)) + 1j * rng.normal(size=(200_000, 5))
    yield "elem_sym_batch 200000x5", lambda m: m.elem_sym_batch(Z)

    q = reduce_symmetric(kv_polynomial()).chop()
    exps, coeffs = q.arrays()
    X = rng.normal(size=(200_000, 3)) + 1j * rng.normal(size=(200_000, 3))
    yield "poly_eval_batch kv, 200000 pts", lambda m: m.poly_eval_batch(exps, coeffs, X)

    for n, grid in ((2, 256), (3, 64), (4, 32)):
        # x1^2 - 4 x2 + x_n^2 in n variables
        e = np.zeros((3, n), dtype=np.int64)
        e[0, 0], e[1, 1], e[2, n - 1] = 2, 1, 2
        c = np.array([1.0, -4.0, 1.0], dtype=np.complex128)
        yield (f"torus_grid_top n={n} grid={grid}",
               lambda m, e=e, c=c, n=n, grid=grid: m.torus_grid_top(e, c, n, grid, 64))


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if _kernels is None:
        print("compiled extension not built; only the fallback is available")
    print(f"{'kernel':38s} {'python [s]':>11s} {'compiled [s]':>13s} {'speedup':>8s} {'max diff':>9s}")
    for name, fn in cases(np.random.default_rng(args.seed)):
        tp, rp = _best(lambda: fn(_pykernels), args.repeat)
        if _kernels is None:
            print(f"{name:38s} {tp:11.4f} {'-':>13s} {'-':>8s} {'-':>9s}")
            continue
        tc, rc = _best(lambda: fn(_kernels), args.repeat)
        print(f"{name:38s} {tp:11.4f} {tc:13.4f} {tp / tc:8.1f} {_diff(rp, rc):9.1e}")


if __name__ == "__main__":
    main()

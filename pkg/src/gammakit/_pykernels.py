"""Pure numpy implementations of the hot kernels.

Signatures mirror ``gammakit._kernels`` exactly so either module can back
``gammakit._backend``.
"""
from __future__ import annotations

import itertools

import numpy as np

_CHUNK = 1 << 15


def elem_sym_batch(Z):
    """Rows of ``Z`` (m, n) -> (m, n + 1) elementary symmetric values, column 0 = 1."""
    Z = np.asarray(Z, dtype=np.complex128)
    m, n = Z.shape
    E = np.zeros((m, n + 1), dtype=np.complex128)
    E[:, 0] = 1.0
    for j in range(n):
        zj = Z[:, j]
        # descending k keeps E[:, k - 1] at its previous-step value
        E[:, 1 : j + 2] = E[:, 1 : j + 2] + zj[:, None] * E[:, 0 : j + 1]
    return E


def poly_eval_batch(exps, coeffs, X):
    """Evaluate sum_t coeffs[t] * prod_v X[:, v] ** exps[t, v] for every row of X."""
    exps = np.asarray(exps, dtype=np.int64)
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    X = np.asarray(X, dtype=np.complex128)
    m, nv = X.shape
    out = np.zeros(m, dtype=np.complex128)
    if exps.shape[0] == 0:
        return out
    maxdeg = int(exps.max()) if exps.size else 0
    for lo in range(0, m, _CHUNK):
        Xc = X[lo : lo + _CHUNK]
        pw = Xc[:, :, None] ** np.arange(maxdeg + 1)  # (c, nv, D+1)
        vals = np.ones((Xc.shape[0], exps.shape[0]), dtype=np.complex128)
        for v in range(nv):
            vals *= pw[:, v, exps[:, v]]
        out[lo : lo + _CHUNK] = vals @ coeffs
    return out


def _merge_top(best_v, best_i, vals, idx, k):
    v = np.concatenate([best_v, vals])
    i = np.concatenate([best_i, idx])
    if v.shape[0] > k:
        keep = np.argpartition(-v, k - 1)[:k]
        v, i = v[keep], i[keep]
    return v, i


def torus_grid_top(exps, coeffs, n, grid, k, first_lo=0, first_hi=-1):
    """Top-k of |q(s(w))| over w = exp(2 pi i j / grid), j non-decreasing.

    Only tuples whose first index lies in [first_lo, first_hi) are visited
    (first_hi < 0 means grid).  Returns (values, index tuples) sorted by
    decreasing value.
    """
    exps = np.asarray(exps, dtype=np.int64)
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    if first_hi < 0:
        first_hi = grid
    table = np.exp(2j * np.pi * np.arange(grid) / grid)
    best_v = np.empty(0)
    best_i = np.empty((0, n), dtype=np.int64)
    for j0 in range(first_lo, first_hi):
        tails = itertools.combinations_with_replacement(range(j0, grid), n - 1)
        while True:
            chunk = list(itertools.islice(tails, _CHUNK))
            if not chunk and n > 1:
                break
            if n == 1:
                idx = np.array([[j0]], dtype=np.int64)
            else:
                idx = np.empty((len(chunk), n), dtype=np.int64)
                idx[:, 0] = j0
                idx[:, 1:] = np.array(chunk, dtype=np.int64)
            E = elem_sym_batch(table[idx])
            vals = np.abs(poly_eval_batch(exps, coeffs, E[:, 1:]))
            best_v, best_i = _merge_top(best_v, best_i, vals, idx, k)
            if n == 1:
                break
    order = np.argsort(-best_v, kind="stable")
    return best_v[order], best_i[order]

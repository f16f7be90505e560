# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the kernels in ``gammakit._pykernels``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, M_PI

cnp.import_array()


def elem_sym_batch(Z):
    cdef double complex[:, ::1] z = np.ascontiguousarray(Z, dtype=np.complex128)
    cdef Py_ssize_t m = z.shape[0], n = z.shape[1], r, j, k
    out = np.zeros((m, n + 1), dtype=np.complex128)
    cdef double complex[:, ::1] E = out
    with nogil:
        for r in range(m):
            E[r, 0] = 1.0
            for j in range(n):
                for k in range(j + 1, 0, -1):
                    E[r, k] = E[r, k] + z[r, j] * E[r, k - 1]
    return out


cdef inline double complex _poly_eval(const long[:, ::1] exps, const double complex[::1] coeffs,
                                      double complex *pw, Py_ssize_t nv, Py_ssize_t stride) noexcept nogil:
    cdef Py_ssize_t t, v
    cdef double complex acc = 0.0, term
    for t in range(exps.shape[0]):
        term = coeffs[t]
        for v in range(nv):
            term = term * pw[v * stride + exps[t, v]]
        acc = acc + term
    return acc


cdef inline void _fill_powers(const double complex *x, Py_ssize_t nv, Py_ssize_t maxdeg,
                              double complex *pw) noexcept nogil:
    cdef Py_ssize_t v, e
    for v in range(nv):
        pw[v * (maxdeg + 1)] = 1.0
        for e in range(1, maxdeg + 1):
            pw[v * (maxdeg + 1) + e] = pw[v * (maxdeg + 1) + e - 1] * x[v]


def poly_eval_batch(exps, coeffs, X):
    cdef const long[:, ::1] ex = np.ascontiguousarray(exps, dtype=np.int64)
    cdef const double complex[::1] co = np.ascontiguousarray(coeffs, dtype=np.complex128)
    cdef double complex[:, ::1] x = np.ascontiguousarray(X, dtype=np.complex128)
    cdef Py_ssize_t m = x.shape[0], nv = x.shape[1], r
    cdef Py_ssize_t maxdeg = int(np.max(exps)) if ex.shape[0] else 0
    out = np.zeros(m, dtype=np.complex128)
    cdef double complex[::1] o = out
    pw_arr = np.empty(nv * (maxdeg + 1) + 1, dtype=np.complex128)
    cdef double complex[::1] pw = pw_arr
    if ex.shape[0] == 0:
        return out
    with nogil:
        for r in range(m):
            _fill_powers(&x[r, 0], nv, maxdeg, &pw[0])
            o[r] = _poly_eval(ex, co, &pw[0], nv, maxdeg + 1)
    return out


def torus_grid_top(exps, coeffs, long n, long grid, long k, long first_lo=0, long first_hi=-1):
    cdef const long[:, ::1] ex = np.ascontiguousarray(exps, dtype=np.int64)
    cdef const double complex[::1] co = np.ascontiguousarray(coeffs, dtype=np.complex128)
    cdef Py_ssize_t maxdeg = int(np.max(exps)) if ex.shape[0] else 0
    if first_hi < 0:
        first_hi = grid
    table_arr = np.exp(2j * np.pi * np.arange(grid) / grid)
    cdef double complex[::1] table = table_arr
    # prefix[l, :] = elementary symmetric values of the first l angles
    prefix_arr = np.zeros((n + 1, n + 1), dtype=np.complex128)
    cdef double complex[:, ::1] prefix = prefix_arr
    idx_arr = np.zeros(n, dtype=np.int64)
    cdef long[::1] idx = idx_arr
    pw_arr = np.empty(n * (maxdeg + 1) + 1, dtype=np.complex128)
    cdef double complex[::1] pw = pw_arr
    best_v_arr = np.full(k, -1.0)
    best_i_arr = np.zeros((k, n), dtype=np.int64)
    cdef double[::1] best_v = best_v_arr
    cdef long[:, ::1] best_i = best_i_arr
    cdef Py_ssize_t l, j, p, worst
    cdef double val, wv
    cdef double complex zz
    cdef bint done
    if first_lo >= first_hi or n < 1:
        return best_v_arr[:0], best_i_arr[:0]
    with nogil:
        prefix[0, 0] = 1.0
        for l in range(n):
            idx[l] = first_lo
        p = 0
        worst = 0
        while True:
            # rebuild prefixes from level p onwards
            for l in range(p, n):
                zz = table[idx[l]]
                prefix[l + 1, 0] = 1.0
                for j in range(1, l + 2):
                    prefix[l + 1, j] = prefix[l, j] + zz * prefix[l, j - 1]
                for j in range(l + 2, n + 1):
                    prefix[l + 1, j] = 0.0
            _fill_powers(&prefix[n, 1], n, maxdeg, &pw[0])
            val = abs(_poly_eval(ex, co, &pw[0], n, maxdeg + 1))
            if val > best_v[worst]:
                best_v[worst] = val
                for l in range(n):
                    best_i[worst, l] = idx[l]
                wv = best_v[0]
                worst = 0
                for j in range(1, k):
                    if best_v[j] < wv:
                        wv = best_v[j]
                        worst = j
            # advance to the next non-decreasing tuple
            done = True
            for l in range(n - 1, -1, -1):
                if (l == 0 and idx[0] + 1 < first_hi) or (l > 0 and idx[l] + 1 < grid):
                    idx[l] += 1
                    for j in range(l + 1, n):
                        idx[j] = idx[l]
                    p = l
                    done = False
                    break
            if done:
                break
    keep = best_v_arr >= 0
    v = best_v_arr[keep]
    ii = best_i_arr[keep]
    order = np.argsort(-v, kind="stable")
    return v[order], ii[order]

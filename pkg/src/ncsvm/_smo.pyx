# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled SMO backend. Mirrors ``_smo_py.solve`` step for step."""

import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY

cnp.import_array()

cdef double TAU = 1e-12


cdef inline bint in_up(double yt, double at, double C) noexcept nogil:
    return at < C if yt > 0 else at > 0


cdef inline bint in_low(double yt, double at, double C) noexcept nogil:
    return at > 0 if yt > 0 else at < C


def solve(K, y, double C, double tol, Py_ssize_t max_iter, trace=None):
    if trace is not None:
        from ._smo_py import solve as traced
        return traced(K, y, C, tol, max_iter, trace)
    cdef double[:, ::1] Kv = np.ascontiguousarray(K, dtype=np.float64)
    cdef double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef Py_ssize_t m = yv.shape[0]
    alpha_arr = np.zeros(m)
    G_arr = -np.ones(m)
    cdef double[::1] alpha = alpha_arr
    cdef double[::1] G = G_arr
    cdef Py_ssize_t t, i, j, n_iter = 0
    cdef double g_max, g_max2, v, b, a, score, best, quad, delta, diff, total
    cdef double old_i, old_j, ai, aj, d_i, d_j, yi, yj
    cdef bint converged = False

    with nogil:
        while n_iter < max_iter:
            g_max = -INFINITY
            i = -1
            for t in range(m):
                if in_up(yv[t], alpha[t], C):
                    v = -yv[t] * G[t]
                    if v >= g_max:
                        g_max = v
                        i = t
            g_max2 = -INFINITY
            j = -1
            best = INFINITY
            for t in range(m):
                if in_low(yv[t], alpha[t], C):
                    v = yv[t] * G[t]
                    if v > g_max2:
                        g_max2 = v
                    if i >= 0:
                        b = g_max + v
                        if b > 0:
                            a = Kv[i, i] + Kv[t, t] - 2.0 * Kv[i, t]
                            if a <= 0:
                                a = TAU
                            score = -(b * b) / a
                            if score <= best:
                                best = score
                                j = t
            if i < 0 or g_max2 == -INFINITY:
                converged = True
                break
            if g_max + g_max2 < tol:
                converged = True
                break

            old_i = alpha[i]
            old_j = alpha[j]
            yi = yv[i]
            yj = yv[j]
            quad = Kv[i, i] + Kv[j, j] - 2.0 * Kv[i, j]
            if quad <= 0:
                quad = TAU
            if yi != yj:
                delta = (-G[i] - G[j]) / quad
                diff = old_i - old_j
                ai = old_i + delta
                aj = old_j + delta
                if diff > 0:
                    if aj < 0:
                        aj = 0.0
                        ai = diff
                elif ai < 0:
                    ai = 0.0
                    aj = -diff
                if diff > 0:
                    if ai > C:
                        ai = C
                        aj = C - diff
                elif aj > C:
                    aj = C
                    ai = C + diff
            else:
                delta = (G[i] - G[j]) / quad
                total = old_i + old_j
                ai = old_i - delta
                aj = old_j + delta
                if total > C:
                    if ai > C:
                        ai = C
                        aj = total - C
                elif aj < 0:
                    aj = 0.0
                    ai = total
                if total > C:
                    if aj > C:
                        aj = C
                        ai = total - C
                elif ai < 0:
                    ai = 0.0
                    aj = total
            d_i = ai - old_i
            d_j = aj - old_j
            alpha[i] = ai
            alpha[j] = aj
            for t in range(m):
                G[t] += yv[t] * (yi * d_i * Kv[i, t] + yj * d_j * Kv[j, t])
            n_iter += 1

    from ._smo_py import _bias
    return alpha_arr, _bias(alpha_arr, G_arr, np.asarray(yv), C), n_iter, converged

# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled pivot loop for the bounded-variable primal simplex.

Mirror of ``_simplex_py.run_simplex`` with identical pivot selection and
tie-breaking; see that module for the contract.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, fabs, isfinite

cnp.import_array()

AT_LOWER, AT_UPPER, BASIC = 0, 1, 2
OPTIMAL, ITER_LIMIT, UNBOUNDED = 0, 2, 3

cdef double _DEGEN_EPS = 1e-12


def run_simplex(
    double[:, ::1] T,
    double[::1] xB,
    double[::1] d,
    cnp.int64_t[::1] basis,
    cnp.int8_t[::1] vstat,
    double[::1] lo,
    double[::1] hi,
    double tol,
    int bland_after,
    long max_iter,
):
    cdef Py_ssize_t m = T.shape[0]
    cdef Py_ssize_t N = T.shape[1]
    cdef long iters = 0
    cdef int streak = 0
    cdef Py_ssize_t e, r, i, j, jj, leave
    cdef double sigma, score, best_score, alpha_i, ti, t_rows, t_bound
    cdef double t_star, v_old, piv, fac, d_e, improvement, best_mag
    cdef cnp.int64_t best_basis
    cdef double[::1] col = np.empty(m, dtype=np.float64)
    cdef double[::1] t = np.empty(m, dtype=np.float64)

    while iters < max_iter:
        # entering variable
        e = -1
        if streak >= bland_after:
            for j in range(N):
                if hi[j] - lo[j] > 0.0 and (
                    (vstat[j] == AT_LOWER and d[j] > tol)
                    or (vstat[j] == AT_UPPER and d[j] < -tol)
                ):
                    e = j
                    break
        else:
            best_score = 0.0
            for j in range(N):
                if hi[j] - lo[j] <= 0.0:
                    continue
                if vstat[j] == AT_LOWER and d[j] > tol:
                    score = d[j]
                elif vstat[j] == AT_UPPER and d[j] < -tol:
                    score = -d[j]
                else:
                    continue
                if score > best_score:
                    best_score = score
                    e = j
        if e < 0:
            return OPTIMAL, iters

        sigma = 1.0 if vstat[e] == AT_LOWER else -1.0

        # ratio test against the basic variables
        t_rows = INFINITY
        for i in range(m):
            col[i] = T[i, e]
            alpha_i = sigma * col[i]
            if alpha_i > tol:
                ti = (xB[i] - lo[basis[i]]) / alpha_i
            elif alpha_i < -tol:
                ti = (hi[basis[i]] - xB[i]) / (-alpha_i)
            else:
                ti = INFINITY
            if ti < 0.0:
                ti = 0.0
            t[i] = ti
            if ti < t_rows:
                t_rows = ti
        t_bound = hi[e] - lo[e]

        if t_bound <= t_rows:
            if not isfinite(t_bound):
                return UNBOUNDED, iters
            for i in range(m):
                xB[i] -= (sigma * t_bound) * col[i]
            vstat[e] = AT_UPPER if vstat[e] == AT_LOWER else AT_LOWER
            improvement = fabs(d[e]) * t_bound
        else:
            if not isfinite(t_rows):
                return UNBOUNDED, iters
            r = -1
            if streak >= bland_after:
                best_basis = -1
                for i in range(m):
                    if t[i] <= t_rows * (1.0 + 1e-12) + 1e-15:
                        if best_basis < 0 or basis[i] < best_basis:
                            best_basis = basis[i]
                            r = i
            else:
                best_mag = -1.0
                for i in range(m):
                    if t[i] <= t_rows * (1.0 + 1e-12) + 1e-15:
                        if fabs(sigma * col[i]) > best_mag:
                            best_mag = fabs(sigma * col[i])
                            r = i
            t_star = t[r]
            v_old = lo[e] if vstat[e] == AT_LOWER else hi[e]
            for i in range(m):
                xB[i] -= (sigma * t_star) * col[i]
            leave = basis[r]
            vstat[leave] = AT_LOWER if sigma * col[r] > 0 else AT_UPPER
            piv = T[r, e]
            for jj in range(N):
                T[r, jj] /= piv
            for i in range(m):
                if i == r:
                    continue
                fac = T[i, e]
                if fac != 0.0:
                    for jj in range(N):
                        T[i, jj] -= fac * T[r, jj]
            d_e = d[e]
            for jj in range(N):
                d[jj] -= d_e * T[r, jj]
            basis[r] = e
            vstat[e] = BASIC
            xB[r] = v_old + sigma * t_star
            improvement = fabs(d_e) * t_star

        if improvement <= _DEGEN_EPS:
            streak += 1
        else:
            streak = 0
        iters += 1
    return ITER_LIMIT, iters

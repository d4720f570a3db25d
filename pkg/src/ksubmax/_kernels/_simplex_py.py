"""Pure-NumPy pivot loop for the bounded-variable primal simplex.

This is the fallback twin of the compiled kernel in ``_simplex_cy.pyx``;
both implement the same iteration with identical pivot selection and
tie-breaking so that either can drive the LP layer.

State passed in (all mutated in place):
  T      (m, N) dense tableau, rows = constraints, columns = all variables
  xB     (m,)   current values of the basic variables
  d      (N,)   reduced costs of the maximization objective
  basis  (m,)   variable index basic in each row
  vstat  (N,)   AT_LOWER / AT_UPPER for nonbasic variables, BASIC otherwise
  lo, hi (N,)   variable bounds; lo finite, hi may be +inf

Entering: Dantzig (largest reduced-cost improvement, first index on ties)
until `bland_after` consecutive degenerate steps, then Bland (lowest
eligible index).  Leaving: minimum ratio; ties go to the largest pivot
magnitude under Dantzig and to the lowest basic variable index under
Bland.  Variables with lo == hi never enter.
"""

from __future__ import annotations

import numpy as np

AT_LOWER, AT_UPPER, BASIC = 0, 1, 2

OPTIMAL, ITER_LIMIT, UNBOUNDED = 0, 2, 3

_DEGEN_EPS = 1e-12


def run_simplex(T, xB, d, basis, vstat, lo, hi, tol, bland_after, max_iter):
    """Pivot until no eligible entering variable remains.

    Returns (code, iterations) with code OPTIMAL, ITER_LIMIT or UNBOUNDED.
    """
    m, _ = T.shape
    iters = 0
    streak = 0
    movable = (hi - lo) > 0.0
    while iters < max_iter:
        up = (vstat == AT_LOWER) & (d > tol) & movable
        dn = (vstat == AT_UPPER) & (d < -tol) & movable
        elig = up | dn
        if not elig.any():
            return OPTIMAL, iters
        if streak >= bland_after:
            e = int(np.flatnonzero(elig)[0])
        else:
            score = np.where(up, d, 0.0)
            score = np.where(dn, -d, score)
            e = int(np.argmax(score))
        sigma = 1.0 if vstat[e] == AT_LOWER else -1.0

        col = T[:, e].copy()
        alpha = sigma * col
        t = np.full(m, np.inf)
        pos = alpha > tol
        if pos.any():
            t[pos] = (xB[pos] - lo[basis[pos]]) / alpha[pos]
        neg = alpha < -tol
        if neg.any():
            t[neg] = (hi[basis[neg]] - xB[neg]) / (-alpha[neg])
        np.maximum(t, 0.0, out=t)
        t_rows = float(t.min()) if m else np.inf
        t_bound = hi[e] - lo[e]

        if t_bound <= t_rows:
            if not np.isfinite(t_bound):
                return UNBOUNDED, iters
            # bound flip, no basis change
            xB -= (sigma * t_bound) * col
            vstat[e] = AT_UPPER if vstat[e] == AT_LOWER else AT_LOWER
            improvement = abs(d[e]) * t_bound
        else:
            if not np.isfinite(t_rows):
                return UNBOUNDED, iters
            cand = t <= t_rows * (1.0 + 1e-12) + 1e-15
            if streak >= bland_after:
                rows = np.flatnonzero(cand)
                r = int(rows[np.argmin(basis[rows])])
            else:
                mag = np.where(cand, np.abs(alpha), -1.0)
                r = int(np.argmax(mag))
            t_star = float(t[r])
            v_old = lo[e] if vstat[e] == AT_LOWER else hi[e]
            xB -= (sigma * t_star) * col
            leave = int(basis[r])
            vstat[leave] = AT_LOWER if alpha[r] > 0 else AT_UPPER
            piv = T[r, e]
            T[r, :] /= piv
            facs = T[:, e].copy()
            facs[r] = 0.0
            T -= np.outer(facs, T[r, :])
            d_e = d[e]
            d -= d_e * T[r, :]
            basis[r] = e
            vstat[e] = BASIC
            xB[r] = v_old + sigma * t_star
            improvement = abs(d_e) * t_star

        streak = streak + 1 if improvement <= _DEGEN_EPS else 0
        iters += 1
    return ITER_LIMIT, iters

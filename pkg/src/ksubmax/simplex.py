"""Bounded-variable primal simplex on a dense tableau.

Solves  max c.z  subject to  A z <= b  and  lo <= z <= hi, with every
lower bound finite and upper bounds possibly infinite.  A slack basis
starts phase 2 directly when the all-lower-bounds point satisfies the
rows; otherwise phase 1 drives artificial variables out first.  The
pivot loop itself lives in a kernel (compiled or pure NumPy) selected
at import time.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from ._kernels import AT_LOWER, AT_UPPER, BASIC, ITER_LIMIT, UNBOUNDED

__all__ = ["LpResult", "solve_bounded_lp"]


@dataclass
class LpResult:
    status: str  # optimal | infeasible | unbounded | iteration_limit
    z: np.ndarray | None
    obj: float
    iterations: int


def _reduced_costs(T: np.ndarray, basis: np.ndarray, c_full: np.ndarray) -> np.ndarray:
    return c_full - T.T @ c_full[basis]


def _degenerate_pivot(T, xB, basis, vstat, lo_f, hi_f, r: int, e: int) -> None:
    """Swap variable e into row r without moving any variable values."""
    v_old = lo_f[e] if vstat[e] == AT_LOWER else hi_f[e]
    leave = int(basis[r])
    vstat[leave] = AT_LOWER
    piv = T[r, e]
    T[r, :] /= piv
    facs = T[:, e].copy()
    facs[r] = 0.0
    T -= np.outer(facs, T[r, :])
    basis[r] = e
    vstat[e] = BASIC
    xB[r] = v_old


def solve_bounded_lp(
    A: np.ndarray,
    b: np.ndarray,
    c: np.ndarray,
    lo: np.ndarray,
    hi: np.ndarray,
    *,
    tol: float = 1e-9,
    feas_tol: float = 1e-7,
    bland_after: int = 40,
    max_iter: int = 200000,
    kernel=None,
) -> LpResult:
    if kernel is None:
        kernel = _kernels.active_kernel()
    A = np.ascontiguousarray(A, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    m, n = A.shape
    if not np.isfinite(lo).all():
        raise ValueError("all lower bounds must be finite")
    if (hi < lo).any():
        raise ValueError("upper bound below lower bound")

    T = np.hstack([A, np.eye(m)])
    lo_f = np.concatenate([lo, np.zeros(m)])
    hi_f = np.concatenate([hi, np.full(m, np.inf)])
    vstat = np.full(n + m, AT_LOWER, dtype=np.int8)
    basis = np.arange(n, n + m, dtype=np.int64)
    vstat[basis] = BASIC
    xB = b - A @ lo
    total_iters = 0

    neg = xB < -tol
    if neg.any():
        T[neg, :] *= -1.0
        xB[neg] *= -1.0
        rows = np.flatnonzero(neg)
        n_art = len(rows)
        E = np.zeros((m, n_art))
        E[rows, np.arange(n_art)] = 1.0
        slack_out = basis[rows]
        T = np.ascontiguousarray(np.hstack([T, E]))
        lo_f = np.concatenate([lo_f, np.zeros(n_art)])
        hi_f = np.concatenate([hi_f, np.full(n_art, np.inf)])
        vstat = np.concatenate([vstat, np.full(n_art, BASIC, dtype=np.int8)])
        art_start = n + m
        vstat[slack_out] = AT_LOWER
        basis[rows] = art_start + np.arange(n_art)

        c1 = np.zeros(n + m + n_art)
        c1[art_start:] = -1.0
        d = _reduced_costs(T, basis, c1)
        code, iters = kernel.run_simplex(
            T, xB, d, basis, vstat, lo_f, hi_f, tol, bland_after, max_iter
        )
        total_iters += iters
        if code == ITER_LIMIT:
            return LpResult("iteration_limit", None, np.nan, total_iters)
        if code == UNBOUNDED:
            raise RuntimeError("phase-1 objective reported unbounded")
        art_basic = basis >= art_start
        infeas = float(xB[art_basic].sum()) if art_basic.any() else 0.0
        if infeas > feas_tol:
            return LpResult("infeasible", None, np.nan, total_iters)
        # pivot surviving artificials out; rows with no real pivot are redundant
        for r in np.flatnonzero(art_basic):
            row = np.abs(T[r, : n + m])
            row[vstat[: n + m] == BASIC] = 0.0
            e = int(np.argmax(row))
            if row[e] > 1e-7:
                _degenerate_pivot(T, xB, basis, vstat, lo_f, hi_f, r, e)
        lo_f[art_start:] = 0.0
        hi_f[art_start:] = 0.0

    c_full = np.zeros(T.shape[1])
    c_full[:n] = c
    d = _reduced_costs(T, basis, c_full)
    code, iters = kernel.run_simplex(
        T, xB, d, basis, vstat, lo_f, hi_f, tol, bland_after, max_iter
    )
    total_iters += iters
    if code == ITER_LIMIT:
        return LpResult("iteration_limit", None, np.nan, total_iters)
    if code == UNBOUNDED:
        return LpResult("unbounded", None, np.inf, total_iters)

    vals = np.where(vstat == AT_UPPER, hi_f, lo_f)
    vals[basis] = xB
    z = vals[:n].copy()
    return LpResult("optimal", z, float(c @ z), total_iters)

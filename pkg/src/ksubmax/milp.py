"""Master-problem engine: bounded-variable LP plus branch and bound.

The master maximizes the scalar eta over a growing pool of hypograph
cuts, side constraints on the binary placement variables, and the box
x in [0,1]^{kn}.  Branch and bound explores the binary x variables with
best-bound node selection and most-fractional branching; every node LP
is solved from scratch, which is cheap at the problem sizes this engine
is built for (a few hundred columns).

Variable layout: x flat index (q-1)*n + (e-1), then eta last.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .cuts import Cut
from .ksets import CharVector, GroundSet
from .simplex import solve_bounded_lp

__all__ = [
    "LinearConstraint",
    "MasterProblem",
    "BBResult",
    "TimeLimitReached",
]

_SENSES = ("<=", ">=", "==")


@dataclass(frozen=True)
class LinearConstraint:
    """Sparse row over the placement variables, keyed by (subset, element)."""

    coeffs: Mapping[tuple[int, int], float]
    sense: str
    rhs: float

    def __post_init__(self) -> None:
        if self.sense not in _SENSES:
            raise ValueError(f"sense must be one of {_SENSES}, got {self.sense!r}")
        if not self.coeffs:
            raise ValueError("constraint needs at least one coefficient")
        for coef in self.coeffs.values():
            if not np.isfinite(coef):
                raise ValueError("constraint coefficients must be finite")


@dataclass
class BBResult:
    status: str  # optimal | infeasible | node_limit
    x: CharVector | None
    eta: float
    nodes: int


class TimeLimitReached(Exception):
    """Raised when branch and bound runs past its deadline."""

    def __init__(self, nodes: int) -> None:
        super().__init__("branch-and-bound deadline exceeded")
        self.nodes = nodes


class MasterProblem:
    def __init__(
        self,
        ground: GroundSet,
        *,
        eta_lower: float,
        side_constraints: Iterable[LinearConstraint] = (),
    ) -> None:
        if not np.isfinite(eta_lower):
            raise ValueError("eta needs a finite lower bound")
        self.ground = ground
        self.eta_lower = float(eta_lower)
        self.cuts: list[Cut] = []
        self.side_constraints: list[LinearConstraint] = []
        for row in side_constraints:
            self._check_row(row)
            self.side_constraints.append(row)

    @property
    def num_x(self) -> int:
        return self.ground.num_vars

    @property
    def eta_col(self) -> int:
        return self.ground.num_vars

    def _check_row(self, row: LinearConstraint) -> None:
        for q, e in row.coeffs:
            self.ground.flat_index(q, e)

    def add_cut(self, cut: Cut) -> "MasterProblem":
        if cut.source.ground != self.ground:
            raise ValueError("cut over a different ground set")
        self.cuts.append(cut)
        return self

    def _rows(self) -> tuple[np.ndarray, np.ndarray]:
        """Dense (A, b) with all rows as <=; equalities become two rows."""
        if not self.cuts:
            raise ValueError("cut pool is empty; seed the master first")
        nv = self.num_x + 1
        rows: list[np.ndarray] = []
        rhs: list[float] = []
        for cut in self.cuts:
            row = np.zeros(nv)
            row[: self.num_x] = -cut.flat_coeffs()
            row[self.eta_col] = 1.0
            rows.append(row)
            rhs.append(cut.c0)
        for con in self.side_constraints:
            row = np.zeros(nv)
            for (q, e), coef in con.coeffs.items():
                row[self.ground.flat_index(q, e)] = coef
            if con.sense == "<=":
                rows.append(row)
                rhs.append(con.rhs)
            elif con.sense == ">=":
                rows.append(-row)
                rhs.append(-con.rhs)
            else:
                rows.append(row)
                rhs.append(con.rhs)
                rows.append(-row)
                rhs.append(-con.rhs)
        return np.array(rows), np.array(rhs)

    def _objective(self) -> np.ndarray:
        c = np.zeros(self.num_x + 1)
        c[self.eta_col] = 1.0
        return c

    def default_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        lo = np.zeros(self.num_x + 1)
        hi = np.ones(self.num_x + 1)
        lo[self.eta_col] = self.eta_lower
        hi[self.eta_col] = np.inf
        return lo, hi

    def lp_solve(
        self,
        var_lo: np.ndarray | None = None,
        var_hi: np.ndarray | None = None,
        *,
        tol: float = 1e-9,
        kernel=None,
    ) -> tuple[str, np.ndarray | None, float]:
        """LP relaxation: returns (status, x values, eta)."""
        lo, hi = self.default_bounds()
        if var_lo is not None:
            lo[: self.num_x] = var_lo
        if var_hi is not None:
            hi[: self.num_x] = var_hi
        A, b = self._rows()
        res = solve_bounded_lp(A, b, self._objective(), lo, hi, tol=tol, kernel=kernel)
        if res.status == "unbounded":
            raise RuntimeError("master LP unbounded despite a non-empty cut pool")
        if res.status == "iteration_limit":
            raise RuntimeError("simplex hit its iteration limit")
        if res.status != "optimal":
            return res.status, None, np.nan
        return "optimal", res.z[: self.num_x], float(res.z[self.eta_col])

    def bb_solve(
        self,
        *,
        int_tol: float = 1e-6,
        lp_tol: float = 1e-9,
        node_limit: int | None = None,
        deadline: float | None = None,
        warm_start: tuple[np.ndarray, float] | None = None,
        kernel=None,
    ) -> BBResult:
        """Globally optimal binary solution of the current master.

        warm_start supplies a known feasible (x, objective) pair, typically
        the caller's incumbent; it seeds the pruning bound and is returned
        unchanged when nothing beats it.
        """
        A, b = self._rows()
        c = self._objective()
        lo0, hi0 = self.default_bounds()
        nx = self.num_x

        best_x: np.ndarray | None = None
        best_obj = -np.inf
        if warm_start is not None:
            best_x = np.asarray(warm_start[0], dtype=float).copy()
            best_obj = float(warm_start[1])
        nodes = 0
        counter = 0
        heap: list[tuple[float, int, np.ndarray, np.ndarray]] = []
        heapq.heappush(heap, (-np.inf, counter, lo0, hi0))

        while heap:
            neg_bound, _, lo, hi = heapq.heappop(heap)
            if -neg_bound <= best_obj + 1e-9:
                break
            if deadline is not None and time.monotonic() > deadline:
                raise TimeLimitReached(nodes)
            if node_limit is not None and nodes >= node_limit:
                return BBResult("node_limit", self._wrap(best_x), best_obj, nodes)
            res = solve_bounded_lp(A, b, c, lo, hi, tol=lp_tol, kernel=kernel)
            nodes += 1
            if res.status == "infeasible":
                continue
            if res.status != "optimal":
                raise RuntimeError(f"node LP ended with status {res.status}")
            if res.obj <= best_obj + 1e-9:
                continue
            xvals = res.z[:nx]
            frac = np.minimum(xvals - np.floor(xvals), np.ceil(xvals) - xvals)
            j = int(np.argmax(frac))
            if frac[j] <= int_tol:
                best_x = np.round(xvals)
                best_obj = float(res.obj)
                continue
            for branch_hi in (0.0, 1.0):
                lo_c, hi_c = lo.copy(), hi.copy()
                if branch_hi == 0.0:
                    hi_c[j] = 0.0
                else:
                    lo_c[j] = 1.0
                counter += 1
                heapq.heappush(heap, (-res.obj, counter, lo_c, hi_c))

        if best_x is None:
            return BBResult("infeasible", None, np.nan, nodes)
        return BBResult("optimal", self._wrap(best_x), best_obj, nodes)

    def _wrap(self, x: np.ndarray | None) -> CharVector | None:
        if x is None:
            return None
        return CharVector(self.ground, x.astype(np.int8))

    def dump_lp(self) -> str:
        """LP-format text of the current master for external cross-checks."""
        n, k = self.ground.n, self.ground.k

        def var_name(col: int) -> str:
            if col == self.eta_col:
                return "eta"
            q, e = divmod(col, n)
            return f"x_{q + 1}_{e + 1}"

        def term(coef: float, name: str) -> str:
            sign = "+" if coef >= 0 else "-"
            return f"{sign} {abs(coef):.12g} {name}"

        lines = ["Maximize", " obj: eta", "Subject To"]
        A, b = self._rows()
        for i, (row, rhs) in enumerate(zip(A, b)):
            terms = " ".join(
                term(row[j], var_name(j)) for j in range(len(row)) if row[j] != 0
            )
            lines.append(f" r{i}: {terms} <= {rhs:.12g}")
        lines.append("Bounds")
        for col in range(self.num_x):
            lines.append(f" 0 <= {var_name(col)} <= 1")
        lines.append(f" eta >= {self.eta_lower:.12g}")
        lines.append("Binary")
        lines.append(" " + " ".join(var_name(col) for col in range(self.num_x)))
        lines.append("End")
        return "\n".join(lines) + "\n"

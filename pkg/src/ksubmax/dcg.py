"""Delayed constraint generation: the exact maximization loop.

Each iteration solves the current master to binary optimality, giving
an upper bound, evaluates the oracle at the master's placement for a
lower bound, and, when the master overestimates, adds the hypograph cut
generated at that placement.  The loop stops once the relative gap
(UB - LB)/UB drops to epsilon, falling back to an absolute test when
UB is non-positive, or at the time limit.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .cuts import build_cut_general, build_cut_monotone, rho_empty_table
from .ksets import GroundSet, KSet, from_char_vector, to_char_vector
from .milp import LinearConstraint, MasterProblem, TimeLimitReached
from .oracles import ValueOracle, xi_bound, xi_exact_all
from .verify import InfeasibleRegionError

__all__ = [
    "FeasibleRegion",
    "DcgConfig",
    "SolveReport",
    "compile_region",
    "region_admits",
    "solve",
    "relative_gap",
]


@dataclass(frozen=True)
class FeasibleRegion:
    """Cardinality limits plus arbitrary extra linear rows.

    Disjointness (one subset per element) is always enforced; per-type
    bounds cap each subset's size and total_bound caps the number of
    assigned elements.
    """

    per_type_bounds: tuple[int, ...] | None = None
    total_bound: int | None = None
    extra_linear: tuple[LinearConstraint, ...] = ()

    def __post_init__(self) -> None:
        if self.per_type_bounds is not None:
            object.__setattr__(self, "per_type_bounds", tuple(self.per_type_bounds))
            if any(b < 0 for b in self.per_type_bounds):
                raise ValueError("per-type bounds must be non-negative")
        if self.total_bound is not None and self.total_bound < 0:
            raise ValueError("total bound must be non-negative")
        object.__setattr__(self, "extra_linear", tuple(self.extra_linear))


def compile_region(region: FeasibleRegion, ground: GroundSet) -> list[LinearConstraint]:
    """Rows of the master: disjointness always, bounds when present,
    extras verbatim."""
    rows: list[LinearConstraint] = []
    for e in range(1, ground.n + 1):
        rows.append(
            LinearConstraint(
                {(q, e): 1.0 for q in range(1, ground.k + 1)}, "<=", 1.0
            )
        )
    if region.per_type_bounds is not None:
        if len(region.per_type_bounds) != ground.k:
            raise ValueError(
                f"expected {ground.k} per-type bounds, got {len(region.per_type_bounds)}"
            )
        for q in range(1, ground.k + 1):
            rows.append(
                LinearConstraint(
                    {(q, e): 1.0 for e in range(1, ground.n + 1)},
                    "<=",
                    float(region.per_type_bounds[q - 1]),
                )
            )
    if region.total_bound is not None:
        rows.append(
            LinearConstraint(
                {
                    (q, e): 1.0
                    for q in range(1, ground.k + 1)
                    for e in range(1, ground.n + 1)
                },
                "<=",
                float(region.total_bound),
            )
        )
    for extra in region.extra_linear:
        for q, e in extra.coeffs:
            ground.flat_index(q, e)  # dimension check
        rows.append(extra)
    return rows


def region_admits(
    region: FeasibleRegion, s: KSet, *, cardinality_checked: bool = False
) -> bool:
    """Membership test used by enumeration; mirrors compile_region."""
    if not cardinality_checked:
        sizes = [0] * s.ground.k
        for lab in s.labels:
            if lab:
                sizes[lab - 1] += 1
        if region.per_type_bounds is not None and any(
            sz > b for sz, b in zip(sizes, region.per_type_bounds)
        ):
            return False
        if region.total_bound is not None and sum(sizes) > region.total_bound:
            return False
    for row in region.extra_linear:
        lhs = sum(coef for (q, e), coef in row.coeffs.items() if s.label_of(e) == q)
        if row.sense == "<=" and lhs > row.rhs + 1e-9:
            return False
        if row.sense == ">=" and lhs < row.rhs - 1e-9:
            return False
        if row.sense == "==" and abs(lhs - row.rhs) > 1e-9:
            return False
    return True


@dataclass(frozen=True)
class DcgConfig:
    epsilon: float = 1e-6
    time_limit: float = 3600.0
    xi_policy: str = "auto"  # auto | exact | zeta
    cut_violation_tol: float = 1e-9
    lp_tol: float = 1e-9
    int_tol: float = 1e-6
    xi_cap: int = 32768
    max_iterations: int = 1_000_000
    seed_cuts: tuple[KSet, ...] | None = None

    def __post_init__(self) -> None:
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.time_limit <= 0:
            raise ValueError("time limit must be positive")
        if self.xi_policy not in ("auto", "exact", "zeta"):
            raise ValueError(f"unknown xi policy {self.xi_policy!r}")

    def resolved(self, oracle: ValueOracle) -> dict:
        """Echo of the configuration as actually applied to this oracle."""
        return {
            "epsilon": self.epsilon,
            "time_limit": self.time_limit,
            "xi_policy": self.xi_policy,
            "xi_policy_effective": _effective_xi_policy(self, oracle),
            "cut_violation_tol": self.cut_violation_tol,
            "lp_tol": self.lp_tol,
            "int_tol": self.int_tol,
            "xi_cap": self.xi_cap,
        }


@dataclass
class SolveReport:
    status: str  # optimal | gap_limit | time_limit
    incumbent: KSet
    lb: float
    ub: float
    gap: float
    cuts_added: int
    total_bb_nodes: int
    wall_time: float
    iterations: int
    trajectory: list[tuple[int, float, float]] = field(default_factory=list)

    def to_dict(self) -> dict:
        def fin(v: float):
            return v if math.isfinite(v) else None  # strict-JSON friendly

        return {
            "status": self.status,
            "incumbent": list(self.incumbent.labels),
            "incumbent_notation": str(self.incumbent),
            "lb": fin(self.lb),
            "ub": fin(self.ub),
            "gap": fin(self.gap),
            "cuts_added": self.cuts_added,
            "total_bb_nodes": self.total_bb_nodes,
            "wall_time": self.wall_time,
            "iterations": self.iterations,
            "trajectory": [[it, lb, ub] for it, lb, ub in self.trajectory],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def csv_row(self, n: int, t: int | None, bounds: Sequence[int] | None) -> str:
        """One line matching the benchmark table columns."""
        b_txt = ";".join(str(b) for b in bounds) if bounds else ""
        t_txt = "" if t is None else str(t)
        gap_txt = f"{self.gap:.3e}" if math.isfinite(self.gap) else ""
        return (
            f"{n},{t_txt},{b_txt},{self.wall_time:.3f},"
            f"{self.cuts_added},{self.total_bb_nodes},{gap_txt}"
        )


def relative_gap(ub: float, lb: float) -> float:
    """(UB - LB)/UB, switching to a scaled absolute gap when UB <= 0."""
    if ub == math.inf or lb == -math.inf:
        return math.inf
    if ub > 0:
        return (ub - lb) / ub
    return (ub - lb) / max(1.0, abs(ub))


def _effective_xi_policy(config: DcgConfig, oracle: ValueOracle) -> str:
    if oracle.monotone:
        return "none"
    if config.xi_policy == "exact":
        return "exact"
    if config.xi_policy == "zeta":
        return "zeta"
    ground = oracle.ground
    affordable = ground.k ** (ground.n - 1) <= config.xi_cap
    return "exact" if (oracle.cheap_eval and affordable) else "zeta"


def _resolve_xi(config: DcgConfig, oracle: ValueOracle) -> np.ndarray | None:
    policy = _effective_xi_policy(config, oracle)
    if policy == "none":
        return None
    if policy == "exact":
        return xi_exact_all(oracle, cap=config.xi_cap)
    ground = oracle.ground
    return np.full((ground.k, ground.n), xi_bound(oracle))


def solve(
    oracle: ValueOracle,
    region: FeasibleRegion,
    config: DcgConfig | None = None,
) -> SolveReport:
    """Run the constraint-generation loop to provable optimality.

    Raises InfeasibleRegionError when no placement satisfies the region.
    """
    config = config or DcgConfig()
    ground = oracle.ground
    start = time.monotonic()
    deadline = start + config.time_limit

    xi = _resolve_xi(config, oracle)
    rho_empty = rho_empty_table(oracle)

    def make_cut(s: KSet):
        if oracle.monotone:
            return build_cut_monotone(oracle, s, rho_empty=rho_empty)
        return build_cut_general(oracle, s, xi, rho_empty=rho_empty)

    master = MasterProblem(
        ground,
        eta_lower=oracle.value_lower,
        side_constraints=compile_region(region, ground),
    )
    seeds = config.seed_cuts if config.seed_cuts else (KSet.empty(ground),)
    for s in seeds:
        master.add_cut(make_cut(s))

    lb, ub = -math.inf, math.inf
    incumbent: KSet | None = None
    empty = KSet.empty(ground)
    if region_admits(region, empty):
        incumbent = empty
        lb = oracle.eval(empty)
    trajectory: list[tuple[int, float, float]] = []
    cuts_added = 0
    total_nodes = 0
    status = "gap_limit"
    iteration = 0

    while iteration < config.max_iterations:
        iteration += 1
        warm = None
        if incumbent is not None:
            # the incumbent is master-feasible; its master value seeds the
            # branch-and-bound pruning bound
            x_w = to_char_vector(incumbent).x.astype(float)
            obj_w = min(cut.c0 + cut.flat_coeffs() @ x_w for cut in master.cuts)
            if obj_w >= master.eta_lower:
                warm = (x_w, obj_w)
        try:
            res = master.bb_solve(
                int_tol=config.int_tol,
                lp_tol=config.lp_tol,
                deadline=deadline,
                warm_start=warm,
            )
        except TimeLimitReached as hit:
            total_nodes += hit.nodes
            status = "time_limit"
            iteration -= 1
            break
        total_nodes += res.nodes
        if res.status == "infeasible":
            raise InfeasibleRegionError("master problem is infeasible")
        eta_bar = res.eta
        assert eta_bar <= ub + 1e-9, "master bound increased as the pool grew"
        ub = min(ub, eta_bar)
        x_bar = from_char_vector(res.x)
        fx = oracle.eval(x_bar)
        violated = eta_bar > fx + config.cut_violation_tol
        if violated:
            master.add_cut(make_cut(x_bar))
            cuts_added += 1
        if fx > lb:
            lb = fx
            incumbent = x_bar
        trajectory.append((iteration, lb, ub))
        if relative_gap(ub, lb) <= config.epsilon:
            status = "optimal"
            break
        if time.monotonic() > deadline:
            status = "time_limit"
            break
        if not violated:
            # the master cannot change any further; the remaining gap is
            # below the cut tolerance but above epsilon
            status = "gap_limit"
            break

    if incumbent is None:
        raise RuntimeError("time limit reached before any feasible placement")
    return SolveReport(
        status=status,
        incumbent=incumbent,
        lb=lb,
        ub=ub,
        gap=max(0.0, relative_gap(ub, lb)),
        cuts_added=cuts_added,
        total_bb_nodes=total_nodes,
        wall_time=time.monotonic() - start,
        iterations=iteration,
        trajectory=trajectory,
    )

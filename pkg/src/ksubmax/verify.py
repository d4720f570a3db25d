"""Certification suite: k-submodularity checkers, exhaustive search,
and feasible-solution counting.

The checkers enumerate exactly below a size guard and fall back to
randomized sampling above it; every reported witness re-evaluates as a
genuine violation of the checked inequality.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from typing import Any, Iterator, Sequence

import numpy as np

from .ksets import GroundSet, KSet, join, meet
from .oracles import ValueOracle

__all__ = [
    "VerificationReport",
    "ESResult",
    "InfeasibleRegionError",
    "check_k_submodular",
    "check_k_submodular_marginals",
    "check_monotone",
    "exhaustive_max",
    "count_exact_feasible",
    "count_feasible_upto",
    "iter_feasible_labels",
]

TOL = 1e-9
DEFAULT_CAP = 4096
DEFAULT_SAMPLES = 20000


class InfeasibleRegionError(ValueError):
    """No k-set satisfies the requested constraints."""


@dataclass
class VerificationReport:
    passed: bool
    witness: dict[str, Any] | None
    checked_pairs: int
    sampled: bool = False

    def to_json(self) -> str:
        return json.dumps(
            {
                "passed": self.passed,
                "witness": self.witness,
                "checked_pairs": self.checked_pairs,
                "sampled": self.sampled,
            }
        )


@dataclass
class ESResult:
    """Exhaustive-search outcome; `complete` is False when the evaluation
    budget ran out and `value` is only the best seen so far."""

    kset: KSet
    value: float
    evaluations: int
    complete: bool


def _radix_weights(ground: GroundSet) -> np.ndarray:
    # lexicographic rank of a label vector, first element most significant
    base = ground.k + 1
    return np.array([base ** (ground.n - 1 - j) for j in range(ground.n)], dtype=np.int64)


def _all_labels(ground: GroundSet) -> np.ndarray:
    combos = itertools.product(range(ground.k + 1), repeat=ground.n)
    return np.array(list(combos), dtype=np.int64)


def _all_values(oracle: ValueOracle, labels: np.ndarray) -> np.ndarray:
    ground = oracle.ground
    return np.array(
        [oracle.eval(KSet(ground, tuple(int(v) for v in row))) for row in labels]
    )


def _meet_join_rows(a: np.ndarray, rows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    same = rows == a
    meets = np.where(same, rows, 0)
    joins = np.where(same, rows, np.where(a == 0, rows, np.where(rows == 0, a, 0)))
    return meets, joins


def check_k_submodular(
    oracle: ValueOracle,
    *,
    cap: int = DEFAULT_CAP,
    samples: int = DEFAULT_SAMPLES,
    rng: np.random.Generator | None = None,
) -> VerificationReport:
    """Meet/join inequality over all unordered pairs of k-sets.

    Above the cap of (k+1)^n enumerable k-sets the pairs are sampled
    instead and the report is marked accordingly.
    """
    ground = oracle.ground
    size = (ground.k + 1) ** ground.n
    if size <= cap:
        labels = _all_labels(ground)
        values = _all_values(oracle, labels)
        weights = _radix_weights(ground)
        checked = 0
        for ix in range(size):
            a = labels[ix]
            rows = labels[ix:]
            meets, joins = _meet_join_rows(a, rows)
            lhs = values[ix] + values[ix:]
            rhs = values[meets @ weights] + values[joins @ weights]
            checked += len(rows)
            bad = np.flatnonzero(lhs < rhs - TOL)
            if len(bad):
                iy = ix + int(bad[0])
                return VerificationReport(
                    False, _pair_witness(labels[ix], labels[iy]), checked
                )
        return VerificationReport(True, None, checked)

    rng = rng or np.random.default_rng(0)
    checked = 0
    for _ in range(samples):
        x = KSet(ground, tuple(int(v) for v in rng.integers(0, ground.k + 1, ground.n)))
        y = KSet(ground, tuple(int(v) for v in rng.integers(0, ground.k + 1, ground.n)))
        checked += 1
        lhs = oracle.eval(x) + oracle.eval(y)
        rhs = oracle.eval(meet(x, y)) + oracle.eval(join(x, y))
        if lhs < rhs - TOL:
            return VerificationReport(
                False,
                _pair_witness(np.array(x.labels), np.array(y.labels)),
                checked,
                sampled=True,
            )
    return VerificationReport(True, None, checked, sampled=True)


def _pair_witness(la, lb) -> dict[str, Any]:
    return {
        "kind": "pair",
        "x": [int(v) for v in la],
        "y": [int(v) for v in lb],
    }


def check_k_submodular_marginals(
    oracle: ValueOracle,
    *,
    cap: int = DEFAULT_CAP,
    samples: int = DEFAULT_SAMPLES,
    rng: np.random.Generator | None = None,
) -> VerificationReport:
    """Equivalent two-part characterization: the function restricted to any
    full assignment is submodular, and for an unassigned element the
    marginals into two different subsets never sum negative."""
    ground = oracle.ground
    size = (ground.k + 1) ** ground.n
    if size > cap:
        return _marginals_sampled(oracle, samples, rng or np.random.default_rng(0))
    labels = _all_labels(ground)
    values = _all_values(oracle, labels)
    weights = _radix_weights(ground)
    checked = 0

    # part 1: submodularity over every full assignment, via the local
    # two-element exchange characterization
    n, k = ground.n, ground.k
    masks = np.array(
        [[(b >> (n - 1 - j)) & 1 for j in range(n)] for b in range(2**n)], dtype=np.int64
    )
    for part in itertools.product(range(1, k + 1), repeat=n):
        part_arr = np.array(part, dtype=np.int64)
        sub_vals = values[(masks * part_arr) @ weights]
        for i in range(n):
            for j in range(i + 1, n):
                free = (masks[:, i] == 0) & (masks[:, j] == 0)
                base = np.flatnonzero(free)
                idx_x = base
                idx_xi = base + 2 ** (n - 1 - i)
                idx_xj = base + 2 ** (n - 1 - j)
                idx_xij = idx_xi + 2 ** (n - 1 - j)
                checked += len(base)
                viol = (
                    sub_vals[idx_xi] + sub_vals[idx_xj]
                    < sub_vals[idx_xij] + sub_vals[idx_x] - TOL
                )
                bad = np.flatnonzero(viol)
                if len(bad):
                    b = int(base[bad[0]])
                    return VerificationReport(
                        False,
                        {
                            "kind": "partition_submodularity",
                            "partition": list(part),
                            "base_set": [int(v) for v in masks[b]],
                            "i": i + 1,
                            "j": j + 1,
                        },
                        checked,
                    )

    # part 2: pairwise marginal sums for unassigned elements
    for ix in range(size):
        la = labels[ix]
        for e0 in range(n):
            if la[e0] != 0:
                continue
            stride = (k + 1) ** (n - 1 - e0)
            base_idx = ix
            rho = [
                values[base_idx + q * stride] - values[base_idx] for q in range(1, k + 1)
            ]
            for q in range(k):
                for qq in range(q + 1, k):
                    checked += 1
                    if rho[q] + rho[qq] < -TOL:
                        return VerificationReport(
                            False,
                            {
                                "kind": "marginal_pair",
                                "x": [int(v) for v in la],
                                "element": e0 + 1,
                                "q": q + 1,
                                "q_prime": qq + 1,
                            },
                            checked,
                        )
    return VerificationReport(True, None, checked)


def _marginals_sampled(
    oracle: ValueOracle, samples: int, rng: np.random.Generator
) -> VerificationReport:
    """Randomized twin of the exhaustive check: alternates between local
    submodularity on a random full assignment and pairwise marginal sums."""
    ground = oracle.ground
    n, k = ground.n, ground.k
    checked = 0
    for trial in range(samples):
        if trial % 2 == 0 and n >= 2:
            part = [int(v) for v in rng.integers(1, k + 1, n)]
            mask = rng.random(n) < 0.5
            i, j = (int(v) for v in rng.choice(n, size=2, replace=False))
            mask[i] = mask[j] = False

            def fhat(extra):
                labels = tuple(
                    part[e0] if (mask[e0] or e0 in extra) else 0 for e0 in range(n)
                )
                return oracle.eval(KSet(ground, labels))

            checked += 1
            if fhat({i}) + fhat({j}) < fhat({i, j}) + fhat(set()) - TOL:
                return VerificationReport(
                    False,
                    {
                        "kind": "partition_submodularity",
                        "partition": part,
                        "base_set": [int(v) for v in mask],
                        "i": i + 1,
                        "j": j + 1,
                    },
                    checked,
                    sampled=True,
                )
            continue
        if k < 2:
            continue
        labels = [int(v) for v in rng.integers(0, k + 1, n)]
        s = KSet(ground, tuple(labels))
        free = s.unassigned()
        if not free:
            continue
        e = int(rng.choice(free))
        q, qq = rng.choice(k, size=2, replace=False) + 1
        checked += 1
        if oracle.marginal(s, int(q), e) + oracle.marginal(s, int(qq), e) < -TOL:
            return VerificationReport(
                False,
                {
                    "kind": "marginal_pair",
                    "x": labels,
                    "element": e,
                    "q": int(q),
                    "q_prime": int(qq),
                },
                checked,
                sampled=True,
            )
    return VerificationReport(True, None, checked, sampled=True)


def check_monotone(
    oracle: ValueOracle,
    *,
    cap: int = DEFAULT_CAP,
    samples: int = DEFAULT_SAMPLES,
    rng: np.random.Generator | None = None,
) -> VerificationReport:
    """Every single-element addition must not decrease the value."""
    ground = oracle.ground
    size = (ground.k + 1) ** ground.n
    n, k = ground.n, ground.k
    if size <= cap:
        labels = _all_labels(ground)
        values = _all_values(oracle, labels)
        checked = 0
        for ix in range(size):
            la = labels[ix]
            for e0 in range(n):
                if la[e0] != 0:
                    continue
                stride = (k + 1) ** (n - 1 - e0)
                for q in range(1, k + 1):
                    checked += 1
                    if values[ix + q * stride] < values[ix] - TOL:
                        return VerificationReport(
                            False,
                            {
                                "kind": "negative_marginal",
                                "x": [int(v) for v in la],
                                "element": e0 + 1,
                                "q": q,
                            },
                            checked,
                        )
        return VerificationReport(True, None, checked)

    rng = rng or np.random.default_rng(0)
    checked = 0
    for _ in range(samples):
        s = KSet(ground, tuple(int(v) for v in rng.integers(0, k + 1, n)))
        free = s.unassigned()
        if not free:
            continue
        e = int(rng.choice(free))
        q = int(rng.integers(1, k + 1))
        checked += 1
        if oracle.marginal(s, q, e) < -TOL:
            return VerificationReport(
                False,
                {"kind": "negative_marginal", "x": list(s.labels), "element": e, "q": q},
                checked,
                sampled=True,
            )
    return VerificationReport(True, None, checked, sampled=True)


def iter_feasible_labels(ground: GroundSet, region) -> Iterator[KSet]:
    """Label vectors satisfying the cardinality part of a region, in
    lexicographic order, with branches over the bounds pruned early.
    Extra linear rows are checked at the leaves."""
    from .dcg import region_admits  # local import to avoid a cycle

    n, k = ground.n, ground.k
    bounds = region.per_type_bounds
    total = region.total_bound

    def rec(pos: int, labels: list[int], counts: list[int], used: int):
        if pos == n:
            s = KSet(ground, tuple(labels))
            if region_admits(region, s, cardinality_checked=True):
                yield s
            return
        for lab in range(0, k + 1):
            if lab:
                if bounds is not None and counts[lab - 1] + 1 > bounds[lab - 1]:
                    continue
                if total is not None and used + 1 > total:
                    continue
                counts[lab - 1] += 1
                labels[pos] = lab
                yield from rec(pos + 1, labels, counts, used + 1)
                counts[lab - 1] -= 1
                labels[pos] = 0
            else:
                labels[pos] = 0
                yield from rec(pos + 1, labels, counts, used)

    return rec(0, [0] * n, [0] * k, 0)


def exhaustive_max(
    oracle: ValueOracle,
    region,
    *,
    budget: int | None = None,
) -> ESResult:
    """Evaluate every feasible k-set; ties keep the lexicographically
    smallest label vector.  With a budget, stops early and flags the
    result incomplete."""
    best: KSet | None = None
    best_val = -math.inf
    evals = 0
    for s in iter_feasible_labels(oracle.ground, region):
        if budget is not None and evals >= budget:
            if best is None:
                raise ValueError("evaluation budget exhausted before any feasible k-set")
            return ESResult(best, best_val, evals, complete=False)
        val = oracle.eval(s)
        evals += 1
        if val > best_val:
            best, best_val = s, val
    if best is None:
        raise InfeasibleRegionError("no k-set satisfies the region")
    return ESResult(best, best_val, evals, complete=True)


def count_exact_feasible(n: int, k: int, bounds: Sequence[int]) -> int:
    """Number of k-sets whose subset sizes equal the bounds exactly:
    the multinomial n! / (B_1! ... B_k! (n - sum B)!), exact integer."""
    if len(bounds) != k:
        raise ValueError(f"expected {k} bounds, got {len(bounds)}")
    if any(b < 0 for b in bounds):
        raise ValueError("bounds must be non-negative")
    rest = n - sum(bounds)
    if rest < 0:
        raise ValueError("bounds sum exceeds the ground set size")
    out = math.factorial(n)
    for b in bounds:
        out //= math.factorial(b)
    return out // math.factorial(rest)


def count_feasible_upto(n: int, k: int, bounds: Sequence[int]) -> int:
    """Number of k-sets with subset sizes at most the bounds."""
    if len(bounds) != k:
        raise ValueError(f"expected {k} bounds, got {len(bounds)}")
    total = 0
    ranges = [range(0, min(b, n) + 1) for b in bounds]
    for sizes in itertools.product(*ranges):
        if sum(sizes) <= n:
            total += count_exact_feasible(n, k, sizes)
    return total

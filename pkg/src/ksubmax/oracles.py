"""Value oracles: evaluatable k-set functions with range metadata.

Every oracle is normalized so the empty k-set evaluates to 0, reports a
declared monotone flag plus finite value bounds, and counts evaluations
(the cost unit the exhaustive-search baseline is measured in).  Oracles
are pure: concurrent eval calls are safe, construction is not.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .ksets import GroundSet, KSet

__all__ = [
    "ValueOracle",
    "ModularOracle",
    "CoverageOracle",
    "TableOracle",
    "EntropyOracle",
    "ObservationMatrix",
    "XiEnumerationError",
    "modular_oracle",
    "coverage_oracle",
    "table_oracle",
    "entropy_oracle",
    "xi_exact",
    "xi_exact_all",
    "xi_bound",
]


class XiEnumerationError(ValueError):
    """Raised when exact removal penalties would need too many partitions."""


class ValueOracle:
    """Base class; subclasses implement `_value(s)`.

    The evaluation counter is a plain int bump, which is adequate under
    the GIL (a lost increment under free threading only skews reporting).
    """

    def __init__(
        self,
        ground: GroundSet,
        *,
        monotone: bool,
        lower: float,
        upper: float,
        cheap: bool = False,
    ) -> None:
        self.ground = ground
        self.monotone = monotone
        self.value_lower = float(lower)
        self.value_upper = float(upper)
        self.cheap_eval = cheap
        self.evaluations = 0

    def eval(self, s: KSet) -> float:
        if s.ground != self.ground:
            raise ValueError(f"k-set over {s.ground}, oracle over {self.ground}")
        self.evaluations += 1
        return self._value(s)

    def _value(self, s: KSet) -> float:
        raise NotImplementedError

    def marginal(self, s: KSet, q: int, e: int) -> float:
        """Gain from adding unassigned element e to subset q of s."""
        if s.label_of(e) != 0:
            raise ValueError(f"element {e} already assigned in {s}")
        return self.eval(s.with_element(e, q)) - self.eval(s)


class ModularOracle(ValueOracle):
    """f(S) = sum of per-(subset, element) weights over assigned elements."""

    def __init__(self, ground: GroundSet, weights: np.ndarray) -> None:
        w = np.asarray(weights, dtype=float)
        if w.shape != (ground.k, ground.n):
            raise ValueError(f"weights shape {w.shape}, expected {(ground.k, ground.n)}")
        if not np.isfinite(w).all():
            raise ValueError("weights must be finite")
        lower = float(np.minimum(w.min(axis=0), 0.0).sum())
        upper = float(np.maximum(w.max(axis=0), 0.0).sum())
        super().__init__(
            ground,
            monotone=bool((w >= 0).all()),
            lower=lower,
            upper=upper,
            cheap=True,
        )
        self.weights = w

    def _value(self, s: KSet) -> float:
        total = 0.0
        for e0, lab in enumerate(s.labels):
            if lab:
                total += self.weights[lab - 1, e0]
        return total


class CoverageOracle(ValueOracle):
    """Weighted coverage of the union of per-assignment cover sets.

    covers[q-1][e-1] lists the 0-based universe items covered when
    element e is placed in subset q.  Monotone by construction.
    """

    def __init__(
        self,
        ground: GroundSet,
        universe_size: int,
        covers: Sequence[Sequence[Iterable[int]]],
        item_weights: Sequence[float] | None = None,
    ) -> None:
        if item_weights is None:
            weights = np.ones(universe_size, dtype=float)
        else:
            weights = np.asarray(item_weights, dtype=float)
        if weights.shape != (universe_size,):
            raise ValueError("item_weights length must equal universe_size")
        if (weights < 0).any():
            raise ValueError("item weights must be non-negative")
        masks = np.zeros((ground.k, ground.n, universe_size), dtype=bool)
        for q0 in range(ground.k):
            for e0 in range(ground.n):
                for item in covers[q0][e0]:
                    if not 0 <= item < universe_size:
                        raise ValueError(f"cover item {item} outside universe")
                    masks[q0, e0, item] = True
        super().__init__(
            ground,
            monotone=True,
            lower=0.0,
            upper=float(weights.sum()),
            cheap=True,
        )
        self.weights = weights
        self.masks = masks

    def _value(self, s: KSet) -> float:
        covered = np.zeros(len(self.weights), dtype=bool)
        for e0, lab in enumerate(s.labels):
            if lab:
                covered |= self.masks[lab - 1, e0]
        return float(self.weights[covered].sum())


class TableOracle(ValueOracle):
    """Explicit storage of all (k+1)^n values, keyed by label vector."""

    def __init__(self, ground: GroundSet, values: Mapping[tuple[int, ...], float]) -> None:
        expected = (ground.k + 1) ** ground.n
        if len(values) != expected:
            raise ValueError(f"table has {len(values)} entries, expected {expected}")
        empty = (0,) * ground.n
        if empty not in values:
            raise ValueError("table missing the empty k-set")
        if abs(values[empty]) > 0:
            raise ValueError("table value at the empty k-set must be 0")
        table = dict(values)
        vals = list(table.values())
        super().__init__(
            ground,
            monotone=_table_is_monotone(ground, table),
            lower=min(vals),
            upper=max(vals),
            cheap=True,
        )
        self.table = table

    def _value(self, s: KSet) -> float:
        try:
            return self.table[s.labels]
        except KeyError:
            raise KeyError(f"table has no entry for {s}") from None


def _table_is_monotone(ground: GroundSet, table: Mapping[tuple[int, ...], float]) -> bool:
    for labels, val in table.items():
        for e0 in range(ground.n):
            if labels[e0] != 0:
                continue
            for q in range(1, ground.k + 1):
                grown = labels[:e0] + (q,) + labels[e0 + 1 :]
                if table[grown] < val - 1e-12:
                    return False
    return True


@dataclass(frozen=True)
class ObservationMatrix:
    """Discretized sensor readings: values[feature][location][sample]."""

    values: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.values)
        if arr.ndim != 3:
            raise ValueError("observations must be a 3-d array")
        if not np.issubdtype(arr.dtype, np.integer):
            arr = arr.astype(np.int64)
            if not (arr == np.asarray(self.values)).all():
                raise ValueError("bin indices must be integers")
        if (arr < 0).any():
            raise ValueError("bin indices must be non-negative")
        object.__setattr__(self, "values", np.ascontiguousarray(arr, dtype=np.int64))

    @property
    def k_features(self) -> int:
        return self.values.shape[0]

    @property
    def n_locations(self) -> int:
        return self.values.shape[1]

    @property
    def t_samples(self) -> int:
        return self.values.shape[2]

    def bins(self) -> np.ndarray:
        """Smallest per-feature bin counts consistent with the data."""
        return self.values.max(axis=(1, 2)) + 1

    def to_csv(self) -> str:
        """Wide CSV: header ``location,sample,f1,...,fk``, 1-based ids."""
        k, n, t = self.values.shape
        lines = ["location,sample," + ",".join(f"f{q}" for q in range(1, k + 1))]
        for loc in range(n):
            for samp in range(t):
                row = ",".join(str(int(self.values[q, loc, samp])) for q in range(k))
                lines.append(f"{loc + 1},{samp + 1},{row}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "ObservationMatrix":
        lines = [ln for ln in text.strip().splitlines() if ln.strip()]
        if not lines:
            raise ValueError("empty observations CSV")
        header = [h.strip() for h in lines[0].split(",")]
        if header[:2] != ["location", "sample"] or len(header) < 3:
            raise ValueError(f"bad observations header: {lines[0]!r}")
        k = len(header) - 2
        entries: dict[tuple[int, int], list[int]] = {}
        for ln_no, ln in enumerate(lines[1:], start=2):
            parts = [p.strip() for p in ln.split(",")]
            if len(parts) != k + 2:
                raise ValueError(f"line {ln_no}: expected {k + 2} fields, got {len(parts)}")
            loc, samp = int(parts[0]), int(parts[1])
            entries[(loc, samp)] = [int(p) for p in parts[2:]]
        locs = sorted({loc for loc, _ in entries})
        samps = sorted({samp for _, samp in entries})
        values = np.zeros((k, len(locs), len(samps)), dtype=np.int64)
        for (loc, samp), row in entries.items():
            li, si = locs.index(loc), samps.index(samp)
            values[:, li, si] = row
        return cls(values)


class EntropyOracle(ValueOracle):
    """Empirical entropy of the joint readings seen by placed sensors.

    Placing element e in subset q means observing feature q at location e.
    The value is -sum p log p over the distinct joint reading tuples across
    the t samples, with p = count/t.  Outcome terms are totalled with
    math.fsum, so the result depends only on the multiset of counts.
    """

    def __init__(self, obs: ObservationMatrix, *, log_base: float | None = None) -> None:
        if obs.t_samples < 1:
            raise ValueError("need at least one sample")
        ground = GroundSet(n=obs.n_locations, k=obs.k_features)
        self._log_div = 1.0 if log_base is None else math.log(log_base)
        t = obs.t_samples
        upper = math.log(t) / self._log_div if t > 1 else 0.0
        super().__init__(ground, monotone=True, lower=0.0, upper=upper)
        self.obs = obs
        # mixed-radix encoding of a sample's readings; falls back to row
        # comparison when the code space would overflow int64
        self._radix = obs.bins().astype(np.int64)

    def _value(self, s: KSet) -> float:
        qs, es = [], []
        for e0, lab in enumerate(s.labels):
            if lab:
                qs.append(lab - 1)
                es.append(e0)
        if not qs:
            return 0.0
        readings = self.obs.values[np.array(qs), np.array(es), :]  # (placed, t)
        code_space = 1.0
        for q0 in qs:
            code_space *= float(self._radix[q0])
        if code_space < 2.0**62:
            weights = np.ones(len(qs), dtype=np.int64)
            for j in range(len(qs) - 2, -1, -1):
                weights[j] = weights[j + 1] * self._radix[qs[j + 1]]
            codes = weights @ readings
            _, counts = np.unique(codes, return_counts=True)
        else:
            _, counts = np.unique(readings.T, axis=0, return_counts=True)
        t = self.obs.t_samples
        terms = [(c / t) * math.log(c / t) for c in counts.tolist()]
        return -math.fsum(terms) / self._log_div


def modular_oracle(weights: Sequence[Sequence[float]]) -> ModularOracle:
    w = np.asarray(weights, dtype=float)
    if w.ndim != 2:
        raise ValueError("weights must be a [k][n] array")
    return ModularOracle(GroundSet(n=w.shape[1], k=w.shape[0]), w)


def coverage_oracle(
    universe_size: int,
    covers: Sequence[Sequence[Iterable[int]]],
    item_weights: Sequence[float] | None = None,
) -> CoverageOracle:
    k = len(covers)
    if k == 0:
        raise ValueError("covers must have one row per subset")
    n = len(covers[0])
    return CoverageOracle(GroundSet(n=n, k=k), universe_size, covers, item_weights)


def table_oracle(ground: GroundSet, values: Mapping[tuple[int, ...], float]) -> TableOracle:
    return TableOracle(ground, values)


def entropy_oracle(obs: ObservationMatrix, *, log_base: float | None = None) -> EntropyOracle:
    return EntropyOracle(obs, log_base=log_base)


def xi_exact(oracle: ValueOracle, q: int, e: int, *, cap: int = 32768) -> float:
    """Exact removal penalty: the minimum marginal of placing e in subset q
    over all full assignments of the other n-1 elements.

    Enumerates k^(n-1) assignments by odometer; guarded by `cap`.
    """
    ground = oracle.ground
    ground._check_q(q)
    ground._check_e(e)
    count = ground.k ** (ground.n - 1)
    if count > cap:
        raise XiEnumerationError(
            f"{count} partitions exceed the cap of {cap}; "
            "use xi_bound for a cheap lower bound"
        )
    others = [x for x in range(1, ground.n + 1) if x != e]
    best = math.inf
    for assignment in itertools.product(range(1, ground.k + 1), repeat=len(others)):
        labels = [0] * ground.n
        for elem, lab in zip(others, assignment):
            labels[elem - 1] = lab
        s = KSet(ground, tuple(labels))
        best = min(best, oracle.marginal(s, q, e))
    return best


def xi_exact_all(oracle: ValueOracle, *, cap: int = 32768) -> np.ndarray:
    """(k, n) array of exact removal penalties."""
    ground = oracle.ground
    out = np.empty((ground.k, ground.n), dtype=float)
    for q in range(1, ground.k + 1):
        for e in range(1, ground.n + 1):
            out[q - 1, e - 1] = xi_exact(oracle, q, e, cap=cap)
    return out


def xi_bound(oracle: ValueOracle) -> float:
    """Global lower bound on every removal penalty: value_lower - value_upper."""
    lo, hi = oracle.value_lower, oracle.value_upper
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ValueError("oracle value bounds must be finite")
    return lo - hi

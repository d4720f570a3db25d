"""Linear hypograph cuts for k-submodular functions.

A cut generated at a k-set S bounds eta <= c0 + sum c[q,e] * x_e^q for
every point of the hypograph and is tight at S itself.  The coefficient
families are: the marginal at S for elements outside S, the marginal at
the empty k-set for switching an element of S to another subset, and
(for non-monotone functions) a removal penalty charged when an element
of S is dropped.  Penalties may be replaced by any lower bound; smaller
values only weaken the cut, never invalidate it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .ksets import CharVector, KSet
from .oracles import ValueOracle

__all__ = [
    "Cut",
    "build_cut_monotone",
    "build_cut_general",
    "cut_rhs",
    "monotone_transform",
    "rho_empty_table",
]


@dataclass(frozen=True)
class Cut:
    """One inequality eta <= c0 + coeffs . x, remembering its generator."""

    c0: float
    coeffs: np.ndarray  # (k, n)
    source: KSet

    def __post_init__(self) -> None:
        ground = self.source.ground
        arr = np.asarray(self.coeffs, dtype=float)
        if arr.shape != (ground.k, ground.n):
            raise ValueError(f"coeffs shape {arr.shape}, expected {(ground.k, ground.n)}")
        object.__setattr__(self, "coeffs", arr)

    def flat_coeffs(self) -> np.ndarray:
        return self.coeffs.reshape(-1)

    def rhs_at(self, x: CharVector) -> float:
        if x.ground != self.source.ground:
            raise ValueError("characteristic vector over a different ground set")
        return float(self.c0 + self.flat_coeffs() @ np.asarray(x.x, dtype=float))

    def to_json(self) -> str:
        return json.dumps(
            {
                "c0": self.c0,
                "coeffs": self.coeffs.tolist(),
                "source": list(self.source.labels),
            }
        )


def rho_empty_table(oracle: ValueOracle) -> np.ndarray:
    """(k, n) table of singleton values f({e} in subset q); reused across cuts."""
    ground = oracle.ground
    empty = KSet.empty(ground)
    out = np.empty((ground.k, ground.n), dtype=float)
    for q in range(1, ground.k + 1):
        for e in range(1, ground.n + 1):
            out[q - 1, e - 1] = oracle.marginal(empty, q, e)
    return out


def _common_coeffs(
    oracle: ValueOracle, s: KSet, rho_empty: np.ndarray | None
) -> np.ndarray:
    """Addition and switch coefficients shared by both cut families."""
    ground = oracle.ground
    if rho_empty is None:
        rho_empty = rho_empty_table(oracle)
    coeffs = np.zeros((ground.k, ground.n), dtype=float)
    for e in range(1, ground.n + 1):
        lab = s.label_of(e)
        if lab == 0:
            for q in range(1, ground.k + 1):
                coeffs[q - 1, e - 1] = oracle.marginal(s, q, e)
        else:
            for q in range(1, ground.k + 1):
                if q != lab:
                    coeffs[q - 1, e - 1] = rho_empty[q - 1, e - 1]
    return coeffs


def build_cut_monotone(
    oracle: ValueOracle, s: KSet, *, rho_empty: np.ndarray | None = None
) -> Cut:
    """Cut for a monotone function: no removal penalty is needed."""
    if not oracle.monotone:
        raise ValueError("monotone cut requires a monotone oracle")
    coeffs = _common_coeffs(oracle, s, rho_empty)
    return Cut(c0=oracle.eval(s), coeffs=coeffs, source=s)


def build_cut_general(
    oracle: ValueOracle,
    s: KSet,
    xi: np.ndarray | float,
    *,
    rho_empty: np.ndarray | None = None,
) -> Cut:
    """Cut for any k-submodular function.

    `xi` supplies the removal penalties, either as a (k, n) array or as a
    single scalar bound applied everywhere.  Each supplied value must not
    exceed the true penalty for its (subset, element) pair.
    """
    ground = oracle.ground
    xi_arr = np.asarray(xi, dtype=float)
    if xi_arr.ndim == 0:
        xi_arr = np.full((ground.k, ground.n), float(xi_arr))
    if xi_arr.shape != (ground.k, ground.n):
        raise ValueError(f"xi shape {xi_arr.shape}, expected {(ground.k, ground.n)}")
    coeffs = _common_coeffs(oracle, s, rho_empty)
    c0 = oracle.eval(s)
    for e in range(1, ground.n + 1):
        lab = s.label_of(e)
        if lab != 0:
            coeffs[lab - 1, e - 1] = xi_arr[lab - 1, e - 1]
            c0 -= xi_arr[lab - 1, e - 1]
    return Cut(c0=c0, coeffs=coeffs, source=s)


def cut_rhs(cut: Cut, x: CharVector) -> float:
    return cut.rhs_at(x)


class _ShiftedOracle(ValueOracle):
    """Base function minus a per-assignment charge; used by the transform."""

    def __init__(self, base: ValueOracle, xi: np.ndarray) -> None:
        charge_hi = np.maximum(xi.max(axis=0), 0.0).sum()
        charge_lo = np.minimum(xi.min(axis=0), 0.0).sum()
        super().__init__(
            base.ground,
            monotone=True,
            lower=base.value_lower - float(charge_hi),
            upper=base.value_upper - float(charge_lo),
            cheap=base.cheap_eval,
        )
        self.base = base
        self.xi = xi

    def _value(self, s: KSet) -> float:
        total = self.base.eval(s)
        for e0, lab in enumerate(s.labels):
            if lab:
                total -= self.xi[lab - 1, e0]
        return total


def monotone_transform(oracle: ValueOracle, xi: np.ndarray) -> ValueOracle:
    """Subtract exact removal penalties per assigned element.

    With exact penalties the result of a k-submodular input is again
    k-submodular and additionally monotone, and keeps value 0 at the
    empty k-set.
    """
    ground = oracle.ground
    xi_arr = np.asarray(xi, dtype=float)
    if xi_arr.shape != (ground.k, ground.n):
        raise ValueError(f"xi shape {xi_arr.shape}, expected {(ground.k, ground.n)}")
    if not np.isfinite(xi_arr).all():
        raise ValueError("xi values must be finite")
    return _ShiftedOracle(oracle, xi_arr)

"""Ground sets, k-sets and their meet/join algebra.

A k-set is a k-tuple of pairwise disjoint subsets of the ground set
{1, ..., n}.  The canonical representation is a label vector: position
e-1 holds 0 when element e is unassigned, or q in 1..k when e belongs to
subset q.  Disjointness is structural under this encoding.  The 0/1
characteristic vector of length k*n (flat index (q-1)*n + (e-1)) is a
derived view used by the LP layer.

Elements and subset indices are 1-based everywhere in the public API;
label-vector positions are the only 0-based thing, and only internally.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

__all__ = [
    "GroundSet",
    "KSet",
    "CharVector",
    "meet",
    "join",
    "is_partition",
    "to_char_vector",
    "from_char_vector",
    "format_kset",
    "parse_kset",
    "iter_ksets",
]


@dataclass(frozen=True)
class GroundSet:
    """Number of elements n and number of subsets k."""

    n: int
    k: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"ground set needs n >= 1, got {self.n}")
        if self.k < 1:
            raise ValueError(f"ground set needs k >= 1, got {self.k}")

    @property
    def num_vars(self) -> int:
        """Length of the characteristic vector."""
        return self.k * self.n

    def flat_index(self, q: int, e: int) -> int:
        """Characteristic-vector position of (subset q, element e)."""
        self._check_q(q)
        self._check_e(e)
        return (q - 1) * self.n + (e - 1)

    def _check_q(self, q: int) -> None:
        if not 1 <= q <= self.k:
            raise ValueError(f"subset index {q} outside 1..{self.k}")

    def _check_e(self, e: int) -> None:
        if not 1 <= e <= self.n:
            raise ValueError(f"element {e} outside 1..{self.n}")


@dataclass(frozen=True)
class KSet:
    """Immutable k-set in label-vector form."""

    ground: GroundSet
    labels: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.labels) != self.ground.n:
            raise ValueError(
                f"label vector has length {len(self.labels)}, expected {self.ground.n}"
            )
        for lab in self.labels:
            if not 0 <= lab <= self.ground.k:
                raise ValueError(f"label {lab} outside 0..{self.ground.k}")

    @classmethod
    def empty(cls, ground: GroundSet) -> "KSet":
        return cls(ground, (0,) * ground.n)

    @classmethod
    def from_subsets(cls, ground: GroundSet, subsets: Sequence[Iterable[int]]) -> "KSet":
        """Build from k iterables of 1-based elements; rejects overlaps."""
        if len(subsets) != ground.k:
            raise ValueError(f"expected {ground.k} subsets, got {len(subsets)}")
        labels = [0] * ground.n
        for q, subset in enumerate(subsets, start=1):
            for e in subset:
                ground._check_e(e)
                if labels[e - 1] != 0:
                    raise ValueError(f"element {e} assigned to two subsets")
                labels[e - 1] = q
        return cls(ground, tuple(labels))

    def subsets(self) -> tuple[frozenset[int], ...]:
        out: list[set[int]] = [set() for _ in range(self.ground.k)]
        for e, lab in enumerate(self.labels, start=1):
            if lab:
                out[lab - 1].add(e)
        return tuple(frozenset(s) for s in out)

    def label_of(self, e: int) -> int:
        self.ground._check_e(e)
        return self.labels[e - 1]

    def unassigned(self) -> tuple[int, ...]:
        return tuple(e for e, lab in enumerate(self.labels, start=1) if lab == 0)

    def size(self) -> int:
        """Total number of assigned elements."""
        return sum(1 for lab in self.labels if lab)

    def with_element(self, e: int, q: int) -> "KSet":
        """Copy with unassigned element e placed into subset q."""
        self.ground._check_q(q)
        self.ground._check_e(e)
        if self.labels[e - 1] != 0:
            raise ValueError(f"element {e} already assigned")
        labels = list(self.labels)
        labels[e - 1] = q
        return KSet(self.ground, tuple(labels))

    def without_element(self, e: int) -> "KSet":
        self.ground._check_e(e)
        labels = list(self.labels)
        labels[e - 1] = 0
        return KSet(self.ground, tuple(labels))

    def is_empty(self) -> bool:
        return all(lab == 0 for lab in self.labels)

    def __str__(self) -> str:
        return format_kset(self)


@dataclass(frozen=True)
class CharVector:
    """0/1 characteristic vector of a k-set, flat index (q-1)*n + (e-1)."""

    ground: GroundSet
    x: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.x)
        if arr.shape != (self.ground.num_vars,):
            raise ValueError(
                f"characteristic vector has shape {arr.shape}, "
                f"expected ({self.ground.num_vars},)"
            )
        object.__setattr__(self, "x", arr)

    def value(self, q: int, e: int) -> int:
        return int(self.x[self.ground.flat_index(q, e)])


def _require_same_ground(a: KSet, b: KSet) -> None:
    if a.ground != b.ground:
        raise ValueError(f"ground-set mismatch: {a.ground} vs {b.ground}")


def meet(a: KSet, b: KSet) -> KSet:
    """Componentwise intersection: subset q of the result is A_q & B_q."""
    _require_same_ground(a, b)
    labels = tuple(la if la == lb else 0 for la, lb in zip(a.labels, b.labels))
    return KSet(a.ground, labels)


def join(a: KSet, b: KSet) -> KSet:
    """Componentwise union with conflicting elements dropped.

    An element claimed by different subsets in a and b lands in neither;
    the result's subsets are pairwise disjoint by construction.
    """
    _require_same_ground(a, b)
    out = []
    for la, lb in zip(a.labels, b.labels):
        if la == lb:
            out.append(la)
        elif la == 0:
            out.append(lb)
        elif lb == 0:
            out.append(la)
        else:
            out.append(0)
    return KSet(a.ground, tuple(out))


def is_partition(s: KSet) -> bool:
    """True when every element is assigned to some subset."""
    return all(lab != 0 for lab in s.labels)


def to_char_vector(s: KSet) -> CharVector:
    n, k = s.ground.n, s.ground.k
    x = np.zeros(k * n, dtype=np.int8)
    for e, lab in enumerate(s.labels):
        if lab:
            x[(lab - 1) * n + e] = 1
    return CharVector(s.ground, x)


def from_char_vector(v: CharVector) -> KSet:
    """Inverse of :func:`to_char_vector`; rejects non-binary entries and
    vectors assigning an element to more than one subset."""
    n, k = v.ground.n, v.ground.k
    arr = np.asarray(v.x)
    if not np.isin(arr, (0, 1)).all():
        raise ValueError("characteristic vector entries must be 0 or 1")
    labels = [0] * n
    for e0 in range(n):
        hits = [q for q in range(1, k + 1) if arr[(q - 1) * n + e0]]
        if len(hits) > 1:
            raise ValueError(f"element {e0 + 1} assigned to subsets {hits}")
        if hits:
            labels[e0] = hits[0]
    return KSet(v.ground, tuple(labels))


def format_kset(s: KSet) -> str:
    """Render as ``({1,3},{2},{})`` with subsets in order q=1..k."""
    parts = []
    for subset in s.subsets():
        inner = ",".join(str(e) for e in sorted(subset))
        parts.append("{" + inner + "}")
    return "(" + ",".join(parts) + ")"


def parse_kset(text: str, ground: GroundSet) -> KSet:
    """Parse the ``({1,3},{2},{})`` notation back into a k-set."""
    body = text.strip()
    if not (body.startswith("(") and body.endswith(")")):
        raise ValueError(f"malformed k-set notation: {text!r}")
    body = body[1:-1]
    subsets: list[list[int]] = []
    depth = 0
    current = ""
    for ch in body:
        if ch == "{":
            depth += 1
            current = ""
        elif ch == "}":
            depth -= 1
            if depth != 0:
                raise ValueError(f"malformed k-set notation: {text!r}")
            current = current.strip()
            subsets.append([int(tok) for tok in current.split(",") if tok.strip()])
        elif depth == 1:
            current += ch
        elif ch != "," and not ch.isspace():
            raise ValueError(f"malformed k-set notation: {text!r}")
    return KSet.from_subsets(ground, subsets)


def iter_ksets(ground: GroundSet) -> Iterator[KSet]:
    """All (k+1)^n k-sets in lexicographic label-vector order."""
    import itertools

    for labels in itertools.product(range(ground.k + 1), repeat=ground.n):
        yield KSet(ground, labels)

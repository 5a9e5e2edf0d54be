"""Run-length encoded subsets of the finite grid {0, 1/n, ..., 1}.

A :class:`GridSet` stores a set of grid indices as sorted, disjoint,
non-adjacent runs ``(start, length)``.  Every constructor funnels through
:func:`make_gridset`, so two sets with the same members always have the
same runs.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

__all__ = [
    "GridError",
    "IndexOutOfRange",
    "CardinalityOverflow",
    "ScaleMismatch",
    "GridScale",
    "GridSet",
    "DeltaInterval",
    "make_gridset",
    "from_indices",
    "full_grid",
    "empty_grid",
    "cardinality",
    "discrete_lebesgue",
    "dilate",
    "erode",
    "union",
    "intersect",
    "complement",
]

INT64_MAX = 2**63 - 1


class GridError(ValueError):
    pass


class IndexOutOfRange(GridError):
    pass


class CardinalityOverflow(GridError):
    pass


class ScaleMismatch(GridError):
    pass


@dataclass(frozen=True)
class GridScale:
    """Grid resolution: points ``i/n`` for ``i = 0..n``."""

    n: int

    def __post_init__(self) -> None:
        if isinstance(self.n, bool) or not isinstance(self.n, int):
            raise TypeError(f"grid resolution must be an int, got {self.n!r}")
        if self.n < 1:
            raise GridError(f"grid resolution must be >= 1, got {self.n}")
        if self.n >= INT64_MAX:
            raise CardinalityOverflow(f"grid resolution {self.n} exceeds 64-bit range")

    @property
    def size(self) -> int:
        return self.n + 1

    def point(self, i: int) -> float:
        return i / self.n


@dataclass(frozen=True)
class GridSet:
    runs: tuple[tuple[int, int], ...]
    scale: GridScale

    def __iter__(self) -> Iterator[int]:
        for start, length in self.runs:
            yield from range(start, start + length)

    def __contains__(self, i: object) -> bool:
        if not isinstance(i, int):
            return False
        # runs are sorted, so a bisect would do; run counts here are small
        lo, hi = 0, len(self.runs)
        while lo < hi:
            mid = (lo + hi) // 2
            start, length = self.runs[mid]
            if i < start:
                hi = mid
            elif i >= start + length:
                lo = mid + 1
            else:
                return True
        return False

    def __len__(self) -> int:
        return cardinality(self)

    def __bool__(self) -> bool:
        return bool(self.runs)

    @property
    def n(self) -> int:
        return self.scale.n

    def issubset(self, other: GridSet) -> bool:
        _check_scales(self, other)
        return intersect(self, other) == self

    def run_lengths(self) -> list[int]:
        return [length for _, length in self.runs]


@dataclass(frozen=True)
class DeltaInterval:
    """Contiguous block of ``point_count`` grid indices starting at ``start_index``.

    Its diameter is ``point_count / n``, i.e. it counts points rather than
    measuring the gap between the first and last coordinate.
    """

    start_index: int
    point_count: int
    scale: GridScale

    def __post_init__(self) -> None:
        if self.point_count < 1:
            raise GridError("a delta-interval holds at least one point")
        if self.start_index < 0 or self.stop_index > self.scale.n:
            raise IndexOutOfRange(
                f"interval [{self.start_index}, {self.stop_index}] outside [0, {self.scale.n}]"
            )

    @property
    def stop_index(self) -> int:
        """Last index in the block (inclusive)."""
        return self.start_index + self.point_count - 1

    @property
    def diameter(self) -> float:
        return self.point_count / self.scale.n


def _check_scales(a: GridSet, b: GridSet) -> None:
    if a.scale != b.scale:
        raise ScaleMismatch(f"grid scales differ: n={a.scale.n} vs n={b.scale.n}")


def make_gridset(runs: Iterable[Sequence[int]], scale: GridScale) -> GridSet:
    """Canonicalise ``(start, length)`` runs into a :class:`GridSet`.

    Runs may arrive unsorted, overlapping or touching; they are merged.
    Zero-length runs are dropped.
    """
    cleaned = []
    for start, length in runs:
        start, length = int(start), int(length)
        if length < 0:
            raise GridError(f"negative run length {length}")
        if length == 0:
            continue
        if start < 0 or start + length - 1 > scale.n:
            raise IndexOutOfRange(
                f"run ({start}, {length}) leaves the index range [0, {scale.n}]"
            )
        cleaned.append((start, start + length))
    cleaned.sort()

    merged: list[list[int]] = []
    for lo, hi in cleaned:
        if merged and lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])

    total = sum(hi - lo for lo, hi in merged)
    if total > INT64_MAX:
        raise CardinalityOverflow(f"cardinality {total} exceeds 64-bit range")
    return GridSet(tuple((lo, hi - lo) for lo, hi in merged), scale)


def from_indices(indices: Iterable[int], scale: GridScale) -> GridSet:
    return make_gridset(((i, 1) for i in indices), scale)


def full_grid(scale: GridScale) -> GridSet:
    return GridSet(((0, scale.n + 1),), scale)


def empty_grid(scale: GridScale) -> GridSet:
    return GridSet((), scale)


def cardinality(B: GridSet) -> int:
    return sum(length for _, length in B.runs)


def discrete_lebesgue(B: GridSet) -> float:
    """``card(B) / (n + 1)``, the uniform probability of ``B`` on the grid."""
    # int / int is correctly rounded in CPython, even for huge operands
    return cardinality(B) / (B.scale.n + 1)


def dilate(B: GridSet, k: int) -> GridSet:
    """All indices within ``k`` of ``B``, clipped to ``[0, n]``."""
    if k < 0:
        raise GridError(f"dilation radius must be non-negative, got {k}")
    if k == 0:
        return B
    n = B.scale.n
    runs = []
    for start, length in B.runs:
        lo = max(0, start - k)
        hi = min(n, start + length - 1 + k)
        runs.append((lo, hi - lo + 1))
    return make_gridset(runs, B.scale)


def erode(B: GridSet, k: int) -> GridSet:
    """Indices of ``B`` whose clipped ``k``-neighbourhood lies inside ``B``.

    A run touching 0 or n keeps its boundary side: the part of a window
    outside the grid is ignored.
    """
    if k < 0:
        raise GridError(f"erosion radius must be non-negative, got {k}")
    if k == 0:
        return B
    n = B.scale.n
    runs = []
    for start, length in B.runs:
        stop = start + length - 1
        lo = start if start == 0 else start + k
        hi = stop if stop == n else stop - k
        if hi >= lo:
            runs.append((lo, hi - lo + 1))
    return make_gridset(runs, B.scale)


def _bounds(B: GridSet) -> list[tuple[int, int]]:
    return [(start, start + length) for start, length in B.runs]


def union(B1: GridSet, B2: GridSet) -> GridSet:
    _check_scales(B1, B2)
    return make_gridset(B1.runs + B2.runs, B1.scale)


def intersect(B1: GridSet, B2: GridSet) -> GridSet:
    _check_scales(B1, B2)
    a, b = _bounds(B1), _bounds(B2)
    out = []
    i = j = 0
    while i < len(a) and j < len(b):
        lo = max(a[i][0], b[j][0])
        hi = min(a[i][1], b[j][1])
        if lo < hi:
            out.append((lo, hi - lo))
        if a[i][1] < b[j][1]:
            i += 1
        else:
            j += 1
    return make_gridset(out, B1.scale)


def complement(B: GridSet) -> GridSet:
    out = []
    cursor = 0
    for start, length in B.runs:
        if start > cursor:
            out.append((cursor, start - cursor))
        cursor = start + length
    if cursor <= B.scale.n:
        out.append((cursor, B.scale.n + 1 - cursor))
    return make_gridset(out, B.scale)

"""Standard subsets of [0, 1] and their shadows on a finite grid.

Endpoints are kept as :class:`fractions.Fraction` so that renderings at grid
sizes matched to a Cantor construction land exactly on interval endpoints.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Any, Optional, Union

from .grid import GridScale, GridSet, empty_grid, full_grid, make_gridset

__all__ = [
    "SpecError",
    "StageTooLarge",
    "SetSpec",
    "cantor_intervals",
    "cantor_ratio",
    "render",
    "analytic_reference",
    "spec_intervals",
    "load_spec",
    "spec_from_dict",
    "spec_to_dict",
    "to_fraction",
]

Number = Union[int, float, Fraction, str]

VARIANTS = ("interval_union", "cantor", "point_family", "full", "empty")
MAX_CANTOR_STAGE = 24
DEFAULT_POINT_COUNT = 10_000


class SpecError(ValueError):
    pass


class StageTooLarge(SpecError):
    pass


def to_fraction(x: Number) -> Fraction:
    """Exact rational for ``x``.

    Floats are snapped to the simplest fraction within a few ulps, so that
    ``0.3`` becomes ``3/10`` and ``1/3`` typed as a float becomes ``1/3``.
    Strings such as ``"1/3"`` are parsed exactly.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if not math.isfinite(x):
        raise SpecError(f"non-finite number {x!r}")
    exact = Fraction(x)
    snapped = exact.limit_denominator(10**9)
    if abs(snapped - exact) <= abs(exact) * Fraction(1, 2**50) + Fraction(1, 2**1074):
        return snapped
    return exact


@dataclass(frozen=True)
class SetSpec:
    """Declarative description of a closed set ``A`` in [0, 1].

    Only the fields relevant to ``variant`` are meaningful; the rest keep
    their defaults.
    """

    variant: str
    id: str = ""
    intervals: tuple[tuple[Fraction, Fraction], ...] = ()
    lam: Optional[Fraction] = None
    stage: Optional[int] = None
    kind: Optional[str] = None
    count: Optional[int] = None

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise SpecError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        if self.variant == "interval_union":
            if not self.intervals:
                raise SpecError("interval_union needs at least one interval")
            for a, b in self.intervals:
                if not (0 <= a <= b <= 1):
                    raise SpecError(f"interval [{a}, {b}] is not a subinterval of [0, 1]")
        elif self.variant == "cantor":
            if self.lam is None or not (0 < self.lam < 1):
                raise SpecError(f"cantor lambda must lie in (0, 1), got {self.lam}")
            if self.stage is None or self.stage < 0:
                raise SpecError(f"cantor stage must be a non-negative integer, got {self.stage}")
        elif self.variant == "point_family":
            if self.kind != "reciprocals":
                raise SpecError(f"unknown point family {self.kind!r}")
            if self.count is None or self.count < 1:
                raise SpecError(f"point_family count must be >= 1, got {self.count}")

    @classmethod
    def interval_union(cls, intervals, id: str = "") -> SetSpec:
        ivs = tuple((to_fraction(a), to_fraction(b)) for a, b in intervals)
        return cls("interval_union", id=id, intervals=ivs)

    @classmethod
    def cantor(cls, lam: Number, stage: int, id: str = "") -> SetSpec:
        return cls("cantor", id=id, lam=to_fraction(lam), stage=int(stage))

    @classmethod
    def reciprocals(cls, count: int = DEFAULT_POINT_COUNT, id: str = "") -> SetSpec:
        return cls("point_family", id=id, kind="reciprocals", count=int(count))

    @classmethod
    def full(cls, id: str = "") -> SetSpec:
        return cls("full", id=id)

    @classmethod
    def empty(cls, id: str = "") -> SetSpec:
        return cls("empty", id=id)

    def with_stage(self, stage: Optional[int]) -> SetSpec:
        """Same set at a different construction stage (Cantor) or truncation (points)."""
        if stage is None:
            return self
        if self.variant == "cantor":
            return SetSpec("cantor", id=self.id, lam=self.lam, stage=int(stage))
        if self.variant == "point_family":
            return SetSpec("point_family", id=self.id, kind=self.kind, count=int(stage))
        return self


def cantor_ratio(lam: Number) -> Fraction:
    """Length ratio of each child interval, ``(1 - lambda) / 2``."""
    lam = to_fraction(lam)
    return (1 - lam) / 2


@lru_cache(maxsize=64)
def _cantor_intervals(lam: Fraction, stage: int) -> tuple[tuple[Fraction, Fraction], ...]:
    r = (1 - lam) / 2
    length = r**stage
    lefts = [Fraction(0)]
    for level in range(stage):
        offset = r**level * (1 - r)  # right child sits at the parent's far end
        lefts = [x for a in lefts for x in (a, a + offset)]
    return tuple((a, a + length) for a in lefts)


def cantor_intervals(lam: Number, stage: int) -> list[tuple[Fraction, Fraction]]:
    """The ``2**stage`` closed intervals of the middle-``lam`` Cantor construction."""
    lam = to_fraction(lam)
    if not (0 < lam < 1):
        raise SpecError(f"cantor lambda must lie in (0, 1), got {lam}")
    if stage < 0:
        raise SpecError(f"stage must be non-negative, got {stage}")
    if stage > MAX_CANTOR_STAGE:
        raise StageTooLarge(f"stage {stage} would produce 2**{stage} intervals")
    return list(_cantor_intervals(lam, stage))


def reciprocal_points(count: int) -> list[Fraction]:
    return [Fraction(0)] + [Fraction(1, k) for k in range(count, 0, -1)]


def spec_intervals(spec: SetSpec) -> list[tuple[Fraction, Fraction]]:
    """The set as a sorted list of closed intervals (points are degenerate intervals)."""
    if spec.variant == "full":
        return [(Fraction(0), Fraction(1))]
    if spec.variant == "empty":
        return []
    if spec.variant == "interval_union":
        return sorted(spec.intervals)
    if spec.variant == "cantor":
        return cantor_intervals(spec.lam, spec.stage)
    return [(p, p) for p in reciprocal_points(spec.count)]


def _nearest_index(num: int, den: int, n: int) -> int:
    # nearest integer to n*num/den, ties toward 0
    return (2 * n * num + den - 1) // (2 * den)


@lru_cache(maxsize=256)
def render(spec: SetSpec, scale: GridScale) -> GridSet:
    """Grid indices ``i`` with ``i/n`` in the closed set described by ``spec``.

    Point families map each point to its nearest grid index instead, so that
    every point leaves a trace regardless of ``n``.
    """
    n = scale.n
    if spec.variant == "full":
        return full_grid(scale)
    if spec.variant == "empty":
        return empty_grid(scale)
    if spec.variant == "point_family":
        idx = {0}
        idx.update(_nearest_index(1, k, n) for k in range(1, spec.count + 1))
        return make_gridset(((i, 1) for i in idx), scale)

    runs = []
    for a, b in spec_intervals(spec):
        lo = math.ceil(a * n)
        hi = math.floor(b * n)
        if hi >= lo:
            runs.append((lo, hi - lo + 1))
    return make_gridset(runs, scale)


def analytic_reference(spec: SetSpec) -> Optional[tuple[float, Optional[float]]]:
    """Known ``(dimension, measure at that dimension)`` for the set, if any."""
    if spec.variant == "interval_union":
        total = Fraction(0)
        cur_lo = cur_hi = None
        for a, b in sorted(spec.intervals):
            if cur_hi is None or a > cur_hi:
                if cur_hi is not None:
                    total += cur_hi - cur_lo
                cur_lo, cur_hi = a, b
            else:
                cur_hi = max(cur_hi, b)
        total += cur_hi - cur_lo
        return 1.0, float(total)
    if spec.variant == "cantor":
        dim = math.log(2) / math.log(1 / float(cantor_ratio(spec.lam)))
        measure = 1.0 if spec.lam == Fraction(1, 3) else None
        return dim, measure
    if spec.variant == "point_family":
        return 0.0, None
    return None


def spec_from_dict(data: dict[str, Any]) -> SetSpec:
    """Build a :class:`SetSpec` from its JSON object form."""
    if not isinstance(data, dict):
        raise SpecError("a set spec must be a JSON object")
    variant = data.get("variant")
    sid = str(data.get("id", variant or ""))
    try:
        if variant == "interval_union":
            ivs = data.get("intervals")
            if not isinstance(ivs, list):
                raise SpecError("interval_union requires an 'intervals' list")
            pairs = []
            for pair in ivs:
                if not isinstance(pair, (list, tuple)) or len(pair) != 2:
                    raise SpecError(f"interval {pair!r} is not a pair [a, b]")
                pairs.append(pair)
            return SetSpec.interval_union(pairs, id=sid)
        if variant == "cantor":
            if "lambda" not in data:
                raise SpecError("cantor requires 'lambda'")
            return SetSpec.cantor(data["lambda"], int(data.get("stage", 0)), id=sid)
        if variant == "point_family":
            return SetSpec(
                "point_family",
                id=sid,
                kind=data.get("kind", "reciprocals"),
                count=int(data.get("count", DEFAULT_POINT_COUNT)),
            )
        if variant in ("full", "empty"):
            return SetSpec(variant, id=sid)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        if isinstance(exc, SpecError):
            raise
        raise SpecError(f"malformed spec: {exc}") from exc
    raise SpecError(f"unknown variant {variant!r}")


def _num(x: Fraction) -> Union[int, float, str]:
    if x.denominator == 1:
        return int(x)
    if float(x) == x:
        return float(x)
    return f"{x.numerator}/{x.denominator}"


def spec_to_dict(spec: SetSpec) -> dict[str, Any]:
    out: dict[str, Any] = {"id": spec.id, "variant": spec.variant}
    if spec.variant == "interval_union":
        out["intervals"] = [[_num(a), _num(b)] for a, b in spec.intervals]
    elif spec.variant == "cantor":
        out["lambda"] = _num(spec.lam)
        out["stage"] = spec.stage
    elif spec.variant == "point_family":
        out["kind"] = spec.kind
        out["count"] = spec.count
    return out


def load_spec(path: Union[str, Path]) -> SetSpec:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return spec_from_dict(data)

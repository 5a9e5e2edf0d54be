"""Discrete s-dimensional measure on grid sets, and its classical comparators.

The central quantity is ``h(B) = min sum (diam V_i)**s`` over partitions of a
grid set ``B`` into blocks of at most ``m = floor(delta * n)`` consecutive
points, where a block of ``k`` points has diameter ``k / n``.  Blocks never
cross a gap of ``B``, so the minimum splits over maximal runs, and on a run of
``k`` points it is attained by ``ceil(k / m) - 1`` full blocks plus one
remainder (``x**s`` is concave).  :func:`h_delta_s_oracle` re-derives the
same optimum by dynamic programming without using that argument.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import asdict, dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .generators import SetSpec, cantor_ratio, render, spec_intervals, to_fraction
from .grid import (
    DeltaInterval,
    GridError,
    GridScale,
    GridSet,
    cardinality,
    dilate,
    discrete_lebesgue,
    erode,
    make_gridset,
)

__all__ = [
    "MeasureError",
    "GridTooCoarse",
    "InvalidS",
    "InvalidEta",
    "InvalidEps",
    "InvalidInput",
    "TooLarge",
    "DegenerateFit",
    "NoBracket",
    "MeasureParams",
    "Partition",
    "MeasureReport",
    "ScheduleEntry",
    "piece_cost",
    "pieces_per_interval",
    "make_partition",
    "h_delta_s",
    "h_delta_s_value",
    "h_delta_s_oracle",
    "coarsen_partition",
    "standard_cover",
    "fattened_cover_superset",
    "fattening_costs",
    "theorem_rhs",
    "lebesgue_bounds",
    "classical_cover_measure",
    "box_count_estimate",
    "loglog_slope",
    "dimension_estimate",
    "default_schedule",
    "halo_for",
]

ORACLE_MAX_POINTS = 10_000
TIE_RTOL = 1e-12
DIVERGE_THRESHOLD = 1e6
VANISH_THRESHOLD = 1e-6
MAX_GRID = 2**62
MIN_TOP_STAGE = 8


class MeasureError(ValueError):
    pass


class GridTooCoarse(MeasureError):
    pass


class InvalidS(MeasureError):
    pass


class InvalidEta(MeasureError):
    pass


class InvalidEps(MeasureError):
    pass


class InvalidInput(MeasureError):
    pass


class TooLarge(MeasureError):
    pass


class DegenerateFit(MeasureError):
    pass


class NoBracket(MeasureError):
    pass


def _check_s(s: float) -> float:
    s = float(s)
    if not (0.0 < s <= 1.0):
        raise InvalidS(f"s must lie in (0, 1], got {s}")
    return s


def pieces_per_interval(delta: Union[float, Fraction], n: int) -> int:
    """Largest point count ``m`` with ``m / n <= delta``.

    Float deltas that sit within 1e-12 (relative) below an integer multiple of
    ``1/n`` are treated as that multiple, so ``3**-8`` at ``n = 3**14`` gives 729.
    """
    if isinstance(delta, Fraction):
        return math.floor(delta * n)
    x = float(delta) * n
    m = math.floor(x)
    if m + 1 - x <= 1e-12 * max(1.0, x):
        m += 1
    return m


@dataclass(frozen=True)
class MeasureParams:
    s: float
    delta: float
    scale: GridScale

    def __post_init__(self) -> None:
        _check_s(self.s)
        if not self.delta > 0:
            raise MeasureError(f"delta must be positive, got {self.delta}")

    @cached_property
    def m(self) -> int:
        return pieces_per_interval(self.delta, self.scale.n)


def piece_cost(k: int, n: int, s: float) -> float:
    """``(k / n) ** s`` evaluated in log space so huge ``n`` cannot underflow ``k / n``."""
    if s == 1.0:
        return k / n
    return math.exp(s * (math.log(k) - math.log(n)))


def _canonical_cost(groups: Sequence[tuple[int, int]], last: int, n: int, s: float) -> float:
    # One run's blocks, largest first: every group (size, multiplicity) except
    # the smallest block, which is added last.  Closed form and oracle both
    # evaluate through here so their sums round identically.
    acc = 0.0
    for size, mult in groups:
        acc += mult * piece_cost(size, n, s)
    return acc + piece_cost(last, n, s)


def _composition_cost(sizes: Iterable[int], n: int, s: float) -> float:
    ordered = sorted(sizes, reverse=True)
    if not ordered:
        return 0.0
    last = ordered.pop()
    groups = sorted(Counter(ordered).items(), reverse=True)
    return _canonical_cost(groups, last, n, s)


@lru_cache(maxsize=65536)
def _run_value(k: int, m: int, n: int, s: float) -> float:
    q = -(-k // m)
    r = k - (q - 1) * m
    groups = [(m, q - 1)] if q > 1 else []
    return _canonical_cost(groups, r, n, s)


@dataclass(frozen=True)
class Partition:
    """Ordered blocks partitioning a grid set, with their cost ``sum diam**s``."""

    pieces: tuple[DeltaInterval, ...]
    cost: float
    s: float
    delta: float

    def __len__(self) -> int:
        return len(self.pieces)

    @property
    def scale(self) -> Optional[GridScale]:
        return self.pieces[0].scale if self.pieces else None

    def covered(self) -> Optional[GridSet]:
        if not self.pieces:
            return None
        return make_gridset(((p.start_index, p.point_count) for p in self.pieces), self.scale)

    def max_diameter(self) -> float:
        return max((p.diameter for p in self.pieces), default=0.0)


def make_partition(pieces: Sequence[DeltaInterval], s: float, delta: float) -> Partition:
    """Wrap blocks into a :class:`Partition`, summing their cost left to right."""
    s = _check_s(s)
    pieces = tuple(sorted(pieces, key=lambda p: p.start_index))
    for a, b in zip(pieces, pieces[1:]):
        if b.start_index <= a.stop_index:
            raise InvalidInput(f"blocks overlap at index {b.start_index}")
    cost = 0.0
    for p in pieces:
        cost += piece_cost(p.point_count, p.scale.n, s)
    return Partition(pieces, cost, s, float(delta))


def _require_m(B: GridSet, p: MeasureParams) -> int:
    if B.scale != p.scale:
        raise GridError(f"grid set has n={B.scale.n}, parameters have n={p.scale.n}")
    m = p.m
    if m < 1 and B.runs:
        raise GridTooCoarse(
            f"delta={p.delta} admits no grid block at n={p.scale.n} (floor(delta*n) = 0)"
        )
    return m


def h_delta_s_value(B: GridSet, p: MeasureParams) -> float:
    """Minimum of ``sum diam**s`` over partitions of ``B`` into delta-blocks."""
    m = _require_m(B, p)
    n, s = p.scale.n, p.s
    total = 0.0
    for _, k in B.runs:
        total += _run_value(k, m, n, s)
    return total


def piece_count(B: GridSet, p: MeasureParams) -> int:
    m = _require_m(B, p)
    return sum(-(-k // m) for _, k in B.runs)


def h_delta_s(B: GridSet, p: MeasureParams) -> tuple[float, Partition]:
    """Like :func:`h_delta_s_value`, also returning an optimal partition.

    The witness lists, for each run, the full blocks first and the remainder
    last.  It is materialised block by block, so prefer the value-only
    function when the block count is large.
    """
    value = h_delta_s_value(B, p)
    m = p.m
    pieces = []
    for start, k in B.runs:
        full, rest = divmod(k, m)
        if rest == 0:
            full, rest = full - 1, m
        for j in range(full):
            pieces.append(DeltaInterval(start + j * m, m, B.scale))
        pieces.append(DeltaInterval(start + full * m, rest, B.scale))
    return value, Partition(tuple(pieces), value, p.s, p.delta)


@lru_cache(maxsize=256)
def _dp_table(m: int, n: int, s: float, upto: int) -> tuple[int, ...]:
    # choice[j]: size of the last block in an optimal split of j points
    cost = [0.0] * (upto + 1)
    choice = [0] * (upto + 1)
    for j in range(1, upto + 1):
        cands = [cost[j - t] + piece_cost(t, n, s) for t in range(1, min(m, j) + 1)]
        best = min(cands)
        # near-ties go to the larger block
        t = max(t for t, c in enumerate(cands, start=1) if c <= best + TIE_RTOL * best)
        cost[j] = cands[t - 1]
        choice[j] = t
    return tuple(choice)


def _dp_composition(k: int, m: int, n: int, s: float) -> list[int]:
    upto = 1 << max(4, (k - 1).bit_length())  # share tables across run lengths
    choice = _dp_table(m, n, s, upto)
    sizes = []
    while k > 0:
        sizes.append(choice[k])
        k -= choice[k]
    return sizes


@lru_cache(maxsize=65536)
def _oracle_run_value(k: int, m: int, n: int, s: float) -> float:
    return _composition_cost(_dp_composition(k, m, n, s), n, s)


def h_delta_s_oracle(B: GridSet, p: MeasureParams) -> float:
    """Brute-force minimum by dynamic programming over block sizes, run by run.

    Intended for test-sized sets only (at most 10**4 points).
    """
    if cardinality(B) > ORACLE_MAX_POINTS:
        raise TooLarge(f"oracle handles at most {ORACLE_MAX_POINTS} points")
    m = _require_m(B, p)
    n, s = p.scale.n, _check_s(p.s)
    total = 0.0
    for _, k in B.runs:
        total += _oracle_run_value(k, m, n, s)
    return total


def coarsen_partition(part: Partition, eta: float) -> Partition:
    """Greedily merge neighbouring blocks until each reaches diameter ``eta``.

    Scanning left to right, the current block absorbs the next one while the
    two are contiguous and the current diameter is still below ``eta``.  Every
    output block therefore has diameter below ``eta + delta``, and since
    ``(a + b)**s <= a**s + b**s`` the cost cannot go up.
    """
    if not eta > 0:
        raise InvalidEta(f"eta must be positive, got {eta}")
    if eta < part.delta:
        raise InvalidEta(f"eta={eta} is smaller than the partition's delta={part.delta}")
    if not part.pieces:
        return part
    merged = []
    cur = part.pieces[0]
    for nxt in part.pieces[1:]:
        if nxt.start_index == cur.stop_index + 1 and cur.diameter < eta:
            cur = DeltaInterval(cur.start_index, cur.point_count + nxt.point_count, cur.scale)
        else:
            merged.append(cur)
            cur = nxt
    merged.append(cur)
    return make_partition(merged, part.s, eta + part.delta)


def standard_cover(part: Partition, min_length: float = 0.0) -> list[tuple[Fraction, Fraction]]:
    """Real intervals ``[start/n, stop/n]`` spanned by each block.

    Intervals shorter than ``min_length`` are dropped; the default keeps all,
    including single-point blocks.
    """
    out = []
    for p in part.pieces:
        n = p.scale.n
        a, b = Fraction(p.start_index, n), Fraction(p.stop_index, n)
        if b - a >= min_length:
            out.append((a, b))
    return out


def _fattened(cover, eps: float, s: float) -> list[tuple[Fraction, Fraction]]:
    if not eps > 0:
        raise InvalidEps(f"eps must be positive, got {eps}")
    s = _check_s(s)
    out = []
    for i, (a, b) in enumerate(cover, start=1):
        a, b = to_fraction(a), to_fraction(b)
        if a > b:
            raise InvalidInput(f"interval [{a}, {b}] is reversed")
        # log space: 2**(-i/s) underflows for small s and long covers
        w = math.exp((math.log(eps / 2) - i * math.log(2)) / s)
        w = Fraction(w)
        out.append((max(Fraction(0), a - w), min(Fraction(1), b + w)))
    return out


def _render_interval(a: Fraction, b: Fraction, n: int) -> Optional[tuple[int, int]]:
    lo, hi = math.ceil(a * n), math.floor(b * n)
    if hi < lo:
        return None
    return lo, hi - lo + 1


def fattened_cover_superset(cover, eps: float, s: float, scale: GridScale) -> GridSet:
    """Grid rendering of the cover after widening the ``i``-th interval (from 1).

    Each side of interval ``i`` moves out by ``(eps/2)**(1/s) * 2**(-i/s)``,
    then the result is clipped to [0, 1] and intersected with the grid.
    """
    runs = []
    for a, b in _fattened(cover, eps, s):
        r = _render_interval(a, b, scale.n)
        if r is not None:
            runs.append(r)
    return make_gridset(runs, scale)


def fattening_costs(cover, eps: float, s: float, scale: GridScale) -> tuple[float, float]:
    """``(sum len(U_i)**s, sum diam(rendered V_i)**s)`` for the widened cover.

    The rendered diameters use the point-count convention.  Their excess over
    the input sum stays below ``eps + len(cover) * n**-s``; the last term is
    the finite-grid price of rounding each interval outward to whole points.
    """
    s = _check_s(s)
    before = 0.0
    for a, b in cover:
        length = float(to_fraction(b) - to_fraction(a))
        before += length**s if length > 0 else 0.0
    after = 0.0
    for a, b in _fattened(cover, eps, s):
        r = _render_interval(a, b, scale.n)
        if r is not None:
            after += piece_cost(r[1], scale.n, s)
    return before, after


@dataclass
class MeasureReport:
    """One evaluation; the unit of CSV and JSON output."""

    spec_id: str
    n: int
    delta: Optional[float]
    s: Optional[float]
    halo: int
    kind: str
    value: Optional[float]
    piece_count: int = 0
    status: str = "ok"

    KINDS = ("discrete_h", "lebesgue_lower", "lebesgue_upper", "classical_cover", "box_count")

    def to_dict(self) -> dict:
        return asdict(self)


def halo_for(n: int, rule: Union[str, int, None] = "sqrt_n") -> int:
    """Halo width for grid size ``n``: ``ceil(sqrt(n))`` or a fixed integer.

    Rules: ``"sqrt_n"``, ``"log2_n"`` (``ceil(log2 n)``), ``"fixed:K"`` or an int.
    """
    if rule is None or rule == "sqrt_n":
        r = math.isqrt(n)
        return r if r * r == n else r + 1
    if rule == "log2_n":
        return max(1, (n - 1).bit_length())
    if isinstance(rule, int):
        k = rule
    elif isinstance(rule, str) and rule.startswith("fixed:"):
        k = int(rule.split(":", 1)[1])
    else:
        raise InvalidInput(f"unknown halo rule {rule!r}")
    if k < 1:
        raise InvalidInput(f"halo must be >= 1, got {k}")
    return k


def theorem_rhs(spec: SetSpec, p: MeasureParams, halo: int) -> MeasureReport:
    """``h`` of the thinnest grid superset of ``spec``: its rendering dilated by ``halo``."""
    if halo < 1:
        raise InvalidInput(f"halo must be >= 1, got {halo}")
    B = dilate(render(spec, p.scale), halo)
    value = h_delta_s_value(B, p)
    count = piece_count(B, p) if B.runs else 0
    return MeasureReport(spec.id, p.scale.n, p.delta, p.s, halo, "discrete_h", value, count)


def lebesgue_bounds(spec: SetSpec, scale: GridScale, halo: int) -> tuple[float, float]:
    """Discrete Lebesgue measure of the eroded and dilated rendering."""
    if halo < 1:
        raise InvalidInput(f"halo must be >= 1, got {halo}")
    B = render(spec, scale)
    return discrete_lebesgue(erode(B, halo)), discrete_lebesgue(dilate(B, halo))


def classical_cover_measure(intervals, delta: float, s: float, resolution: int) -> float:
    """Upper approximation of the Hausdorff ``delta``-premeasure of a finite union.

    Covers are intervals with endpoints on the breakpoint grid ``j / resolution``
    and length at most ``delta``; they may bridge gaps.  Each input interval is
    first rounded outward to the breakpoint grid.  The minimum is found by a
    right-to-left dynamic programme over grid points, costing
    ``O(points * delta * resolution)``.
    """
    s = _check_s(s)
    if resolution < 1:
        raise InvalidInput(f"resolution must be >= 1, got {resolution}")
    if not delta > 0:
        raise InvalidInput(f"delta must be positive, got {delta}")
    R = resolution
    snapped = []
    for a, b in intervals:
        a, b = to_fraction(a), to_fraction(b)
        if not (0 <= a <= b <= 1):
            raise InvalidInput(f"interval [{a}, {b}] is not inside [0, 1]")
        snapped.append((math.floor(a * R), math.ceil(b * R)))
    if not snapped:
        return 0.0
    snapped.sort()
    blocks: list[list[int]] = []
    for lo, hi in snapped:
        if blocks and lo <= blocks[-1][1]:
            blocks[-1][1] = max(blocks[-1][1], hi)
        else:
            blocks.append([lo, hi])

    D = pieces_per_interval(delta, R)
    # step c[d] = cost of a cover of d units; c[0] = 0 (a single point)
    c = np.array([0.0] + [piece_cost(d, R, s) for d in range(1, D + 1)])

    inf = math.inf
    in_set = np.zeros(R + 2, dtype=bool)
    after = np.full(R + 2, inf)  # cost still due once a cover ends at v
    best = np.full(R + 2, inf)
    next_start = [None] * len(blocks)
    for i in range(len(blocks)):
        next_start[i] = blocks[i + 1][0] if i + 1 < len(blocks) else None
        in_set[blocks[i][0] : blocks[i][1] + 1] = True

    for i in range(len(blocks) - 1, -1, -1):
        lo, hi = blocks[i]
        tail = 0.0 if next_start[i] is None else best[next_start[i]]
        after[hi] = tail
        for u in range(hi, lo - 1, -1):
            window = after[u : u + D + 1]
            cand = c[: len(window)] + window
            cand = np.where(in_set[u : u + D + 1], cand, inf)
            if u != hi or lo != hi:
                cand[0] = inf  # a zero-length cover only finishes an isolated point
            best[u] = cand.min()
            if u < hi:
                after[u] = best[u]  # a cover ending inside a block hands over at u
    return float(best[blocks[0][0]])


def box_count_estimate(B: GridSet, box_sizes: Sequence[int]) -> tuple[float, list[int]]:
    """Box-counting slope of ``log N(b)`` against ``log(n / b)``.

    Boxes are index blocks ``[j*b, (j+1)*b)``; ``N(b)`` counts blocks meeting ``B``.
    """
    sizes = [int(b) for b in box_sizes]
    if len(set(sizes)) < 2:
        raise DegenerateFit("box counting needs at least two distinct box sizes")
    if any(b < 1 for b in sizes):
        raise InvalidInput("box sizes must be positive")
    counts = []
    for b in sizes:
        count, prev = 0, -1
        for start, length in B.runs:
            first, last = start // b, (start + length - 1) // b
            if first == prev:
                first += 1
            if last >= first:
                count += last - first + 1
            prev = last
        counts.append(count)
    if min(counts) == 0:
        raise DegenerateFit("empty set has no box-counting dimension")
    n = B.scale.n
    slope = loglog_slope([n / b for b in sizes], counts)
    return slope, counts


def loglog_slope(x: Sequence[float], y: Sequence[float]) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    lx = np.log(np.asarray(x, dtype=float))
    ly = np.log(np.asarray(y, dtype=float))
    if len(lx) < 2 or np.ptp(lx) == 0:
        raise DegenerateFit("need at least two distinct abscissae")
    slope, _ = np.polyfit(lx, ly, 1)
    return float(slope)


@dataclass(frozen=True)
class ScheduleEntry:
    n: int
    delta: float
    stage: Optional[int] = None


def default_schedule(spec: SetSpec, method: str = "counting", min_n: int = 1) -> list[ScheduleEntry]:
    """A four-point refinement schedule suited to the set's variant.

    * Cantor: the last four construction stages up to ``spec.stage`` (at least
      stages 5-8), each at the grid whose interval width in points equals the
      halo, ``n = r**(-2m)`` with ``delta = r**m + 1/n`` so one block spans one
      stage interval.  The classical method uses ``n = r**-m`` instead.
    * Reciprocals: ``n`` large enough that a square-root halo keeps every
      listed point isolated, doubled three times, with ``delta`` halving.
    * Intervals: ``n = 10**4 .. 10**7`` (scaled up to start at ``min_n``) with
      ``delta = 10**-1 .. 10**-4``
      (classical: ``n = 2/delta``, already exact for intervals).
    """
    if spec.variant == "cantor":
        top = max(MIN_TOP_STAGE, spec.stage)
        r = float(cantor_ratio(spec.lam))
        out = []
        for m in range(top - 3, top + 1):
            n = round(r ** (-m if method == "classical" else -2 * m))
            out.append(ScheduleEntry(n, r**m + 1 / n, m))
        return out
    if spec.variant == "point_family":
        if method == "classical":
            raise InvalidInput("the classical method needs interval data; use counting for point families")
        k = spec.count
        # neighbouring points 1/k and 1/(k+1) stay apart once 2*sqrt(n)/n < 1/k**2
        n0 = max(min_n, 16 * (k + 1) ** 4)
        out = [ScheduleEntry(n0 * 2**j, 1e-2 * 2**-j) for j in range(4)]
        if out[-1].n > MAX_GRID:
            raise InvalidInput(f"point family of {k} points needs n beyond 2**62")
        return out
    if method == "classical":
        return [ScheduleEntry(2 * 10 ** (j + 1), 10.0 ** -(j + 1)) for j in range(4)]
    base = max(10**4, min_n)
    return [ScheduleEntry(base * 10**j, 10.0 ** -(j + 1)) for j in range(4)]


def _schedule_values(
    spec: SetSpec, schedule: Sequence[ScheduleEntry], s: float, method: str, halo_rule
) -> list[float]:
    values = []
    for entry in schedule:
        sub = spec.with_stage(entry.stage)
        if method == "counting":
            scale = GridScale(entry.n)
            p = MeasureParams(s, entry.delta, scale)
            values.append(theorem_rhs(sub, p, halo_for(entry.n, halo_rule)).value)
        elif method == "classical":
            values.append(classical_cover_measure(spec_intervals(sub), entry.delta, s, entry.n))
        else:
            raise InvalidInput(f"unknown dimension method {method!r}")
    return values


def dimension_estimate(
    spec: SetSpec,
    schedule: Optional[Sequence[ScheduleEntry]] = None,
    method: str = "counting",
    *,
    halo_rule="sqrt_n",
    tol: float = 1e-3,
    diverge: float = DIVERGE_THRESHOLD,
    vanish: float = VANISH_THRESHOLD,
    slope_tol: float = 1e-9,
) -> float:
    """Critical exponent where the measure stops diverging as ``delta`` shrinks.

    For a candidate ``s`` the schedule is evaluated and the slope of
    ``log value`` against ``log(1/delta)`` is fitted; a positive slope means
    the measure blows up (``s`` below the dimension), a negative one that it
    dies out.  Values past ``diverge``/``vanish`` settle the sign outright.
    ``s`` is bisected on (0, 1] to within ``tol``.  If the measure vanishes
    even at ``s = tol`` the set is reported as zero-dimensional.
    """
    if schedule is None:
        schedule = default_schedule(spec, method)
    schedule = list(schedule)
    if len(schedule) < 3:
        raise InvalidInput("dimension schedule needs at least three entries")
    if any(b.n <= a.n for a, b in zip(schedule, schedule[1:])) and method == "counting":
        raise InvalidInput("schedule grid sizes must increase")
    inv_delta = [1.0 / e.delta for e in schedule]

    def trend(s: float) -> float:
        values = _schedule_values(spec, schedule, s, method, halo_rule)
        if max(values) > diverge:
            return math.inf
        if min(values) < vanish:
            return -math.inf
        return loglog_slope(inv_delta, values)

    lo, hi = tol, 1.0
    if trend(hi) > slope_tol:
        raise NoBracket("measure still diverges at s = 1; the schedule does not resolve the set")
    if trend(lo) <= 0:
        return 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if trend(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)

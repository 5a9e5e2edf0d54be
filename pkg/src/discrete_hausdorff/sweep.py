"""Parameter sweeps over (n, delta, s) and their CSV/JSON serialisation."""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Optional, Sequence, Union

from .generators import SetSpec, load_spec, spec_from_dict
from .grid import GridScale
from .measure import (
    GridTooCoarse,
    MeasureError,
    MeasureParams,
    MeasureReport,
    halo_for,
    loglog_slope,
    theorem_rhs,
)

log = logging.getLogger(__name__)

__all__ = [
    "ConfigError",
    "SweepConfig",
    "COLUMNS",
    "parse_delta_rule",
    "parse_halo_rule",
    "run_sweep",
    "rows_to_csv",
    "rows_to_json",
    "rows_from_csv",
    "rows_from_json",
    "format_rows",
    "sweep_slopes",
]

COLUMNS = ("spec_id", "n", "delta", "s", "halo", "kind", "value", "piece_count", "status")
_FLOAT_COLUMNS = ("delta", "s", "value")
_INT_COLUMNS = ("n", "halo", "piece_count")

_DELTA_RULE = re.compile(r"^\s*n\s*\^\s*\(?\s*(-?\d+(?:\.\d*)?(?:/\d+)?)\s*\)?\s*$")


class ConfigError(ValueError):
    pass


def parse_delta_rule(rule: str):
    """Parse ``"n^-3/4"`` or ``"n^-0.75"`` into a function of ``n``."""
    m = _DELTA_RULE.match(rule)
    if not m:
        raise ConfigError(f"delta rule {rule!r} is not of the form n^<exponent>")
    exponent = float(Fraction(m.group(1)))
    if exponent >= 0:
        raise ConfigError(f"delta rule exponent must be negative, got {exponent}")
    return lambda n: n**exponent


def parse_halo_rule(rule: Union[str, int]) -> Union[str, int]:
    """Validate a halo rule: ``sqrt_n``, ``log2_n``, ``fixed:K`` or a positive int."""
    if isinstance(rule, bool):
        raise ConfigError(f"bad halo rule {rule!r}")
    if isinstance(rule, int) or (isinstance(rule, str) and rule.strip().isdigit()):
        k = int(rule)
        if k < 1:
            raise ConfigError(f"halo must be >= 1, got {k}")
        return k
    try:
        halo_for(4, rule)
    except MeasureError as exc:
        raise ConfigError(str(exc)) from None
    return rule


@dataclass
class SweepConfig:
    spec: SetSpec
    scales: list[int]
    s_values: list[float]
    deltas: list[float] = field(default_factory=list)
    delta_rule: Optional[str] = None
    halo_rule: Union[str, int] = "sqrt_n"
    output_path: Optional[str] = None
    format: str = "csv"

    def __post_init__(self) -> None:
        if not self.scales:
            raise ConfigError("sweep needs at least one grid size")
        if any(isinstance(n, bool) or not isinstance(n, int) or n < 1 for n in self.scales):
            raise ConfigError(f"grid sizes must be positive integers, got {self.scales}")
        if not self.s_values:
            raise ConfigError("sweep needs at least one s value")
        if bool(self.deltas) == bool(self.delta_rule):
            raise ConfigError("give either explicit deltas or a delta rule, not both or neither")
        if any(not d > 0 for d in self.deltas):
            raise ConfigError(f"deltas must be positive, got {self.deltas}")
        if self.delta_rule:
            parse_delta_rule(self.delta_rule)
        self.halo_rule = parse_halo_rule(self.halo_rule)
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.format!r}")

    def deltas_for(self, n: int) -> list[float]:
        if self.delta_rule:
            return [parse_delta_rule(self.delta_rule)(n)]
        return list(self.deltas)

    @classmethod
    def from_dict(cls, data: dict[str, Any], base_dir: Optional[str] = None) -> SweepConfig:
        if not isinstance(data, dict):
            raise ConfigError("sweep config must be a JSON object")
        spec = data.get("spec")
        if isinstance(spec, str):
            path = spec if base_dir is None or spec.startswith("/") else f"{base_dir}/{spec}"
            spec = load_spec(path)
        elif isinstance(spec, dict):
            spec = spec_from_dict(spec)
        else:
            raise ConfigError("sweep config needs a 'spec' object or path")
        deltas = data.get("deltas") or []
        return cls(
            spec=spec,
            scales=[int(n) for n in data.get("scales", [])],
            s_values=[float(s) for s in data.get("s_values", [])],
            deltas=[float(d) for d in deltas] if isinstance(deltas, list) else [],
            delta_rule=data.get("delta_rule") or (deltas if isinstance(deltas, str) else None),
            halo_rule=data.get("halo_rule", "sqrt_n"),
            output_path=data.get("output_path"),
            format=data.get("format", "csv"),
        )


def _skip_reason(exc: Exception) -> str:
    if isinstance(exc, GridTooCoarse):
        return "skipped:grid_too_coarse"
    name = re.sub(r"(?<!^)(?=[A-Z])", "_", type(exc).__name__).lower()
    return f"skipped:{name}"


def run_sweep(config: SweepConfig) -> list[MeasureReport]:
    """One report per (n, delta, s) cell, sorted by ``(n, delta, s)``.

    A failing cell becomes a row with a ``skipped:<reason>`` status.
    """
    rows = []
    for n in config.scales:
        scale = GridScale(n)
        halo = halo_for(n, config.halo_rule)
        for delta in config.deltas_for(n):
            for s in config.s_values:
                try:
                    rows.append(theorem_rhs(config.spec, MeasureParams(s, delta, scale), halo))
                except MeasureError as exc:
                    reason = _skip_reason(exc)
                    log.warning("n=%d delta=%r s=%r %s: %s", n, delta, s, reason, exc)
                    rows.append(
                        MeasureReport(config.spec.id, n, delta, s, halo, "discrete_h", None, 0, reason)
                    )
    rows.sort(key=lambda r: (r.spec_id, r.n, r.delta, r.s))
    return rows


def sweep_slopes(rows: Iterable[MeasureReport]) -> dict[tuple[int, float], float]:
    """Log-log slope of value against delta for each ``(n, s)`` group with 2+ deltas."""
    groups: dict[tuple[int, float], list[tuple[float, float]]] = {}
    for r in rows:
        if r.status == "ok" and r.value and r.value > 0:
            groups.setdefault((r.n, r.s), []).append((r.delta, r.value))
    out = {}
    for key, pts in sorted(groups.items()):
        if len({d for d, _ in pts}) >= 2:
            out[key] = loglog_slope([d for d, _ in pts], [v for _, v in pts])
    return out


def _fmt(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isinf(value) or math.isnan(value):
            return repr(value)
        return format(value, ".17g")
    return str(value)


def rows_to_csv(rows: Sequence[MeasureReport]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for r in rows:
        d = r.to_dict()
        writer.writerow([_fmt(d[c]) for c in COLUMNS])
    return buf.getvalue()


def rows_to_json(rows: Sequence[MeasureReport]) -> str:
    return json.dumps([{c: r.to_dict()[c] for c in COLUMNS} for r in rows], indent=2) + "\n"


def format_rows(rows: Sequence[MeasureReport], fmt: str) -> str:
    return rows_to_json(rows) if fmt == "json" else rows_to_csv(rows)


def _parse_cell(column: str, text: str) -> Any:
    if text == "":
        return None
    if column in _FLOAT_COLUMNS:
        return float(text)
    if column in _INT_COLUMNS:
        return int(text)
    return text


def rows_from_csv(text: str) -> list[MeasureReport]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != COLUMNS:
        raise ConfigError(f"unexpected CSV header {reader.fieldnames}")
    return [MeasureReport(**{c: _parse_cell(c, row[c]) for c in COLUMNS}) for row in reader]


def rows_from_json(text: str) -> list[MeasureReport]:
    data = json.loads(text)
    if isinstance(data, dict):
        data = [data]
    return [MeasureReport(**{c: row.get(c) for c in COLUMNS}) for row in data]

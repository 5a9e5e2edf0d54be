"""Command-line entry point: ``discrete-hausdorff <command> ...``.

Exit codes: 0 success, 1 unexpected failure, 2 bad configuration,
3 grid too coarse for delta, 4 no dimension bracket.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from typing import Optional, Sequence

from .generators import (
    SetSpec,
    SpecError,
    analytic_reference,
    load_spec,
    render,
    spec_from_dict,
    spec_intervals,
)
from .grid import GridError, GridScale
from .measure import (
    DIVERGE_THRESHOLD,
    GridTooCoarse,
    MeasureError,
    MeasureParams,
    MeasureReport,
    NoBracket,
    ScheduleEntry,
    box_count_estimate,
    classical_cover_measure,
    default_schedule,
    dimension_estimate,
    halo_for,
    lebesgue_bounds,
    theorem_rhs,
)
from .sweep import (
    ConfigError,
    SweepConfig,
    format_rows,
    parse_delta_rule,
    parse_halo_rule,
    run_sweep,
    sweep_slopes,
)

log = logging.getLogger("discrete_hausdorff")

EXIT_OK, EXIT_OTHER, EXIT_CONFIG, EXIT_COARSE, EXIT_NO_BRACKET = 0, 1, 2, 3, 4
DEFAULT_COMPARE_N = 10**6


def _add_common(p: argparse.ArgumentParser, *, multi: bool = False) -> None:
    p.add_argument("--spec", help="SetSpec JSON file")
    p.add_argument("--config", help="JSON config file; command-line flags take precedence")
    action = "append" if multi else "store"
    p.add_argument("--n", type=int, action=action, help="grid resolution" + (" (repeatable)" if multi else ""))
    p.add_argument("--delta", type=float, action=action, help="block diameter bound")
    p.add_argument("--delta-rule", help="delta as a power of n, e.g. 'n^-3/4'")
    p.add_argument("--s", type=float, action=action, help="exponent in (0, 1]")
    p.add_argument("--halo", type=int, help="fixed halo width in grid points")
    p.add_argument("--halo-rule", help="sqrt_n (default), log2_n or fixed:K")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--out", help="write output here instead of stdout")
    p.add_argument("--resolution", type=int, help="breakpoint grid for the classical cover comparator")
    p.add_argument("--seed", type=int, help="reserved; every computation is deterministic")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress and sweep slopes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="discrete-hausdorff",
        description="Discrete s-dimensional measure on finite grids.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("measure", help="evaluate h on the halo superset of a set")
    _add_common(p)
    p.add_argument("--kind", choices=("discrete_h", "classical_cover"), default="discrete_h")

    p = sub.add_parser("sweep", help="evaluate every (n, delta, s) cell")
    _add_common(p, multi=True)

    p = sub.add_parser("dimension", help="estimate the critical exponent")
    _add_common(p, multi=True)
    p.add_argument("--method", choices=("counting", "classical"), default="counting")
    p.add_argument("--stage", type=int, action="append", help="construction stage per schedule entry")

    p = sub.add_parser("compare", help="counting estimate next to box counting")
    _add_common(p)

    p = sub.add_parser("lebesgue", help="lower and upper discrete Lebesgue measure")
    _add_common(p)
    return parser


def _load_config(args) -> dict:
    if not args.config:
        return {}
    with open(args.config, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    return data


def _pick(flag, cfg: dict, key: str, default=None):
    return flag if flag is not None else cfg.get(key, default)


def _spec(args, cfg: dict) -> SetSpec:
    if args.spec:
        return load_spec(args.spec)
    spec = cfg.get("spec")
    if isinstance(spec, dict):
        return spec_from_dict(spec)
    if isinstance(spec, str):
        base = os.path.dirname(os.path.abspath(args.config))
        return load_spec(os.path.join(base, spec))
    raise ConfigError("no set given: pass --spec PATH")


def _halo_rule(args, cfg: dict):
    if args.halo is not None:
        return parse_halo_rule(args.halo)
    return parse_halo_rule(_pick(args.halo_rule, cfg, "halo_rule", "sqrt_n"))


def _single(value, name: str):
    if isinstance(value, list):
        if len(value) != 1:
            raise ConfigError(f"{name} takes a single value here")
        return value[0]
    return value


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_json(obj, out: Optional[str]) -> None:
    _emit(json.dumps(obj, indent=2) + "\n", out)


def cmd_measure(args) -> int:
    cfg = _load_config(args)
    spec = _spec(args, cfg)
    n = _single(_pick(args.n, cfg, "n"), "n")
    s = _single(_pick(args.s, cfg, "s"), "s")
    if n is None or s is None:
        raise ConfigError("measure needs --n and --s")
    n = int(n)
    delta = _single(_pick(args.delta, cfg, "delta"), "delta")
    rule = _pick(args.delta_rule, cfg, "delta_rule")
    if (delta is None) == (rule is None):
        raise ConfigError("give exactly one of --delta or --delta-rule")
    delta = float(delta) if delta is not None else parse_delta_rule(rule)(n)
    fmt = _pick(args.format, cfg, "format", "json")
    scale = GridScale(n)
    params = MeasureParams(float(s), delta, scale)

    if args.kind == "classical_cover":
        resolution = _pick(args.resolution, cfg, "resolution", n)
        value = classical_cover_measure(spec_intervals(spec), delta, float(s), int(resolution))
        report = MeasureReport(spec.id, int(resolution), delta, float(s), 0, "classical_cover", value, 0)
    else:
        report = theorem_rhs(spec, params, halo_for(n, _halo_rule(args, cfg)))
        if report.value > DIVERGE_THRESHOLD:
            log.info("value %.3g exceeds the divergence threshold", report.value)
    if fmt == "json":
        _emit_json(report.to_dict(), args.out)
    else:
        _emit(format_rows([report], "csv"), args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _load_config(args)
    data = dict(cfg)
    data["spec"] = _spec(args, cfg)
    for flag, key in ((args.n, "scales"), (args.s, "s_values"), (args.format, "format"), (args.out, "output_path")):
        if flag is not None:
            data[key] = flag
    if args.delta is not None:
        data["deltas"], data["delta_rule"] = args.delta, None
    elif args.delta_rule is not None:
        data["deltas"], data["delta_rule"] = [], args.delta_rule
    if args.halo is not None:
        data["halo_rule"] = args.halo
    elif args.halo_rule is not None:
        data["halo_rule"] = args.halo_rule
    config = SweepConfig(
        spec=data["spec"],
        scales=[int(n) for n in data.get("scales") or []],
        s_values=[float(s) for s in data.get("s_values") or []],
        deltas=[float(d) for d in data.get("deltas") or []],
        delta_rule=data.get("delta_rule"),
        halo_rule=data.get("halo_rule", "sqrt_n"),
        output_path=data.get("output_path"),
        format=data.get("format", "csv"),
    )
    rows = run_sweep(config)
    for (n, s), slope in sweep_slopes(rows).items():
        log.info("n=%d s=%.17g: log-log slope of value vs delta = %.6f", n, s, slope)
    _emit(format_rows(rows, config.format), config.output_path)
    return EXIT_OK


def _schedule(args, cfg: dict, spec: SetSpec, method: str) -> list[ScheduleEntry]:
    ns = _pick(args.n, cfg, "scales")
    deltas = _pick(args.delta, cfg, "deltas")
    stages = _pick(getattr(args, "stage", None), cfg, "stages")
    if ns is None and deltas is None:
        return default_schedule(spec, method)
    if ns is None or deltas is None or len(ns) != len(deltas):
        raise ConfigError("a custom schedule needs matching --n and --delta lists")
    if stages is not None and len(stages) != len(ns):
        raise ConfigError("--stage must be given once per schedule entry")
    stages = stages or [None] * len(ns)
    return [ScheduleEntry(int(n), float(d), st) for n, d, st in zip(ns, deltas, stages)]


def _reference(spec: SetSpec) -> Optional[float]:
    ref = analytic_reference(spec)
    return None if ref is None else ref[0]


def cmd_dimension(args) -> int:
    cfg = _load_config(args)
    spec = _spec(args, cfg)
    method = _pick(args.method, cfg, "method", "counting")
    schedule = _schedule(args, cfg, spec, method)
    dim = dimension_estimate(spec, schedule, method, halo_rule=_halo_rule(args, cfg))
    _emit_json(
        {
            "spec_id": spec.id,
            "method": method,
            "dimension": dim,
            "reference": _reference(spec),
            "schedule": [[e.n, e.delta, e.stage] for e in schedule],
        },
        args.out,
    )
    return EXIT_OK


def _box_sizes(n: int) -> list[int]:
    # powers of two from ~1e-5 to ~1e-2 of the grid, at least two of them
    sizes = [2**j for j in range(1, 63) if n / 1e5 <= 2**j <= n / 1e2]
    return sizes if len(sizes) >= 2 else [1, 2, 4, 8]


def cmd_compare(args) -> int:
    cfg = _load_config(args)
    spec = _spec(args, cfg)
    n = int(_pick(args.n, cfg, "n", DEFAULT_COMPARE_N))
    halo_rule = _halo_rule(args, cfg)
    counting = dimension_estimate(spec, default_schedule(spec, "counting", min_n=n), halo_rule=halo_rule)
    sizes = _box_sizes(n)
    box, counts = box_count_estimate(render(spec, GridScale(n)), sizes)
    _emit_json(
        {
            "spec_id": spec.id,
            "n": n,
            "counting_estimate": counting,
            "box_count_estimate": box,
            "difference": box - counting,
            "reference": _reference(spec),
            "box_sizes": sizes,
            "box_counts": counts,
        },
        args.out,
    )
    return EXIT_OK


def cmd_lebesgue(args) -> int:
    cfg = _load_config(args)
    spec = _spec(args, cfg)
    n = _single(_pick(args.n, cfg, "n"), "n")
    if n is None:
        raise ConfigError("lebesgue needs --n")
    n = int(n)
    halo = halo_for(n, _halo_rule(args, cfg))
    lower, upper = lebesgue_bounds(spec, GridScale(n), halo)
    rows = [
        MeasureReport(spec.id, n, None, None, halo, "lebesgue_lower", lower, 0),
        MeasureReport(spec.id, n, None, None, halo, "lebesgue_upper", upper, 0),
    ]
    fmt = _pick(args.format, cfg, "format", "json")
    if fmt == "json":
        _emit_json({"spec_id": spec.id, "n": n, "halo": halo, "lower": lower, "upper": upper}, args.out)
    else:
        _emit(format_rows(rows, "csv"), args.out)
    return EXIT_OK


COMMANDS = {
    "measure": cmd_measure,
    "sweep": cmd_sweep,
    "dimension": cmd_dimension,
    "compare": cmd_compare,
    "lebesgue": cmd_lebesgue,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return COMMANDS[args.command](args)
    except GridTooCoarse as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COARSE
    except NoBracket as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_BRACKET
    except (ConfigError, SpecError, GridError, MeasureError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - last-resort exit code
        log.exception("unexpected failure")
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OTHER


if __name__ == "__main__":
    sys.exit(main())

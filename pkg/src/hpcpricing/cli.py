"""Command-line front end.

Exit codes: 0 success, 2 invalid input, 3 normalization undefined for a
requested gain, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, replace
from pathlib import Path

from .errors import InvalidParameter, ModelError, NormalizationUndefined, ScenarioError
from .explore import (
    METRICS,
    AxisSpec,
    isosurface_monotone,
    lifetime_to_depreciation_share,
    metric_function,
    require_sweepable,
    sweep2d,
)
from .model import Anchoring
from .pricing import Scheme, baseline, compare_schemes, evaluate, normalize
from .scenarios import (
    PRESETS,
    Scenario,
    calibrate_lifetime,
    export_field,
    get_preset,
    load_scenario,
    scenario_hash,
)

EXIT_OK, EXIT_VALIDATION, EXIT_NORMALIZATION, EXIT_IO = 0, 2, 3, 4


class _UsageError(Exception):
    pass


def _key_value(text: str) -> tuple[str, float]:
    key, sep, value = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError(f"expected KEY=VALUE, got {text!r}")
    try:
        return key.strip(), float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"value for {key!r} is not a number: {value!r}") from None


def _common_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    src = p.add_mutually_exclusive_group()
    src.add_argument("--preset", choices=sorted(PRESETS), help="bundled scenario (default fermi_like)")
    src.add_argument("--scenario", type=Path, help="JSON scenario file")
    p.add_argument("--set", dest="overrides", action="append", type=_key_value, default=[],
                   metavar="KEY=VALUE", help="override a model parameter (repeatable)")
    p.add_argument("--fix", dest="overrides", action="append", type=_key_value,
                   metavar="KEY=VALUE", help="alias of --set")
    p.add_argument("--anchoring", choices=["auto", "fixed-work", "full-occupancy"])
    p.add_argument("--no-bill-cooling", action="store_true",
                   help="scheme 4 bills IT energy only, without the cooling share")
    p.add_argument("--format", choices=["csv", "json"])
    p.add_argument("--out", type=Path, help="write the document here instead of stdout")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="hpcpricing",
        description="Cost, energy and pricing model of HPC systems under frequency scaling.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", parents=[common], help="evaluate one pricing scheme")
    p.add_argument("--scheme", default="1", choices=["1", "2", "3", "4"])

    sub.add_parser("compare", parents=[common], help="compare the four schemes against the baseline")

    p = sub.add_parser("sweep", parents=[common], help="sample a metric on a 2-D grid")
    p.add_argument("--metric", default="gain_normalized", choices=METRICS)
    p.add_argument("--scheme", default="1", choices=["1", "2", "3", "4"])
    p.add_argument("--x", default="phi:1:5:101", help="name:lo:hi[:steps]")
    p.add_argument("--y", default="sigma:0:1:101", help="name:lo:hi[:steps]")

    p = sub.add_parser("iso", parents=[common], help="extract a level surface z(x, y)")
    p.add_argument("--metric", default="energy_ratio", choices=METRICS)
    p.add_argument("--scheme", default="1", choices=["1", "2", "3", "4"])
    p.add_argument("--level", type=float, default=1.0)
    p.add_argument("--x", default="iota:0:1:41")
    p.add_argument("--y", default="sigma:0:1:41")
    p.add_argument("--z", default="alpha:1:3", help="name:lo:hi")
    p.add_argument("--tolerance", type=float, default=1e-6)
    p.add_argument("--probe", action="append", default=[], metavar="X,Y,Z",
                   help="report on which side of the surface a point lies (repeatable)")

    p = sub.add_parser("calibrate", parents=[common],
                       help="lifetime giving a target depreciation share")
    p.add_argument("--share", type=float, required=True)

    sub.add_parser("presets", parents=[common], help="list bundled scenarios")
    return parser


def _load(args) -> Scenario:
    if args.scenario is not None:
        scenario = load_scenario(args.scenario.read_text(encoding="utf-8"))
    else:
        scenario = get_preset(args.preset or "fermi_like")
    policy_changes = {}
    if args.anchoring is not None:
        policy_changes["anchoring"] = None if args.anchoring == "auto" else Anchoring(args.anchoring)
    if args.no_bill_cooling:
        policy_changes["bill_cooling_energy"] = False
    if policy_changes:
        scenario = replace(scenario, policy=replace(scenario.policy, **policy_changes))
    overrides = dict(args.overrides or [])
    if overrides:
        scenario = scenario.with_overrides(**overrides)
    return scenario


def _emit(text: str, args) -> None:
    if args.out is not None:
        args.out.write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)


def _pct(value: float | None) -> str:
    if value is None:
        return ""
    return f"{round(value * 100, 1) + 0.0:+.1f}%"  # + 0.0 folds -0.0 into +0.0


def _cmd_eval(args, scenario: Scenario) -> int:
    scheme = Scheme.parse(args.scheme)
    out = evaluate(scheme, scenario.config, scenario.workload, scenario.policy)
    base = baseline(scenario.config, scenario.workload)
    try:
        norm = normalize(out, base)
        gain_n, price_n = norm.gain_normalized, norm.price_normalized
        status = EXIT_OK
    except NormalizationUndefined as err:
        gain_n = price_n = None
        print(f"warning: {err}", file=sys.stderr)
        status = EXIT_NORMALIZATION
    if out.capacity_overflow > 0:
        print(f"warning: slowed workload exceeds the timeframe by {out.capacity_overflow:.1%}",
              file=sys.stderr)

    record = {k: (v.value if hasattr(v, "value") else v) for k, v in asdict(out).items()}
    record["gain_normalized"] = gain_n
    record["price_normalized"] = price_n
    if args.format == "json":
        payload = {"outcome": record, "scenario": scenario.name,
                   "scenario_sha256": scenario_hash(scenario)}
        _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", args)
        return status
    lines = [f"# scenario: {scenario.name} ({scenario_hash(scenario)[:12]})"]
    for key, value in record.items():
        if isinstance(value, float):
            value = f"{value:.6f}"
        elif value is None:
            value = "undefined"
        lines.append(f"{key:<22}{value}")
    _emit("\n".join(lines) + "\n", args)
    return status


def _cmd_compare(args, scenario: Scenario) -> int:
    rows = compare_schemes(scenario.config, scenario.workload, scenario.policy)
    if args.format:
        _emit(export_field(rows, args.format, scenario), args)
        return EXIT_OK
    p = scenario.policy
    w = scenario.workload
    lines = [
        f"# scenario: {scenario.name} ({scenario_hash(scenario)[:12]})",
        f"# phi={p.scaling_factor:g} sigma={w.sensitivity:g} beta={w.unscaled_fraction:g} "
        f"iota={scenario.config.idle_fraction:g} "
        f"depreciation_share={lifetime_to_depreciation_share(scenario.config):.3f}",
        f"{'scheme':<8}{'gain/gain0':>12}{'gain/income0':>14}{'price':>10}",
    ]
    for r in rows:
        lines.append(f"{r.scheme.value:<8}{_pct(r.gain_delta_over_gain):>12}"
                     f"{_pct(r.gain_delta_over_income):>14}{_pct(r.price_delta):>10}")
    _emit("\n".join(lines) + "\n", args)
    return EXIT_OK


def _cmd_sweep(args, scenario: Scenario) -> int:
    x_axis, y_axis = AxisSpec.parse(args.x), AxisSpec.parse(args.y)
    field = sweep2d(args.metric, scenario.config, scenario.workload, scenario.policy,
                    x_axis, y_axis, scheme=Scheme.parse(args.scheme))
    extra = {"metric": args.metric, "scheme": int(args.scheme)}
    _emit(export_field(field, args.format or "csv", scenario, extra), args)
    if args.metric == "gain_normalized" and all(math.isnan(v) for v in field.values.flat):
        print("error: baseline gain is zero; normalized gain undefined everywhere", file=sys.stderr)
        return EXIT_NORMALIZATION
    return EXIT_OK


def _cmd_iso(args, scenario: Scenario) -> int:
    x_axis = AxisSpec.parse(args.x, default_steps=41)
    y_axis = AxisSpec.parse(args.y, default_steps=41)
    z_parts = args.z.split(":")
    if len(z_parts) not in (3, 4):
        raise _UsageError(f"--z expects name:lo:hi, got {args.z!r}")
    z_name = z_parts[0]
    try:
        z_lo, z_hi = float(z_parts[1]), float(z_parts[2])
    except ValueError:
        raise _UsageError(f"--z bounds are not numbers: {args.z!r}") from None
    for axis in (x_axis, y_axis, AxisSpec(z_name, z_lo, z_hi, 2)):
        require_sweepable(axis)
    f = metric_function(args.metric, scenario.config, scenario.workload, scenario.policy,
                        (x_axis.parameter_name, y_axis.parameter_name, z_name),
                        scheme=Scheme.parse(args.scheme))
    surface = isosurface_monotone(f, x_axis, y_axis, z_lo, z_hi, args.level,
                                  tolerance=args.tolerance, z_name=z_name)
    extra = {"metric": args.metric, "scheme": int(args.scheme)}
    _emit(export_field(surface, args.format or "csv", scenario, extra), args)
    for probe in args.probe:
        try:
            x, y, z = (float(v) for v in probe.split(","))
        except ValueError:
            raise _UsageError(f"--probe expects X,Y,Z, got {probe!r}") from None
        side = {1: "above", -1: "below", 0: "on"}[surface.classify(x, y, z)]
        print(f"probe ({x:g}, {y:g}, {z:g}): {side}", file=sys.stderr)
    return EXIT_OK


def _cmd_calibrate(args, scenario: Scenario) -> int:
    lifetime = calibrate_lifetime(scenario.config, args.share)
    _emit(f"lifetime_years {lifetime:.6f}\n", args)
    return EXIT_OK


def _cmd_presets(args, scenario: Scenario | None) -> int:
    lines = []
    for name in sorted(PRESETS):
        preset = PRESETS[name]
        share = lifetime_to_depreciation_share(preset.config)
        lines.append(f"{name} (depreciation share {share:.4f}, sha256 {scenario_hash(preset)[:12]})")
        lines.extend(f"  - {note}" for note in preset.provenance_notes)
    _emit("\n".join(lines) + "\n", args)
    return EXIT_OK


_COMMANDS = {
    "eval": _cmd_eval,
    "compare": _cmd_compare,
    "sweep": _cmd_sweep,
    "iso": _cmd_iso,
    "calibrate": _cmd_calibrate,
    "presets": _cmd_presets,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        scenario = None if args.command == "presets" else _load(args)
        return _COMMANDS[args.command](args, scenario)
    except NormalizationUndefined as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_NORMALIZATION
    except (InvalidParameter, ScenarioError, _UsageError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_IO
    except ModelError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())

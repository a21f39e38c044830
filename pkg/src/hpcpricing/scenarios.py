"""Scenario files, bundled presets, lifetime calibration and CSV/JSON export.

A scenario file is a flat JSON document::

    {
      "extends": "fermi_like",
      "name": "my-run",
      "config": {"idle_fraction": 0.1},
      "workload": {},
      "policy": {"scaling_factor": 2.0, "anchoring": "auto"}
    }

Without ``extends`` every model parameter must be given. Unknown keys are
rejected so that a misspelled parameter never silently falls back to a
default.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any, Iterable, Mapping, Union

import numpy as np

from .errors import InvalidParameter, ParseError, ScenarioError, UnknownField, ValidationError
from .explore import Field2D, IsoSurface, lifetime_to_depreciation_share, yearly_energy_cost
from .model import (
    Anchoring,
    ScalingPolicy,
    SystemConfig,
    WorkloadSpec,
    apply_overrides,
    check_pair,
)
from .pricing import ComparisonRow


@dataclass(frozen=True)
class Scenario:
    name: str
    config: SystemConfig
    workload: WorkloadSpec
    policy: ScalingPolicy
    provenance_notes: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not isinstance(self.name, str) or not self.name.strip():
            raise ValidationError("name", "non-empty text", self.name)
        object.__setattr__(self, "provenance_notes", tuple(self.provenance_notes))
        check_pair(self.config, self.workload)

    def with_overrides(self, **changes) -> "Scenario":
        config, workload, policy = apply_overrides(self.config, self.workload, self.policy, changes)
        return replace(self, config=config, workload=workload, policy=policy)


def calibrate_lifetime(config: SystemConfig, target_share: float) -> float:
    """Lifetime (years) at which depreciation is ``target_share`` of the unscaled timeframe cost.

    Closed-form inverse of :func:`~hpcpricing.explore.lifetime_to_depreciation_share`.
    """
    if not 0 < target_share < 1:
        raise InvalidParameter("target_share", "in (0, 1)", target_share)
    energy = yearly_energy_cost(config)
    if not energy > 0:
        raise InvalidParameter("it_energy_cost_per_year", "> 0 for calibration",
                               config.it_energy_cost_per_year)
    return config.install_cost * (1 - target_share) / (target_share * energy)


# Fermi-like stand-in values. None of them is published; the only aggregate
# they are tuned to reproduce is the 67% depreciation share of timeframe cost.
_FERMI_CORES = 163_840
_FERMI_IT_ENERGY = 860_000.0  # ~5 W per core at 0.12/kWh over a year
_FERMI_PUE = 1.25
_FERMI_U = 0.9
_INSTALL_TO_ENERGY = 7.33  # install cost over yearly (utilized, cooled) energy cost

_FERMI_CONFIG = SystemConfig(
    timeframe_days=30.0,
    total_cores=_FERMI_CORES,
    pue=_FERMI_PUE,
    electricity_price=0.12,
    lifetime_years=3.6,
    install_cost=_INSTALL_TO_ENERGY * _FERMI_PUE * _FERMI_U * _FERMI_IT_ENERGY,
    it_energy_cost_per_year=_FERMI_IT_ENERGY,
    roi=1.2,
    utilization=_FERMI_U,
    idle_fraction=0.2,
    alpha=3.0,
)
_FERMI_WORKLOAD = WorkloadSpec(tts_max_freq_hours=10.0, cores_per_job=1024, sensitivity=0.2,
                               unscaled_fraction=0.5)
_FERMI_POLICY = ScalingPolicy(scaling_factor=2.0)

_FERMI_NOTES = (
    "stand-in values, not the published configuration of any machine",
    "total_cores 163840: size of a 10-rack Blue Gene/Q class system",
    "it_energy_cost_per_year 860000 at electricity_price 0.12: about 5 W per core",
    "pue 1.25, utilization 0.9, roi 1.2: round figures; utilization*roi > 1 keeps the baseline profitable",
    "install_cost = 7.33 x yearly energy cost and lifetime_years 3.6: depreciation share 0.67",
    "timeframe_days 30: one month",
    "alpha 3, idle_fraction 0.2: cubic dynamic power, 20% idle power",
    "tts_max_freq_hours 10, cores_per_job 1024, sensitivity 0.2, unscaled_fraction 0.5, "
    "scaling_factor 2: the memory-bound set point of the scheme comparison",
)


def _build_presets() -> dict[str, Scenario]:
    fermi = Scenario("fermi_like", _FERMI_CONFIG, _FERMI_WORKLOAD, _FERMI_POLICY, _FERMI_NOTES)
    energy_prop = Scenario(
        "energy_proportional",
        replace(_FERMI_CONFIG, idle_fraction=0.01),
        _FERMI_WORKLOAD, _FERMI_POLICY,
        _FERMI_NOTES + ("idle_fraction 0.01: near energy-proportional hardware",),
    )
    low_dep = Scenario(
        "low_depreciation",
        replace(_FERMI_CONFIG, install_cost=250.0),
        _FERMI_WORKLOAD, _FERMI_POLICY,
        _FERMI_NOTES + ("install_cost 250: depreciation below 0.01% of timeframe cost",),
    )
    return {s.name: s for s in (fermi, energy_prop, low_dep)}


PRESETS: Mapping[str, Scenario] = _build_presets()


def get_preset(name: str) -> Scenario:
    try:
        return PRESETS[name]
    except KeyError:
        raise ValidationError("extends", "one of " + ", ".join(PRESETS), name) from None


_SECTIONS = {"config": SystemConfig, "workload": WorkloadSpec, "policy": ScalingPolicy}
_TOP_KEYS = {"extends", "name", "notes", *_SECTIONS}


def _policy_fields(data: Mapping[str, Any]) -> dict[str, Any]:
    out = dict(data)
    if "anchoring" in out:
        value = out["anchoring"]
        if value in (None, "auto"):
            out["anchoring"] = None
        else:
            try:
                out["anchoring"] = Anchoring(value)
            except ValueError:
                raise ValidationError("policy.anchoring",
                                      "one of auto, fixed-work, full-occupancy", value) from None
    return out


def scenario_from_dict(doc: Mapping[str, Any]) -> Scenario:
    """Build a validated scenario from an already-parsed document."""
    if not isinstance(doc, Mapping):
        raise ParseError("scenario document must be a JSON object")
    for key in doc:
        if key not in _TOP_KEYS:
            raise UnknownField(key, "scenario")

    base = get_preset(doc["extends"]) if doc.get("extends") is not None else None
    records = {}
    for section, cls in _SECTIONS.items():
        data = doc.get(section, {})
        if not isinstance(data, Mapping):
            raise ParseError(f"{section!r} must be an object")
        known = {f.name for f in fields(cls)}
        for key in data:
            if key not in known:
                raise UnknownField(key, section)
        data = _policy_fields(data) if section == "policy" else dict(data)
        if base is not None:
            merged = {**asdict(getattr(base, section)), **data}
        else:
            merged = data
            required = {f.name for f in fields(cls)}
            if section == "policy":
                required = {"scaling_factor"}
            missing = sorted(required - set(merged))
            if missing:
                raise ValidationError(f"{section}.{missing[0]}", "required (no preset extended)")
        try:
            records[section] = cls(**merged)
        except InvalidParameter as err:
            raise ValidationError(f"{section}.{err.field}", err.bound, err.value) from None

    if "name" in doc:
        name = doc["name"]
    else:
        name = base.name if base is not None else "scenario"
    notes = doc.get("notes")
    if notes is None:
        notes = base.provenance_notes if base is not None else ()
    elif not isinstance(notes, list) or not all(isinstance(n, str) for n in notes):
        raise ValidationError("notes", "list of text", notes)
    try:
        return Scenario(name, records["config"], records["workload"], records["policy"], tuple(notes))
    except InvalidParameter as err:
        if isinstance(err, ValidationError):
            raise
        raise ValidationError(f"workload.{err.field}", err.bound, err.value) from None


def load_scenario(source: str) -> Scenario:
    """Parse and validate a scenario document given as JSON text."""
    try:
        doc = json.loads(source, parse_constant=_reject_constant)
    except json.JSONDecodeError as err:
        raise ParseError(err.msg, err.lineno, err.colno) from None
    return scenario_from_dict(doc)


def _reject_constant(name: str):
    raise ParseError(f"non-finite number {name} is not allowed")


def scenario_to_dict(scenario: Scenario) -> dict[str, Any]:
    policy = asdict(scenario.policy)
    policy["anchoring"] = scenario.policy.anchoring.value if scenario.policy.anchoring else "auto"
    return {
        "name": scenario.name,
        "config": asdict(scenario.config),
        "workload": asdict(scenario.workload),
        "policy": policy,
        "notes": list(scenario.provenance_notes),
    }


def dump_scenario(scenario: Scenario) -> str:
    return json.dumps(scenario_to_dict(scenario), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def scenario_hash(scenario: Scenario) -> str:
    canonical = json.dumps(scenario_to_dict(scenario), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _fmt(value: float | None) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ""
    return format(float(value), "#.9g")


def _json_num(value):
    if value is None:
        return None
    value = float(value)
    return None if math.isnan(value) else value


def _axis_dict(axis) -> dict[str, Any]:
    return {"name": axis.parameter_name, "lo": axis.lo, "hi": axis.hi, "steps": axis.steps}


Exportable = Union[Field2D, IsoSurface, Iterable[ComparisonRow]]


def _table(obj: Exportable) -> tuple[str, list[str], list[list], dict[str, Any]]:
    """Header, rows and JSON payload for an exportable object."""
    if isinstance(obj, Field2D):
        xs, ys = obj.x_axis.values, obj.y_axis.values
        rows = [[xs[i], ys[j], obj.values[i, j]]
                for i in range(len(xs)) for j in range(len(ys))]
        payload = {
            "kind": "field2d",
            "metric": obj.metric_name,
            "x_axis": _axis_dict(obj.x_axis),
            "y_axis": _axis_dict(obj.y_axis),
            "values": [[_json_num(v) for v in row] for row in obj.values],
        }
        return "field2d", [obj.x_axis.parameter_name, obj.y_axis.parameter_name, obj.metric_name], rows, payload
    if isinstance(obj, IsoSurface):
        xs, ys = obj.x_axis.values, obj.y_axis.values
        rows = [[xs[i], ys[j], obj.heights[i, j], int(obj.column_side[i, j])]
                for i in range(len(xs)) for j in range(len(ys))]
        payload = {
            "kind": "isosurface",
            "x_axis": _axis_dict(obj.x_axis),
            "y_axis": _axis_dict(obj.y_axis),
            "z": {"name": obj.z_name, "lo": obj.z_lo, "hi": obj.z_hi},
            "level": obj.level,
            "tolerance": obj.tolerance,
            "values": [[_json_num(v) for v in row] for row in obj.heights],
            "column_side": obj.column_side.astype(int).tolist(),
            "increasing": obj.increasing.astype(bool).tolist(),
        }
        header = [obj.x_axis.parameter_name, obj.y_axis.parameter_name, obj.z_name, "column_side"]
        return "isosurface", header, rows, payload

    rows_in = list(obj)
    header = ["scheme", "gain", "income", "avg_job_price", "gain_delta_over_gain",
              "gain_delta_over_income", "price_delta"]
    rows = [[r.scheme.value, r.gain, r.income, r.avg_job_price, r.gain_delta_over_gain,
             r.gain_delta_over_income, r.price_delta] for r in rows_in]
    payload = {
        "kind": "comparison",
        "rows": [{
            "scheme": r.scheme.value,
            "gain": r.gain,
            "income": r.income,
            "avg_job_price": r.avg_job_price,
            "gain_delta_over_gain": _json_num(r.gain_delta_over_gain),
            "gain_delta_over_income": r.gain_delta_over_income,
            "price_delta": r.price_delta,
        } for r in rows_in],
    }
    return "comparison", header, rows, payload


def export_field(obj: Exportable, fmt: str = "csv", scenario: Scenario | None = None,
                 extra: Mapping[str, Any] | None = None) -> str:
    """Render a sweep, isosurface or scheme comparison as CSV or JSON text.

    Output is byte-identical for identical inputs: no timestamps, sorted
    JSON keys, reals in CSV written with 9 significant digits and absent
    values as empty cells.
    """
    fmt = fmt.lower()
    if fmt not in ("csv", "json"):
        raise InvalidParameter("format", "csv or json", fmt)
    kind, header, rows, payload = _table(obj)
    provenance: dict[str, Any] = {}
    if scenario is not None:
        provenance["scenario"] = scenario_to_dict(scenario)
        provenance["scenario_sha256"] = scenario_hash(scenario)
    if extra:
        provenance.update(extra)

    if fmt == "json":
        payload["provenance"] = provenance
        return json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False, allow_nan=False) + "\n"

    buf = io.StringIO()
    buf.write(f"# kind: {kind}\n")
    if scenario is not None:
        buf.write(f"# scenario: {scenario.name}\n")
        buf.write(f"# scenario_sha256: {provenance['scenario_sha256']}\n")
        compact = json.dumps(provenance["scenario"], sort_keys=True, separators=(",", ":"),
                             ensure_ascii=False)
        buf.write(f"# scenario_json: {compact}\n")
    for key in sorted(extra or {}):
        buf.write(f"# {key}: {extra[key]}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([cell if isinstance(cell, (int, np.integer)) and not isinstance(cell, bool)
                         else _fmt(cell) for cell in row])
    return buf.getvalue()


def check_catalog(presets: Mapping[str, Scenario] = PRESETS) -> None:
    """Raise ScenarioError if a bundled preset breaks its documented property."""
    share = lifetime_to_depreciation_share(presets["fermi_like"].config)
    if abs(share - 0.67) > 0.005:
        raise ScenarioError(f"fermi_like depreciation share {share:.4f} is not 0.67 ± 0.005")
    if presets["energy_proportional"].config.idle_fraction != 0.01:
        raise ScenarioError("energy_proportional idle_fraction is not 0.01")
    share = lifetime_to_depreciation_share(presets["low_depreciation"].config)
    if share > 1e-4:
        raise ScenarioError(f"low_depreciation share {share:.2e} exceeds 1e-4")


check_catalog()

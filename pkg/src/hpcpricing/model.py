"""Cost, power and time-to-solution model of an HPC facility under frequency scaling.

Facility parameters live in :class:`SystemConfig`, the representative job in
:class:`WorkloadSpec` and the frequency setting in :class:`ScalingPolicy`.
:func:`derive` turns the first two into the intermediate quantities
(coefficients, per-core powers, depreciation per timeframe) used by the
pricing module.

All quantities are plain floats. Monetary values are never rounded here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from enum import Enum
from typing import Mapping

from .errors import DegenerateBoundary, InvalidParameter

HOURS_PER_YEAR = 24 * 365
ALPHA_MAX = 4.0
DEFAULT_STRETCH_LIMIT = 1.5


def _require(ok: bool, field: str, bound: str, value: object) -> None:
    if not ok:
        raise InvalidParameter(field, bound, value)


def _as_count(value, field: str) -> int:
    if isinstance(value, bool):
        raise InvalidParameter(field, "integer", value)
    if isinstance(value, float) and value.is_integer():
        return int(value)
    if not isinstance(value, int):
        raise InvalidParameter(field, "integer", value)
    return value


def _finite(value, field: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InvalidParameter(field, "real number", value)
    value = float(value)
    if not math.isfinite(value):
        raise InvalidParameter(field, "finite", value)
    return value


class Anchoring(Enum):
    """How many jobs fill a timeframe once jobs are slowed down."""

    FIXED_WORK = "fixed-work"
    FULL_OCCUPANCY = "full-occupancy"


@dataclass(frozen=True)
class SystemConfig:
    timeframe_days: float
    total_cores: int
    pue: float
    electricity_price: float  # currency per kWh
    lifetime_years: float
    install_cost: float
    it_energy_cost_per_year: float
    roi: float
    utilization: float
    idle_fraction: float
    alpha: float

    def __post_init__(self):
        for f in fields(self):
            if f.name == "total_cores":
                object.__setattr__(self, f.name, _as_count(self.total_cores, f.name))
            else:
                object.__setattr__(self, f.name, _finite(getattr(self, f.name), f.name))
        _require(self.timeframe_days > 0, "timeframe_days", "> 0", self.timeframe_days)
        _require(self.total_cores >= 1, "total_cores", "≥ 1", self.total_cores)
        _require(self.pue >= 1, "pue", "≥ 1", self.pue)
        _require(self.electricity_price > 0, "electricity_price", "> 0", self.electricity_price)
        _require(self.lifetime_years > 0, "lifetime_years", "> 0", self.lifetime_years)
        _require(self.install_cost > 0, "install_cost", "> 0", self.install_cost)
        _require(self.it_energy_cost_per_year >= 0, "it_energy_cost_per_year", "≥ 0",
                 self.it_energy_cost_per_year)
        _require(self.roi >= 1, "roi", "≥ 1", self.roi)
        _require(0 < self.utilization <= 1, "utilization", "in (0, 1]", self.utilization)
        _require(0 <= self.idle_fraction <= 1, "idle_fraction", "in [0, 1]", self.idle_fraction)
        _require(1 <= self.alpha <= ALPHA_MAX, "alpha", f"in [1, {ALPHA_MAX:g}]", self.alpha)


@dataclass(frozen=True)
class WorkloadSpec:
    tts_max_freq_hours: float
    cores_per_job: int
    sensitivity: float
    unscaled_fraction: float

    def __post_init__(self):
        object.__setattr__(self, "cores_per_job", _as_count(self.cores_per_job, "cores_per_job"))
        for name in ("tts_max_freq_hours", "sensitivity", "unscaled_fraction"):
            object.__setattr__(self, name, _finite(getattr(self, name), name))
        _require(self.tts_max_freq_hours > 0, "tts_max_freq_hours", "> 0", self.tts_max_freq_hours)
        _require(self.cores_per_job >= 1, "cores_per_job", "≥ 1", self.cores_per_job)
        _require(0 <= self.sensitivity <= 1, "sensitivity", "in [0, 1]", self.sensitivity)
        _require(0 <= self.unscaled_fraction <= 1, "unscaled_fraction", "in [0, 1]",
                 self.unscaled_fraction)


@dataclass(frozen=True)
class ScalingPolicy:
    """Frequency setting plus the closure choices used by the pricing module.

    ``anchoring=None`` lets each scheme pick its default (fixed work for
    schemes 1-3, full occupancy for scheme 4).
    """

    scaling_factor: float = 1.0
    anchoring: Anchoring | None = None
    bill_cooling_energy: bool = True

    def __post_init__(self):
        object.__setattr__(self, "scaling_factor", _finite(self.scaling_factor, "scaling_factor"))
        _require(self.scaling_factor >= 1, "scaling_factor", "≥ 1", self.scaling_factor)
        if self.anchoring is not None and not isinstance(self.anchoring, Anchoring):
            object.__setattr__(self, "anchoring", Anchoring(self.anchoring))
        if not isinstance(self.bill_cooling_energy, bool):
            raise InvalidParameter("bill_cooling_energy", "boolean", self.bill_cooling_energy)


@dataclass(frozen=True)
class DerivedModel:
    system_cost_per_year: float
    cooling_cost_per_year: float
    it_energy_cost_lifetime: float
    cooling_cost_lifetime: float
    total_energy_cost_lifetime: float
    depreciation_per_timeframe: float
    coeff_total: float  # currency per core-hour, depreciation + energy
    coeff_system_only: float  # currency per core-hour, depreciation only
    core_power: float  # W
    core_idle_power: float
    core_active_power: float
    job_power_max: float
    active_resources: float
    alpha: float


def check_pair(config: SystemConfig, workload: WorkloadSpec) -> None:
    _require(workload.cores_per_job <= config.total_cores, "cores_per_job",
             f"≤ total_cores ({config.total_cores})", workload.cores_per_job)


def derive(config: SystemConfig, workload: WorkloadSpec) -> DerivedModel:
    """Compute every intermediate quantity from the base parameters."""
    check_pair(config, workload)
    lf = config.lifetime_years
    system_cost_per_year = config.install_cost / lf
    cooling_cost_per_year = config.it_energy_cost_per_year * (config.pue - 1)
    it_energy_cost_lifetime = config.it_energy_cost_per_year * lf
    cooling_cost_lifetime = cooling_cost_per_year * lf
    total_energy_cost_lifetime = it_energy_cost_lifetime + cooling_cost_lifetime
    core_hours = config.total_cores * lf * HOURS_PER_YEAR

    power = (1000 * config.it_energy_cost_per_year / config.electricity_price
             / (config.total_cores * 365 * 24))
    core_idle_power = config.idle_fraction * power
    core_active_power = (1 - config.idle_fraction) * power
    # re-summed so idle + active == core_power exactly (within 1 ulp of `power`)
    core_power = core_idle_power + core_active_power

    return DerivedModel(
        system_cost_per_year=system_cost_per_year,
        cooling_cost_per_year=cooling_cost_per_year,
        it_energy_cost_lifetime=it_energy_cost_lifetime,
        cooling_cost_lifetime=cooling_cost_lifetime,
        total_energy_cost_lifetime=total_energy_cost_lifetime,
        depreciation_per_timeframe=system_cost_per_year / 365 * config.timeframe_days,
        coeff_total=(config.roi * config.install_cost + total_energy_cost_lifetime) / core_hours,
        coeff_system_only=config.roi * config.install_cost / core_hours,
        core_power=core_power,
        core_idle_power=core_idle_power,
        core_active_power=core_active_power,
        job_power_max=workload.cores_per_job * (core_idle_power + core_active_power),
        active_resources=config.total_cores * config.utilization,
        alpha=config.alpha,
    )


def _check_phi(phi: float) -> None:
    _require(math.isfinite(phi) and phi >= 1, "scaling_factor", "≥ 1", phi)


def _check_sigma(sigma: float) -> None:
    _require(0 <= sigma <= 1, "sensitivity", "in [0, 1]", sigma)


def tts_stretch(phi: float, sigma: float) -> float:
    """Ratio of scaled to unscaled time-to-solution, ``1 + (phi - 1) * sigma``."""
    _check_phi(phi)
    _check_sigma(sigma)
    return 1 + (phi - 1) * sigma


def scaled_tts(delta_m: float, phi: float, sigma: float) -> float:
    """Job duration (hours) when run at ``f_max / phi``."""
    _require(delta_m > 0, "tts_max_freq_hours", "> 0", delta_m)
    _check_phi(phi)
    _check_sigma(sigma)
    return delta_m + delta_m * (phi - 1) * sigma


def job_power_scaled(derived: DerivedModel, workload: WorkloadSpec, phi: float) -> float:
    """Job power (W) at the scaled frequency; idle power does not scale."""
    _check_phi(phi)
    return workload.cores_per_job * (derived.core_idle_power
                                     + derived.core_active_power / phi ** derived.alpha)


def energy_ratio(iota: float, sigma: float, alpha: float, phi: float) -> float:
    """Energy at max frequency over energy at the scaled frequency.

    Values above 1 mean that slowing the job down saves energy.
    """
    _require(0 <= iota <= 1, "idle_fraction", "in [0, 1]", iota)
    _check_sigma(sigma)
    _require(alpha >= 1, "alpha", "≥ 1", alpha)
    _check_phi(phi)
    return 1 / ((iota + (1 - iota) / phi ** alpha) * (1 + (phi - 1) * sigma))


def acceptable_sensitivity_bound(phi: float,
                                 stretch_limit: float = DEFAULT_STRETCH_LIMIT) -> float:
    """Largest sensitivity whose TtS stretch stays within ``stretch_limit``.

    Raises DegenerateBoundary at ``phi == 1``, where every sensitivity is
    acceptable; the exception carries the clamp value 1.0.
    """
    _check_phi(phi)
    _require(stretch_limit >= 1, "stretch_limit", "≥ 1", stretch_limit)
    if phi == 1:
        raise DegenerateBoundary("no boundary at scaling_factor = 1: every sensitivity is acceptable", 1.0)
    return min(1.0, max(0.0, (stretch_limit - 1) / (phi - 1)))


# Short names accepted by overrides and sweep axes, mapped to (record, field).
PARAMETERS: dict[str, tuple[str, str]] = {
    **{f.name: ("config", f.name) for f in fields(SystemConfig)},
    **{f.name: ("workload", f.name) for f in fields(WorkloadSpec)},
    "scaling_factor": ("policy", "scaling_factor"),
    "theta": ("config", "timeframe_days"),
    "cores": ("config", "total_cores"),
    "PUE": ("config", "pue"),
    "price": ("config", "electricity_price"),
    "LF": ("config", "lifetime_years"),
    "lifetime": ("config", "lifetime_years"),
    "ROI": ("config", "roi"),
    "U": ("config", "utilization"),
    "iota": ("config", "idle_fraction"),
    "delta_m": ("workload", "tts_max_freq_hours"),
    "nu": ("workload", "cores_per_job"),
    "sigma": ("workload", "sensitivity"),
    "beta": ("workload", "unscaled_fraction"),
    "phi": ("policy", "scaling_factor"),
}

SWEEPABLE = ("phi", "sigma", "iota", "alpha", "LF")


def resolve_parameter(name: str) -> tuple[str, str]:
    try:
        return PARAMETERS[name]
    except KeyError:
        raise InvalidParameter(name, "a known model parameter") from None


def apply_overrides(config: SystemConfig, workload: WorkloadSpec, policy: ScalingPolicy,
                    overrides: Mapping[str, float]
                    ) -> tuple[SystemConfig, WorkloadSpec, ScalingPolicy]:
    """Return copies of the three records with ``overrides`` applied and re-validated."""
    changes: dict[str, dict[str, float]] = {"config": {}, "workload": {}, "policy": {}}
    for name, value in overrides.items():
        record, field = resolve_parameter(name)
        changes[record][field] = value
    if changes["config"]:
        config = replace(config, **changes["config"])
    if changes["workload"]:
        workload = replace(workload, **changes["workload"])
    if changes["policy"]:
        policy = replace(policy, **changes["policy"])
    check_pair(config, workload)
    return config, workload, policy

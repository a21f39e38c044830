"""Income functions of the four pricing schemes and per-timeframe outcomes.

Income formulas are written per job-wave (all active cores running one job
each) and then scaled by the number of waves that fit in the timeframe, so
that income, energy cost and depreciation all refer to the same amount of
machine time. The wave count depends on the :class:`~hpcpricing.model.Anchoring`.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import NormalizationUndefined
from .model import (
    Anchoring,
    DerivedModel,
    ScalingPolicy,
    SystemConfig,
    WorkloadSpec,
    derive,
    job_power_scaled,
    scaled_tts,
)


class Scheme(Enum):
    S1 = 1  # real TtS, coefficient includes energy
    S2 = 2  # oracle TtS at max frequency
    S3 = 3  # real TtS discounted by the scaling factor
    S4 = 4  # depreciation-only coefficient, energy billed explicitly

    @classmethod
    def parse(cls, value) -> "Scheme":
        if isinstance(value, Scheme):
            return value
        text = str(value).strip().lower().removeprefix("scheme").removeprefix("s").strip()
        try:
            return cls(int(text))
        except ValueError:
            raise ValueError(f"unknown pricing scheme {value!r}; expected 1-4") from None


DEFAULT_ANCHORING = {
    Scheme.S1: Anchoring.FIXED_WORK,
    Scheme.S2: Anchoring.FIXED_WORK,
    Scheme.S3: Anchoring.FIXED_WORK,
    Scheme.S4: Anchoring.FULL_OCCUPANCY,
}


@dataclass(frozen=True)
class TimeframeOutcome:
    scheme: Scheme
    anchoring: Anchoring
    income: float
    it_energy_cost: float
    cooling_energy_cost: float
    depreciation_cost: float
    total_cost: float
    gain: float
    avg_job_price: float
    jobs_per_timeframe: float
    capacity_overflow: float  # 0 when the slowed workload fits in the timeframe


@dataclass(frozen=True)
class NormalizedOutcome:
    gain_normalized: float
    price_normalized: float
    baseline: TimeframeOutcome


@dataclass(frozen=True)
class ComparisonRow:
    scheme: Scheme
    gain: float
    income: float
    avg_job_price: float
    gain_delta_over_gain: float | None  # None when the baseline gain is zero
    gain_delta_over_income: float
    price_delta: float


def resolve_anchoring(scheme: Scheme, policy: ScalingPolicy) -> Anchoring:
    return policy.anchoring if policy.anchoring is not None else DEFAULT_ANCHORING[scheme]


def _mean_duration(workload: WorkloadSpec, phi: float) -> float:
    """Average job duration when a fraction ``1 - beta`` of the jobs is slowed."""
    beta = workload.unscaled_fraction
    delta_m = workload.tts_max_freq_hours
    delta_s = scaled_tts(delta_m, phi, workload.sensitivity)
    # written as an offset from delta_m so that it is exactly delta_m when nothing is slowed
    return delta_m + (1 - beta) * (delta_s - delta_m)


def wave_count(anchoring: Anchoring, config: SystemConfig, workload: WorkloadSpec,
               policy: ScalingPolicy) -> float:
    """Number of job waves executed during the timeframe (real-valued)."""
    hours = 24 * config.timeframe_days
    if Anchoring(anchoring) is Anchoring.FIXED_WORK:
        return hours / workload.tts_max_freq_hours
    return hours / _mean_duration(workload, policy.scaling_factor)


def _job_energy_kwh(workload: WorkloadSpec, policy: ScalingPolicy, derived: DerivedModel) -> float:
    # mean energy per job, weighted over slowed and non-slowed jobs
    phi = policy.scaling_factor
    beta = workload.unscaled_fraction
    delta_m = workload.tts_max_freq_hours
    delta_s = scaled_tts(delta_m, phi, workload.sensitivity)
    pi_s = job_power_scaled(derived, workload, phi)
    return ((1 - beta) * pi_s * delta_s + beta * derived.job_power_max * delta_m) / 1000


def _jobs_per_wave(workload: WorkloadSpec, derived: DerivedModel) -> float:
    return derived.active_resources / workload.cores_per_job


def it_energy_cost_timeframe(config: SystemConfig, workload: WorkloadSpec, policy: ScalingPolicy,
                             derived: DerivedModel | None = None,
                             anchoring: Anchoring | None = None) -> float:
    """IT (non-cooling) energy cost of the timeframe's workload.

    ``anchoring`` defaults to the policy's, or fixed work when the policy
    leaves it to the scheme.
    """
    if derived is None:
        derived = derive(config, workload)
    if anchoring is None:
        anchoring = policy.anchoring or Anchoring.FIXED_WORK
    waves = wave_count(anchoring, config, workload, policy)
    return (_jobs_per_wave(workload, derived) * waves
            * _job_energy_kwh(workload, policy, derived) * config.electricity_price)


def _income_per_wave(scheme: Scheme, config: SystemConfig, workload: WorkloadSpec,
                     policy: ScalingPolicy, derived: DerivedModel) -> float:
    phi = policy.scaling_factor
    beta = workload.unscaled_fraction
    delta_m = workload.tts_max_freq_hours
    delta_s = scaled_tts(delta_m, phi, workload.sensitivity)
    r_a = derived.active_resources

    if scheme is Scheme.S1:
        return derived.coeff_total * r_a * _mean_duration(workload, phi)
    if scheme is Scheme.S2:
        return derived.coeff_total * r_a * delta_m
    if scheme is Scheme.S3:
        return derived.coeff_total * r_a * ((1 - beta) * delta_s / phi + beta * delta_m)

    energy_price = config.electricity_price
    if policy.bill_cooling_energy:
        energy_price *= config.pue
    energy = _jobs_per_wave(workload, derived) * _job_energy_kwh(workload, policy, derived)
    return (derived.coeff_system_only * r_a * _mean_duration(workload, phi)
            + energy * energy_price)


def income(scheme: Scheme, config: SystemConfig, workload: WorkloadSpec, policy: ScalingPolicy,
           derived: DerivedModel | None = None) -> float:
    """Timeframe income of ``scheme`` (per-wave income times the wave count)."""
    scheme = Scheme.parse(scheme)
    if derived is None:
        derived = derive(config, workload)
    waves = wave_count(resolve_anchoring(scheme, policy), config, workload, policy)
    return _income_per_wave(scheme, config, workload, policy, derived) * waves


def evaluate(scheme: Scheme, config: SystemConfig, workload: WorkloadSpec,
             policy: ScalingPolicy) -> TimeframeOutcome:
    """Income, costs, gain and average job price over one timeframe."""
    scheme = Scheme.parse(scheme)
    derived = derive(config, workload)
    anchoring = resolve_anchoring(scheme, policy)
    waves = wave_count(anchoring, config, workload, policy)
    per_wave = _income_per_wave(scheme, config, workload, policy, derived)

    it_cost = it_energy_cost_timeframe(config, workload, policy, derived, anchoring)
    cooling = it_cost * (config.pue - 1)
    depreciation = derived.depreciation_per_timeframe
    total = depreciation + it_cost + cooling
    revenue = per_wave * waves

    if anchoring is Anchoring.FIXED_WORK:
        needed = waves * _mean_duration(workload, policy.scaling_factor)
        overflow = max(0.0, needed / (24 * config.timeframe_days) - 1)
    else:
        overflow = 0.0

    return TimeframeOutcome(
        scheme=scheme,
        anchoring=anchoring,
        income=revenue,
        it_energy_cost=it_cost,
        cooling_energy_cost=cooling,
        depreciation_cost=depreciation,
        total_cost=total,
        gain=revenue - total,
        # per-job price taken from the per-wave income, so it does not depend on the wave count
        avg_job_price=per_wave * workload.cores_per_job / derived.active_resources,
        jobs_per_timeframe=_jobs_per_wave(workload, derived) * waves,
        capacity_overflow=overflow,
    )


def baseline(config: SystemConfig, workload: WorkloadSpec) -> TimeframeOutcome:
    """Scheme 1 with no frequency scaling: the reference every result is normalized by."""
    return evaluate(Scheme.S1, config, workload,
                    ScalingPolicy(scaling_factor=1.0, anchoring=Anchoring.FIXED_WORK))


def _gain_is_zero(base: TimeframeOutcome) -> bool:
    scale = max(abs(base.income), abs(base.total_cost))
    return abs(base.gain) <= 1e-12 * scale


def normalize(outcome: TimeframeOutcome, base: TimeframeOutcome) -> NormalizedOutcome:
    if _gain_is_zero(base):
        raise NormalizationUndefined(
            f"baseline gain is zero ({base.gain:.6g}); the baseline breaks even")
    if not base.avg_job_price > 0:
        raise NormalizationUndefined("baseline job price is not positive")
    return NormalizedOutcome(
        gain_normalized=outcome.gain / base.gain,
        price_normalized=outcome.avg_job_price / base.avg_job_price,
        baseline=base,
    )


def compare_schemes(config: SystemConfig, workload: WorkloadSpec,
                    policy: ScalingPolicy) -> list[ComparisonRow]:
    """Gain and price of every scheme relative to the unscaled Scheme 1 baseline."""
    base = baseline(config, workload)
    gain_defined = not _gain_is_zero(base)
    rows = []
    for scheme in Scheme:
        out = evaluate(scheme, config, workload, policy)
        delta = out.gain - base.gain
        rows.append(ComparisonRow(
            scheme=scheme,
            gain=out.gain,
            income=out.income,
            avg_job_price=out.avg_job_price,
            gain_delta_over_gain=delta / base.gain if gain_defined else None,
            gain_delta_over_income=delta / base.income,
            price_delta=(out.avg_job_price - base.avg_job_price) / base.avg_job_price,
        ))
    return rows


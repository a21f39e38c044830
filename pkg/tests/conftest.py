from __future__ import annotations

import numpy as np
import pytest
from hypothesis import strategies as st

from hpcpricing import SystemConfig, WorkloadSpec
from hpcpricing.scenarios import PRESETS


def make_config(**kw) -> SystemConfig:
    base = dict(
        timeframe_days=30.0,
        total_cores=1000,
        pue=1.2,
        electricity_price=0.1,
        lifetime_years=5.0,
        install_cost=10_950_000.0,
        it_energy_cost_per_year=876_000.0,
        roi=1.5,
        utilization=0.8,
        idle_fraction=0.2,
        alpha=3.0,
    )
    base.update(kw)
    return SystemConfig(**base)


def make_workload(**kw) -> WorkloadSpec:
    base = dict(tts_max_freq_hours=10.0, cores_per_job=8, sensitivity=0.2, unscaled_fraction=0.5)
    base.update(kw)
    return WorkloadSpec(**base)


@pytest.fixture
def config() -> SystemConfig:
    return make_config()


@pytest.fixture
def workload() -> WorkloadSpec:
    return make_workload()


@pytest.fixture
def fermi():
    return PRESETS["fermi_like"]


def random_inputs(rng: np.random.Generator):
    """One random valid (config, workload) pair."""
    cores = int(rng.integers(1, 200_000))
    config = SystemConfig(
        timeframe_days=float(rng.uniform(1, 365)),
        total_cores=cores,
        pue=float(rng.uniform(1, 2.5)),
        electricity_price=float(rng.uniform(0.01, 0.5)),
        lifetime_years=float(rng.uniform(0.5, 30)),
        install_cost=float(10 ** rng.uniform(3, 9)),
        it_energy_cost_per_year=float(10 ** rng.uniform(2, 7)),
        roi=float(rng.uniform(1, 3)),
        utilization=float(rng.uniform(0.05, 1)),
        idle_fraction=float(rng.uniform(0, 1)),
        alpha=float(rng.uniform(1, 4)),
    )
    workload = WorkloadSpec(
        tts_max_freq_hours=float(rng.uniform(0.1, 72)),
        cores_per_job=int(rng.integers(1, cores + 1)),
        sensitivity=float(rng.uniform(0, 1)),
        unscaled_fraction=float(rng.uniform(0, 1)),
    )
    return config, workload


unit = st.floats(0, 1, allow_nan=False)
phis = st.floats(1, 5, allow_nan=False)
alphas = st.floats(1, 4, allow_nan=False)


@st.composite
def configs(draw, **fixed):
    kw = dict(
        timeframe_days=draw(st.floats(1, 365)),
        total_cores=draw(st.integers(1, 200_000)),
        pue=draw(st.floats(1, 2.5)),
        electricity_price=draw(st.floats(0.01, 0.5)),
        lifetime_years=draw(st.floats(0.5, 30)),
        install_cost=draw(st.floats(1e3, 1e9)),
        it_energy_cost_per_year=draw(st.floats(1e2, 1e7)),
        roi=draw(st.floats(1, 3)),
        utilization=draw(st.floats(0.05, 1)),
        idle_fraction=draw(unit),
        alpha=draw(alphas),
    )
    kw.update(fixed)
    return SystemConfig(**kw)


@st.composite
def workloads(draw, max_cores=1, **fixed):
    kw = dict(
        tts_max_freq_hours=draw(st.floats(0.1, 72)),
        cores_per_job=draw(st.integers(1, max_cores)),
        sensitivity=draw(unit),
        unscaled_fraction=draw(unit),
    )
    kw.update(fixed)
    return WorkloadSpec(**kw)



# -- acceptance summary ---------------------------------------------------------

_CRITERIA: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            number, title = mark.args
            _CRITERIA.setdefault(number, {"title": title, "failed": [], "ran": 0})
            item.user_properties.append(("criterion", number))


def pytest_runtest_logreport(report):
    numbers = [v for k, v in report.user_properties if k == "criterion"]
    if not numbers:
        return
    entry = _CRITERIA[numbers[0]]
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        entry["ran"] += 1
        if report.outcome != "passed":
            entry["failed"].append(report.nodeid.split("::")[-1])


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        entry = _CRITERIA[number]
        if entry["failed"]:
            status = "FAIL (" + ", ".join(entry["failed"]) + ")"
        elif entry["ran"]:
            status = "PASS"
        else:
            status = "NOT RUN"
        terminalreporter.write_line(f"criterion {number}: {status} - {entry['title']}")

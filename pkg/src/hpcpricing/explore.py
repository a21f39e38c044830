"""Design-space exploration: grid sweeps, contour lines and height-map isosurfaces."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from .errors import (
    InvalidAxis,
    InvalidParameter,
    NonMonotone,
    NormalizationUndefined,
    ZeroIncome,
)
from .model import (
    SWEEPABLE,
    ScalingPolicy,
    SystemConfig,
    WorkloadSpec,
    apply_overrides,
    energy_ratio,
    tts_stretch,
)
from .pricing import Scheme, baseline, evaluate, normalize

MAX_BISECTIONS = 60

Metric = Callable[[SystemConfig, WorkloadSpec, ScalingPolicy], float]


@dataclass(frozen=True)
class AxisSpec:
    parameter_name: str
    lo: float
    hi: float
    steps: int

    def __post_init__(self):
        if not self.lo < self.hi:
            raise InvalidAxis(self.parameter_name, "lo < hi", (self.lo, self.hi))
        if isinstance(self.steps, bool) or int(self.steps) != self.steps or self.steps < 2:
            raise InvalidAxis(self.parameter_name, "steps ≥ 2", self.steps)
        object.__setattr__(self, "steps", int(self.steps))

    @property
    def values(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.steps)

    @property
    def spacing(self) -> float:
        return (self.hi - self.lo) / (self.steps - 1)

    @classmethod
    def parse(cls, text: str, default_steps: int = 101) -> "AxisSpec":
        """Parse ``name:lo:hi[:steps]``."""
        parts = text.split(":")
        if len(parts) not in (3, 4):
            raise InvalidAxis(text, "name:lo:hi[:steps]")
        name = parts[0]
        try:
            lo, hi = float(parts[1]), float(parts[2])
            steps = int(parts[3]) if len(parts) == 4 else default_steps
        except ValueError:
            raise InvalidAxis(name, "numeric lo, hi and integer steps", text) from None
        return cls(name, lo, hi, steps)


def require_sweepable(axis: AxisSpec) -> None:
    if axis.parameter_name not in SWEEPABLE:
        raise InvalidAxis(axis.parameter_name, f"one of {', '.join(SWEEPABLE)}")


@dataclass(frozen=True)
class Field2D:
    """Metric sampled on a grid; ``values[i, j]`` is at ``(x[i], y[j])``. NaN marks masked cells."""

    x_axis: AxisSpec
    y_axis: AxisSpec
    values: np.ndarray
    metric_name: str


@dataclass(frozen=True)
class ContourSet:
    level: float
    polylines: list[list[tuple[float, float]]]

    @property
    def is_empty(self) -> bool:
        return not self.polylines


@dataclass(frozen=True)
class IsoSurface:
    """Height map ``z(x, y)`` of the level set of a function monotone in z.

    ``heights`` is NaN where the column does not cross the level.
    ``column_side`` is +1 where the whole column lies above the level, -1
    where it lies below and 0 where a crossing was found; ``increasing``
    records the direction of the function along z at each node.
    """

    x_axis: AxisSpec
    y_axis: AxisSpec
    z_name: str
    z_lo: float
    z_hi: float
    level: float
    tolerance: float
    heights: np.ndarray
    column_side: np.ndarray
    increasing: np.ndarray

    def _node(self, x: float, y: float) -> tuple[int, int]:
        i = int(round((x - self.x_axis.lo) / self.x_axis.spacing))
        j = int(round((y - self.y_axis.lo) / self.y_axis.spacing))
        if not (0 <= i < self.x_axis.steps and 0 <= j < self.y_axis.steps):
            raise InvalidParameter("point", "inside the surface's (x, y) bounds", (x, y))
        return i, j

    def classify(self, x: float, y: float, z: float) -> int:
        """+1 if the function exceeds the level at (x, y, z), -1 if below, 0 on the surface.

        Uses the nearest grid node in (x, y).
        """
        i, j = self._node(x, y)
        side = int(self.column_side[i, j])
        if side:
            return side
        h = self.heights[i, j]
        if z == h:
            return 0
        above = z > h
        return 1 if above == bool(self.increasing[i, j]) else -1


def _metric_from_name(name: str, scheme: Scheme) -> Metric:
    if name == "energy_ratio":
        return lambda c, w, p: energy_ratio(c.idle_fraction, w.sensitivity, c.alpha,
                                            p.scaling_factor)
    if name == "tts_stretch":
        return lambda c, w, p: tts_stretch(p.scaling_factor, w.sensitivity)
    if name == "gain_normalized":
        return lambda c, w, p: normalize(evaluate(scheme, c, w, p), baseline(c, w)).gain_normalized
    if name == "price_normalized":
        return lambda c, w, p: normalize(evaluate(scheme, c, w, p), baseline(c, w)).price_normalized
    if name == "profitability":
        return lambda c, w, p: profitability(scheme, c, w, p)
    raise InvalidParameter("metric", "one of " + ", ".join(METRICS), name)


METRICS = ("gain_normalized", "price_normalized", "energy_ratio", "profitability", "tts_stretch")

_MASKED = (NormalizationUndefined, ZeroIncome)


def resolve_metric(metric: Union[str, Metric], scheme: Scheme = Scheme.S1) -> tuple[str, Metric]:
    if callable(metric):
        return getattr(metric, "__name__", "metric"), metric
    return metric, _metric_from_name(metric, Scheme.parse(scheme))


def sweep2d(metric: Union[str, Metric], base_config: SystemConfig, base_workload: WorkloadSpec,
            base_policy: ScalingPolicy, x_axis: AxisSpec, y_axis: AxisSpec,
            scheme: Scheme = Scheme.S1) -> Field2D:
    """Evaluate ``metric`` on the grid spanned by two parameters.

    Nodes where the metric is undefined (zero baseline gain, zero income) are NaN.
    """
    require_sweepable(x_axis)
    require_sweepable(y_axis)
    if x_axis.parameter_name == y_axis.parameter_name:
        raise InvalidAxis(y_axis.parameter_name, "distinct from the x axis")
    name, fn = resolve_metric(metric, scheme)

    values = np.empty((x_axis.steps, y_axis.steps))
    for i, xv in enumerate(x_axis.values):
        for j, yv in enumerate(y_axis.values):
            c, w, p = apply_overrides(base_config, base_workload, base_policy,
                                      {x_axis.parameter_name: float(xv),
                                       y_axis.parameter_name: float(yv)})
            try:
                values[i, j] = fn(c, w, p)
            except _MASKED:
                values[i, j] = math.nan
    return Field2D(x_axis, y_axis, values, name)


# Cell corners in counter-clockwise order, as (di, dj) offsets from the
# lower-left node, and the four edges as pairs of corner indices.
_CORNERS = ((0, 0), (1, 0), (1, 1), (0, 1))
_EDGES = ((0, 1), (1, 2), (3, 2), (0, 3))  # bottom, right, top, left


def _edge_key(i: int, j: int, edge: int) -> tuple[str, int, int]:
    if edge == 0:
        return ("h", i, j)
    if edge == 2:
        return ("h", i, j + 1)
    if edge == 3:
        return ("v", i, j)
    return ("v", i + 1, j)


def _cell_segments(corner_vals: Sequence[float], level: float) -> list[tuple[int, int]]:
    above = [v > level for v in corner_vals]
    crossing = [e for e, (a, b) in enumerate(_EDGES) if above[a] != above[b]]
    if not crossing:
        return []
    if len(crossing) == 2:
        return [tuple(crossing)]
    # saddle: diagonal corners share a side; the cell-centre average decides
    centre_above = sum(corner_vals) / 4 > level
    if above[0] == centre_above:
        # corners 0 and 2 are connected through the centre; cut off corners 1 and 3
        return [(0, 1), (2, 3)]
    return [(3, 0), (1, 2)]


def _chain(segments: list[tuple[tuple, tuple]]) -> list[list[tuple]]:
    """Join segments sharing endpoints into polylines (closed loops repeat the first key)."""
    touching: dict[tuple, list[int]] = {}
    for idx, (a, b) in enumerate(segments):
        touching.setdefault(a, []).append(idx)
        touching.setdefault(b, []).append(idx)
    used = [False] * len(segments)

    def walk(start_key, idx):
        line = [start_key]
        key = start_key
        while idx is not None:
            used[idx] = True
            a, b = segments[idx]
            key = b if a == key else a
            line.append(key)
            idx = next((k for k in touching[key] if not used[k]), None)
        return line

    lines = []
    # open polylines start at keys touched by a single segment
    for key, idxs in touching.items():
        if len(idxs) == 1 and not used[idxs[0]]:
            lines.append(walk(key, idxs[0]))
    for idx in range(len(segments)):
        if not used[idx]:
            lines.append(walk(segments[idx][0], idx))
    return lines


def contours(field: Field2D, levels: Sequence[float]) -> list[ContourSet]:
    """Marching-squares isolines of ``field``, one :class:`ContourSet` per level.

    Crossings are linearly interpolated along cell edges. Cells with a
    non-finite corner are skipped.
    """
    xs, ys, v = field.x_axis.values, field.y_axis.values, field.values
    nx, ny = v.shape
    out = []
    for level in levels:
        points: dict[tuple, tuple[float, float]] = {}
        segments = []
        for i in range(nx - 1):
            for j in range(ny - 1):
                corner_vals = [v[i + di, j + dj] for di, dj in _CORNERS]
                if not all(math.isfinite(c) for c in corner_vals):
                    continue
                for e1, e2 in _cell_segments(corner_vals, level):
                    keys = []
                    for e in (e1, e2):
                        key = _edge_key(i, j, e)
                        if key not in points:
                            a, b = _EDGES[e]
                            (ai, aj), (bi, bj) = _CORNERS[a], _CORNERS[b]
                            va, vb = corner_vals[a], corner_vals[b]
                            t = (level - va) / (vb - va)
                            xa, ya = xs[i + ai], ys[j + aj]
                            xb, yb = xs[i + bi], ys[j + bj]
                            points[key] = (float(xa + t * (xb - xa)), float(ya + t * (yb - ya)))
                        keys.append(key)
                    segments.append(tuple(keys))
        polylines = [[points[k] for k in line] for line in _chain(segments)]
        out.append(ContourSet(float(level), polylines))
    return out


def _bisect(g: Callable[[float], float], lo: float, hi: float, g_lo: float, g_hi: float,
            tolerance: float) -> float:
    # g(z) = f(z) - level, with g_lo and g_hi of opposite sign
    best_z, best_err = (lo, abs(g_lo)) if abs(g_lo) <= abs(g_hi) else (hi, abs(g_hi))
    if best_err <= tolerance:
        return best_z
    slack = 1e-12 * max(abs(g_lo), abs(g_hi), 1.0)
    for _ in range(MAX_BISECTIONS):
        mid = 0.5 * (lo + hi)
        g_mid = g(mid)
        if not (min(g_lo, g_hi) - slack <= g_mid <= max(g_lo, g_hi) + slack):
            raise NonMonotone(f"f({mid!r}) leaves the bracket [{g_lo!r}, {g_hi!r}] (shifted by level)")
        if abs(g_mid) < best_err:
            best_z, best_err = mid, abs(g_mid)
        if best_err <= tolerance:
            break
        if (g_mid < 0) == (g_lo < 0):
            lo, g_lo = mid, g_mid
        else:
            hi, g_hi = mid, g_mid
    return best_z


def isosurface_monotone(f: Callable[[float, float, float], float], x_axis: AxisSpec,
                        y_axis: AxisSpec, z_lo: float, z_hi: float, level: float,
                        tolerance: float = 1e-6, z_name: str = "z") -> IsoSurface:
    """Height-map extraction of ``{f = level}`` for ``f`` monotone in z.

    At each (x, y) node the column ``[z_lo, z_hi]`` is bracketed; when the
    end values straddle ``level`` the crossing is bisected until
    ``|f - level| <= tolerance`` (at most 60 halvings). Columns without a
    crossing get a NaN height. A midpoint outside the bracket values raises
    NonMonotone.
    """
    if not z_lo < z_hi:
        raise InvalidParameter("z", "z_lo < z_hi", (z_lo, z_hi))
    xs, ys = x_axis.values, y_axis.values
    shape = (x_axis.steps, y_axis.steps)
    heights = np.full(shape, math.nan)
    side = np.zeros(shape, dtype=np.int8)
    increasing = np.zeros(shape, dtype=bool)

    for i, x in enumerate(xs):
        for j, y in enumerate(ys):
            x_f, y_f = float(x), float(y)

            def g(z, x_f=x_f, y_f=y_f):
                return f(x_f, y_f, z) - level

            g_lo, g_hi = g(z_lo), g(z_hi)
            increasing[i, j] = g_hi >= g_lo
            if (g_lo <= 0 <= g_hi) or (g_hi <= 0 <= g_lo):
                heights[i, j] = _bisect(g, z_lo, z_hi, g_lo, g_hi, tolerance)
                continue
            g_mid = g(0.5 * (z_lo + z_hi))
            if (g_mid > 0) != (g_lo > 0):
                raise NonMonotone(f"column ({x_f!r}, {y_f!r}) crosses the level between "
                                  "same-side end points")
            side[i, j] = 1 if g_lo > 0 else -1

    return IsoSurface(x_axis, y_axis, z_name, float(z_lo), float(z_hi), float(level),
                      float(tolerance), heights, side, increasing)


def metric_function(metric: Union[str, Metric], base_config: SystemConfig,
                    base_workload: WorkloadSpec, base_policy: ScalingPolicy,
                    names: tuple[str, str, str], scheme: Scheme = Scheme.S1
                    ) -> Callable[[float, float, float], float]:
    """Wrap a model metric as ``f(x, y, z)`` over three named parameters."""
    if len(set(names)) != 3:
        raise InvalidAxis(",".join(names), "three distinct parameters")
    _, fn = resolve_metric(metric, scheme)

    def f(x: float, y: float, z: float) -> float:
        c, w, p = apply_overrides(base_config, base_workload, base_policy,
                                  dict(zip(names, (x, y, z))))
        return fn(c, w, p)

    return f


def profitability(scheme: Scheme, config: SystemConfig, workload: WorkloadSpec,
                  policy: ScalingPolicy) -> float:
    """Total cost over income for the timeframe; below 1 means the owner makes a profit."""
    out = evaluate(scheme, config, workload, policy)
    if out.income == 0:
        raise ZeroIncome("income is zero; cost/income ratio undefined")
    return out.total_cost / out.income


def yearly_energy_cost(config: SystemConfig) -> float:
    """Yearly IT plus cooling energy cost of the utilized share of the machine."""
    return config.pue * config.utilization * config.it_energy_cost_per_year


def lifetime_to_depreciation_share(config: SystemConfig) -> float:
    """Fraction of the unscaled per-timeframe cost that is depreciation."""
    depreciation = config.install_cost / config.lifetime_years / 365 * config.timeframe_days
    energy = yearly_energy_cost(config) / 365 * config.timeframe_days
    return depreciation / (depreciation + energy)


def baseline_depreciation_share(config: SystemConfig, workload: WorkloadSpec) -> float:
    """Same share, read off the evaluated baseline outcome."""
    base = baseline(config, workload)
    return base.depreciation_cost / base.total_cost


"""Cost, energy and pricing model of HPC systems under frequency scaling."""

from .errors import (
    DegenerateBoundary,
    InvalidAxis,
    InvalidParameter,
    ModelError,
    NonMonotone,
    NormalizationUndefined,
    ParseError,
    UnknownField,
    ValidationError,
    ZeroIncome,
)
from .model import (
    Anchoring,
    DerivedModel,
    ScalingPolicy,
    SystemConfig,
    WorkloadSpec,
    acceptable_sensitivity_bound,
    derive,
    energy_ratio,
    job_power_scaled,
    scaled_tts,
    tts_stretch,
)
from .pricing import (
    ComparisonRow,
    NormalizedOutcome,
    Scheme,
    TimeframeOutcome,
    baseline,
    compare_schemes,
    evaluate,
    income,
    it_energy_cost_timeframe,
    normalize,
    wave_count,
)
from .explore import (
    AxisSpec,
    ContourSet,
    Field2D,
    IsoSurface,
    contours,
    isosurface_monotone,
    lifetime_to_depreciation_share,
    profitability,
    sweep2d,
)
from .scenarios import (
    PRESETS,
    Scenario,
    calibrate_lifetime,
    export_field,
    load_scenario,
)

__version__ = "0.1.0"

# **************************************************************************************

# @package        segmob
# @license        MIT License Copyright (c) 2025 Michael J. Roberts

# **************************************************************************************

__version__ = "0.1.0"

__license__ = "MIT"

# **************************************************************************************

from .checksum import compute_file_digest, compute_payload_digest, get_user_shard
from .common import (
    BoundingBox,
    ClockWindow,
    ResidualIsolation,
    SeriesPoint,
    TripShare,
    WindowIntersection,
)
from .config import RunConfig, load_config, parse_config_text
from .constants import (
    ENTROPY_HISTOGRAM_BINS,
    NUMBER_OF_SES_CLASSES,
    RESTRICTION_CODES,
    STAY_COALESCE_GAP_SECONDS,
)
from .entropy import (
    EntropyAccumulator,
    EntropyAxis,
    EntropyDistribution,
    EntropySummary,
    compute_entropy_distribution,
    entropy_series,
    ses_entropy,
    spatial_entropy,
    summarize,
)
from .inference import (
    HomeAssignment,
    InferenceReport,
    PopulationLabels,
    Visit,
    VisitKind,
    coalesce_stays,
    extract_visits,
    infer_home,
    label_population,
    label_visits,
    process_user,
)
from .ingest import (
    IngestReport,
    find_stringency_gaps,
    load_ses_map,
    load_stringency,
    load_trajectories,
    write_ses_map,
    write_stringency,
    write_trajectories,
)
from .kruskal import KruskalResult, PeriodComparison, compare_periods, kruskal_wallis
from .matrix import AdjustmentMatrix, StratificationMatrix
from .models import SesRegion, StringencyRecord, TrajectoryRecord
from .network import (
    EmptyNetworkError,
    FilterKind,
    VisitFilter,
    VisitNetwork,
    build_network,
    trip_composition,
)
from .pipeline import Pipeline, PipelineManifest, StageError, run
from .plots import emit_plots
from .regression import (
    RankDeficiencyError,
    RegressionResult,
    covariate_ratio,
    ols_fit,
    r2_ratio,
)
from .segmentation import Period, Window, period_of, segment, suggest_breakpoints, windows
from .spatial import (
    DecileAssignment,
    SpatialIndex,
    assign_deciles,
    build_index,
    locate_coordinate,
    locate_point,
)
from .stratify import (
    DegenerateMatrixError,
    adjustment_matrix,
    assortativity,
    assortativity_series,
    get_homophily_change,
    get_mass_assortativity,
    get_relative_change,
    residual_isolation,
    stratification_matrix,
)
from .synth import (
    GroundTruth,
    SynthSpec,
    SyntheticCity,
    expected_matrix,
    generate_city,
    load_synth_spec,
    simulate_city,
    write_city,
)

# **************************************************************************************

__all__ = [
    "ENTROPY_HISTOGRAM_BINS",
    "NUMBER_OF_SES_CLASSES",
    "RESTRICTION_CODES",
    "STAY_COALESCE_GAP_SECONDS",
    "AdjustmentMatrix",
    "BoundingBox",
    "ClockWindow",
    "DecileAssignment",
    "DegenerateMatrixError",
    "EmptyNetworkError",
    "EntropyAccumulator",
    "EntropyAxis",
    "EntropyDistribution",
    "EntropySummary",
    "FilterKind",
    "GroundTruth",
    "HomeAssignment",
    "InferenceReport",
    "IngestReport",
    "KruskalResult",
    "Period",
    "PeriodComparison",
    "Pipeline",
    "PipelineManifest",
    "PopulationLabels",
    "RankDeficiencyError",
    "RegressionResult",
    "ResidualIsolation",
    "RunConfig",
    "SeriesPoint",
    "SesRegion",
    "SpatialIndex",
    "StageError",
    "StratificationMatrix",
    "StringencyRecord",
    "SynthSpec",
    "SyntheticCity",
    "TrajectoryRecord",
    "TripShare",
    "Visit",
    "VisitFilter",
    "VisitKind",
    "VisitNetwork",
    "Window",
    "WindowIntersection",
    "adjustment_matrix",
    "assign_deciles",
    "assortativity",
    "assortativity_series",
    "build_index",
    "build_network",
    "coalesce_stays",
    "compare_periods",
    "compute_entropy_distribution",
    "compute_file_digest",
    "compute_payload_digest",
    "covariate_ratio",
    "emit_plots",
    "entropy_series",
    "expected_matrix",
    "extract_visits",
    "find_stringency_gaps",
    "generate_city",
    "get_homophily_change",
    "get_mass_assortativity",
    "get_relative_change",
    "get_user_shard",
    "infer_home",
    "kruskal_wallis",
    "label_population",
    "label_visits",
    "load_config",
    "load_ses_map",
    "load_stringency",
    "load_synth_spec",
    "load_trajectories",
    "locate_coordinate",
    "locate_point",
    "ols_fit",
    "parse_config_text",
    "period_of",
    "process_user",
    "r2_ratio",
    "residual_isolation",
    "run",
    "segment",
    "ses_entropy",
    "simulate_city",
    "spatial_entropy",
    "stratification_matrix",
    "suggest_breakpoints",
    "summarize",
    "trip_composition",
    "windows",
    "write_city",
    "write_ses_map",
    "write_stringency",
    "write_trajectories",
]

# **************************************************************************************

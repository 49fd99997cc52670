"""latsim: latency telemetry sampling simulator.

Models per-link M/M/1 delays over metro topologies, evaluates exact path-delay
distributions, plans telemetry sample sizes, and measures how often a control
plane decides wrongly from finite latency samples.
"""

__version__ = "0.1.0"

from .decision import (
    ComplianceRule,
    ComplianceVerdict,
    ConfusionReport,
    TieBreak,
    classify,
    confusion,
    ground_truth,
    select_best_path,
)
from .delays import (
    CalibrationError,
    CalibrationResult,
    PathDelayModel,
    build_path_model,
    calibrate_path,
    cdf,
    fraction_below,
    quantile,
    sample_delay,
)
from .experiments import (
    ExperimentConfig,
    HeatmapResult,
    SelectionResult,
    run_error_table,
    run_heatmap,
    run_selection,
)
from .sampling import (
    CochranPlan,
    SampleSet,
    cochran_error,
    cochran_n,
    collect_samples,
    empirical_fraction_below,
)
from .topology import (
    LinkSpec,
    NodeSpec,
    PathSpec,
    Role,
    RoutingError,
    Topology,
    TopologyError,
    TopologyParseError,
    TopologyValidationError,
    all_pairs,
    load_topology,
    route,
    save_topology,
    serialize_topology,
)

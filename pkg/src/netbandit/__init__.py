"""Online experimental design under network interference."""

from .environment import (
    DenseTable,
    DriftSchedule,
    ExposureFaithful,
    Instance,
    NeedleInstance,
    NoiseModel,
    make_needle_instance,
    needle_gap,
    pull,
)
from .estimators import AteEstimate, estimation_error, ipw_ate, mean_diff_ate
from .exposure import (
    ExposureArmSpace,
    ExposureMapSpec,
    compatible_super_arms,
    enumerate_exposure_space,
    exposure_profile,
    sample_compatible,
)
from .harness import ExperimentConfig, run_grid, run_replicated, validate
from .metrics import AggregateResult, RunTrace, aggregate, loglog_slope, pareto_front
from .network import AdjacencyMatrix, Clustering, build_adjacency
from .oracle import OracleReport, compute_report
from .policies import Exp3Tsn, PolicySpec, UcbTsn, UniformPolicy

__version__ = "0.1.0"

__all__ = [
    "DenseTable",
    "DriftSchedule",
    "ExposureFaithful",
    "Instance",
    "NeedleInstance",
    "NoiseModel",
    "make_needle_instance",
    "needle_gap",
    "pull",
    "AteEstimate",
    "estimation_error",
    "ipw_ate",
    "mean_diff_ate",
    "ExposureArmSpace",
    "ExposureMapSpec",
    "compatible_super_arms",
    "enumerate_exposure_space",
    "exposure_profile",
    "sample_compatible",
    "ExperimentConfig",
    "run_grid",
    "run_replicated",
    "validate",
    "AggregateResult",
    "RunTrace",
    "aggregate",
    "loglog_slope",
    "pareto_front",
    "AdjacencyMatrix",
    "Clustering",
    "build_adjacency",
    "OracleReport",
    "compute_report",
    "Exp3Tsn",
    "PolicySpec",
    "UcbTsn",
    "UniformPolicy",
]

"""Fairness-constrained multi-task regression via sum-rank bounds.

Training couples a group-sparse least-squares model with a non-convex
constraint that keeps the partition-A sum rank of the predictions inside a
band around the rank-independence point, enforced by heuristic projections
inside an ADMM-style outer loop.
"""

from .data import (
    PARTITION_A,
    PARTITION_B,
    DatasetError,
    StandardizationParams,
    SyntheticSpec,
    TaskDataset,
    generate_synthetic,
    load_csv,
    split_folds,
    standardize,
    write_csv,
)
from .metrics import (
    MetricsReport,
    auc,
    balanced_residuals,
    compute_report,
    impact_rank_ratio,
    mean_difference,
    rmse,
)
from .projection import (
    InfeasibleProjection,
    InstanceTooLarge,
    ProjectionOutcome,
    brute_force_project,
    demotion_rank,
    grow_sum_rank,
    project_onto_q,
    shrink_sum_rank,
)
from .proximal import ProximalState, solve_inner
from .ranking import (
    ConstraintSpec,
    RankVector,
    assign_ranks,
    auc_from_u,
    constraint_bounds,
    mann_whitney_u,
    sum_rank_partition,
)
from .solver import RunResult, SolverConfig, SolverTrace, TraceRecord, run

__version__ = "0.1.0"

__all__ = [
    "PARTITION_A",
    "PARTITION_B",
    "ConstraintSpec",
    "DatasetError",
    "InfeasibleProjection",
    "InstanceTooLarge",
    "MetricsReport",
    "ProjectionOutcome",
    "ProximalState",
    "RankVector",
    "RunResult",
    "SolverConfig",
    "SolverTrace",
    "StandardizationParams",
    "SyntheticSpec",
    "TaskDataset",
    "TraceRecord",
    "assign_ranks",
    "auc",
    "auc_from_u",
    "balanced_residuals",
    "brute_force_project",
    "compute_report",
    "constraint_bounds",
    "demotion_rank",
    "generate_synthetic",
    "grow_sum_rank",
    "impact_rank_ratio",
    "load_csv",
    "mann_whitney_u",
    "mean_difference",
    "project_onto_q",
    "rmse",
    "run",
    "shrink_sum_rank",
    "solve_inner",
    "split_folds",
    "standardize",
    "sum_rank_partition",
    "write_csv",
    "__version__",
]

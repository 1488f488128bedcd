"""Multi-task learning with sparse combinations of latent basis tasks.

Every task's weight vector is modeled as a sparse linear combination of a
small set of shared basis vectors; overlap between the sparsity patterns of
two tasks controls how much they share. Training alternates per-task
L1-penalized code solves with a convex basis solve, starting from an SVD of
independently trained per-task weights.
"""

from .basis import (
    SquaredBasisSystem,
    BasisSolveResult,
    NewtonDirection,
    logistic_newton_direction,
    solve_basis_logistic,
    solve_basis_squared,
)
from .data import (
    MultiTaskDataset,
    TaskData,
    TaskKind,
    append_bias_feature,
    normalize_binary_labels,
)
from .dataio import export_dataset, ingest_dataset, load_matrix, save_matrix
from .errors import (
    ConfigError,
    DataError,
    DatasetParseError,
    DimensionError,
    GomtlError,
    NumericError,
    SingularSystemError,
    SystemSizeError,
)
from .experiment import (
    MU_GRID_DEFAULT,
    ExperimentConfig,
    ResultRecord,
    cv_select_mu,
    run_experiment,
)
from .losses import (
    LossEvaluation,
    logistic_grad_basis,
    logistic_loss_codes,
    squared_grad_basis,
    squared_loss_codes,
)
from .metrics import (
    binary_error,
    multiclass_error,
    rmse,
    rmse_per_task,
    support_recovery_score,
)
from .model import (
    Hyperparams,
    LatentModel,
    OuterIterStats,
    TrainReport,
    full_objective,
    predict,
)
from .sparse import SparseSolveResult, ista_solve_codes, kkt_residual, solve_codes
from .synth import SynthDataset, gen_disjoint, gen_overlap
from .train import FitResult, StlModel, fit, init_basis, train_stl

__version__ = "0.1.0"

__all__ = [
    "BasisSolveResult",
    "ConfigError",
    "DataError",
    "DatasetParseError",
    "DimensionError",
    "ExperimentConfig",
    "FitResult",
    "GomtlError",
    "Hyperparams",
    "LatentModel",
    "LossEvaluation",
    "MU_GRID_DEFAULT",
    "MultiTaskDataset",
    "NewtonDirection",
    "NumericError",
    "OuterIterStats",
    "ResultRecord",
    "SingularSystemError",
    "SparseSolveResult",
    "StlModel",
    "SynthDataset",
    "SystemSizeError",
    "TaskData",
    "TaskKind",
    "TrainReport",
    "append_bias_feature",
    "binary_error",
    "cv_select_mu",
    "export_dataset",
    "fit",
    "full_objective",
    "gen_disjoint",
    "gen_overlap",
    "ingest_dataset",
    "init_basis",
    "ista_solve_codes",
    "kkt_residual",
    "load_matrix",
    "logistic_grad_basis",
    "logistic_loss_codes",
    "logistic_newton_direction",
    "multiclass_error",
    "normalize_binary_labels",
    "predict",
    "rmse",
    "rmse_per_task",
    "run_experiment",
    "save_matrix",
    "solve_basis_logistic",
    "solve_basis_squared",
    "solve_codes",
    "squared_grad_basis",
    "squared_loss_codes",
    "support_recovery_score",
    "train_stl",
]

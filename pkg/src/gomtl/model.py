"""Latent-basis model, hyperparameters, and the training objective.

Each observed task's weight vector is a linear combination of k shared basis
columns: task t predicts with w_t = basis @ codes[:, t]. Sparsity of the code
matrix controls how tasks group and overlap; the full training objective is

    sum_t (1/n_t) * loss_t(w_t)  +  mu * ||codes||_1  +  lam * ||basis||_F^2
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .data import MultiTaskDataset, TaskKind, _frozen_array
from .errors import ConfigError, DimensionError, NumericError
from .losses import code_problem

BASIS_METHODS = ("closed_form", "gradient", "newton")


@dataclass(frozen=True)
class LatentModel:
    """The factor pair: basis (d, k) and codes (k, T)."""

    basis: np.ndarray
    codes: np.ndarray

    def __post_init__(self):
        B = _frozen_array(self.basis)
        S = _frozen_array(self.codes)
        if B.ndim != 2 or S.ndim != 2:
            raise DimensionError(
                f"basis and codes must be 2-d, got shapes {B.shape} and {S.shape}"
            )
        if B.shape[1] != S.shape[0]:
            raise DimensionError(
                f"basis has {B.shape[1]} columns but codes has {S.shape[0]} rows"
            )
        if not np.isfinite(B).all() or not np.isfinite(S).all():
            raise NumericError("model entries must be finite")
        object.__setattr__(self, "basis", B)
        object.__setattr__(self, "codes", S)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def n_latent(self) -> int:
        return self.basis.shape[1]

    @property
    def n_tasks(self) -> int:
        return self.codes.shape[1]

    @property
    def weights(self) -> np.ndarray:
        """The assembled (d, T) per-task weight matrix basis @ codes."""
        return self.basis @ self.codes

    def task_weights(self, task_index: int) -> np.ndarray:
        if not 0 <= task_index < self.n_tasks:
            raise IndexError(
                f"task index {task_index} out of range [0, {self.n_tasks})"
            )
        return self.basis @ self.codes[:, task_index]


@dataclass(frozen=True)
class Hyperparams:
    """Settings for one training run.

    k: number of latent basis tasks.
    mu: weight of the entrywise L1 penalty on the codes.
    lam: weight of the squared Frobenius penalty on the basis.
    outer_tol / outer_max_iter: alternation stops when the relative Frobenius
        change of both factors drops below outer_tol.
    inner_tol / inner_max_iter: per-task sparse solve settings.
    basis_method: closed_form (regression only), gradient, or newton.
    """

    k: int
    mu: float
    lam: float = 0.1
    outer_tol: float = 1e-4
    outer_max_iter: int = 100
    inner_tol: float = 1e-6
    inner_max_iter: int = 500
    basis_method: str = "closed_form"

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError(f"k must be a positive integer, got {self.k}")
        if self.mu < 0:
            raise ConfigError(f"mu must be non-negative, got {self.mu}")
        if self.lam < 0:
            raise ConfigError(f"lam must be non-negative, got {self.lam}")
        if self.outer_tol <= 0 or self.inner_tol <= 0:
            raise ConfigError("tolerances must be positive")
        if self.outer_max_iter < 1 or self.inner_max_iter < 1:
            raise ConfigError("iteration caps must be at least 1")
        if self.basis_method not in BASIS_METHODS:
            raise ConfigError(
                f"basis_method must be one of {BASIS_METHODS}, got {self.basis_method!r}"
            )

    def validate_for(self, data: MultiTaskDataset) -> None:
        """Check the settings against a concrete dataset."""
        cap = min(data.dim, data.n_tasks)
        if self.k > cap:
            raise ConfigError(f"k={self.k} exceeds min(d, T)={cap}")
        if data.kind is TaskKind.REGRESSION and self.basis_method != "closed_form":
            raise ConfigError(
                "regression uses the closed_form basis solve; "
                f"got basis_method={self.basis_method!r}"
            )
        if data.kind is TaskKind.CLASSIFICATION and self.basis_method == "closed_form":
            raise ConfigError(
                "closed_form basis solve requires squared loss; use gradient or newton"
            )


@dataclass(frozen=True)
class OuterIterStats:
    """Per-outer-iteration solver diagnostics."""

    code_kkt_max: float
    code_iterations: int
    basis_residual: float
    basis_iterations: int


@dataclass(frozen=True)
class TrainReport:
    """Objective trace and solver statistics from one training run."""

    objective_trace: tuple[float, ...]
    outer_iters: int
    converged: bool
    inner_stats: tuple[OuterIterStats, ...] = ()

    def __post_init__(self):
        trace = tuple(float(v) for v in self.objective_trace)
        for i in range(1, len(trace)):
            if trace[i] > trace[i - 1] + 1e-10:
                raise NumericError(
                    f"objective increased at outer iteration {i}: "
                    f"{trace[i - 1]!r} -> {trace[i]!r}"
                )
        object.__setattr__(self, "objective_trace", trace)
        object.__setattr__(self, "inner_stats", tuple(self.inner_stats))


def _check_model_data(model: LatentModel, data: MultiTaskDataset) -> None:
    if model.n_tasks != data.n_tasks:
        raise DimensionError(
            f"model covers {model.n_tasks} tasks but dataset has {data.n_tasks}"
        )
    for t, task in enumerate(data):
        if task.dim != model.dim:
            raise DimensionError(
                f"task {t}: feature dimension {task.dim} does not match "
                f"basis rows {model.dim}"
            )


def full_objective(
    model: LatentModel, data: MultiTaskDataset, mu: float, lam: float
) -> float:
    """The training objective: summed per-task mean losses plus both penalties."""
    _check_model_data(model, data)
    total = 0.0
    for t, task in enumerate(data):
        total += code_problem(model.basis, task).value(model.codes[:, t])
    total += mu * float(np.abs(model.codes).sum())
    total += lam * float(np.sum(model.basis * model.basis))
    return total


def predict(
    model: LatentModel,
    task_index: int,
    x: np.ndarray,
    kind: TaskKind = TaskKind.REGRESSION,
) -> float:
    """Predict for one task: the linear score, or its sigmoid for classification."""
    x = np.asarray(x, dtype=float)
    w = model.task_weights(task_index)
    if x.shape != w.shape:
        raise DimensionError(f"input has shape {x.shape}, expected {w.shape}")
    score = float(w @ x)
    if TaskKind(kind) is TaskKind.CLASSIFICATION:
        return float(expit(score))
    return score

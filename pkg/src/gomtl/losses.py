"""Loss values, gradients, and Hessians for the two supported losses.

Per-task empirical losses are averaged over the task's samples:

    squared:   f(s) = (1/n) * ||y - X' B s||^2
    logistic:  f(s) = (1/n) * sum_i log(1 + exp(-yhat_i * s' B' x_i))

where B is the (d, k) basis, s the task's code vector, and yhat = 2*y - 1
maps the internal {0, 1} labels onto {-1, +1} signs. Basis-side gradients
treat the codes as fixed and include the 2*lam*B term of the Frobenius
penalty lam * ||B||_F^2.

Both losses are convex in s, so every Hessian here is symmetric PSD.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .data import MultiTaskDataset, TaskData, TaskKind
from .errors import ConfigError, DimensionError


@dataclass(frozen=True)
class LossEvaluation:
    """Value, gradient, and optional Hessian with respect to a code vector."""

    value: float
    grad: np.ndarray
    hess: np.ndarray | None = None


def _check_code_dims(basis, task: TaskData) -> np.ndarray:
    basis = np.asarray(basis, dtype=float)
    if basis.ndim != 2:
        raise DimensionError(f"basis must be 2-d, got shape {basis.shape}")
    if basis.shape[0] != task.dim:
        raise DimensionError(
            f"basis has {basis.shape[0]} rows but task features have dimension {task.dim}"
        )
    return basis


def _check_codes(basis: np.ndarray, codes: np.ndarray, data: MultiTaskDataset) -> None:
    if codes.ndim != 2 or codes.shape != (basis.shape[1], data.n_tasks):
        raise DimensionError(
            f"codes must have shape ({basis.shape[1]}, {data.n_tasks}), got {codes.shape}"
        )
    if basis.shape[0] != data.dim:
        raise DimensionError(
            f"basis has {basis.shape[0]} rows but data dimension is {data.dim}"
        )


class SquaredCodeProblem:
    """Per-task squared loss as a function of the code vector, basis fixed.

    The (n, k) design X' B is formed once; the Hessian is constant and cached.
    """

    def __init__(self, basis, task: TaskData):
        basis = _check_code_dims(basis, task)
        self.design = task.features.T @ basis
        self.labels = task.labels
        self.n = task.n_samples
        self._hess: np.ndarray | None = None

    def value(self, s: np.ndarray) -> float:
        r = self.design @ s - self.labels
        return float(r @ r) / self.n

    def value_grad(self, s: np.ndarray) -> tuple[float, np.ndarray]:
        r = self.design @ s - self.labels
        value = float(r @ r) / self.n
        grad = (2.0 / self.n) * (self.design.T @ r)
        return value, grad

    def hess(self, s: np.ndarray | None = None) -> np.ndarray:
        if self._hess is None:
            H = (2.0 / self.n) * (self.design.T @ self.design)
            self._hess = 0.5 * (H + H.T)
        return self._hess


class LogisticCodeProblem:
    """Per-task logistic loss as a function of the code vector, basis fixed."""

    def __init__(self, basis, task: TaskData):
        basis = _check_code_dims(basis, task)
        self.design = task.features.T @ basis
        self.labels = task.labels
        self.signs = 2.0 * task.labels - 1.0
        self.n = task.n_samples

    def value(self, s: np.ndarray) -> float:
        margins = self.design @ s
        return float(np.logaddexp(0.0, -self.signs * margins).mean())

    def value_grad(self, s: np.ndarray) -> tuple[float, np.ndarray]:
        margins = self.design @ s
        value = float(np.logaddexp(0.0, -self.signs * margins).mean())
        p = expit(margins)
        grad = -(self.design.T @ (self.labels - p)) / self.n
        return value, grad

    def hess(self, s: np.ndarray) -> np.ndarray:
        p = expit(self.design @ s)
        w = p * (1.0 - p) / self.n
        H = self.design.T @ (w[:, None] * self.design)
        return 0.5 * (H + H.T)


def code_problem(basis: np.ndarray, task: TaskData):
    """Build the per-task code-space objective matching the task's kind."""
    if task.kind is TaskKind.REGRESSION:
        return SquaredCodeProblem(basis, task)
    return LogisticCodeProblem(basis, task)


def squared_loss_codes(
    s: np.ndarray, basis: np.ndarray, task: TaskData, want_hess: bool = False
) -> LossEvaluation:
    """Evaluate the mean squared loss with its code-vector derivatives."""
    if task.kind is not TaskKind.REGRESSION:
        raise ConfigError("squared loss applies to regression tasks")
    problem = SquaredCodeProblem(basis, task)
    value, grad = problem.value_grad(np.asarray(s, dtype=float))
    return LossEvaluation(value, grad, problem.hess() if want_hess else None)


def logistic_loss_codes(
    s: np.ndarray, basis: np.ndarray, task: TaskData, want_hess: bool = False
) -> LossEvaluation:
    """Evaluate the mean logistic loss with its code-vector derivatives."""
    if task.kind is not TaskKind.CLASSIFICATION:
        raise ConfigError("logistic loss applies to classification tasks")
    problem = LogisticCodeProblem(basis, task)
    s = np.asarray(s, dtype=float)
    value, grad = problem.value_grad(s)
    return LossEvaluation(value, grad, problem.hess(s) if want_hess else None)


def squared_grad_basis(
    basis: np.ndarray, codes: np.ndarray, data: MultiTaskDataset, lam: float
) -> np.ndarray:
    """Gradient of sum_t (1/n_t)||y_t - X_t' B s_t||^2 + lam*||B||_F^2 in B."""
    if data.kind is not TaskKind.REGRESSION:
        raise ConfigError("squared loss applies to regression data")
    _check_codes(basis, codes, data)
    grad = 2.0 * lam * basis
    for t, task in enumerate(data):
        s = codes[:, t]
        r = task.features.T @ (basis @ s) - task.labels
        grad = grad + (2.0 / task.n_samples) * np.outer(task.features @ r, s)
    return grad


def logistic_grad_basis(
    basis: np.ndarray, codes: np.ndarray, data: MultiTaskDataset, lam: float
) -> np.ndarray:
    """Gradient of the summed mean logistic losses plus lam*||B||_F^2 in B."""
    if data.kind is not TaskKind.CLASSIFICATION:
        raise ConfigError("logistic loss applies to classification data")
    _check_codes(basis, codes, data)
    grad = 2.0 * lam * basis
    for t, task in enumerate(data):
        s = codes[:, t]
        p = expit(task.features.T @ (basis @ s))
        grad = grad - np.outer(task.features @ (task.labels - p), s) / task.n_samples
    return grad


def squared_objective_basis(
    basis: np.ndarray, codes: np.ndarray, data: MultiTaskDataset, lam: float
) -> float:
    """sum_t (1/n_t)||y_t - X_t' B s_t||^2 + lam*||B||_F^2."""
    total = lam * float(np.sum(basis * basis))
    for t, task in enumerate(data):
        r = task.features.T @ (basis @ codes[:, t]) - task.labels
        total += float(r @ r) / task.n_samples
    return total


def logistic_objective_basis(
    basis: np.ndarray, codes: np.ndarray, data: MultiTaskDataset, lam: float
) -> float:
    """sum_t mean logistic loss of task t plus lam*||B||_F^2."""
    total = lam * float(np.sum(basis * basis))
    for t, task in enumerate(data):
        margins = task.features.T @ (basis @ codes[:, t])
        signs = 2.0 * task.labels - 1.0
        total += float(np.logaddexp(0.0, -signs * margins).mean())
    return total

"""Alternating trainer and the single-task baseline.

Training alternates two convex half-steps: solve every task's sparse code
vector against the current basis, then re-solve the basis against the fixed
codes. The basis is initialized from the top-k left singular vectors of the
independently trained per-task weight matrix. The model returned pairs the
final codes with the basis they were solved against, which keeps the two
factors mutually consistent.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .basis import SquaredBasisSystem, solve_basis_logistic
from .data import MultiTaskDataset, TaskData, TaskKind, _frozen_array
from .errors import ConfigError, GomtlError
from .model import (
    Hyperparams,
    LatentModel,
    OuterIterStats,
    TrainReport,
    full_objective,
)
from .sparse import solve_codes

STL_GRAD_TOL = 1e-8


@dataclass(frozen=True)
class StlModel:
    """Independently trained per-task weights, stacked as columns (d, T)."""

    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "weights", _frozen_array(self.weights))


@dataclass(frozen=True)
class FitResult:
    model: LatentModel
    report: TrainReport


def _ridge_task(task: TaskData, lam: float) -> np.ndarray:
    X = task.features
    n = task.n_samples
    A = (X @ X.T) / n
    A[np.diag_indices_from(A)] += lam
    return np.linalg.solve(A, X @ task.labels / n)


def _logistic_task(task: TaskData, lam: float, max_iter: int = 100) -> np.ndarray:
    """L2-regularized logistic fit by damped Newton (IRLS) iterations."""
    X = task.features
    y = task.labels
    signs = 2.0 * y - 1.0
    n = task.n_samples
    d = task.dim

    def objective(w):
        return float(np.logaddexp(0.0, -signs * (X.T @ w)).mean()) + lam * float(w @ w)

    w = np.zeros(d)
    obj = objective(w)
    for _ in range(max_iter):
        p = expit(X.T @ w)
        grad = -(X @ (y - p)) / n + 2.0 * lam * w
        if np.linalg.norm(grad) <= STL_GRAD_TOL:
            break
        weights = p * (1.0 - p) / n
        H = (X * weights) @ X.T
        H[np.diag_indices_from(H)] += 2.0 * lam
        step = np.linalg.solve(H, -grad)
        slope = float(grad @ step)
        alpha = 1.0
        for _bt in range(50):
            cand = w + alpha * step
            obj_cand = objective(cand)
            if np.isfinite(obj_cand) and obj_cand <= obj + 1e-4 * alpha * slope:
                break
            alpha *= 0.5
        w = w + alpha * step
        obj = objective(w)
    return w


def train_stl(data: MultiTaskDataset, lam: float) -> StlModel:
    """Fit each task independently: ridge for regression, logistic otherwise."""
    if lam <= 0:
        raise ConfigError(f"lam must be positive, got {lam}")
    if data.kind is TaskKind.REGRESSION:
        cols = [_ridge_task(task, lam) for task in data]
    else:
        cols = [_logistic_task(task, lam) for task in data]
    return StlModel(np.column_stack(cols))


def init_basis(stl_weights: np.ndarray, k: int) -> np.ndarray:
    """Top-k left singular vectors of the stacked single-task weights."""
    W0 = np.asarray(stl_weights, dtype=float)
    if W0.ndim != 2:
        raise ConfigError(f"weight matrix must be 2-d, got shape {W0.shape}")
    d, n_tasks = W0.shape
    if not 1 <= k <= min(d, n_tasks):
        raise ConfigError(f"k={k} must lie in [1, min(d, T)={min(d, n_tasks)}]")
    U, _, _ = np.linalg.svd(W0, full_matrices=False)
    return U[:, :k]


def fit(
    data: MultiTaskDataset, hyper: Hyperparams, workers: int | None = None
) -> FitResult:
    """Run the full alternating optimization.

    Args:
        data: training tasks.
        hyper: all solver settings; validated against the data.
        workers: thread count for the per-task code sweep. The sweep is an
            independent per-task map assembled in task order, so results are
            identical in sequential (default) and threaded modes.

    Returns:
        FitResult with the trained model and a report whose objective trace
        holds the training objective after each code sweep, evaluated at the
        basis the codes were solved against.
    """
    hyper.validate_for(data)
    stl = train_stl(data, hyper.lam)
    basis = init_basis(stl.weights, hyper.k)
    codes = np.zeros((hyper.k, data.n_tasks))
    squared_system = (
        SquaredBasisSystem(data) if hyper.basis_method == "closed_form" else None
    )
    trace: list[float] = []
    stats: list[OuterIterStats] = []
    converged = False
    basis_old = basis
    outer = 0

    pool = ThreadPoolExecutor(workers) if workers is not None and workers > 1 else None
    try:
        for outer in range(1, hyper.outer_max_iter + 1):
            codes_prev = codes
            try:
                def sweep_one(t):
                    return solve_codes(
                        basis,
                        data.tasks[t],
                        hyper.mu,
                        s0=codes_prev[:, t],
                        tol=hyper.inner_tol,
                        max_iter=hyper.inner_max_iter,
                    )

                mapper = pool.map if pool is not None else map
                results = list(mapper(sweep_one, range(data.n_tasks)))
                codes = np.column_stack([r.codes for r in results])
                kkt_max = max(r.kkt_residual for r in results)
                code_iters = sum(r.iterations for r in results)

                basis_old = basis
                trace.append(
                    full_objective(LatentModel(basis_old, codes), data, hyper.mu, hyper.lam)
                )

                if squared_system is not None:
                    basis_result = squared_system.solve(codes, hyper.lam)
                else:
                    basis_result = solve_basis_logistic(
                        codes,
                        data,
                        hyper.lam,
                        method=hyper.basis_method,
                        basis0=basis_old,
                    )
                basis = basis_result.basis
            except GomtlError as e:
                raise type(e)(f"outer iteration {outer}: {e}") from e

            stats.append(
                OuterIterStats(
                    code_kkt_max=float(kkt_max),
                    code_iterations=int(code_iters),
                    basis_residual=float(basis_result.residual),
                    basis_iterations=int(basis_result.iterations),
                )
            )
            delta_basis = np.linalg.norm(basis - basis_old) / (
                1.0 + np.linalg.norm(basis_old)
            )
            delta_codes = np.linalg.norm(codes - codes_prev) / (
                1.0 + np.linalg.norm(codes_prev)
            )
            if max(delta_basis, delta_codes) < hyper.outer_tol:
                converged = True
                break
    finally:
        if pool is not None:
            pool.shutdown()

    model = LatentModel(basis_old, codes)
    report = TrainReport(tuple(trace), outer, converged, tuple(stats))
    return FitResult(model, report)

"""Basis-matrix subproblem solvers.

With the codes held fixed the objective over the basis is convex. For squared
loss the stationarity condition is linear in the basis: applying the
column-stacking vec operator turns it into the dense (d*k, d*k) system

    [ sum_t (1/n_t) (s_t s_t') kron (X_t X_t')  +  lam*I ] vec(B)
        = sum_t (1/n_t) vec(X_t y_t s_t')

which is solved by dense factorization. For logistic loss the solve is
iterative: steepest descent or a damped Newton step whose direction comes
from the analogous vectorized system, both with Armijo backtracking.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.special import expit

from .data import MultiTaskDataset, TaskKind
from .errors import (
    ConfigError,
    DimensionError,
    NumericError,
    SingularSystemError,
    SystemSizeError,
)
from .losses import (
    _check_codes,
    logistic_grad_basis,
    logistic_objective_basis,
)

DEFAULT_SYSTEM_CAP = 20_000
ARMIJO_C = 1e-4
ARMIJO_SHRINK = 0.5
MAX_BACKTRACKS = 50


@dataclass(frozen=True)
class BasisSolveResult:
    """basis plus a residual: linear-system residual for the closed form,
    gradient Frobenius norm for the iterative methods."""

    basis: np.ndarray
    residual: float
    iterations: int
    converged: bool


@dataclass(frozen=True)
class NewtonDirection:
    direction: np.ndarray
    step_size: float


def _vec(M: np.ndarray) -> np.ndarray:
    return np.ravel(M, order="F")


def _unvec(v: np.ndarray, d: int, k: int) -> np.ndarray:
    return v.reshape((d, k), order="F")


def _check_system_size(d: int, k: int, cap: int) -> None:
    if d * k > cap:
        raise SystemSizeError(
            f"vectorized system has size {d * k} > cap {cap}; "
            "this dense solver is meant for small problems, use an iterative method"
        )


class SquaredBasisSystem:
    """Reusable closed-form solver for the squared-loss basis subproblem.

    The per-task Gram matrices X X'/n and moment vectors X y/n do not depend
    on the codes, so they are computed once and reused across alternating
    iterations.
    """

    def __init__(self, data: MultiTaskDataset, max_system_size: int = DEFAULT_SYSTEM_CAP):
        if data.kind is not TaskKind.REGRESSION:
            raise ConfigError("closed-form basis solve requires regression data")
        self.dim = data.dim
        self.n_tasks = data.n_tasks
        self.max_system_size = max_system_size
        self.grams = np.stack(
            [task.features @ task.features.T / task.n_samples for task in data]
        )
        self.moments = np.column_stack(
            [task.features @ task.labels / task.n_samples for task in data]
        )

    def solve(self, codes: np.ndarray, lam: float) -> BasisSolveResult:
        codes = np.asarray(codes, dtype=float)
        if codes.ndim != 2 or codes.shape[1] != self.n_tasks:
            raise DimensionError(
                f"codes must have shape (k, {self.n_tasks}), got {codes.shape}"
            )
        d = self.dim
        k = codes.shape[0]
        _check_system_size(d, k, self.max_system_size)
        n = d * k
        # sum_t (s_t s_t') kron (X_t X_t'/n_t), assembled in one pass
        outer_codes = codes.T[:, :, None] * codes.T[:, None, :]  # (T, k, k)
        A = np.einsum("tab,tcd->acbd", outer_codes, self.grams).reshape(n, n)
        A[np.diag_indices_from(A)] += lam
        b = _vec(self.moments @ codes.T)

        try:
            x = scipy.linalg.solve(A, b, assume_a="sym")
        except (scipy.linalg.LinAlgError, np.linalg.LinAlgError) as e:
            if lam == 0.0:
                raise SingularSystemError(
                    "basis system is rank deficient; a positive lam makes it definite"
                ) from e
            raise NumericError(f"basis system solve failed: {e}") from e

        target = 1e-8 * (1.0 + float(np.linalg.norm(b)))
        residual = float(np.linalg.norm(A @ x - b))
        if residual > target:
            x = x + scipy.linalg.solve(A, b - A @ x, assume_a="sym")  # one refinement
            residual = float(np.linalg.norm(A @ x - b))
        if not np.isfinite(x).all():
            if lam == 0.0:
                raise SingularSystemError(
                    "basis system is rank deficient; a positive lam makes it definite"
                )
            raise NumericError("basis solve produced non-finite entries")
        return BasisSolveResult(_unvec(x, d, k), residual, 1, residual <= target)


def solve_basis_squared(
    codes: np.ndarray,
    data: MultiTaskDataset,
    lam: float,
    max_system_size: int = DEFAULT_SYSTEM_CAP,
) -> BasisSolveResult:
    """Closed-form basis solve for squared loss via the vectorized system."""
    return SquaredBasisSystem(data, max_system_size).solve(codes, lam)


def logistic_newton_direction(
    basis: np.ndarray,
    codes: np.ndarray,
    data: MultiTaskDataset,
    lam: float,
    max_system_size: int = DEFAULT_SYSTEM_CAP,
) -> NewtonDirection:
    """Newton step direction for the logistic basis objective, with Armijo step.

    The curvature matrix accumulates, per sample, the rank-1 outer product of
    vec(x_i s_t') weighted by sigma*(1-sigma), plus 2*lam on the diagonal.
    """
    if data.kind is not TaskKind.CLASSIFICATION:
        raise ConfigError("the logistic basis solver requires classification data")
    basis = np.asarray(basis, dtype=float)
    codes = np.asarray(codes, dtype=float)
    _check_codes(basis, codes, data)
    d, k = basis.shape
    _check_system_size(d, k, max_system_size)
    n = d * k
    H = np.zeros((n, n))
    for t, task in enumerate(data):
        s = codes[:, t]
        p = expit(task.features.T @ (basis @ s))
        w = p * (1.0 - p) / task.n_samples
        K = np.kron(s[None, :], task.features.T)  # row i = vec(x_i s_t')
        H += K.T @ (w[:, None] * K)
    H[np.diag_indices_from(H)] += 2.0 * lam

    grad = logistic_grad_basis(basis, codes, data, lam)
    try:
        step_vec = scipy.linalg.solve(H, -_vec(grad), assume_a="pos")
    except (scipy.linalg.LinAlgError, np.linalg.LinAlgError) as e:
        if lam == 0.0:
            raise SingularSystemError(
                "Newton system is singular; a positive lam makes it definite"
            ) from e
        raise NumericError(f"Newton system solve failed: {e}") from e
    M = _unvec(step_vec, d, k)

    slope = float(np.sum(grad * M))
    if slope >= 0.0:  # already stationary (or numerically so)
        return NewtonDirection(np.zeros_like(M), 1.0)
    f0 = logistic_objective_basis(basis, codes, data, lam)
    alpha = 1.0
    for _ in range(MAX_BACKTRACKS):
        if (
            logistic_objective_basis(basis + alpha * M, codes, data, lam)
            <= f0 + ARMIJO_C * alpha * slope
        ):
            break
        alpha *= ARMIJO_SHRINK
    return NewtonDirection(M, alpha)


def solve_basis_logistic(
    codes: np.ndarray,
    data: MultiTaskDataset,
    lam: float,
    method: str = "newton",
    tol: float = 1e-6,
    max_iter: int | None = None,
    basis0: np.ndarray | None = None,
) -> BasisSolveResult:
    """Iterative basis solve for logistic loss.

    method "gradient" takes steepest-descent steps with Armijo backtracking;
    "newton" takes damped Newton steps. Stops when the gradient Frobenius
    norm falls below tol * (1 + |objective|).
    """
    if data.kind is not TaskKind.CLASSIFICATION:
        raise ConfigError("the logistic basis solver requires classification data")
    if method not in ("gradient", "newton"):
        raise ConfigError(f"method must be 'gradient' or 'newton', got {method!r}")
    codes = np.asarray(codes, dtype=float)
    d = data.dim
    k = codes.shape[0]
    if basis0 is None:
        B = np.zeros((d, k))
    else:
        B = np.array(basis0, dtype=float)
        if B.shape != (d, k):
            raise DimensionError(f"basis0 must have shape ({d}, {k}), got {B.shape}")
    if max_iter is None:
        max_iter = 30 if method == "newton" else 200

    objective = logistic_objective_basis(B, codes, data, lam)
    if not np.isfinite(objective):
        raise NumericError("non-finite logistic objective at the starting basis")
    grad = logistic_grad_basis(B, codes, data, lam)
    gnorm = float(np.linalg.norm(grad))
    iterations = 0
    while iterations < max_iter and gnorm > tol * (1.0 + abs(objective)):
        if method == "newton":
            nd = logistic_newton_direction(B, codes, data, lam)
            B_new = B + nd.step_size * nd.direction
            obj_new = logistic_objective_basis(B_new, codes, data, lam)
        else:
            slope = -gnorm * gnorm
            alpha = 1.0
            B_new, obj_new = B, objective
            for _ in range(MAX_BACKTRACKS):
                cand = B - alpha * grad
                obj_cand = logistic_objective_basis(cand, codes, data, lam)
                if np.isfinite(obj_cand) and obj_cand <= objective + ARMIJO_C * alpha * slope:
                    B_new, obj_new = cand, obj_cand
                    break
                alpha *= ARMIJO_SHRINK
        if not np.isfinite(obj_new):
            raise NumericError("logistic basis solve produced a non-finite objective")
        if obj_new > objective:
            break  # numerical floor; keep the current basis
        moved = not np.array_equal(B_new, B)
        B, objective = B_new, obj_new
        grad = logistic_grad_basis(B, codes, data, lam)
        gnorm = float(np.linalg.norm(grad))
        iterations += 1
        if not moved:
            break
    return BasisSolveResult(B, gnorm, iterations, gnorm <= tol * (1.0 + abs(objective)))

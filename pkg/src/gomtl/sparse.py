"""Per-task sparse code solver.

Minimizes  f(s) + mu * ||s||_1  for one task with the basis held fixed, where
f is the task's mean loss (squared or logistic, dispatched through the losses
module). The production solver is a projected-Newton (two-metric) method on
the nonnegative split s = pos - neg: coordinates sitting on the bound with a
gradient pushing into it take plain gradient steps, the remaining free block
takes a damped Newton step, and the combined direction is projected back onto
the orthant under Armijo backtracking.

A plain proximal-gradient (ISTA) solver is kept alongside as an independent
reference implementation for verification.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import TaskData
from .errors import NumericError
from .losses import code_problem

ACTIVE_EPS = 1e-8
HESS_DAMP = 1e-8
ARMIJO_C = 1e-4
ARMIJO_SHRINK = 0.5
MAX_BACKTRACKS = 50


@dataclass(frozen=True)
class SparseSolveResult:
    codes: np.ndarray
    kkt_residual: float
    iterations: int
    converged: bool


def _kkt(s: np.ndarray, grad: np.ndarray, mu: float) -> float:
    at_zero = np.maximum(np.abs(grad) - mu, 0.0)
    elsewhere = np.abs(grad + mu * np.sign(s))
    return float(np.max(np.where(s == 0.0, at_zero, elsewhere)))


def kkt_residual(s: np.ndarray, grad: np.ndarray, mu: float) -> float:
    """Max-norm violation of the L1 optimality conditions.

    Nonzero coordinates must satisfy grad_i + mu*sign(s_i) = 0; zero
    coordinates must satisfy |grad_i| <= mu.
    """
    return _kkt(np.asarray(s, dtype=float), np.asarray(grad, dtype=float), mu)


def solve_codes(
    basis: np.ndarray,
    task: TaskData,
    mu: float,
    s0: np.ndarray | None = None,
    tol: float = 1e-6,
    max_iter: int = 500,
) -> SparseSolveResult:
    """Solve one task's L1-penalized code subproblem by two-metric projection.

    Starts from s0 (zeros if omitted) and never accepts a step that increases
    f(s) + mu*||s||_1, so the returned objective is at most the objective at
    s0. Exhausting max_iter is reported through converged=False rather than
    raised; non-finite intermediates raise NumericError.
    """
    problem = code_problem(np.asarray(basis, dtype=float), task)
    k = basis.shape[1]
    s = np.zeros(k) if s0 is None else np.array(s0, dtype=float)
    if s.shape != (k,):
        raise NumericError(f"warm start must have shape ({k},), got {s.shape}")
    value, grad = problem.value_grad(s)
    if not (np.isfinite(value) and np.isfinite(grad).all()):
        raise NumericError("non-finite loss at the sparse solver starting point")
    objective = value + mu * float(np.abs(s).sum())
    residual = _kkt(s, grad, mu)
    iterations = 0

    for _ in range(max_iter):
        if residual <= tol:
            break
        # canonical split: pos/neg parts have disjoint support
        z = np.concatenate([np.maximum(s, 0.0), np.maximum(-s, 0.0)])
        gz = np.concatenate([grad + mu, mu - grad])
        active = (z <= ACTIVE_EPS) & (gz >= 0.0)
        direction = np.where(active, -gz, 0.0)
        free = np.nonzero(~active)[0]
        if free.size:
            H = problem.hess(s)
            signs = np.where(free < k, 1.0, -1.0)
            cols = free % k
            Hff = (signs[:, None] * signs[None, :]) * H[np.ix_(cols, cols)]
            Hff[np.diag_indices_from(Hff)] += HESS_DAMP
            try:
                step = np.linalg.solve(Hff, -gz[free])
            except np.linalg.LinAlgError:
                step = -gz[free]
            if step @ gz[free] >= 0.0:  # not a descent direction
                step = -gz[free]
            direction[free] = step
        if not direction.any():
            break

        alpha = 1.0
        accepted = False
        for _bt in range(MAX_BACKTRACKS):
            z_new = np.maximum(z + alpha * direction, 0.0)
            s_new = z_new[:k] - z_new[k:]
            value_new, grad_new = problem.value_grad(s_new)
            if np.isfinite(value_new) and np.isfinite(grad_new).all():
                predicted = float(gz @ (z_new - z))
                split_obj = value_new + mu * float(z_new.sum())
                if predicted <= 0.0 and split_obj <= objective + ARMIJO_C * predicted:
                    accepted = True
                    break
            alpha *= ARMIJO_SHRINK
        if not accepted:
            break  # numerical floor reached; keep the current iterate

        s, value, grad = s_new, value_new, grad_new
        objective = value + mu * float(np.abs(s).sum())
        if not np.isfinite(objective):
            raise NumericError("sparse solver produced a non-finite objective")
        iterations += 1
        residual = _kkt(s, grad, mu)

    return SparseSolveResult(s, residual, iterations, residual <= tol)


def _soft_threshold(v: np.ndarray, t: float) -> np.ndarray:
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def ista_solve_codes(
    basis: np.ndarray,
    task: TaskData,
    mu: float,
    tol: float = 1e-10,
    max_iter: int = 100_000,
) -> SparseSolveResult:
    """Proximal-gradient reference solver for the same subproblem.

    Soft-thresholding steps with a backtracked step size, run from zero until
    the KKT residual drops below tol. Deliberately simple and independent of
    solve_codes; intended for verification, not production use.
    """
    problem = code_problem(np.asarray(basis, dtype=float), task)
    k = basis.shape[1]
    s = np.zeros(k)
    value, grad = problem.value_grad(s)
    residual = _kkt(s, grad, mu)
    step = 1.0
    iterations = 0
    for _ in range(max_iter):
        if residual <= tol:
            break
        while True:
            cand = _soft_threshold(s - step * grad, step * mu)
            diff = cand - s
            value_cand, grad_cand = problem.value_grad(cand)
            bound = value + grad @ diff + (diff @ diff) / (2.0 * step)
            if value_cand <= bound + 1e-15 * (1.0 + abs(value)):
                break
            step *= 0.5
            if step < 1e-20:
                raise NumericError("proximal step size underflow")
        s, value, grad = cand, value_cand, grad_cand
        residual = _kkt(s, grad, mu)
        iterations += 1
        step *= 2.0  # re-grow; the backtrack above shrinks it again if needed
    return SparseSolveResult(s, residual, iterations, residual <= tol)

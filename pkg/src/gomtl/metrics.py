"""Evaluation metrics: pooled errors and support-recovery scoring."""

from __future__ import annotations

import numpy as np

from .data import MultiTaskDataset, TaskKind
from .errors import ConfigError, DataError
from .model import LatentModel, _check_model_data


def rmse(model: LatentModel, test: MultiTaskDataset) -> float:
    """Pooled root mean squared error over every task's test points."""
    if test.kind is not TaskKind.REGRESSION:
        raise ConfigError("rmse applies to regression data")
    _check_model_data(model, test)
    W = model.weights
    sq_sum = 0.0
    count = 0
    for t, task in enumerate(test):
        r = task.features.T @ W[:, t] - task.labels
        sq_sum += float(r @ r)
        count += task.n_samples
    return float(np.sqrt(sq_sum / count))


def rmse_per_task(model: LatentModel, test: MultiTaskDataset) -> np.ndarray:
    """Per-task RMSE values, in task order."""
    if test.kind is not TaskKind.REGRESSION:
        raise ConfigError("rmse applies to regression data")
    _check_model_data(model, test)
    W = model.weights
    out = np.empty(test.n_tasks)
    for t, task in enumerate(test):
        r = task.features.T @ W[:, t] - task.labels
        out[t] = np.sqrt(float(r @ r) / task.n_samples)
    return out


def binary_error(model: LatentModel, test: MultiTaskDataset) -> float:
    """Pooled misclassification rate; score >= 0 predicts label 1."""
    if test.kind is not TaskKind.CLASSIFICATION:
        raise ConfigError("binary_error applies to classification data")
    _check_model_data(model, test)
    W = model.weights
    wrong = 0
    count = 0
    for t, task in enumerate(test):
        pred = (task.features.T @ W[:, t] >= 0.0).astype(float)
        wrong += int(np.sum(pred != task.labels))
        count += task.n_samples
    return wrong / count


def multiclass_error(model: LatentModel, features: np.ndarray, labels) -> float:
    """One-vs-all multi-class error: predict argmax_t of the linear scores.

    features is (d, n) with samples as columns; labels are integers in
    [0, T). Ties in the argmax go to the lowest class index.
    """
    features = np.asarray(features, dtype=float)
    labels = np.asarray(labels)
    if features.ndim != 2 or features.shape[0] != model.dim:
        raise ConfigError(
            f"features must have shape ({model.dim}, n), got {features.shape}"
        )
    if labels.shape != (features.shape[1],):
        raise DataError(
            f"expected {features.shape[1]} labels, got shape {labels.shape}"
        )
    if labels.size and (labels.min() < 0 or labels.max() >= model.n_tasks):
        raise DataError(
            f"class labels must lie in [0, {model.n_tasks}), "
            f"got range [{labels.min()}, {labels.max()}]"
        )
    scores = model.weights.T @ features  # (T, n)
    predicted = np.argmax(scores, axis=0)  # first max wins
    return float(np.mean(predicted != labels))


def support_recovery_score(
    codes: np.ndarray,
    true_groups,
    threshold: float | None = None,
    true_codes: np.ndarray | None = None,
) -> float:
    """Pairwise agreement between the learned supports and true grouping.

    The code matrix is binarized at threshold (default 0.05 * max|entry|).
    Every same-group task pair must share at least one active basis; every
    pair from groups with no ground-truth latent overlap must share none.
    Pairs from distinct but overlapping groups are not scored. Ground-truth
    overlap is read off true_codes when provided; without it, distinct
    groups are treated as non-overlapping.
    """
    A = np.abs(np.asarray(codes, dtype=float))
    n_tasks = A.shape[1]
    if threshold is None:
        threshold = 0.05 * float(A.max()) if A.size else 0.0
    active = A > threshold

    groups = [tuple(g) for g in true_groups]
    group_of = {}
    for g, members in enumerate(groups):
        for t in members:
            group_of[t] = g

    if true_codes is not None:
        true_support = [
            frozenset(np.nonzero(np.any(np.abs(true_codes[:, list(members)]) > 0, axis=1))[0])
            for members in groups
        ]
        overlaps = [
            [bool(a & b) for b in true_support] for a in true_support
        ]
    else:
        overlaps = [[i == j for j in range(len(groups))] for i in range(len(groups))]

    hits = 0
    counted = 0
    for t1 in range(n_tasks):
        for t2 in range(t1 + 1, n_tasks):
            g1, g2 = group_of[t1], group_of[t2]
            shared = bool(np.any(active[:, t1] & active[:, t2]))
            if g1 == g2:
                counted += 1
                hits += shared
            elif not overlaps[g1][g2]:
                counted += 1
                hits += not shared
    return hits / counted if counted else 1.0

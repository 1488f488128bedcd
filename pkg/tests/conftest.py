import numpy as np
import pytest

from gomtl import MultiTaskDataset, TaskData, TaskKind


def random_regression_task(rng, d, n, weight_scale=1.0, noise=0.3):
    X = rng.standard_normal((d, n))
    w = weight_scale * rng.standard_normal(d)
    y = X.T @ w + noise * rng.standard_normal(n)
    return TaskData(X, y, TaskKind.REGRESSION)


def random_classification_task(rng, d, n, weight_scale=1.0):
    X = rng.standard_normal((d, n))
    w = weight_scale * rng.standard_normal(d)
    y = (X.T @ w + 0.5 * rng.standard_normal(n) > 0).astype(float)
    return TaskData(X, y, TaskKind.CLASSIFICATION)


def random_dataset(rng, d, n_tasks, n, kind=TaskKind.REGRESSION, weight_scale=1.0):
    maker = (
        random_regression_task
        if kind is TaskKind.REGRESSION
        else random_classification_task
    )
    return MultiTaskDataset(
        tuple(maker(rng, d, n, weight_scale=weight_scale) for _ in range(n_tasks))
    )


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

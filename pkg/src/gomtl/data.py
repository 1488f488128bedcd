"""Task containers: per-task samples and the multi-task dataset.

All containers are immutable after construction (arrays are copied and marked
read-only), so they can be shared freely across concurrent workers.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DataError


class TaskKind(str, enum.Enum):
    REGRESSION = "regression"
    CLASSIFICATION = "classification"


def _frozen_array(a) -> np.ndarray:
    out = np.array(a, dtype=float)
    out.setflags(write=False)
    return out


def normalize_binary_labels(y) -> np.ndarray:
    """Map {-1, +1} labels to the internal {0, 1} convention.

    Labels already in {0, 1} pass through unchanged; anything else is a
    DataError.
    """
    y = np.asarray(y, dtype=float)
    values = np.unique(y)
    if np.isin(values, (0.0, 1.0)).all():
        return y.copy()
    if np.isin(values, (-1.0, 1.0)).all():
        return (y > 0).astype(float)
    raise DataError(
        f"binary labels must be in {{0,1}} or {{-1,1}}, got values {values[:5].tolist()}"
    )


@dataclass(frozen=True)
class TaskData:
    """Samples for a single task.

    features: (d, n) array, one sample per column.
    labels: (n,) array; for classification every entry must be 0 or 1.
    """

    features: np.ndarray
    labels: np.ndarray
    kind: TaskKind = TaskKind.REGRESSION

    def __post_init__(self):
        object.__setattr__(self, "kind", TaskKind(self.kind))
        X = _frozen_array(self.features)
        y = _frozen_array(self.labels)
        if X.ndim != 2:
            raise DataError(f"features must be 2-d (d, n), got shape {X.shape}")
        if y.ndim != 1:
            raise DataError(f"labels must be 1-d, got shape {y.shape}")
        if X.shape[1] < 1:
            raise DataError("a task needs at least one sample")
        if X.shape[1] != y.shape[0]:
            raise DataError(f"{X.shape[1]} samples but {y.shape[0]} labels")
        if not np.isfinite(X).all() or not np.isfinite(y).all():
            raise DataError("features and labels must be finite")
        if self.kind is TaskKind.CLASSIFICATION and not np.isin(y, (0.0, 1.0)).all():
            raise DataError(
                "classification labels must be 0 or 1 (see normalize_binary_labels)"
            )
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)

    @property
    def dim(self) -> int:
        return self.features.shape[0]

    @property
    def n_samples(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True)
class MultiTaskDataset:
    """A collection of tasks sharing one feature dimension and one kind."""

    tasks: tuple[TaskData, ...]

    def __post_init__(self):
        tasks = tuple(self.tasks)
        if not tasks:
            raise DataError("a dataset needs at least one task")
        d = tasks[0].dim
        kind = tasks[0].kind
        for t, task in enumerate(tasks):
            if task.dim != d:
                raise DataError(f"task {t} has feature dimension {task.dim}, expected {d}")
            if task.kind is not kind:
                raise DataError(f"task {t} has kind {task.kind.value}, expected {kind.value}")
        object.__setattr__(self, "tasks", tasks)

    @property
    def dim(self) -> int:
        return self.tasks[0].dim

    @property
    def n_tasks(self) -> int:
        return len(self.tasks)

    @property
    def kind(self) -> TaskKind:
        return self.tasks[0].kind

    @property
    def n_samples(self) -> int:
        return sum(task.n_samples for task in self.tasks)

    def __iter__(self):
        return iter(self.tasks)

    def __len__(self) -> int:
        return len(self.tasks)


def append_bias_feature(data: MultiTaskDataset) -> MultiTaskDataset:
    """Return a copy of the dataset with a constant-1 feature row appended."""
    tasks = tuple(
        TaskData(
            np.vstack([task.features, np.ones((1, task.n_samples))]),
            task.labels,
            task.kind,
        )
        for task in data
    )
    return MultiTaskDataset(tasks)

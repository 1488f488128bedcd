"""Dataset directory serialization.

A dataset directory holds a JSON manifest plus one CSV file per task and
split:

    manifest.json            {"d": ..., "T": ..., "kind": ..., "has_bias_feature": ...}
    train_<t>.csv            one sample per row: d feature columns, then the label
    test_<t>.csv             optional, same layout

Values are written with 17 significant digits, so an export/ingest round
trip reproduces every float64 bit-exactly.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .data import (
    MultiTaskDataset,
    TaskData,
    TaskKind,
    append_bias_feature,
    normalize_binary_labels,
)
from .errors import DataError, DatasetParseError

MANIFEST_NAME = "manifest.json"
FLOAT_FORMAT = "%.17g"


def save_matrix(matrix: np.ndarray, path) -> None:
    np.savetxt(path, np.atleast_2d(matrix), fmt=FLOAT_FORMAT, delimiter=",")


def load_matrix(path) -> np.ndarray:
    path = Path(path)
    if not path.exists():
        raise DataError(f"missing matrix file {path}")
    return np.atleast_2d(np.loadtxt(path, delimiter=",", ndmin=2))


def _write_task_file(path: Path, task: TaskData) -> None:
    rows = np.column_stack([task.features.T, task.labels])
    np.savetxt(path, rows, fmt=FLOAT_FORMAT, delimiter=",")


def export_dataset(
    train: MultiTaskDataset,
    path,
    test: MultiTaskDataset | None = None,
    has_bias_feature: bool = False,
) -> None:
    """Write a dataset directory; the test split is optional."""
    if test is not None and (
        test.n_tasks != train.n_tasks or test.dim != train.dim or test.kind != train.kind
    ):
        raise DataError("train and test splits disagree in shape or kind")
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    manifest = {
        "d": train.dim,
        "T": train.n_tasks,
        "kind": train.kind.value,
        "has_bias_feature": bool(has_bias_feature),
    }
    with open(path / MANIFEST_NAME, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    for t, task in enumerate(train):
        _write_task_file(path / f"train_{t}.csv", task)
    if test is not None:
        for t, task in enumerate(test):
            _write_task_file(path / f"test_{t}.csv", task)


def _read_manifest(path: Path) -> dict:
    manifest_path = path / MANIFEST_NAME
    if not manifest_path.exists():
        raise DataError(f"missing manifest {manifest_path}")
    try:
        with open(manifest_path) as fh:
            manifest = json.load(fh)
    except json.JSONDecodeError as e:
        raise DatasetParseError(manifest_path, e.lineno, f"invalid JSON: {e.msg}") from e
    for key in ("d", "T", "kind"):
        if key not in manifest:
            raise DataError(f"manifest {manifest_path} is missing key {key!r}")
    try:
        manifest["kind"] = TaskKind(manifest["kind"])
    except ValueError:
        raise DataError(
            f"manifest {manifest_path} has unknown kind {manifest['kind']!r}"
        ) from None
    if not isinstance(manifest["d"], int) or manifest["d"] < 1:
        raise DataError(f"manifest {manifest_path}: d must be a positive integer")
    if not isinstance(manifest["T"], int) or manifest["T"] < 1:
        raise DataError(f"manifest {manifest_path}: T must be a positive integer")
    manifest.setdefault("has_bias_feature", False)
    return manifest


def _read_task_file(path: Path, d: int, kind: TaskKind) -> TaskData:
    if not path.exists():
        raise DataError(f"missing task file {path}")
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row:
                continue  # tolerate blank lines
            if len(row) != d + 1:
                raise DatasetParseError(
                    path, lineno, f"expected {d + 1} columns (d={d} features + label), got {len(row)}"
                )
            try:
                rows.append([float(cell) for cell in row])
            except ValueError:
                bad = next(c for c in row if not _is_float(c))
                raise DatasetParseError(path, lineno, f"non-numeric value {bad!r}") from None
    if not rows:
        raise DatasetParseError(path, 1, "task file contains no samples")
    arr = np.asarray(rows, dtype=float)
    features = arr[:, :d].T
    labels = arr[:, d]
    if kind is TaskKind.CLASSIFICATION:
        try:
            labels = normalize_binary_labels(labels)
        except DataError as e:
            raise DatasetParseError(path, 1, str(e)) from None
    return TaskData(features, labels, kind)


def _is_float(cell: str) -> bool:
    try:
        float(cell)
        return True
    except ValueError:
        return False


def has_split(path, split: str) -> bool:
    """True when the directory carries files for the given split."""
    return (Path(path) / f"{split}_0.csv").exists()


def ingest_dataset(path, split: str = "train", append_bias: bool = False) -> MultiTaskDataset:
    """Load one split of a dataset directory.

    append_bias adds a constant-1 feature row after loading; it is rejected
    when the manifest records that the stored data already carries one.
    """
    if split not in ("train", "test"):
        raise DataError(f"split must be 'train' or 'test', got {split!r}")
    path = Path(path)
    manifest = _read_manifest(path)
    tasks = tuple(
        _read_task_file(path / f"{split}_{t}.csv", manifest["d"], manifest["kind"])
        for t in range(manifest["T"])
    )
    data = MultiTaskDataset(tasks)
    if append_bias:
        if manifest["has_bias_feature"]:
            raise DataError(
                f"dataset at {path} already contains a bias feature; not appending another"
            )
        data = append_bias_feature(data)
    return data

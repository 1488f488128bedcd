"""Experiment harness: cross-validation for mu, full runs, result records.

The protocol: generate or ingest a training set, pick mu by averaging a
validation metric over seeded per-task 70/30 splits of the training data,
refit on the full training set at the chosen mu, then report metrics on the
held-out test split. Validation never touches test data; the two splits are
loaded and carried separately end to end.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .data import MultiTaskDataset, TaskData, TaskKind
from .dataio import has_split, ingest_dataset, save_matrix
from .errors import ConfigError, DataError
from .metrics import binary_error, rmse, rmse_per_task, support_recovery_score
from .model import Hyperparams, LatentModel
from .synth import SynthDataset, gen_disjoint, gen_overlap
from .train import fit, train_stl

MU_GRID_DEFAULT = (0.001, 0.005, 0.01, 0.05, 0.1, 0.2, 0.3, 0.4)
SYNTH_GENERATORS = {"overlap": gen_overlap, "disjoint": gen_disjoint}


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce one run."""

    hyper: Hyperparams
    data_path: str | None = None
    synth: str | None = None
    synth_seed: int = 0
    method: str = "gomtl"  # or "stl"
    mu_grid: tuple[float, ...] = MU_GRID_DEFAULT
    cv_splits: int = 4
    cv_train_fraction: float = 0.7
    seed: int = 0
    append_bias: bool = False
    output_path: str | None = None
    workers: int | None = None

    def __post_init__(self):
        if (self.data_path is None) == (self.synth is None):
            raise ConfigError("exactly one of data_path and synth must be given")
        if self.synth is not None and self.synth not in SYNTH_GENERATORS:
            raise ConfigError(
                f"synth must be one of {sorted(SYNTH_GENERATORS)}, got {self.synth!r}"
            )
        if self.method not in ("gomtl", "stl"):
            raise ConfigError(f"method must be 'gomtl' or 'stl', got {self.method!r}")
        grid = tuple(float(m) for m in self.mu_grid)
        if not grid:
            raise ConfigError("mu_grid must not be empty")
        if any(m < 0 for m in grid):
            raise ConfigError("mu_grid values must be non-negative")
        if not 0.0 < self.cv_train_fraction < 1.0:
            raise ConfigError(
                f"cv_train_fraction must lie in (0, 1), got {self.cv_train_fraction}"
            )
        if self.cv_splits < 1:
            raise ConfigError(f"cv_splits must be at least 1, got {self.cv_splits}")
        object.__setattr__(self, "mu_grid", grid)

    def to_dict(self) -> dict:
        return {
            "hyper": {
                "k": self.hyper.k,
                "mu": self.hyper.mu,
                "lam": self.hyper.lam,
                "outer_tol": self.hyper.outer_tol,
                "outer_max_iter": self.hyper.outer_max_iter,
                "inner_tol": self.hyper.inner_tol,
                "inner_max_iter": self.hyper.inner_max_iter,
                "basis_method": self.hyper.basis_method,
            },
            "data_path": self.data_path,
            "synth": self.synth,
            "synth_seed": self.synth_seed,
            "method": self.method,
            "mu_grid": list(self.mu_grid),
            "cv_splits": self.cv_splits,
            "cv_train_fraction": self.cv_train_fraction,
            "seed": self.seed,
            "append_bias": self.append_bias,
            "output_path": self.output_path,
            "workers": self.workers,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "ExperimentConfig":
        payload = dict(payload)
        hyper = Hyperparams(**payload.pop("hyper"))
        payload["mu_grid"] = tuple(payload.get("mu_grid", MU_GRID_DEFAULT))
        return cls(hyper=hyper, **payload)


@dataclass(frozen=True)
class ResultRecord:
    """Run outputs: metrics, selection table, trace, and file references."""

    config: dict
    chosen_mu: float | None
    cv_table: tuple[tuple[float, float], ...]
    metrics: dict
    objective_trace: tuple[float, ...]
    outer_iters: int
    converged: bool
    wall_time: float
    matrix_paths: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "chosen_mu": self.chosen_mu,
            "cv_table": [list(pair) for pair in self.cv_table],
            "metrics": self.metrics,
            "objective_trace": list(self.objective_trace),
            "outer_iters": self.outer_iters,
            "converged": self.converged,
            "wall_time": self.wall_time,
            "matrix_paths": self.matrix_paths,
        }

    def write(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def _split_task(task: TaskData, rng: np.random.Generator, fraction: float, index: int):
    n = task.n_samples
    if n < 2:
        raise DataError(f"task {index} has {n} sample(s); need at least 2 to split")
    n_train = min(max(int(fraction * n), 1), n - 1)
    perm = rng.permutation(n)
    fit_idx, val_idx = perm[:n_train], perm[n_train:]
    fit_part = TaskData(task.features[:, fit_idx], task.labels[fit_idx], task.kind)
    val_part = TaskData(task.features[:, val_idx], task.labels[val_idx], task.kind)
    return fit_part, val_part


def _validation_metric(model: LatentModel, data: MultiTaskDataset) -> float:
    if data.kind is TaskKind.REGRESSION:
        return rmse(model, data)
    return binary_error(model, data)


def cv_select_mu(
    data: MultiTaskDataset, config: ExperimentConfig
) -> tuple[float, tuple[tuple[float, float], ...]]:
    """Pick mu by mean validation metric over seeded per-task splits.

    Each split permutes every task's samples with a generator seeded on
    (config.seed, split_index) and holds out the tail fraction. Returns the
    minimizing grid value (ties go to the smaller mu) and the full
    (mu, mean metric) table in grid order.
    """
    grid = config.mu_grid
    sums = {m: 0.0 for m in grid}
    for split in range(config.cv_splits):
        rng = np.random.default_rng((config.seed, split))
        parts = [
            _split_task(task, rng, config.cv_train_fraction, t)
            for t, task in enumerate(data)
        ]
        fit_data = MultiTaskDataset(tuple(p[0] for p in parts))
        val_data = MultiTaskDataset(tuple(p[1] for p in parts))
        for m in grid:
            result = fit(fit_data, replace(config.hyper, mu=m), workers=config.workers)
            sums[m] += _validation_metric(result.model, val_data)

    table = tuple((m, sums[m] / config.cv_splits) for m in grid)
    mu_star = None
    best = np.inf
    for m in sorted(grid):
        mean = sums[m] / config.cv_splits
        if mean < best:
            best = mean
            mu_star = m
    return mu_star, table


def _load_experiment_data(config: ExperimentConfig):
    """Return (train, test-or-None, truth-or-None) for the configured source."""
    if config.synth is not None:
        dataset: SynthDataset = SYNTH_GENERATORS[config.synth](
            config.synth_seed, append_bias=config.append_bias
        )
        return dataset.train, dataset.test, dataset
    train = ingest_dataset(config.data_path, "train", append_bias=config.append_bias)
    test = None
    if has_split(config.data_path, "test"):
        test = ingest_dataset(config.data_path, "test", append_bias=config.append_bias)
    return train, test, None


def run_experiment(config: ExperimentConfig) -> ResultRecord:
    """Run the full protocol for one configuration and optionally write outputs."""
    start = time.perf_counter()
    train_data, test_data, truth = _load_experiment_data(config)

    chosen_mu = None
    cv_table: tuple[tuple[float, float], ...] = ()
    if config.method == "stl":
        stl = train_stl(train_data, config.hyper.lam)
        model = LatentModel(stl.weights, np.eye(train_data.n_tasks))
        trace: tuple[float, ...] = ()
        outer_iters = 0
        converged = True
    else:
        config.hyper.validate_for(train_data)
        if len(config.mu_grid) > 1:
            chosen_mu, cv_table = cv_select_mu(train_data, config)
        else:
            chosen_mu = config.mu_grid[0]
        result = fit(
            train_data, replace(config.hyper, mu=chosen_mu), workers=config.workers
        )
        model = result.model
        trace = result.report.objective_trace
        outer_iters = result.report.outer_iters
        converged = result.report.converged

    metrics: dict = {}
    if test_data is not None:
        if test_data.kind is TaskKind.REGRESSION:
            metrics["rmse"] = rmse(model, test_data)
            metrics["rmse_per_task"] = rmse_per_task(model, test_data).tolist()
        else:
            metrics["binary_error"] = binary_error(model, test_data)
    if truth is not None and config.method == "gomtl":
        metrics["support_recovery"] = support_recovery_score(
            model.codes, truth.true_groups, true_codes=truth.true_codes
        )
        max_abs = np.abs(model.codes).max(axis=1)
        metrics["active_latent_rows"] = int(
            np.sum(max_abs > 0.05 * max(max_abs.max(), np.finfo(float).tiny))
        )

    record = ResultRecord(
        config=config.to_dict(),
        chosen_mu=chosen_mu,
        cv_table=cv_table,
        metrics=metrics,
        objective_trace=trace,
        outer_iters=outer_iters,
        converged=converged,
        wall_time=time.perf_counter() - start,
    )

    if config.output_path is not None:
        out = Path(config.output_path)
        out.mkdir(parents=True, exist_ok=True)
        paths = {
            "basis": str(out / "L.csv"),
            "codes": str(out / "S.csv"),
            "weights": str(out / "W.csv"),
        }
        save_matrix(model.basis, paths["basis"])
        save_matrix(model.codes, paths["codes"])
        save_matrix(model.weights, paths["weights"])
        record = replace(record, matrix_paths=paths)
        record.write(out / "record.json")
    return record

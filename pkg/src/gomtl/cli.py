"""Command-line entry point.

Subcommands:
    synth   generate a synthetic benchmark directory (with ground truth)
    train   fit one model at a fixed mu and write the factor matrices
    cv      grid-search mu by cross-validation, refit, and write results
    eval    score a saved model on a dataset's test split

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .data import TaskKind
from .dataio import export_dataset, has_split, ingest_dataset, load_matrix, save_matrix
from .errors import ConfigError, DataError, GomtlError, NumericError
from .experiment import (
    MU_GRID_DEFAULT,
    SYNTH_GENERATORS,
    ExperimentConfig,
    run_experiment,
)
from .metrics import binary_error, rmse, rmse_per_task
from .model import Hyperparams, LatentModel

LOSS_TO_KIND = {"squared": TaskKind.REGRESSION, "logistic": TaskKind.CLASSIFICATION}


def _add_common_train_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--k", type=int, required=True, help="number of latent tasks")
    parser.add_argument("--lambda", dest="lam", type=float, default=0.1,
                        help="Frobenius penalty weight (default 0.1)")
    parser.add_argument("--loss", choices=sorted(LOSS_TO_KIND),
                        help="expected loss; must match the dataset kind")
    parser.add_argument("--basis", choices=("closed_form", "gradient", "newton"),
                        help="basis solver (default: closed_form for squared, newton for logistic)")
    parser.add_argument("--sequential", action="store_true",
                        help="force the sequential code sweep")
    parser.add_argument("--workers", type=int, default=None,
                        help="thread count for the per-task code sweep")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gomtl", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="generate a synthetic benchmark")
    p_synth.add_argument("--dataset", choices=sorted(SYNTH_GENERATORS), required=True)
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--out", required=True)
    p_synth.add_argument("--append-bias", action="store_true",
                         help="append a constant-1 feature")
    p_synth.set_defaults(func=cmd_synth)

    p_train = sub.add_parser("train", help="fit one model at a fixed mu")
    p_train.add_argument("--data", required=True)
    p_train.add_argument("--mu", type=float, required=True)
    _add_common_train_args(p_train)
    p_train.add_argument("--out", required=True)
    p_train.set_defaults(func=cmd_train)

    p_cv = sub.add_parser("cv", help="cross-validate mu and refit")
    p_cv.add_argument("--data", required=True)
    p_cv.add_argument("--grid", default=",".join(str(m) for m in MU_GRID_DEFAULT),
                      help="comma-separated mu values")
    p_cv.add_argument("--splits", type=int, default=4)
    p_cv.add_argument("--train-fraction", type=float, default=0.7)
    p_cv.add_argument("--seed", type=int, default=0)
    _add_common_train_args(p_cv)
    p_cv.add_argument("--out", required=True)
    p_cv.set_defaults(func=cmd_cv)

    p_eval = sub.add_parser("eval", help="score a saved model on a dataset split")
    p_eval.add_argument("--model", required=True, help="directory holding L.csv and S.csv")
    p_eval.add_argument("--data", required=True)
    p_eval.add_argument("--split", choices=("train", "test"), default="test")
    p_eval.set_defaults(func=cmd_eval)

    return parser


def cmd_synth(args) -> int:
    dataset = SYNTH_GENERATORS[args.dataset](args.seed, append_bias=args.append_bias)
    out = Path(args.out)
    export_dataset(dataset.train, out, test=dataset.test,
                   has_bias_feature=args.append_bias)
    save_matrix(dataset.true_weights, out / "true_W.csv")
    save_matrix(dataset.true_codes, out / "true_S.csv")
    with open(out / "true_groups.json", "w") as fh:
        json.dump([list(g) for g in dataset.true_groups], fh)
        fh.write("\n")
    print(f"wrote {args.dataset} dataset (seed {args.seed}) to {out}")
    return 0


def _resolve_hyper(args, kind: TaskKind, mu: float) -> Hyperparams:
    if args.loss is not None and LOSS_TO_KIND[args.loss] is not kind:
        raise ConfigError(
            f"--loss {args.loss} does not match the dataset kind {kind.value!r}"
        )
    basis = args.basis
    if basis is None:
        basis = "closed_form" if kind is TaskKind.REGRESSION else "newton"
    return Hyperparams(k=args.k, mu=mu, lam=args.lam, basis_method=basis)


def _workers(args) -> int | None:
    return None if args.sequential else args.workers


def cmd_train(args) -> int:
    kind = ingest_dataset(args.data, "train").kind
    config = ExperimentConfig(
        hyper=_resolve_hyper(args, kind, args.mu),
        data_path=args.data,
        mu_grid=(args.mu,),
        output_path=args.out,
        workers=_workers(args),
    )
    record = run_experiment(config)
    print(json.dumps(record.metrics, indent=2, sort_keys=True))
    return 0


def cmd_cv(args) -> int:
    try:
        grid = tuple(float(v) for v in args.grid.split(",") if v.strip())
    except ValueError as e:
        raise ConfigError(f"could not parse --grid {args.grid!r}: {e}") from None
    kind = ingest_dataset(args.data, "train").kind
    config = ExperimentConfig(
        hyper=_resolve_hyper(args, kind, grid[0] if grid else 0.0),
        data_path=args.data,
        mu_grid=grid,
        cv_splits=args.splits,
        cv_train_fraction=args.train_fraction,
        seed=args.seed,
        output_path=args.out,
        workers=_workers(args),
    )
    record = run_experiment(config)
    print(json.dumps({"chosen_mu": record.chosen_mu, **record.metrics},
                     indent=2, sort_keys=True))
    return 0


def cmd_eval(args) -> int:
    model_dir = Path(args.model)
    model = LatentModel(load_matrix(model_dir / "L.csv"), load_matrix(model_dir / "S.csv"))
    if not has_split(args.data, args.split):
        raise DataError(f"dataset at {args.data} has no {args.split} split")
    data = ingest_dataset(args.data, args.split)
    if data.kind is TaskKind.REGRESSION:
        out = {
            "rmse": rmse(model, data),
            "rmse_per_task": rmse_per_task(model, data).tolist(),
        }
    else:
        out = {"binary_error": binary_error(model, data)}
    print(json.dumps(out, indent=2, sort_keys=True))
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except DataError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except NumericError as e:
        print(f"error: {e}", file=sys.stderr)
        return 4
    except GomtlError as e:
        print(f"error: {e}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())

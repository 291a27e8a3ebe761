"""Command-line interface.

Subcommands: ingest, split, train, recommend, evaluate, experiment, curve.
Exits 0 on success; failures print a stage-tagged message and exit 1.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .data import parse_genres, parse_ratings
from .experiment import (
    DEFAULT_STRATEGIES,
    ExperimentConfig,
    StageError,
    StrategySpec,
    load_dataset,
    run_experiment,
    _stage,
)
from .factorization import item_means, save_model, train_wnmf
from .metrics import EvalReport
from .splits import SplitSpec, make_splits, save_splits


def _add_data_args(p):
    p.add_argument("--data", required=True, help="ratings file")
    p.add_argument("--format", default="movielens", choices=["movielens", "tsv"])
    p.add_argument("--genres", default=None, help="item metadata file")
    p.add_argument("--subsample", default=None, metavar="NxM",
                   help="keep top N users x top M items by rating count")


def _add_model_args(p):
    p.add_argument("--d", type=int, default=20, help="latent rank")
    p.add_argument("--lambda", dest="lam", type=float, default=0.1,
                   help="regularization weight")
    p.add_argument("--max-iter", type=int, default=200)
    p.add_argument("--tol", type=float, default=1e-4)


def _add_strategy_args(p):
    p.add_argument("--a", type=float, default=-1.0, help="risk parameter")
    p.add_argument("--similarity", default="cosine", choices=["cosine", "rbf"])
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--mu-mode", default="choice-items",
                   choices=["choice-items", "observed-items", "none"])


def _parse_subsample(value):
    if value is None:
        return None, None
    try:
        n, m = value.lower().split("x")
        return int(n), int(m)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected NxM, got {value!r}") from None


def _parse_ks(value):
    ks = tuple(int(tok) for tok in value.split(","))
    return ks


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="riskrank")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse data and report statistics")
    _add_data_args(p)
    p.add_argument("--out", default=None, help="write stats JSON here")

    p = sub.add_parser("split", help="write seeded train/test splits")
    _add_data_args(p)
    p.add_argument("--splits", type=int, default=5)
    p.add_argument("--test-frac", type=float, default=0.05)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="splits CSV path")

    p = sub.add_parser("train", help="train factor model on the full data")
    _add_data_args(p)
    _add_model_args(p)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="model output directory")

    p = sub.add_parser("recommend", help="dump recommendations for one split")
    _add_data_args(p)
    _add_model_args(p)
    _add_strategy_args(p)
    p.add_argument("--strategy", default=None,
                   choices=[s.name for s in DEFAULT_STRATEGIES],
                   help="named strategy (overrides --a)")
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--splits", type=int, default=5)
    p.add_argument("--test-frac", type=float, default=0.05)
    p.add_argument("--split-index", type=int, default=0)
    p.add_argument("--eval", dest="methodology", default="full",
                   choices=["observed", "full"])
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="recommendations CSV path")

    p = sub.add_parser("evaluate", help="single-config evaluation run")
    _add_experiment_args(p)

    p = sub.add_parser("experiment", help="full multi-split protocol")
    _add_experiment_args(p)

    p = sub.add_parser("curve", help="re-emit curves CSV from a report JSON")
    p.add_argument("--report", required=True)
    p.add_argument("--out", required=True)
    return parser


def _add_experiment_args(p):
    p.add_argument("--config", default=None, help="experiment config JSON")
    _add_data_args(p)
    _add_model_args(p)
    _add_strategy_args(p)
    p.add_argument("--ks", type=_parse_ks, default=(3, 5, 10, 20),
                   metavar="K1,K2,...")
    p.add_argument("--splits", type=int, default=5)
    p.add_argument("--test-frac", type=float, default=0.05)
    p.add_argument("--eval", dest="methodology", default="full",
                   choices=["observed", "full"])
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", default=None, help="output directory")


def _experiment_config(args) -> ExperimentConfig:
    sub_users, sub_items = _parse_subsample(args.subsample)
    methodology = "observed-only" if args.methodology == "observed" else "full"
    ks = tuple(getattr(args, "ks", None) or (getattr(args, "k", 5),))
    config = ExperimentConfig(
        data_path=args.data,
        seed=args.seed,
        data_format=args.format,
        genres_path=args.genres,
        test_fraction=args.test_frac,
        num_splits=args.splits,
        d=args.d,
        lam=args.lam,
        max_iter=args.max_iter,
        tol=args.tol,
        similarity=args.similarity,
        gamma=args.gamma,
        mu_mode=args.mu_mode,
        methodology=methodology,
        ks=ks,
        subsample_users=sub_users,
        subsample_items=sub_items,
        out_dir=args.out,
    )
    if getattr(args, "config", None):
        base = ExperimentConfig.from_json(Path(args.config).read_text())
        # CLI data/seed/out take precedence over the config file
        config = dataclasses.replace(
            base, data_path=args.data, seed=args.seed, out_dir=args.out or base.out_dir
        )
    return config


def _cmd_ingest(args) -> int:
    with _stage("ingest"):
        dataset = parse_ratings(args.data, format=args.format)
        if args.genres:
            dataset = parse_genres(args.genres, dataset)
    counts = np.bincount(dataset.ratings, minlength=6)[1:]
    stats = {
        "num_users": dataset.num_users,
        "num_items": dataset.num_items,
        "num_triples": dataset.num_triples,
        "duplicates": dataset.duplicate_count,
        "rating_counts": {str(r): int(c) for r, c in enumerate(counts, 1)},
        "items_with_genres": sum(1 for g in dataset.genres if g),
    }
    text = json.dumps(stats, indent=2, sort_keys=True)
    print(text)
    if args.out:
        Path(args.out).write_text(text + "\n")
    return 0


def _cmd_split(args) -> int:
    with _stage("ingest"):
        dataset = parse_ratings(args.data, format=args.format)
    with _stage("split"):
        spec = SplitSpec(test_fraction=args.test_frac, num_splits=args.splits,
                         seed=args.seed)
        splits = make_splits(dataset, spec)
        save_splits(splits, args.out)
    for i, s in enumerate(splits):
        print(f"split {i}: train={s.train.size} test={s.test.size} "
              f"test-user-coverage={s.test_user_coverage:.3f} "
              f"test-item-coverage={s.test_item_coverage:.3f}")
    return 0


def _cmd_train(args) -> int:
    with _stage("ingest"):
        dataset = parse_ratings(args.data, format=args.format)
    with _stage("factorize"):
        model = train_wnmf(
            dataset.users, dataset.items, dataset.ratings,
            dataset.num_users, dataset.num_items,
            d=args.d, lam=args.lam, max_iter=args.max_iter, tol=args.tol,
            seed=args.seed,
        )
        save_model(model, args.out)
    print(f"trained d={model.d} iterations={model.iterations} "
          f"objective={model.objective_trace[-1]:.6g} -> {args.out}")
    return 0


def _cmd_recommend(args) -> int:
    strategies = {s.name: s for s in DEFAULT_STRATEGIES}
    if args.strategy:
        spec = strategies[args.strategy]
    else:
        spec = StrategySpec("greedy", "greedy-risk", a=args.a)
    config = _experiment_config(args)
    config = dataclasses.replace(
        config, strategies=(spec,), ks=(args.k,), out_dir=None,
    )
    with _stage("split"):
        dataset = load_dataset(config)
        splits = make_splits(dataset, config.split_spec())
        if not 0 <= args.split_index < len(splits):
            raise ValueError(f"split index {args.split_index} out of range")
    from .experiment import _recommend_for_split, _test_ratings, _train_observed, _train_payoffs

    split = splits[args.split_index]
    with _stage("factorize"):
        tr = split.train
        model = train_wnmf(
            dataset.users[tr], dataset.items[tr], dataset.ratings[tr],
            dataset.num_users, dataset.num_items,
            d=config.d, lam=config.lam, max_iter=config.max_iter, tol=config.tol,
            seed=config.seed + 1_000_000 + args.split_index,
        )
        mu = item_means(dataset.items[tr], dataset.ratings[tr], dataset.num_items)
    with _stage("recommend"):
        recs = _recommend_for_split(
            config, dataset, model, mu,
            _train_observed(dataset, split),
            _train_payoffs(dataset, split),
            _test_ratings(dataset, split),
        )
        with open(args.out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["user", "rank", "item", "score"])
            by_user = recs[spec.name]
            for user in sorted(by_user):
                items, scores = by_user[user]
                for rank, (item, score) in enumerate(zip(items, scores), 1):
                    writer.writerow([dataset.user_ids[user], rank,
                                     dataset.item_ids[item], repr(float(score))])
    print(f"wrote {args.out}")
    return 0


def _cmd_experiment(args) -> int:
    config = _experiment_config(args)
    run_experiment(config)
    if config.out_dir:
        print(f"outputs in {config.out_dir}")
    return 0


def _cmd_curve(args) -> int:
    with _stage("curve"):
        raw = json.loads(Path(args.report).read_text())
        report = EvalReport(
            ks=tuple(raw["ks"]),
            strategies=tuple(raw["strategies"]),
        )
        report.metadata = raw.get("metadata", {})
        for split in raw["splits"]:
            values = {
                strategy: {int(k): dict(v) for k, v in by_k.items()}
                for strategy, by_k in split.items()
            }
            report.add_split(values, {})
        report.write_curves_csv(args.out)
    print(f"wrote {args.out}")
    return 0


_COMMANDS = {
    "ingest": _cmd_ingest,
    "split": _cmd_split,
    "train": _cmd_train,
    "recommend": _cmd_recommend,
    "evaluate": _cmd_experiment,
    "experiment": _cmd_experiment,
    "curve": _cmd_curve,
}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except StageError as exc:
        print(f"error {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error [cli] {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

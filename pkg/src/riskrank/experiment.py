"""End-to-end experiment runner.

Wires ingestion -> splitting -> factorization -> selection -> evaluation
under a single seeded JSON-serializable config, and writes the report JSON,
curve CSV, per-strategy recommendation dumps and model files.  The whole run
is a pure function of (data bytes, config): rerunning with the same inputs
reproduces the outputs byte for byte.
"""

from __future__ import annotations

import csv
import json
import logging
import shutil
from contextlib import contextmanager
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .data import Dataset, make_dataset, parse_genres, parse_ratings
from .factorization import FactorModel, item_means, save_model, train_wnmf
from .metrics import METRICS, EvalConfig, EvalReport, evaluate_split
from .preference import SimilarityFn
from .selection import greedy_select_scored, pointwise_topk_scored
from .splits import SplitSpec, TrainTestSplit, make_splits
from .utility import ObservedProfile, RiskConfig

log = logging.getLogger(__name__)

STRATEGY_KINDS = ("greedy-risk", "pointwise-topk")

# Output-name aliases used in some published result tables.
STRATEGY_ALIASES = {"3R": "RSR", "SUB": "SCA"}

# Published full-data top-5 reference values (context only; desk-scale runs
# are not comparable in magnitude).
REFERENCE_TOP5 = {
    "movielens": {
        "ndcg": {"PMF": 0.933, "MOD": 0.931, "SUB": 0.930, "3R": 0.935},
        "map": {"PMF": 0.685, "MOD": 0.681, "SUB": 0.680, "3R": 0.684},
    },
    "yahoo": {
        "ndcg": {"PMF": 0.966, "MOD": 0.963, "SUB": 0.963, "3R": 0.973},
        "map": {"PMF": 0.785, "MOD": 0.756, "SUB": 0.755, "3R": 0.786},
    },
}


class StageError(RuntimeError):
    """Pipeline failure tagged with the stage that raised it."""

    def __init__(self, stage: str, cause):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage


@contextmanager
def _stage(name: str):
    try:
        yield
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, exc) from exc


@dataclass(frozen=True)
class StrategySpec:
    name: str
    kind: str
    a: float = 0.0

    def __post_init__(self):
        if self.kind not in STRATEGY_KINDS:
            raise ValueError(f"unknown strategy kind {self.kind!r}")


DEFAULT_STRATEGIES = (
    StrategySpec("3R", "greedy-risk", a=-1.0),
    StrategySpec("MOD", "greedy-risk", a=0.0),
    StrategySpec("SUB", "greedy-risk", a=1.0),
    StrategySpec("PMF", "pointwise-topk"),
)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a run needs; only data_path and seed have no default."""

    data_path: str
    seed: int
    data_format: str = "movielens"
    genres_path: str | None = None
    test_fraction: float = 0.05
    num_splits: int = 5
    d: int = 20
    lam: float = 0.1
    max_iter: int = 200
    tol: float = 1e-4
    similarity: str = "cosine"
    gamma: float = 1.0
    mu_mode: str = "choice-items"
    strategies: tuple[StrategySpec, ...] = DEFAULT_STRATEGIES
    methodology: str = "full"
    ks: tuple[int, ...] = (3, 5, 10, 20)
    relevance_threshold: int = 4
    subsample_users: int | None = None
    subsample_items: int | None = None
    out_dir: str | None = None

    def similarity_fn(self) -> SimilarityFn:
        return SimilarityFn(kind=self.similarity, gamma=self.gamma)

    def risk_config(self, a: float) -> RiskConfig:
        return RiskConfig(a=a, mu_mode=self.mu_mode, f=self.similarity_fn())

    def eval_config(self) -> EvalConfig:
        return EvalConfig(
            methodology=self.methodology,
            ks=tuple(self.ks),
            relevance_threshold=self.relevance_threshold,
        )

    def split_spec(self) -> SplitSpec:
        return SplitSpec(
            test_fraction=self.test_fraction,
            num_splits=self.num_splits,
            seed=self.seed,
        )

    def to_json(self) -> str:
        d = asdict(self)
        d["strategies"] = [asdict(s) for s in self.strategies]
        d["ks"] = list(self.ks)
        return json.dumps(d, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        raw = json.loads(text)
        if "strategies" in raw:
            raw["strategies"] = tuple(StrategySpec(**s) for s in raw["strategies"])
        if "ks" in raw:
            raw["ks"] = tuple(raw["ks"])
        return cls(**raw)


def subsample(dataset: Dataset, top_users: int, top_items: int) -> Dataset:
    """Keep the given numbers of most-rated users and items (ties by index).

    Triples inside the retained cross product survive; dense ids are
    reassigned in first-appearance order of the surviving triples.
    """
    if top_users > dataset.num_users or top_items > dataset.num_items:
        raise ValueError("subsample size exceeds dataset size")
    user_counts = np.bincount(dataset.users, minlength=dataset.num_users)
    item_counts = np.bincount(dataset.items, minlength=dataset.num_items)
    keep_users = np.sort(np.lexsort((np.arange(dataset.num_users), -user_counts))[:top_users])
    keep_items = np.sort(np.lexsort((np.arange(dataset.num_items), -item_counts))[:top_items])
    user_mask = np.zeros(dataset.num_users, dtype=bool)
    item_mask = np.zeros(dataset.num_items, dtype=bool)
    user_mask[keep_users] = True
    item_mask[keep_items] = True
    keep = user_mask[dataset.users] & item_mask[dataset.items]
    if not keep.any():
        raise ValueError("subsample produced an empty dataset")
    triples = [
        (dataset.user_ids[u], dataset.item_ids[i], int(r))
        for u, i, r in zip(dataset.users[keep], dataset.items[keep], dataset.ratings[keep])
    ]
    genres = {
        dataset.item_ids[i]: set(dataset.genres[i]) for i in keep_items
    }
    return make_dataset(triples, genres)


def load_dataset(config: ExperimentConfig) -> Dataset:
    with _stage("ingest"):
        dataset = parse_ratings(config.data_path, format=config.data_format)
        if config.genres_path:
            dataset = parse_genres(config.genres_path, dataset)
    if config.subsample_users or config.subsample_items:
        with _stage("subsample"):
            dataset = subsample(
                dataset,
                config.subsample_users or dataset.num_users,
                config.subsample_items or dataset.num_items,
            )
    return dataset


def _train_observed(dataset: Dataset, split: TrainTestSplit) -> dict[int, list[int]]:
    observed: dict[int, list[int]] = {u: [] for u in range(dataset.num_users)}
    for idx in split.train:
        observed[int(dataset.users[idx])].append(int(dataset.items[idx]))
    return observed


def _test_ratings(dataset: Dataset, split: TrainTestSplit) -> dict[int, dict[int, float]]:
    by_user: dict[int, dict[int, float]] = {}
    for idx in split.test:
        u = int(dataset.users[idx])
        by_user.setdefault(u, {})[int(dataset.items[idx])] = float(dataset.ratings[idx])
    return by_user


def run_experiment(config: ExperimentConfig, summary: bool = True) -> EvalReport:
    """Run the full protocol and return the aggregated report.

    When ``config.out_dir`` is set, writes report.json, curves.csv,
    recommendation CSVs and per-split model files there; partial outputs are
    removed if the run fails.
    """
    dataset = load_dataset(config)
    with _stage("split"):
        splits = make_splits(dataset, config.split_spec())
    eval_cfg = config.eval_config()
    strategy_names = tuple(s.name for s in config.strategies)
    report = EvalReport(ks=tuple(config.ks), strategies=strategy_names)
    report.metadata = _metadata(config, dataset, splits)

    models: list[FactorModel] = []
    all_recs: list[dict] = []
    for split_id, split in enumerate(splits):
        with _stage("factorize"):
            tr = split.train
            model = train_wnmf(
                dataset.users[tr],
                dataset.items[tr],
                dataset.ratings[tr],
                dataset.num_users,
                dataset.num_items,
                d=config.d,
                lam=config.lam,
                max_iter=config.max_iter,
                tol=config.tol,
                seed=config.seed + 1_000_000 + split_id,
            )
            mu = item_means(dataset.items[tr], dataset.ratings[tr], dataset.num_items)
        with _stage("recommend"):
            observed = _train_observed(dataset, split)
            payoffs = _train_payoffs(dataset, split)
            test_ratings = _test_ratings(dataset, split)
            recs = _recommend_for_split(
                config, dataset, model, mu, observed, payoffs, test_ratings
            )
        with _stage("evaluate"):
            ranked_only = {
                name: {u: items for u, (items, _) in by_user.items()}
                for name, by_user in recs.items()
            }
            values, counts = evaluate_split(
                ranked_only, test_ratings, dataset.genres, eval_cfg
            )
            report.add_split(values, counts)
        models.append(model)
        all_recs.append(recs)
        log.info("split %d done", split_id)

    if config.out_dir:
        with _stage("write"):
            _write_outputs(config, dataset, report, models, all_recs)
    if summary:
        print(format_summary(report))
    return report


def _build_profile(observed_items, observed_payoffs, user) -> ObservedProfile:
    return ObservedProfile(
        items=np.asarray(observed_items[user], dtype=np.int64),
        payoffs=np.asarray(observed_payoffs[user], dtype=np.float64),
    )


def _train_payoffs(dataset: Dataset, split: TrainTestSplit) -> dict[int, list[float]]:
    payoffs: dict[int, list[float]] = {u: [] for u in range(dataset.num_users)}
    for idx in split.train:
        payoffs[int(dataset.users[idx])].append(float(dataset.ratings[idx]))
    return payoffs


def _recommend_for_split(
    config: ExperimentConfig,
    dataset: Dataset,
    model: FactorModel,
    mu: np.ndarray,
    observed: dict[int, list[int]],
    payoffs: dict[int, list[float]],
    test_ratings: dict[int, dict[int, float]],
) -> dict[str, dict[int, tuple[list[int], list[float]]]]:
    kmax = max(config.ks)
    all_items = np.arange(dataset.num_items)
    full = config.methodology == "full"
    recs: dict[str, dict[int, tuple[list[int], list[float]]]] = {
        s.name: {} for s in config.strategies
    }
    risk_cfgs = {
        s.name: config.risk_config(s.a)
        for s in config.strategies
        if s.kind == "greedy-risk"
    }
    for user in range(dataset.num_users):
        obs = np.asarray(observed[user], dtype=np.int64)
        if full:
            candidates = np.setdiff1d(all_items, obs)
        else:
            candidates = np.asarray(sorted(test_ratings.get(user, {})), dtype=np.int64)
        if candidates.size == 0:
            continue
        profile = _build_profile(observed, payoffs, user)
        for spec in config.strategies:
            if spec.kind == "pointwise-topk":
                recs[spec.name][user] = pointwise_topk_scored(kmax, candidates, model, user)
            else:
                recs[spec.name][user] = greedy_select_scored(
                    kmax, candidates, profile, model, risk_cfgs[spec.name], mu
                )
    return recs


def _metadata(config: ExperimentConfig, dataset: Dataset, splits) -> dict:
    return {
        "data_file": Path(config.data_path).name,
        "data_format": config.data_format,
        "num_users": dataset.num_users,
        "num_items": dataset.num_items,
        "num_triples": dataset.num_triples,
        "seed": config.seed,
        "test_fraction": config.test_fraction,
        "num_splits": config.num_splits,
        "d": config.d,
        "lambda": config.lam,
        "max_iter": config.max_iter,
        "tol": config.tol,
        "similarity": config.similarity,
        "gamma": config.gamma,
        "mu_mode": config.mu_mode,
        "methodology": config.methodology,
        "relevance_threshold": config.relevance_threshold,
        "strategies": [asdict(s) for s in config.strategies],
        "strategy_aliases": STRATEGY_ALIASES,
        "reference_top5_full_data": REFERENCE_TOP5,
        "split_test_user_coverage": [s.test_user_coverage for s in splits],
        "split_test_item_coverage": [s.test_item_coverage for s in splits],
    }


def _write_outputs(config, dataset, report, models, all_recs) -> None:
    out_dir = Path(config.out_dir)
    created = not out_dir.exists()
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    try:
        report_path = out_dir / "report.json"
        report_path.write_text(report.to_json())
        written.append(report_path)
        curves_path = out_dir / "curves.csv"
        report.write_curves_csv(curves_path)
        written.append(curves_path)
        rec_dir = out_dir / "recommendations"
        rec_dir.mkdir(exist_ok=True)
        written.append(rec_dir)
        for split_id, recs in enumerate(all_recs):
            for name, by_user in recs.items():
                path = rec_dir / f"split{split_id}_{name}.csv"
                with path.open("w", newline="") as fh:
                    writer = csv.writer(fh)
                    writer.writerow(["user", "rank", "item", "score"])
                    for user in sorted(by_user):
                        items, scores = by_user[user]
                        for rank, (item, score) in enumerate(zip(items, scores), 1):
                            writer.writerow([
                                dataset.user_ids[user], rank,
                                dataset.item_ids[item], repr(float(score)),
                            ])
        models_dir = out_dir / "models"
        written.append(models_dir)
        for split_id, model in enumerate(models):
            save_model(model, models_dir / f"split{split_id}")
    except Exception:
        if created:
            shutil.rmtree(out_dir, ignore_errors=True)
        else:
            for path in written:
                if path.is_dir():
                    shutil.rmtree(path, ignore_errors=True)
                else:
                    path.unlink(missing_ok=True)
        raise


def format_summary(report: EvalReport) -> str:
    """Measured split means next to the published full-data references."""
    agg = report.aggregate()
    lines = ["strategy  k   metric           mean     std"]
    for strategy in report.strategies:
        for k in report.ks:
            for metric in METRICS:
                cell = agg[strategy][k][metric]
                if cell["mean"] is None:
                    continue
                lines.append(
                    f"{strategy:<9} {k:<3} {metric:<15} {cell['mean']:.4f}   {cell['std']:.4f}"
                )
    lines.append("")
    lines.append("full-data top-5 reference values (context, not comparable):")
    for dataset_name, by_metric in REFERENCE_TOP5.items():
        for metric, by_strategy in by_metric.items():
            cells = ", ".join(f"{s}={v:.3f}" for s, v in by_strategy.items())
            lines.append(f"  {dataset_name} {metric}: {cells}")
    return "\n".join(lines)

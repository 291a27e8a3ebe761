"""Ranking metrics and evaluation over splits.

Two methodologies are supported: ``observed-only`` ranks only each user's
observed test items (rating-prediction view) while ``full`` ranks every item
the user has not rated in training (ranking view).  NDCG uses the raw test
ratings as gains with a log2 position discount; MAP and topic coverage use a
binary relevance threshold on the test rating.  Users without evaluable
ground truth for a metric are excluded from that metric's average.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

METHODOLOGIES = ("observed-only", "full")
METRICS = ("ndcg", "map", "topic_coverage")


@dataclass(frozen=True)
class EvalConfig:
    methodology: str = "full"
    ks: tuple[int, ...] = (3, 5, 10, 20)
    relevance_threshold: int = 4

    def __post_init__(self):
        if self.methodology not in METHODOLOGIES:
            raise ValueError(f"unknown methodology {self.methodology!r}")
        ks = tuple(self.ks)
        if len(set(ks)) != len(ks) or list(ks) != sorted(ks) or min(ks) < 1:
            raise ValueError("k values must be distinct, sorted positive integers")
        object.__setattr__(self, "ks", ks)


def ndcg_at_k(ranked, test_ratings: dict[int, float], k: int) -> float | None:
    """NDCG@k of one user's ranking with raw test ratings as gains.

    Args:
        ranked: ordered recommended item indices.
        test_ratings: the user's test item -> rating map.
        k: cutoff rank.

    Returns:
        NDCG in [0, 1], or None when the user has no test ratings (skipped).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    ideal = sorted(test_ratings.values(), reverse=True)[:k]
    idcg = sum(r / math.log2(i + 2) for i, r in enumerate(ideal))
    if idcg == 0:
        return None
    dcg = sum(
        test_ratings.get(item, 0) / math.log2(i + 2)
        for i, item in enumerate(list(ranked)[:k])
    )
    return dcg / idcg


def map_at_k(ranked, relevant: set[int], k: int) -> float | None:
    """Average precision at k with denominator min(|relevant|, k).

    Returns None when the user has no relevant test items (skipped).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if not relevant:
        return None
    hits = 0
    score = 0.0
    for i, item in enumerate(list(ranked)[:k], start=1):
        if item in relevant:
            hits += 1
            score += hits / i
    return score / min(len(relevant), k)


def topic_coverage_at_k(ranked, relevant: set[int], genres, k: int) -> float | None:
    """Share of the user's relevant test genres covered by relevant top-k items.

    Returns None when the relevant test items carry no genres (skipped).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    target: set[str] = set()
    for item in relevant:
        target |= genres[item]
    if not target:
        return None
    covered: set[str] = set()
    for item in list(ranked)[:k]:
        if item in relevant:
            covered |= genres[item]
    return len(covered & target) / len(target)


def evaluate_split(
    recommendations: dict[str, dict[int, list[int]]],
    test_ratings: dict[int, dict[int, float]],
    genres,
    config: EvalConfig,
) -> tuple[dict, dict]:
    """Metric averages for one split.

    Args:
        recommendations: strategy -> user -> ranked item list (at least as
            long as the largest configured k where possible).
        test_ratings: user -> {test item: rating}.
        genres: per-item genre sets.
        config: methodology, cutoffs and relevance threshold.

    Returns:
        (values, counts): ``values[strategy][k][metric]`` is the average over
        evaluable users (None if no user was evaluable) and
        ``counts[metric]`` the number of evaluable users.
    """
    relevant_by_user = {
        user: {i for i, r in ratings.items() if r >= config.relevance_threshold}
        for user, ratings in test_ratings.items()
    }
    evaluable = {m: 0 for m in METRICS}
    sums = {
        strategy: {k: {m: 0.0 for m in METRICS} for k in config.ks}
        for strategy in recommendations
    }
    counts = {
        strategy: {k: {m: 0 for m in METRICS} for k in config.ks}
        for strategy in recommendations
    }
    strategies = sorted(recommendations)
    for user in sorted(test_ratings):
        ratings = test_ratings[user]
        if not ratings:
            continue
        for strategy in strategies:
            recs = recommendations[strategy].get(user)
            if recs is None:
                raise RuntimeError(
                    f"strategy {strategy!r} produced no ranking for evaluable user {user}"
                )
        relevant = relevant_by_user[user]
        for metric in METRICS:
            if _user_evaluable(metric, ratings, relevant, genres):
                evaluable[metric] += 1
        for strategy in strategies:
            recs = recommendations[strategy][user]
            for k in config.ks:
                values = {
                    "ndcg": ndcg_at_k(recs, ratings, k),
                    "map": map_at_k(recs, relevant, k),
                    "topic_coverage": topic_coverage_at_k(recs, relevant, genres, k),
                }
                for metric, value in values.items():
                    if value is not None:
                        sums[strategy][k][metric] += value
                        counts[strategy][k][metric] += 1
    values_out: dict = {}
    for strategy in strategies:
        values_out[strategy] = {}
        for k in config.ks:
            values_out[strategy][k] = {}
            for metric in METRICS:
                c = counts[strategy][k][metric]
                values_out[strategy][k][metric] = (
                    sums[strategy][k][metric] / c if c else None
                )
    return values_out, evaluable


def _user_evaluable(metric, ratings, relevant, genres) -> bool:
    if metric == "ndcg":
        return bool(ratings)
    if metric == "map":
        return bool(relevant)
    target = set()
    for item in relevant:
        target |= genres[item]
    return bool(target)


@dataclass(eq=False)
class EvalReport:
    """Per-split, per-strategy, per-k metric values with split aggregates."""

    ks: tuple[int, ...]
    strategies: tuple[str, ...]
    splits: list[dict] = field(default_factory=list)
    counts: list[dict] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def add_split(self, values: dict, counts: dict) -> None:
        self.splits.append(values)
        self.counts.append(counts)

    def value(self, split: int, strategy: str, k: int, metric: str):
        return self.splits[split][strategy][k][metric]

    def aggregate(self) -> dict:
        """strategy -> k -> metric -> {mean, std} over splits (None-aware)."""
        agg: dict = {}
        for strategy in self.strategies:
            agg[strategy] = {}
            for k in self.ks:
                agg[strategy][k] = {}
                for metric in METRICS:
                    vals = [
                        s[strategy][k][metric]
                        for s in self.splits
                        if s[strategy][k][metric] is not None
                    ]
                    if vals:
                        agg[strategy][k][metric] = {
                            "mean": float(np.mean(vals)),
                            "std": float(np.std(vals)),
                        }
                    else:
                        agg[strategy][k][metric] = {"mean": None, "std": None}
        return agg

    def to_json_dict(self) -> dict:
        return {
            "metadata": self.metadata,
            "ks": list(self.ks),
            "strategies": list(self.strategies),
            "splits": [
                {
                    strategy: {str(k): dict(by_k[k]) for k in self.ks}
                    for strategy, by_k in split.items()
                }
                for split in self.splits
            ],
            "evaluable_users": self.counts,
            "aggregate": {
                strategy: {str(k): dict(by_k[k]) for k in self.ks}
                for strategy, by_k in self.aggregate().items()
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n"

    def curve_rows(self) -> list[tuple]:
        """Flat (split, strategy, k, metric, value) rows, aggregates last."""
        rows: list[tuple] = []
        for split_id, split in enumerate(self.splits):
            for strategy in self.strategies:
                for k in self.ks:
                    for metric in METRICS:
                        rows.append((str(split_id), strategy, k, metric,
                                     split[strategy][k][metric]))
        agg = self.aggregate()
        for stat in ("mean", "std"):
            for strategy in self.strategies:
                for k in self.ks:
                    for metric in METRICS:
                        rows.append((stat, strategy, k, metric,
                                     agg[strategy][k][metric][stat]))
        return rows

    def write_curves_csv(self, path) -> None:
        path = Path(path)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["split", "strategy", "k", "metric", "value"])
            for split, strategy, k, metric, value in self.curve_rows():
                writer.writerow([
                    split, strategy, k, metric,
                    "" if value is None else repr(float(value)),
                ])

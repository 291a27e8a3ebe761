"""Seeded train/test partitions of a rating dataset.

Each split reserves one training triple per user and per item first (so any
user or item with at least two ratings keeps a training rating), then draws
the test set from the remaining pool, preferring triples of users and items
not yet represented in the test set.  Split ``i`` uses seed ``seed + i``, so
splits are a pure function of (dataset, spec).
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import Dataset

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SplitSpec:
    test_fraction: float = 0.05
    num_splits: int = 5
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.test_fraction < 1.0:
            raise ValueError("test_fraction must lie in (0, 1)")
        if self.num_splits < 1:
            raise ValueError("num_splits must be >= 1")


@dataclass(eq=False)
class TrainTestSplit:
    """Disjoint triple-index sets covering the whole dataset."""

    train: np.ndarray
    test: np.ndarray
    reserved_count: int = 0
    test_user_coverage: float = 0.0
    test_item_coverage: float = 0.0

    def __post_init__(self):
        self.train.setflags(write=False)
        self.test.setflags(write=False)


def _single_split(dataset: Dataset, test_fraction: float, seed: int) -> TrainTestSplit:
    n = dataset.num_triples
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)

    users = dataset.users
    items = dataset.items
    reserved = np.zeros(n, dtype=bool)
    user_covered = np.zeros(dataset.num_users, dtype=bool)
    item_covered = np.zeros(dataset.num_items, dtype=bool)
    for idx in order:
        u, it = users[idx], items[idx]
        if not user_covered[u] or not item_covered[it]:
            reserved[idx] = True
            user_covered[u] = True
            item_covered[it] = True

    eligible = order[~reserved[order]]
    target = min(round(test_fraction * n), eligible.size)

    in_test = np.zeros(n, dtype=bool)
    user_in_test = np.zeros(dataset.num_users, dtype=bool)
    item_in_test = np.zeros(dataset.num_items, dtype=bool)
    picked = 0
    # first pass: prefer triples that touch a user or item not yet in test
    for idx in eligible:
        if picked >= target:
            break
        u, it = users[idx], items[idx]
        if not user_in_test[u] or not item_in_test[it]:
            in_test[idx] = True
            user_in_test[u] = True
            item_in_test[it] = True
            picked += 1
    if picked < target:
        for idx in eligible:
            if picked >= target:
                break
            if not in_test[idx]:
                in_test[idx] = True
                user_in_test[users[idx]] = True
                item_in_test[items[idx]] = True
                picked += 1

    test = np.flatnonzero(in_test)
    train = np.flatnonzero(~in_test)
    return TrainTestSplit(
        train=train.astype(np.int64),
        test=test.astype(np.int64),
        reserved_count=int(reserved.sum()),
        test_user_coverage=float(user_in_test.mean()) if dataset.num_users else 0.0,
        test_item_coverage=float(item_in_test.mean()) if dataset.num_items else 0.0,
    )


def make_splits(dataset: Dataset, spec: SplitSpec) -> list[TrainTestSplit]:
    """Generate ``spec.num_splits`` independent seeded splits."""
    if dataset.num_triples == 0:
        raise ValueError("cannot split an empty dataset")
    splits = [
        _single_split(dataset, spec.test_fraction, spec.seed + i)
        for i in range(spec.num_splits)
    ]
    for i, s in enumerate(splits):
        log.info(
            "split %d: train=%d test=%d (test covers %.1f%% users, %.1f%% items)",
            i, s.train.size, s.test.size,
            100 * s.test_user_coverage, 100 * s.test_item_coverage,
        )
    return splits


def save_splits(splits: list[TrainTestSplit], path) -> None:
    """Write splits as ``split_id,role,triple_index`` rows."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["split_id", "role", "triple_index"])
        for split_id, split in enumerate(splits):
            for idx in split.train:
                writer.writerow([split_id, "train", int(idx)])
            for idx in split.test:
                writer.writerow([split_id, "test", int(idx)])


def load_splits(path) -> list[TrainTestSplit]:
    """Read splits written by :func:`save_splits`."""
    path = Path(path)
    by_split: dict[int, dict[str, list[int]]] = {}
    with path.open("r", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["split_id", "role", "triple_index"]:
            raise ValueError(f"{path}: unexpected header {header}")
        for row in reader:
            split_id, role, idx = int(row[0]), row[1], int(row[2])
            if role not in ("train", "test"):
                raise ValueError(f"{path}: unknown role {role!r}")
            by_split.setdefault(split_id, {"train": [], "test": []})[role].append(idx)
    splits = []
    for split_id in sorted(by_split):
        parts = by_split[split_id]
        splits.append(TrainTestSplit(
            train=np.asarray(sorted(parts["train"]), dtype=np.int64),
            test=np.asarray(sorted(parts["test"]), dtype=np.int64),
        ))
    return splits

"""Similarity functions, rank-position weights and ranked lotteries.

A ranked lottery over an ordered choice of items assigns position ``i`` the
probability that the choice's ``i``-th item occupies rank ``i``.  The
unnormalized mass of position ``i`` is the cumulative position weight
``C_i = sum_{l<=i} 1/(k-l+1)`` times the item's total similarity to the
user's observed items; masses are normalized over the positions present.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SIMILARITY_KINDS = ("cosine", "rbf")


@dataclass(frozen=True)
class SimilarityFn:
    """Non-negative similarity between feature vectors."""

    kind: str = "cosine"
    gamma: float = 1.0

    def __post_init__(self):
        if self.kind not in SIMILARITY_KINDS:
            raise ValueError(f"unknown similarity {self.kind!r}")
        if self.kind == "rbf" and self.gamma <= 0:
            raise ValueError("rbf gamma must be > 0")


def _unit_rows(X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    norms = np.linalg.norm(X, axis=1, keepdims=True)
    return np.divide(X, norms, out=np.zeros_like(X), where=norms > 0)


def similarity_matrix(f: SimilarityFn, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Pairwise similarities, shape (len(X), len(Y))."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    Y = np.atleast_2d(np.asarray(Y, dtype=np.float64))
    if X.shape[1] != Y.shape[1]:
        raise ValueError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
    if f.kind == "cosine":
        return _unit_rows(X) @ _unit_rows(Y).T
    sq = (
        (X * X).sum(axis=1)[:, None]
        + (Y * Y).sum(axis=1)[None, :]
        - 2.0 * (X @ Y.T)
    )
    return np.exp(-f.gamma * np.maximum(sq, 0.0))


def similarity(f: SimilarityFn, x: np.ndarray, y: np.ndarray) -> float:
    """Similarity of two single vectors; cosine of a zero vector is 0."""
    return float(similarity_matrix(f, x[None, :], y[None, :])[0, 0])


def item_set_similarity(item: int, item_set, model, f: SimilarityFn) -> float:
    """Total similarity mass of ``item`` against a set of items (0 if empty)."""
    idx = np.asarray(list(item_set), dtype=np.int64)
    if idx.size == 0:
        return 0.0
    return float(similarity_matrix(f, model.V[item][None, :], model.V[idx]).sum())


def set_masses(items: np.ndarray, reference: np.ndarray, model, f: SimilarityFn) -> np.ndarray:
    """Vector of total similarity masses of ``items`` against ``reference``."""
    items = np.asarray(items, dtype=np.int64)
    reference = np.asarray(reference, dtype=np.int64)
    if reference.size == 0:
        return np.zeros(items.shape[0])
    return similarity_matrix(f, model.V[items], model.V[reference]).sum(axis=1)


def position_weights(k: int) -> np.ndarray:
    """Cumulative weights C with C_1 = 1/k and C_k the k-th harmonic number."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return np.cumsum(1.0 / np.arange(k, 0, -1))


def lottery_from_masses(masses: np.ndarray, k: int | None = None) -> np.ndarray:
    """Rank probabilities from per-position observed-similarity masses.

    ``masses[i]`` is the total similarity of the choice's item at position
    ``i+1`` to the observed set.  ``k`` is the choice size the position
    weights refer to; it defaults to the number of positions present.  When
    every mass is zero the lottery falls back to uniform.
    """
    masses = np.asarray(masses, dtype=np.float64)
    c = masses.shape[0]
    if c == 0:
        raise ValueError("lottery needs at least one position")
    if k is None:
        k = c
    if k < c:
        raise ValueError(f"target size k={k} smaller than choice length {c}")
    if np.any(masses < 0):
        raise ValueError("similarity masses must be non-negative")
    weighted = position_weights(k)[:c] * masses
    total = weighted.sum()
    if total == 0.0:
        return np.full(c, 1.0 / c)
    return weighted / total


def lottery(choice, observed, model, f: SimilarityFn, k: int | None = None) -> np.ndarray:
    """Ranked lottery of an ordered item choice for a user.

    ``observed`` is the user's observed item set; ``k`` is the target choice
    size (defaults to ``len(choice)``).
    """
    items = np.asarray(list(choice), dtype=np.int64)
    if items.size == 0:
        raise ValueError("lottery needs a non-empty choice")
    if len(set(items.tolist())) != items.size:
        raise ValueError("choice items must be distinct")
    return lottery_from_masses(set_masses(items, observed, model, f), k)

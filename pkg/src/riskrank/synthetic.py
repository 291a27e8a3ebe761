"""Seeded synthetic rating data with clustered tastes.

Generates a MovieLens-shaped dataset: users and items carry latent group
affinities, exposure is biased toward high-affinity and popular items (so
observed ratings skew high, as in real rating logs), and ratings are the
quantized affinity plus noise.  Items are labelled with the genres of their
dominant groups.  Useful for desk-scale experiments when the real datasets
are not on disk.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .data import Dataset, make_dataset


def clustered_ratings(
    num_users: int = 600,
    num_items: int = 700,
    num_groups: int = 8,
    ratings_per_user: float = 90.0,
    rating_noise: float = 0.55,
    seed: int = 0,
):
    """Draw (user_id, item_id, rating) triples plus per-item genre labels.

    Returns:
        (triples, genres): a list of (str, str, int) triples and a dict
        mapping item id to a set of genre labels.
    """
    rng = np.random.default_rng(seed)
    theta = rng.dirichlet(np.full(num_groups, 0.25), size=num_users)
    phi = rng.dirichlet(np.full(num_groups, 0.15), size=num_items)
    popularity = rng.lognormal(0.0, 1.0, size=num_items)
    activity = rng.lognormal(0.0, 0.6, size=num_users)
    activity *= ratings_per_user / activity.mean()

    affinity = theta @ phi.T  # (users, items), entries in [0, 1]
    exposure = (affinity + 0.02) * popularity[None, :]

    genres = {}
    for i in range(num_items):
        dominant = np.flatnonzero(phi[i] >= 0.25)
        if dominant.size == 0:
            dominant = np.array([int(np.argmax(phi[i]))])
        genres[str(i + 1)] = {f"G{g}" for g in dominant}

    triples: list[tuple[str, str, int]] = []
    scale = 1.0 / affinity.max()
    for u in range(num_users):
        count = min(num_items, max(3, int(rng.poisson(activity[u]))))
        probs = exposure[u] / exposure[u].sum()
        chosen = rng.choice(num_items, size=count, replace=False, p=probs)
        level = 1.0 + 4.0 * np.cbrt(affinity[u, chosen] * scale)
        noisy = np.clip(np.rint(level + rng.normal(0.0, rating_noise, count)), 1, 5)
        for i, r in zip(chosen, noisy):
            triples.append((str(u + 1), str(i + 1), int(r)))
    return triples, genres


def synthetic_dataset(**kwargs) -> Dataset:
    """Clustered synthetic data as an in-memory :class:`Dataset`."""
    triples, genres = clustered_ratings(**kwargs)
    return make_dataset(triples, genres)


def write_movielens_files(out_dir, triples, genres) -> tuple[Path, Path]:
    """Write triples and genres in the movielens file layout.

    Produces ``ratings.dat`` (with a synthetic counter timestamp) and
    ``movies.dat``; returns both paths.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ratings_path = out_dir / "ratings.dat"
    movies_path = out_dir / "movies.dat"
    with ratings_path.open("w", encoding="latin-1") as fh:
        for ts, (user_id, item_id, rating) in enumerate(triples):
            fh.write(f"{user_id}::{item_id}::{rating}::{1000000000 + ts}\n")
    with movies_path.open("w", encoding="latin-1") as fh:
        for item_id in sorted(genres, key=int):
            tags = "|".join(sorted(genres[item_id]))
            fh.write(f"{item_id}::Feature {item_id} (2000)::{tags}\n")
    return ratings_path, movies_path

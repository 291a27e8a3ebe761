"""Rating and item-metadata ingestion.

Two rating file layouts are supported:

* ``movielens``: one rating per line, ``UserID::MovieID::Rating::Timestamp``.
  Timestamps are validated and discarded.  Item metadata follows the matching
  ``MovieID::Title::Genre1|Genre2|...`` layout.
* ``tsv``: generic ``user<TAB>item<TAB>rating`` lines, with an optional header
  row auto-detected by a non-numeric first field.

Original ids are kept as strings; dense 0-based indices are assigned in
first-appearance order so parsing the same bytes always yields the same
dataset.  Duplicate (user, item) lines keep the last rating and are counted.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterator, NamedTuple

import numpy as np

log = logging.getLogger(__name__)

FORMATS = ("movielens", "tsv")


class ParseError(ValueError):
    """Malformed input file; message carries path and 1-based line number."""

    def __init__(self, path, lineno: int, message: str):
        super().__init__(f"{path}:{lineno}: {message}")
        self.path = str(path)
        self.lineno = lineno


class RatingTriple(NamedTuple):
    user: int
    item: int
    rating: int


@dataclass(eq=False)
class Dataset:
    """Immutable in-memory rating dataset with dense user/item indices."""

    num_users: int
    num_items: int
    users: np.ndarray
    items: np.ndarray
    ratings: np.ndarray
    user_ids: tuple[str, ...]
    item_ids: tuple[str, ...]
    genres: tuple[frozenset[str], ...] = ()
    duplicate_count: int = 0
    _user_index: dict = field(init=False, repr=False)
    _item_index: dict = field(init=False, repr=False)

    def __post_init__(self):
        if not self.genres:
            self.genres = tuple(frozenset() for _ in range(self.num_items))
        for arr in (self.users, self.items, self.ratings):
            arr.setflags(write=False)
        self._user_index = {uid: i for i, uid in enumerate(self.user_ids)}
        self._item_index = {iid: i for i, iid in enumerate(self.item_ids)}

    @property
    def num_triples(self) -> int:
        return int(self.ratings.shape[0])

    def user_index(self, original_id: str) -> int:
        return self._user_index[str(original_id)]

    def item_index(self, original_id: str) -> int:
        return self._item_index[str(original_id)]

    def itertriples(self) -> Iterator[RatingTriple]:
        for u, i, r in zip(self.users, self.items, self.ratings):
            yield RatingTriple(int(u), int(i), int(r))

    def with_genres(self, genres: tuple[frozenset[str], ...]) -> "Dataset":
        if len(genres) != self.num_items:
            raise ValueError("genre tuple length must equal num_items")
        return replace(self, genres=genres)


def _parse_rating_token(tok: str, path, lineno: int) -> int:
    try:
        value = float(tok)
    except ValueError:
        raise ParseError(path, lineno, f"rating {tok!r} is not a number") from None
    rating = int(value)
    if rating != value:
        raise ParseError(path, lineno, f"rating {tok!r} is not an integer")
    if not 1 <= rating <= 5:
        raise ParseError(path, lineno, f"rating {rating} outside 1..5")
    return rating


def _is_number(tok: str) -> bool:
    try:
        float(tok)
        return True
    except ValueError:
        return False


def parse_ratings(path, format: str = "movielens") -> Dataset:
    """Parse a ratings file into a :class:`Dataset`.

    Dense indices follow first appearance; duplicate (user, item) pairs keep
    the last rating seen and increment ``duplicate_count``.  Raises
    :class:`ParseError` with the offending line number for malformed lines,
    out-of-range ratings, or an empty file.
    """
    if format not in FORMATS:
        raise ValueError(f"unknown format {format!r}; expected one of {FORMATS}")
    path = Path(path)
    user_index: dict[str, int] = {}
    item_index: dict[str, int] = {}
    pair_pos: dict[tuple[int, int], int] = {}
    users: list[int] = []
    items: list[int] = []
    ratings: list[int] = []
    duplicates = 0

    # ml-1m data files are latin-1 encoded
    with path.open("r", encoding="latin-1") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\r\n")
            if not line:
                continue
            if format == "movielens":
                parts = line.split("::")
                if len(parts) != 4:
                    raise ParseError(path, lineno, f"expected 4 '::' fields, got {len(parts)}")
                user_id, item_id, rating_tok, ts_tok = parts
                if not _is_number(ts_tok):
                    raise ParseError(path, lineno, f"timestamp {ts_tok!r} is not a number")
            else:
                parts = line.split("\t")
                if lineno == 1 and parts and not _is_number(parts[0]):
                    continue  # header row
                if len(parts) != 3:
                    raise ParseError(path, lineno, f"expected 3 tab fields, got {len(parts)}")
                user_id, item_id, rating_tok = parts
            rating = _parse_rating_token(rating_tok, path, lineno)
            u = user_index.setdefault(user_id, len(user_index))
            i = item_index.setdefault(item_id, len(item_index))
            pos = pair_pos.get((u, i))
            if pos is None:
                pair_pos[(u, i)] = len(ratings)
                users.append(u)
                items.append(i)
                ratings.append(rating)
            else:
                ratings[pos] = rating
                duplicates += 1

    if not ratings:
        raise ParseError(path, 0, "empty ratings file")
    if duplicates:
        log.warning("%s: %d duplicate (user,item) lines, kept last rating", path, duplicates)

    return Dataset(
        num_users=len(user_index),
        num_items=len(item_index),
        users=np.asarray(users, dtype=np.int32),
        items=np.asarray(items, dtype=np.int32),
        ratings=np.asarray(ratings, dtype=np.int16),
        user_ids=tuple(user_index),
        item_ids=tuple(item_index),
        duplicate_count=duplicates,
    )


def parse_genres(path, dataset: Dataset) -> Dataset:
    """Merge ``MovieID::Title::Genres`` metadata into a dataset.

    Metadata for items that never appear in the ratings is ignored; rated
    items with no metadata line keep an empty genre set.
    """
    path = Path(path)
    genre_sets = [set() for _ in range(dataset.num_items)]
    with path.open("r", encoding="latin-1") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\r\n")
            if not line:
                continue
            parts = line.split("::")
            if len(parts) != 3:
                raise ParseError(path, lineno, f"expected 3 '::' fields, got {len(parts)}")
            item_id, _title, genre_field = parts
            idx = dataset._item_index.get(item_id)
            if idx is None:
                continue
            genre_sets[idx].update(g for g in genre_field.split("|") if g)
    return dataset.with_genres(tuple(frozenset(g) for g in genre_sets))


def make_dataset(
    triples: list[tuple[str, str, int]],
    genres: dict[str, set[str]] | None = None,
) -> Dataset:
    """Build a Dataset from in-memory (user_id, item_id, rating) triples.

    Follows the same first-appearance indexing and keep-last duplicate rule
    as file parsing; mainly useful for tests and synthetic data.
    """
    user_index: dict[str, int] = {}
    item_index: dict[str, int] = {}
    pair_pos: dict[tuple[int, int], int] = {}
    users: list[int] = []
    items: list[int] = []
    ratings: list[int] = []
    duplicates = 0
    for user_id, item_id, rating in triples:
        rating = int(rating)
        if not 1 <= rating <= 5:
            raise ValueError(f"rating {rating} outside 1..5")
        u = user_index.setdefault(str(user_id), len(user_index))
        i = item_index.setdefault(str(item_id), len(item_index))
        pos = pair_pos.get((u, i))
        if pos is None:
            pair_pos[(u, i)] = len(ratings)
            users.append(u)
            items.append(i)
            ratings.append(rating)
        else:
            ratings[pos] = rating
            duplicates += 1
    if not ratings:
        raise ValueError("no triples given")
    dataset = Dataset(
        num_users=len(user_index),
        num_items=len(item_index),
        users=np.asarray(users, dtype=np.int32),
        items=np.asarray(items, dtype=np.int32),
        ratings=np.asarray(ratings, dtype=np.int16),
        user_ids=tuple(user_index),
        item_ids=tuple(item_index),
        duplicate_count=duplicates,
    )
    if genres:
        sets = tuple(
            frozenset(genres.get(iid, ())) for iid in dataset.item_ids
        )
        dataset = dataset.with_genres(sets)
    return dataset

#!/usr/bin/env python3
"""Generate a clustered synthetic rating dataset in the movielens layout.

Writes ratings.dat and movies.dat into the output directory so the files can
flow through the normal CLI (`riskrank experiment --data .../ratings.dat`).
"""

import argparse

from riskrank import clustered_ratings, write_movielens_files


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", required=True, help="output directory")
    ap.add_argument("--users", type=int, default=600)
    ap.add_argument("--items", type=int, default=700)
    ap.add_argument("--groups", type=int, default=8)
    ap.add_argument("--ratings-per-user", type=float, default=90.0)
    ap.add_argument("--seed", type=int, default=11)
    args = ap.parse_args()

    triples, genres = clustered_ratings(
        num_users=args.users,
        num_items=args.items,
        num_groups=args.groups,
        ratings_per_user=args.ratings_per_user,
        seed=args.seed,
    )
    ratings_path, movies_path = write_movielens_files(args.out, triples, genres)
    print(f"wrote {len(triples)} ratings over {args.users} users x {args.items} items")
    print(f"  {ratings_path}")
    print(f"  {movies_path}")


if __name__ == "__main__":
    main()

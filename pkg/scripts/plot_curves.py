#!/usr/bin/env python3
"""Plot metric-versus-k curves with split std bars from a curves.csv file."""

import argparse
import csv
from collections import defaultdict


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--curves", required=True, help="curves.csv from an experiment run")
    ap.add_argument("--metric", default="ndcg", choices=["ndcg", "map", "topic_coverage"])
    ap.add_argument("--out", default=None, help="image path (default: show interactively)")
    args = ap.parse_args()

    import matplotlib

    if args.out:
        matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    means = defaultdict(dict)
    stds = defaultdict(dict)
    with open(args.curves, newline="") as fh:
        for row in csv.DictReader(fh):
            if row["metric"] != args.metric or not row["value"]:
                continue
            k = int(row["k"])
            if row["split"] == "mean":
                means[row["strategy"]][k] = float(row["value"])
            elif row["split"] == "std":
                stds[row["strategy"]][k] = float(row["value"])

    fig, ax = plt.subplots(figsize=(6, 4))
    for strategy in sorted(means):
        ks = sorted(means[strategy])
        ax.errorbar(
            ks,
            [means[strategy][k] for k in ks],
            yerr=[stds[strategy].get(k, 0.0) for k in ks],
            marker="o",
            capsize=3,
            label=strategy,
        )
    ax.set_xlabel("k")
    ax.set_ylabel(args.metric)
    ax.legend()
    fig.tight_layout()
    if args.out:
        fig.savefig(args.out, dpi=150)
        print(f"wrote {args.out}")
    else:
        plt.show()


if __name__ == "__main__":
    main()

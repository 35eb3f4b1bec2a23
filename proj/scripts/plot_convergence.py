#!/usr/bin/env python3
"""Plot aggregate composite error against the theorem bound from a run/sweep CSV."""

import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import pandas as pd


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("csv", help="CSV written by `sgdbound run` or `sgdbound sweep`")
    parser.add_argument("-o", "--output", default="convergence.png")
    args = parser.parse_args()

    df = pd.read_csv(args.csv)
    df = df[df["kind"] == "aggregate"]
    keys = ["n", "mu", "L", "sigma2", "schedule"]

    fig, ax = plt.subplots(figsize=(7, 5))
    for key, group in df.groupby(keys):
        group = group.sort_values("T")
        n, mu, L, sigma2, schedule = key
        label = f"{schedule} (n={n}, mu={mu:g}, L={L:g}, s2={sigma2:g})"
        line, = ax.loglog(group["T"], group["composite"], marker="o", label=label)
        ax.loglog(group["T"], group["theorem_min"], linestyle="--", color=line.get_color())

    ax.set_xlabel("T")
    ax.set_ylabel("composite error (dashed: bound)")
    ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(args.output, dpi=120)
    print(f"wrote {args.output}")


if __name__ == "__main__":
    main()

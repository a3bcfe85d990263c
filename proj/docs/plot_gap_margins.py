#!/usr/bin/env python3
"""Plot the gap-chain margins written by `gaplab verify-gap`.

Usage: plot_gap_margins.py [output_dir] [--save margins.png]

Reads gap/summary.csv and draws the chain and ground margins per diameter,
one line per dimension, on a log axis. Needs matplotlib, which is
deliberately not a dependency of the laboratory itself.
"""

import argparse
import collections
import csv
import pathlib
import sys


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("output_dir", nargs="?", default="gaplab_out")
    ap.add_argument("--save", help="write a PNG instead of opening a window")
    args = ap.parse_args()

    import matplotlib.pyplot as plt

    summary = pathlib.Path(args.output_dir) / "gap" / "summary.csv"
    if not summary.exists():
        sys.exit(f"{summary} not found; run `gaplab verify-gap` first")

    by_n = collections.defaultdict(list)
    with open(summary, newline="") as fh:
        for row in csv.DictReader(fh):
            by_n[int(row["n"])].append(
                (float(row["D"]), float(row["margin_chain"]), float(row["margin_ground"]))
            )

    fig, (ax_chain, ax_ground) = plt.subplots(1, 2, figsize=(10, 4.5), sharex=True)
    for n, rows in sorted(by_n.items()):
        rows.sort()
        ds = [r[0] for r in rows]
        ax_chain.semilogy(ds, [r[1] for r in rows], marker="o", label=f"n = {n}")
        ax_ground.semilogy(ds, [r[2] for r in rows], marker="o", label=f"n = {n}")
    ax_chain.set_title("(lambda1 - lambda0) - (mu1 - mu0)")
    ax_ground.set_title("lambda0 - mu0")
    for ax in (ax_chain, ax_ground):
        ax.set_xlabel("diameter D")
        ax.grid(True, which="both", alpha=0.3)
        ax.legend()
    ax_chain.set_ylabel("margin")
    fig.suptitle("gap-chain margins on geodesic balls")
    fig.tight_layout()

    if args.save:
        fig.savefig(args.save, dpi=150)
        print(f"wrote {args.save}")
    else:
        plt.show()


if __name__ == "__main__":
    main()

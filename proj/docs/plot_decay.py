#!/usr/bin/env python3
"""Plot the sup-error decay histories written by `gaplab flow`.

Usage: plot_decay.py [output_dir] [--save decay.png]

Reads every flow/decay_k*.csv under the given output directory (default
gaplab_out) and draws them on one semilog axis. Needs matplotlib, which is
deliberately not a dependency of the laboratory itself.
"""

import argparse
import csv
import pathlib
import re
import sys


def read_decay(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [float(r["t"]) for r in rows], [float(r["sup_error"]) for r in rows]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("output_dir", nargs="?", default="gaplab_out")
    ap.add_argument("--save", help="write a PNG instead of opening a window")
    args = ap.parse_args()

    import matplotlib.pyplot as plt

    flow_dir = pathlib.Path(args.output_dir) / "flow"
    files = sorted(flow_dir.glob("decay_k*.csv"))
    if not files:
        sys.exit(f"no decay_k*.csv under {flow_dir}; run `gaplab flow` first")

    fig, ax = plt.subplots(figsize=(7, 4.5))
    for path in files:
        k = re.search(r"decay_k(\d+)", path.name).group(1)
        t, sup = read_decay(path)
        ax.semilogy(t, sup, marker=".", label=f"k = {k}")
    ax.set_xlabel("t")
    ax.set_ylabel("sup |u(t)|")
    ax.set_title("modulus evolution: distance to the stationary profile")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()

    if args.save:
        fig.savefig(args.save, dpi=150)
        print(f"wrote {args.save}")
    else:
        plt.show()


if __name__ == "__main__":
    main()

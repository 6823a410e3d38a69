#!/usr/bin/env python3
"""Plot CSV output of the fewbose CLI scans.

Usage:
    plot_scans.py dimer  <dimer_scan.csv>  [out.png]
    plot_scans.py trimer <trimer_branches.csv> [out.png]
    plot_scans.py recomb <recomb_scan.csv> [out.png]

Purely a convenience viewer; nothing in the library or the test suite
depends on it.
"""

import csv
import sys
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def plot_dimer(rows, ax):
    by_branch = defaultdict(lambda: ([], []))
    for r in rows:
        if not r["E_dim_reduced"]:
            continue
        xs, ys = by_branch[r["branch"]]
        xs.append(float(r["B_gauss"]))
        ys.append(-float(r["E_dim_reduced"]))
    for branch, (xs, ys) in sorted(by_branch.items()):
        ax.plot(xs, ys, ".", ms=3, label=branch)
    ax.set_yscale("symlog", linthresh=1e-8)
    ax.set_xlabel("B (G)")
    ax.set_ylabel("-E_dim (reduced)")
    ax.legend()


def plot_trimer(rows, ax):
    by_idx = defaultdict(lambda: ([], []))
    for r in rows:
        xs, ys = by_idx[r["branch_index"]]
        xs.append(float(r["B_gauss"]))
        ys.append(-float(r["E_reduced"]))
    for idx, (xs, ys) in sorted(by_idx.items()):
        ax.plot(xs, ys, "-", lw=1, label=f"branch {idx}")
    ax.set_yscale("log")
    ax.set_xlabel("B (G)")
    ax.set_ylabel("-E (reduced)")
    ax.legend()


def plot_recomb(rows, ax):
    xs, ys, rx, ry = [], [], [], []
    for r in rows:
        if r["alpha_cm6_per_s"].startswith("error:") or not r["alpha_cm6_per_s"]:
            continue
        xs.append(float(r["B_gauss"]))
        ys.append(float(r["alpha_cm6_per_s"]))
        if r.get("alpha_ref_cm6_per_s"):
            rx.append(float(r["B_gauss"]))
            ry.append(float(r["alpha_ref_cm6_per_s"]))
    ax.plot(xs, ys, ".-", ms=3, label="model")
    if rx:
        ax.plot(rx, ry, "--", lw=1, label="effective-range reference")
    ax.set_yscale("log")
    ax.set_xlabel("B (G)")
    ax.set_ylabel("alpha (cm^6/s)")
    ax.legend()


PLOTTERS = {"dimer": plot_dimer, "trimer": plot_trimer, "recomb": plot_recomb}


def main(argv):
    if len(argv) < 3 or argv[1] not in PLOTTERS:
        sys.exit(__doc__)
    rows = read_rows(argv[2])
    out = argv[3] if len(argv) > 3 else argv[2].rsplit(".", 1)[0] + ".png"
    fig, ax = plt.subplots(figsize=(7, 5))
    PLOTTERS[argv[1]](rows, ax)
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    print(out)


if __name__ == "__main__":
    main(sys.argv)

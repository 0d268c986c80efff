"""Plot a g2flow trace.

Usage: python plot_trace.py [trace.csv] [output_dir]

Writes V.png, normT2.png, Theta.png and dpsi_residual.png.  Needs only
numpy and matplotlib, so it can be copied next to any trace.
"""
import csv
import os
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

FIGURES = (
    ("V", "Hitchin volume V", "linear"),
    ("normT2", "|T|^2", "linear"),
    ("Theta", "blow-up quantity Theta", "log"),
    ("dpsi_residual", "|d psi|", "symlog"),
)


def read_trace(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return {key: np.array([float(r[key]) for r in rows]) for key in (rows[0] if rows else {})}


def render(csv_path, out_dir):
    """Write one PNG per figure; returns the list of written paths."""
    data = read_trace(csv_path)
    if not data or data["t"].size == 0:
        print("trace is empty, no figures written")
        return []
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for column, label, scale in FIGURES:
        fig, ax = plt.subplots(figsize=(5.0, 3.5))
        ax.plot(data["t"], data[column], "-", lw=1.5)
        if scale == "symlog":
            ax.set_yscale("symlog", linthresh=1e-16)
        elif scale == "log" and np.all(data[column] > 0):
            ax.set_yscale("log")
        ax.set_xlabel("t")
        ax.set_ylabel(label)
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        path = os.path.join(out_dir, column + ".png")
        fig.savefig(path, dpi=100, metadata={"Software": None})
        plt.close(fig)
        written.append(path)
    return written


if __name__ == "__main__":
    trace = sys.argv[1] if len(sys.argv) > 1 else "trace.csv"
    out = sys.argv[2] if len(sys.argv) > 2 else os.path.dirname(os.path.abspath(trace))
    for p in render(trace, out):
        print(p)

"""Report rendering: delimited tables and matplotlib figures for the CLI."""

import csv

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow(row)


def rigidity_figure(singular_values, path, threshold_ratio=1e-8):
    s = np.asarray(singular_values, dtype=float)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy(np.arange(1, len(s) + 1), s, "o-", color="tab:blue")
    ax.axhline(s.max() * threshold_ratio, color="tab:red", ls="--", lw=1,
               label="rank threshold")
    ax.set_xlabel("index")
    ax.set_ylabel("singular value")
    ax.set_title("edge-map Jacobian spectrum")
    ax.legend(loc="best", fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def homotopy_figure(record, path):
    ts = [r["t"] for r in record]
    res = [max(r["residual"], 1e-16) for r in record]
    its = [r["iterations"] for r in record]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy(ts, res, "o-", color="tab:blue", label="step residual")
    ax.set_xlabel("homotopy parameter t")
    ax.set_ylabel("relative residual")
    ax2 = ax.twinx()
    ax2.bar(ts, its, width=0.02, alpha=0.3, color="tab:gray", label="iterations")
    ax2.set_ylabel("Gauss-Newton iterations")
    ax.set_title("homotopy continuation record")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def checks_figure(reports, path):
    names = [r["check"] for r in reports]
    vals = [max(r["max_residual"], 1e-16) for r in reports]
    ok = [r["pass"] for r in reports]
    fig, ax = plt.subplots(figsize=(6.5, 4))
    colors = ["tab:green" if p else "tab:red" for p in ok]
    ax.bar(range(len(names)), vals, color=colors)
    ax.set_yscale("log")
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel("max residual")
    ax.set_title("deformation-lab check residuals")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)

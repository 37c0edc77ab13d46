"""Figure rendering for campaign outputs.

Campaign commands write a PNG next to each CSV so results are viewable
without a separate plotting step.  The CSV stays the primary artifact;
figures are a convenience layer over the same rows.
"""

from __future__ import annotations

import math
import re
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .analysis import BoundReport

_SWEEP_LABEL = re.compile(r"^m=([0-9.eE+-]+)$")


def plot_tail(
    tail: Sequence[tuple[int, float]],
    unit: float,
    path: str,
    bound: Optional[BoundReport] = None,
) -> None:
    """Log-scale empirical tail of the sync time, with the closed-form
    bound overlaid when available.  Zero tail values cannot appear on a
    log axis and are dropped from the curve.
    """
    xs = [n * unit for n, _ in tail]
    ys = [p if p > 0 else float("nan") for _, p in tail]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.semilogy(xs, ys, marker="o", label="empirical")
    if bound is not None:
        bx = [x for x in xs]
        by = [bound.tail_at_time(x) for x in bx]
        ax.semilogy(bx, by, linestyle="--", label="bound")
    ax.set_xlabel("time")
    ax.set_ylabel("P(sync time > t)")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_compare(rows: Sequence, path: str) -> None:
    """Mean sync time per cell.

    If every rule label looks like m=<slope> and a single size is present
    the rows are treated as a slope sweep (x axis = slope, one line per
    family); otherwise one subplot per family with size on the x axis and
    one line per rule.
    """
    families = list(dict.fromkeys(r.family for r in rows))
    labels = list(dict.fromkeys(r.rule for r in rows))
    sizes = sorted({r.n for r in rows})
    sweep = len(sizes) == 1 and all(_SWEEP_LABEL.match(lab) for lab in labels)
    if sweep:
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        for fam in families:
            pts = [
                (float(_SWEEP_LABEL.match(r.rule).group(1)), r.mean_sync_time)
                for r in rows
                if r.family == fam
            ]
            pts.sort()
            ax.plot([m for m, _ in pts], [y for _, y in pts], marker="o", label=fam)
        ax.set_xlabel("slope m")
        ax.set_ylabel("mean sync time")
        ax.grid(True, alpha=0.3)
        ax.legend()
    else:
        ncols = 2 if len(families) > 1 else 1
        nrows = math.ceil(len(families) / ncols)
        fig, axes = plt.subplots(
            nrows, ncols, figsize=(5.0 * ncols, 3.5 * nrows), squeeze=False
        )
        for i, fam in enumerate(families):
            ax = axes[i // ncols][i % ncols]
            for lab in labels:
                pts = sorted(
                    (r.n, r.mean_sync_time)
                    for r in rows
                    if r.family == fam and r.rule == lab
                )
                ax.plot([n for n, _ in pts], [y for _, y in pts], marker="o", label=lab)
            ax.set_title(fam)
            ax.set_xlabel("network size")
            ax.set_ylabel("mean sync time")
            ax.grid(True, alpha=0.3)
            ax.legend(fontsize=8)
        for j in range(len(families), nrows * ncols):
            axes[j // ncols][j % ncols].axis("off")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)

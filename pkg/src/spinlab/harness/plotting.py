"""Figure style and the per-experiment plots written by ``summarize``."""

from __future__ import annotations

from contextlib import contextmanager
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

GOLDEN = (np.sqrt(5) - 1.0) / 2.0
FIG_WIDTH = 4.5

STYLE = {
    "figure.figsize": (FIG_WIDTH, FIG_WIDTH * GOLDEN),
    "figure.dpi": 150,
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "lines.linewidth": 1.2,
    "lines.markersize": 4,
    "mathtext.fontset": "stix",
    "font.family": "serif",
}


@contextmanager
def figure(path: Path, **subplot_kw):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(**subplot_kw)
        try:
            yield fig, ax
            fig.savefig(path)
        finally:
            plt.close(fig)


def extinction_scaling(path, ns, medians, fit=None, horizon=None):
    with figure(path) as (fig, ax):
        ax.plot(ns, medians, "o", label="median extinction time")
        if fit is not None:
            xs = np.linspace(min(ns), max(ns), 100)
            ax.plot(xs, fit.slope * np.log(xs) + fit.intercept, "-",
                    label=f"fit {fit.slope:.2f} ln n {fit.intercept:+.2f}")
        # the horizon is drawn only when it is on the scale of the data
        if horizon is not None and max(medians) > 0.2 * max(horizon):
            ax.plot(ns, horizon, ":", color="0.5", label="horizon")
        ax.set_xscale("log", base=2)
        ax.set_xlabel("n")
        ax.set_ylabel("time")
        ax.legend(frameon=False)


def size_histogram(path, values, label):
    values = np.asarray(values, dtype=int)
    with figure(path) as (fig, ax):
        if values.size:
            ks, counts = np.unique(values, return_counts=True)
            ax.semilogy(ks, counts / counts.sum(), "o-")
        ax.set_xlabel(label)
        ax.set_ylabel("frequency")


def traces(path, series, ylabel, hlines=()):
    with figure(path) as (fig, ax):
        for t, y in series:
            ax.plot(t, y, lw=0.8, alpha=0.7)
        for h in hlines:
            ax.axhline(h, color="0.4", ls=":")
        ax.set_xlabel("t")
        ax.set_ylabel(ylabel)


def per_cell_bars(path, values, ylabel, threshold=None):
    with figure(path) as (fig, ax):
        ax.bar(range(len(values)), values, color="0.4")
        if threshold is not None:
            ax.axhline(threshold, color="C3", ls="--")
        ax.set_xlabel("cell")
        ax.set_ylabel(ylabel)

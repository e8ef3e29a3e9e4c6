"""Figure rendering for experiment reports.

Everything here draws to files through the Agg backend, so reports work
on headless machines.  These are convenience renderings of the same
numbers the CSV/JSON outputs carry; external tools remain first-class
consumers of those files.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

__all__ = ["save_convergence_figure", "save_metrics_figure"]


def save_convergence_figure(traces, path, title: str = "Objective per iteration") -> None:
    """Plot objective-vs-iteration curves, one line per repetition."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for i, trace in enumerate(traces):
        iters = [r.iteration for r in trace.records]
        values = trace.objectives()
        ax.plot(iters, values, lw=1.2, label=f"rep {i}")
    ax.set_xlabel("iteration")
    ax.set_ylabel("objective")
    ax.set_yscale("log")
    ax.set_title(title)
    if len(traces) <= 10:
        ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_metrics_figure(mean: dict, std: dict, path, title: str = "Metrics (mean ± std)") -> None:
    """Bar chart of aggregate metric means with std error bars."""
    names = [k for k in mean if k in std]
    values = [mean[k] for k in names]
    errors = [std[k] for k in names]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(range(len(names)), values, yerr=errors, capsize=4, color="#4878a8")
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, rotation=20, ha="right")
    ax.set_title(title)
    ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)

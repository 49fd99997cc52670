"""Figure rendering: selection bar charts and compliance heatmaps as SVG files.

SVGs are made byte-reproducible by pinning matplotlib's hash salt and
dropping the creation-date metadata, so reruns with the same inputs emit
identical files.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.colors import ListedColormap

from .experiments import HeatmapResult, SelectionResult

SVG_HASHSALT = "latsim"

# first two candidates keep the conventional short-path blue / long-path green
_PATH_COLORS = ["tab:blue", "tab:green", "tab:orange", "tab:red", "tab:purple"]


def save_figure_svg(fig, path: str | Path) -> None:
    with matplotlib.rc_context({"svg.hashsalt": SVG_HASHSALT}):
        fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def selection_bar_chart(result: SelectionResult, path: str | Path) -> None:
    """Grouped bars: selection frequency per candidate path at each sample size."""
    sizes = result.sample_sizes
    n_paths = len(result.path_ids)
    x = np.arange(len(sizes))
    width = 0.8 / n_paths
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for i, pid in enumerate(result.path_ids):
        freqs = [result.frequencies[n0][i] for n0 in sizes]
        color = _PATH_COLORS[i % len(_PATH_COLORS)]
        ax.bar(x + (i - (n_paths - 1) / 2) * width, freqs, width, label=pid, color=color)
    ax.set_xticks(x)
    ax.set_xticklabels([str(n0) for n0 in sizes])
    ax.set_xlabel("latency samples per decision")
    ax.set_ylabel("fraction of trials chosen as best")
    ax.set_ylim(0, 1.05)
    ax.legend(title="path", frameon=False)
    ax.set_title(f"best-path selection over {result.trials} trials")
    fig.tight_layout()
    save_figure_svg(fig, path)


def compliance_heatmap(result: HeatmapResult, path: str | Path) -> None:
    """ACO x MACO grid, white where declared compliant, grey otherwise.

    FP/FN cells get a red dot overlay.
    """
    decisions = result.decision_matrix.astype(int)
    classes = result.class_matrix
    n_aco, n_maco = decisions.shape
    fig, ax = plt.subplots(figsize=(max(5.0, 0.35 * n_maco + 1.8), max(4.0, 0.2 * n_aco + 1.6)))
    ax.imshow(
        decisions,
        cmap=ListedColormap(["0.55", "white"]),
        vmin=0,
        vmax=1,
        aspect="auto",
        interpolation="nearest",
    )
    err_rows, err_cols = np.nonzero((classes == "FP") | (classes == "FN"))
    if err_rows.size:
        ax.scatter(err_cols, err_rows, s=18, color="red", zorder=3)
    ax.set_xticks(np.arange(n_maco))
    ax.set_xticklabels(result.maco_ids, rotation=90, fontsize=7)
    ax.set_yticks(np.arange(n_aco))
    ax.set_yticklabels(result.aco_ids, fontsize=7)
    ax.set_xticks(np.arange(-0.5, n_maco), minor=True)
    ax.set_yticks(np.arange(-0.5, n_aco), minor=True)
    ax.grid(which="minor", color="0.8", linewidth=0.4)
    ax.tick_params(which="minor", length=0)
    r = result.report
    ax.set_title(
        f"compliance decisions at n0={result.sample_size} "
        f"(fp={r.fp_count}, fn={r.fn_count})",
        fontsize=10,
    )
    fig.tight_layout()
    save_figure_svg(fig, path)

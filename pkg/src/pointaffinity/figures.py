"""Matplotlib renderings written next to the delimited reports."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .field import DEFAULT_LEVELS, ScalarFieldGrid


def save_field_figure(grid: ScalarFieldGrid, path, centers=None,
                      levels=DEFAULT_LEVELS, title: str | None = None) -> None:
    """Greyscale heatmap with contour overlay; brighter means lower affinity."""
    xs = grid.node_x()
    ys = grid.node_y()
    fig, ax = plt.subplots(figsize=(6, 6))
    extent = (xs[0], xs[-1], ys[0], ys[-1])
    ax.imshow(1.0 - grid.scores, cmap="gray", vmin=0.0, vmax=1.0,
              origin="lower", extent=extent, aspect="auto")
    usable = [v for v in levels if grid.scores.min() < v < grid.scores.max()]
    if usable:
        ax.contour(xs, ys, grid.scores, levels=usable, colors="tab:red",
                   linewidths=0.8)
    if centers is not None:
        centers = np.atleast_2d(np.asarray(centers, dtype=float))
        ax.plot(centers[:, 0], centers[:, 1], "o", color="tab:blue", ms=5)
    if title:
        ax.set_title(title)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def save_partition_figure(points, labels, path, centers=None, stable=None,
                          title: str | None = None) -> None:
    """Scatter of a clustering; unstable points, when given, are crossed out."""
    pts = np.asarray(points, dtype=float)
    labels = np.asarray(labels)
    fig, ax = plt.subplots(figsize=(6, 6))
    ax.scatter(pts[:, 0], pts[:, 1], c=labels, cmap="tab10", s=12, alpha=0.8)
    if stable is not None:
        bad = pts[~np.asarray(stable, dtype=bool)]
        if bad.size:
            ax.scatter(bad[:, 0], bad[:, 1], marker="x", c="black", s=24,
                       label="unstable")
            ax.legend(loc="best")
    if centers is not None:
        centers = np.atleast_2d(np.asarray(centers, dtype=float))
        ax.plot(centers[:, 0], centers[:, 1], "k*", ms=14)
    if title:
        ax.set_title(title)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def save_metric_bars(names, values, path, ylabel: str = "",
                     title: str | None = None) -> None:
    fig, ax = plt.subplots(figsize=(max(4, 0.9 * len(names)), 4))
    ax.bar(range(len(names)), values, color="tab:gray")
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, rotation=30, ha="right")
    if ylabel:
        ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def save_stream_figure(reports, path, title: str | None = None) -> None:
    """Pool size and folded counts across incremental batches."""
    batches = [r.batch for r in reports]
    pools = [r.pool_size for r in reports]
    folded = [r.folded_first_pass + r.folded_second_pass for r in reports]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(batches, pools, "o-", label="unstable pool")
    ax.plot(batches, folded, "s-", label="folded this batch")
    ax.set_xlabel("batch")
    ax.set_ylabel("points")
    ax.legend(loc="best")
    if title:
        ax.set_title(title)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)

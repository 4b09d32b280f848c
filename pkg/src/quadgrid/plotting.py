"""Matplotlib rendering of grids and convergence histories."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .grid import StructuredGrid


def plot_grid(grid: StructuredGrid, ax=None, color="black", linewidth=0.6):
    """Draw all grid lines on the given axes (created if omitted)."""
    if ax is None:
        _fig, ax = plt.subplots()
    xy = grid.xy
    for j in range(grid.nj):
        ax.plot(xy[:, j, 0], xy[:, j, 1], color=color, linewidth=linewidth)
    for i in range(grid.ni):
        ax.plot(xy[i, :, 0], xy[i, :, 1], color=color, linewidth=linewidth)
    ax.set_aspect("equal")
    return ax


def save_grid_figure(grid: StructuredGrid, path, title=None, dpi=150) -> None:
    fig, ax = plt.subplots(figsize=(6, 6))
    plot_grid(grid, ax=ax)
    if title:
        ax.set_title(title)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    fig.tight_layout()
    fig.savefig(path, dpi=dpi)
    plt.close(fig)


def save_convergence_figure(sweeps, path, title=None, dpi=150) -> None:
    """Per-sweep max displacement and global functional value."""
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(6, 6), sharex=True)
    idx = [s.sweep_index for s in sweeps]
    ax1.semilogy(idx, [max(s.max_displacement, 1e-300) for s in sweeps], marker=".")
    ax1.set_ylabel("max displacement")
    ax2.plot(idx, [s.global_value_after for s in sweeps], marker=".")
    ax2.set_ylabel("functional value")
    ax2.set_xlabel("sweep")
    if title:
        ax1.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=dpi)
    plt.close(fig)

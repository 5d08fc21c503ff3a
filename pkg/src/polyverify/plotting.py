"""Figures written next to the CLI's JSON/CSV reports."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .bench import loglog_slope  # noqa: E402

STYLE = {
    "axes.spines.top": False,
    "axes.spines.right": False,
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "savefig.dpi": 150,
}


def plot_bench(rows, path) -> None:
    """Log-log LP calls and wall time against instance size, with fitted slope."""
    sizes = np.array([r.size for r in rows], float)
    calls = np.array([r.lp_calls for r in rows], float)
    wall = np.array([max(r.wall_ms, 1e-3) for r in rows], float)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.5, 3.2))
        ax.loglog(sizes, calls, "o-", label="LP calls")
        ax.loglog(sizes, wall, "s--", label="wall time [ms]")
        if len(set(sizes)) > 1:
            slope = loglog_slope(sizes, calls)
            ax.set_title(f"{rows[0].arch}: LP-call slope {slope:.2f}")
        ax.set_xlabel("size")
        ax.legend(frameon=False)
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)


def plot_arrangement(a, regions, path, extent: float | None = None) -> None:
    """2-D arrangement: hyperplanes as lines, one dot per region witness."""
    if a.dim != 2:
        raise ValueError("only 2-D arrangements can be drawn")
    pts = np.array([x for _, x in regions]) if regions else np.zeros((0, 2))
    if extent is None:
        extent = 1.2 * max(1.0, float(np.max(np.abs(pts))) if len(pts) else 1.0, float(np.max(np.abs(a.c))))
    t = np.linspace(-extent, extent, 2)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4, 4))
        for w, c in zip(a.A, a.c):
            if abs(w[1]) > abs(w[0]):
                ax.plot(t, -(w[0] * t + c) / w[1], lw=0.8, color="0.4")
            else:
                ax.plot(-(w[1] * t + c) / w[0], t, lw=0.8, color="0.4")
        for r, x in regions:
            ax.plot(*x, ".", color="C3")
            ax.annotate(r.hex(), x, fontsize=6, xytext=(2, 2), textcoords="offset points")
        ax.set_xlim(-extent, extent)
        ax.set_ylim(-extent, extent)
        ax.set_aspect("equal")
        ax.set_title(f"{len(regions)} regions")
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)

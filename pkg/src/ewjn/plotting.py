"""
PNG renderings of maps and report weights (matplotlib, Agg backend).
"""

import matplotlib

matplotlib.use("Agg")

import numpy as np  # noqa: E402
from matplotlib import pyplot as plt  # noqa: E402
from matplotlib.patches import Circle  # noqa: E402

__all__ = ["plot_map", "plot_family", "plot_report"]

STYLE = {
    "font.family": "serif",
    "font.size": 9,
    "axes.titlesize": 10,
    "xtick.labelsize": "small",
    "ytick.labelsize": "small",
    "savefig.dpi": 120,
}


def _draw(ax, result, title=None):
    lo, hi = result.scaling()
    cmap = "RdBu_r" if result.symmetric else "viridis"
    extent = [result.u[0], result.u[-1], result.v[-1], result.v[0]]
    data = np.ma.masked_invalid(result.values)
    im = ax.imshow(data, extent=extent, origin="upper", cmap=cmap, vmin=lo, vmax=hi, interpolation="nearest")
    ax.add_patch(Circle((0, 0), 1.0, fill=False, lw=0.8, color="k"))
    ax.set_xlabel(f"{result.axis_names[0]} / a")
    ax.set_ylabel(f"{result.axis_names[1]} / a")
    ax.set_aspect("equal")
    if title:
        ax.set_title(title)
    return im


def plot_map(result, path, title=None):
    """Single heatmap with colorbar."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.4, 3.8))
        im = _draw(ax, result, title)
        fig.colorbar(im, ax=ax, shrink=0.85)
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)


def plot_family(results, titles, path, suptitle=None):
    """One row of panels, e.g. the same map at increasing truncation order."""
    n = len(results)
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(1, n, figsize=(2.6 * n, 2.9), squeeze=False)
        for ax, res, t in zip(axes[0], results, titles):
            _draw(ax, res, t)
        if suptitle:
            fig.suptitle(suptitle)
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)


def plot_report(report, path):
    """Bar chart of per-qubit dephasing and relaxation rates."""
    idx = np.arange(len(report.qubits))
    deph = [q.dephasing_rate for q in report.qubits]
    relax = [q.relaxation_rate for q in report.qubits]
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(max(3.5, 0.8 * len(idx) + 2), 3.2))
        ax.bar(idx - 0.2, deph, 0.4, label="dephasing")
        ax.bar(idx + 0.2, relax, 0.4, label="relaxation")
        ax.set_xticks(idx)
        ax.set_xlabel("qubit")
        ax.set_ylabel("rate estimate (1/s)")
        if all(v > 0 for v in deph + relax):
            ax.set_yscale("log")
        ax.legend(frameon=False)
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)

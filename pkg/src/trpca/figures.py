"""Figure rendering for the report paths.

Every CLI report writes machine-readable CSV as the contract; these
helpers render a PNG next to each CSV for quick visual inspection.
The Agg backend is forced so rendering works headless.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _padded_extent(values):
    lo, hi = min(values), max(values)
    pad = (hi - lo) / max(len(values) - 1, 1) / 2.0 or 0.5
    return lo - pad, hi + pad


def save_grid_heatmap(grid, path):
    """Success-rate heatmap over (rank, corruption rate) cells."""
    fig, ax = plt.subplots(figsize=(6, 5))
    xlo, xhi = _padded_extent(grid.sparsities)
    ylo, yhi = _padded_extent(grid.ranks)
    im = ax.imshow(
        grid.success_rate,
        origin="lower",
        aspect="auto",
        vmin=0.0,
        vmax=1.0,
        cmap="gray",
        extent=(xlo, xhi, ylo, yhi),
    )
    ax.set_xlabel("corruption rate")
    ax.set_ylabel("tubal rank")
    ax.set_title(f"success rate ({grid.trials} trials/cell)")
    fig.colorbar(im, ax=ax)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_convergence_curves(curves, path):
    """Recovery error of both parts versus iteration, log scale."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy(curves.k, np.maximum(curves.rse_L, 1e-300), label="rse(L)")
    e_label = "||E||_F" if curves.e_absolute else "rse(E)"
    ax.semilogy(curves.k, np.maximum(curves.rse_E, 1e-300), label=e_label)
    ax.set_xlabel("iteration")
    ax.set_ylabel("error")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_trace_figure(trace, path):
    """Feasibility and step residuals of a solve, log scale."""
    ks = range(1, len(trace) + 1)
    fig, ax = plt.subplots(figsize=(6, 4))
    for name in ("res_feas", "dL", "dE"):
        vals = [v if v == v and v > 0 else float("nan") for v in getattr(trace, name)]
        ax.semilogy(ks, vals, label=name)
    ax.set_xlabel("iteration")
    ax.set_ylabel("infinity norm")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_sweep_figure(lambdas, psnrs, ssims, path):
    """Quality metrics across a sparsity-weight sweep."""
    finite = [p if math.isfinite(p) else float("nan") for p in psnrs]
    fig, ax1 = plt.subplots(figsize=(6, 4))
    ax1.plot(lambdas, finite, "o-", color="tab:blue", label="PSNR (dB)")
    ax1.set_xlabel("lambda")
    ax1.set_ylabel("PSNR (dB)", color="tab:blue")
    ax2 = ax1.twinx()
    ax2.plot(lambdas, ssims, "s--", color="tab:orange", label="SSIM")
    ax2.set_ylabel("SSIM", color="tab:orange")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)

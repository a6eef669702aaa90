"""Figures written next to CLI outputs.

Every function renders with the non-interactive Agg backend, saves one PNG and
returns its path.
"""

from __future__ import annotations

from pathlib import Path
from typing import Dict, Iterable, Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _save(fig, path) -> str:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return str(path)


def plot_factors(S, W, path, title: Optional[str] = None, sign_label: str = "S") -> str:
    """Heatmaps of the discrete factor and the weight matrix side by side."""
    S = np.atleast_2d(np.asarray(S, dtype=float))
    W = np.atleast_2d(np.asarray(W, dtype=float))
    fig, (a0, a1) = plt.subplots(1, 2, figsize=(8, 4),
                                 gridspec_kw={"width_ratios": [max(S.shape[1], 1), max(W.shape[1], 1)]})
    lo = -1.0 if S.min() < 0 else 0.0
    im0 = a0.imshow(S, cmap="coolwarm", vmin=lo, vmax=1.0, aspect="auto", interpolation="nearest")
    a0.set_title(sign_label)
    a0.set_xlabel("component")
    a0.set_ylabel("row")
    fig.colorbar(im0, ax=a0, fraction=0.08)
    lim = float(np.abs(W).max()) or 1.0
    im1 = a1.imshow(W, cmap="RdBu_r", vmin=-lim, vmax=lim, aspect="auto", interpolation="nearest")
    a1.set_title("weights")
    a1.set_xlabel("component")
    fig.colorbar(im1, ax=a1, fraction=0.08)
    if title:
        fig.suptitle(title)
    return _save(fig, path)


def plot_spectra(matrices: Dict[str, np.ndarray], path, title: Optional[str] = None) -> str:
    """Singular values of each named matrix on a log scale."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for name, M in matrices.items():
        s = np.linalg.svd(np.atleast_2d(np.asarray(M, dtype=float)), compute_uv=False)
        floor = max(s[0] * 1e-17, 1e-300) if s.size and s[0] > 0 else 1e-300
        ax.semilogy(np.arange(1, s.size + 1), np.maximum(s, floor), marker="o", ms=3, label=name)
    ax.set_xlabel("index")
    ax.set_ylabel("singular value")
    ax.legend()
    if title:
        ax.set_title(title)
    return _save(fig, path)


def plot_residuals(residuals: Sequence[float], path, inliers: Optional[Iterable[int]] = None,
                   title: Optional[str] = None) -> str:
    """Per-column distance to the fitted subspace, inliers highlighted."""
    r = np.asarray(residuals, dtype=float)
    fig, ax = plt.subplots(figsize=(7, 3.5))
    idx = np.arange(r.size)
    mask = np.zeros(r.size, dtype=bool)
    if inliers is not None:
        mask[list(inliers)] = True
    floor = 1e-18
    ax.semilogy(idx[~mask], np.maximum(r[~mask], floor), "o", ms=3, color="tab:red", label="outlier")
    ax.semilogy(idx[mask], np.maximum(r[mask], floor), "o", ms=3, color="tab:blue", label="inlier")
    ax.set_xlabel("column")
    ax.set_ylabel("residual norm")
    ax.legend()
    if title:
        ax.set_title(title)
    return _save(fig, path)


def plot_history(values: Sequence[float], path, ylabel: str = "objective",
                 title: Optional[str] = None) -> str:
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.plot(np.arange(len(values)), values, marker=".")
    ax.set_xlabel("iteration")
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    return _save(fig, path)


def plot_bound_checks(checks: Sequence, path, title: Optional[str] = None) -> str:
    """Observed value against bound (with slack) for each ``BoundCheck``."""
    fig, ax = plt.subplots(figsize=(max(4, 1.6 * len(checks)), 3.5))
    x = np.arange(len(checks))
    vals = [c.value for c in checks]
    bounds = [c.bound for c in checks]
    slack = [0.0 if not np.isfinite(c.slack) else c.slack for c in checks]
    ax.bar(x - 0.2, vals, width=0.4, label="observed")
    ax.bar(x + 0.2, bounds, width=0.4, yerr=slack, capsize=4, label="bound")
    ax.set_xticks(x)
    ax.set_xticklabels([c.name for c in checks], rotation=20, ha="right")
    ax.legend()
    if title:
        ax.set_title(title)
    return _save(fig, path)

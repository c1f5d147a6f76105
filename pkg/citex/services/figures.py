"""
SVG figures. These are presentation artifacts; no result is read back from them.
"""
import logging
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.patches import Rectangle  # noqa: E402
import numpy as np  # noqa: E402
from scipy.stats import norm  # noqa: E402

from citex.models.fits import QuasiVarianceSet, ResidualReport, StiglerFit  # noqa: E402
from citex.models.lasso import LassoPath  # noqa: E402
from citex.models.network import Dendrogram  # noqa: E402
from citex.schemas.assessment import UnitScore  # noqa: E402

logger = logging.getLogger(__name__)

plt.rcParams["svg.hashsalt"] = "citex"
plt.rcParams["svg.fonttype"] = "none"

OUTLIER_LABELS = 4


def _save(fig, path: Path) -> Path:
    fig.savefig(path, format="svg", metadata={"Date": None}, bbox_inches="tight")
    plt.close(fig)
    logger.info(f"Wrote {path}")
    return path


def centipede_plot(fit: StiglerFit, qv: QuasiVarianceSet, path: Path, level_z: float = 1.96) -> Path:
    """Export scores with comparison intervals mu -/+ z * qse, best journal on top."""
    order = np.argsort(fit.mu, kind="stable")
    mu = np.asarray(fit.mu)[order]
    half = level_z * np.asarray(qv.qse)[order]
    labels = [fit.labels[k] for k in order]

    fig, ax = plt.subplots(figsize=(6, max(3, 0.22 * len(labels))))
    y = np.arange(len(labels))
    ax.hlines(y, mu - half, mu + half, color="black", linewidth=1)
    ax.plot(mu, y, "o", color="black", markersize=3)
    ax.set_yticks(y)
    ax.set_yticklabels(labels, fontsize=7)
    ax.set_xlabel("Export score")
    ax.grid(axis="x", color="#dddddd")
    return _save(fig, path)


def _leaf_positions(dend: Dendrogram) -> Dict[int, float]:
    return {leaf: float(pos) for pos, leaf in enumerate(dend.leaf_order)}


def dendrogram_plot(
    dend: Dendrogram, path: Path, cut_height: Optional[float] = None, partition: Sequence[Sequence[str]] = ()
) -> Path:
    """Dendrogram in our leaf order with grey boxes around the clusters at the cut."""
    x: Dict[int, float] = _leaf_positions(dend)
    y: Dict[int, float] = {leaf: 0.0 for leaf in range(dend.n)}

    fig, ax = plt.subplots(figsize=(max(6, 0.22 * dend.n), 5))
    for step, merge in enumerate(dend.merges):
        node = dend.n + step
        xl, xr = x[merge.left], x[merge.right]
        ax.plot([xl, xl, xr, xr], [y[merge.left], merge.height, merge.height, y[merge.right]],
                color="black", linewidth=0.8)
        x[node] = 0.5 * (xl + xr)
        y[node] = merge.height

    if cut_height is not None:
        index = {label: k for k, label in enumerate(dend.labels)}
        for members in partition:
            xs = [x[index[label]] for label in members]
            ax.add_patch(Rectangle(
                (min(xs) - 0.4, -0.02), max(xs) - min(xs) + 0.8, cut_height + 0.02,
                facecolor="#e6e6e6", edgecolor="#999999", zorder=0,
            ))
        ax.axhline(cut_height, color="#999999", linestyle="--", linewidth=0.8)

    ax.set_xticks(range(dend.n))
    ax.set_xticklabels([dend.labels[k] for k in dend.leaf_order], rotation=90, fontsize=7)
    ax.set_xlim(-1, dend.n)
    ax.set_ylabel("Height")
    return _save(fig, path)


def path_plot(path_: LassoPath, path: Path) -> Path:
    """Score trajectories against the relative bound, with QLE and TIC markers."""
    s = np.array([p.s for p in path_.points])
    scale = path_.penalty_at_qle if path_.penalty_at_qle > 0 else 1.0
    scores = np.vstack([p.mu for p in path_.points])

    fig, ax = plt.subplots(figsize=(7, 6))
    for k, label in enumerate(path_.labels):
        ax.plot(s / scale, scores[:, k], color="black", linewidth=0.6)
        ax.annotate(label, (s[-1] / scale, scores[-1, k]), fontsize=6, xytext=(3, 0), textcoords="offset points")
    ax.axvline(1.0, color="black", linestyle=":", linewidth=0.8, label="QLE")
    ax.axvline(path_.selected_point.s / scale, color="black", linestyle="--", linewidth=0.8, label="TIC")
    ax.set_xlabel("s / penalty at QLE")
    ax.set_ylabel("Export score")
    ax.legend(loc="upper left", fontsize=7)
    return _save(fig, path)


def residual_qq_plot(report: ResidualReport, path: Path, scores: Optional[Sequence[float]] = None) -> Path:
    """
    Sorted journal residuals against normal quantiles, with the envelope.

    With `scores`, a second panel plots each journal's residual against its
    export score and labels the largest residuals.
    """
    values = np.asarray(report.journal_residuals, dtype=np.float64)
    residuals = np.sort(values[~np.isnan(values)])
    n = residuals.size
    theoretical = norm.ppf((np.arange(1, n + 1) - 0.5) / n)

    if scores is None:
        fig, ax = plt.subplots(figsize=(5, 5))
    else:
        fig, (ax, side) = plt.subplots(1, 2, figsize=(10, 5))
    ax.plot(theoretical, residuals, "o", color="black", markersize=3)
    envelope = report.envelope
    if envelope is not None and envelope.lower.size == n:
        ax.plot(theoretical, envelope.lower, color="#777777", linewidth=0.8)
        ax.plot(theoretical, envelope.upper, color="#777777", linewidth=0.8)
        ax.plot(theoretical, envelope.median, color="#777777", linewidth=0.8, linestyle="--")
    ax.set_xlabel("Normal quantiles")
    ax.set_ylabel("Sorted journal residuals")

    if scores is not None:
        mu = np.asarray(scores, dtype=np.float64)
        defined = ~np.isnan(values)
        side.plot(mu[defined], values[defined], "o", color="black", markersize=3)
        side.axhline(0.0, color="#777777", linewidth=0.8)
        for k in np.argsort(-np.abs(np.where(defined, values, 0.0)), kind="stable")[:OUTLIER_LABELS]:
            if defined[k]:
                side.annotate(report.labels[k], (mu[k], values[k]), fontsize=7,
                              xytext=(3, 3), textcoords="offset points")
        side.set_xlabel("Export score")
        side.set_ylabel("Journal residual")
    return _save(fig, path)


def assessment_scatter(panels: Mapping[str, Sequence[UnitScore]], path: Path) -> Path:
    """
    RAE score against mean journal score, one panel per scoring method.

    Each panel carries its least-squares line and labels the units
    farthest from it.
    """
    count = max(1, len(panels))
    columns = min(count, 4)
    rows = -(-count // columns)
    fig, axes = plt.subplots(rows, columns, figsize=(4.5 * columns, 4 * rows), squeeze=False)
    for ax in axes.flat[len(panels):]:
        ax.set_visible(False)

    for ax, (method, units) in zip(axes.flat, panels.items()):
        points: List[Tuple[str, float, float]] = [
            (u.unit, float(u.mean_journal_score), float(u.rae_score))
            for u in units if u.mean_journal_score is not None and u.rae_score is not None
        ]
        if points:
            names = [p[0] for p in points]
            x = np.array([p[1] for p in points])
            y = np.array([p[2] for p in points])
            ax.plot(x, y, "o", color="black", markersize=3)
            if len(points) >= 2 and np.ptp(x) > 0:
                slope, intercept = np.polyfit(x, y, 1)
                grid = np.linspace(x.min(), x.max(), 2)
                ax.plot(grid, intercept + slope * grid, color="black", linewidth=0.8)
                residual = np.abs(y - (intercept + slope * x))
                for k in np.argsort(-residual, kind="stable")[:OUTLIER_LABELS]:
                    ax.annotate(names[k], (x[k], y[k]), fontsize=7, xytext=(3, 3), textcoords="offset points")
        ax.set_title(method, fontsize=9)
        ax.set_xlabel("Mean journal score")
        ax.set_ylabel("RAE score")
    return _save(fig, path)

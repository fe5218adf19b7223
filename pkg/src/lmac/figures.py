"""Figure rendering for the report paths.

Every report-writing command drops a PNG next to its delimited output:
per-chunk ratios for evaluation runs, ranked ratios plus ratio-vs-accuracy
scatters for ranking runs, per-token code lengths for NLL estimates.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .corpus import CompressionReport
from .estimator import NllReport
from .ranker import AccuracyTable, RankingReport

_DPI = 150


def _save(fig, path: Path) -> None:
    """Atomic figure write: render to a sibling temp file, then rename."""
    tmp = path.with_name(path.name + ".tmp.png")
    fig.savefig(tmp, dpi=_DPI, bbox_inches="tight")
    plt.close(fig)
    tmp.replace(path)


def evaluation_figure(report: CompressionReport, path: str | Path) -> None:
    """Per-chunk compression ratios with the corpus-level ratio overlaid."""
    idx = np.array([c.index for c in report.chunks])
    ratios = np.array([c.original_bits / c.compressed_bits for c in report.chunks])
    fig, ax = plt.subplots(figsize=(8, 4.5))
    ax.plot(idx, ratios, lw=0.8, color="tab:blue", alpha=0.8, label="per-chunk ratio")
    ax.axhline(report.ratio, color="tab:red", lw=1.2, label=f"overall {report.ratio:.3f}")
    ax.set_xlabel("chunk index")
    ax.set_ylabel("compression ratio")
    ax.set_title(f"{report.model_id} ({report.mode}), {len(report.chunks)} chunks")
    ax.grid(alpha=0.3)
    ax.legend(loc="best", fontsize=8)
    _save(fig, Path(path))


def ranking_figure(
    report: RankingReport, table: AccuracyTable | None, path: str | Path
) -> None:
    """Ranked ratio bars; when accuracies are given, one scatter per task."""
    tasks = table.task_ids() if table is not None else []
    ncols = 1 + len(tasks)
    fig, axes = plt.subplots(1, ncols, figsize=(4.2 * ncols, 4.2))
    axes = np.atleast_1d(axes)

    ax = axes[0]
    names = [m.model_id for m in report.models][::-1]
    ratios = [m.ratio for m in report.models][::-1]
    ax.barh(names, ratios, color="tab:blue", alpha=0.8)
    ax.set_xlabel("compression ratio")
    ax.set_title("models by ratio")
    ax.tick_params(axis="y", labelsize=8)

    lookup = {m.model_id: m.ratio for m in report.models}
    for ax, task_id in zip(axes[1:], tasks):
        rows = table.rows_for(task_id)
        xs = [lookup.get(r.model_id) for r in rows]
        ys = [r.accuracy for r in rows]
        ax.scatter(xs, ys, color="tab:red")
        for r, x, y in zip(rows, xs, ys):
            ax.annotate(r.model_id, (x, y), fontsize=7, xytext=(3, 3),
                        textcoords="offset points")
        ax.set_xlabel("compression ratio")
        ax.set_ylabel("accuracy (%)")
        ax.set_title(task_id)
        ax.grid(alpha=0.3)
    fig.tight_layout()
    _save(fig, Path(path))


def nll_figure(report: NllReport, path: str | Path) -> None:
    """Per-token code lengths and their running mean."""
    bits = np.asarray(report.per_token_bits)
    fig, ax = plt.subplots(figsize=(8, 4.5))
    ax.plot(bits, lw=0.5, color="tab:blue", alpha=0.5, label="bits per token")
    running = np.cumsum(bits) / np.arange(1, bits.size + 1)
    ax.plot(running, lw=1.2, color="tab:red", label="running mean")
    ax.set_xlabel("token index")
    ax.set_ylabel("bits")
    ax.set_title(f"{report.token_count} tokens, {report.total_bits:.1f} bits total")
    ax.grid(alpha=0.3)
    ax.legend(loc="best", fontsize=8)
    _save(fig, Path(path))

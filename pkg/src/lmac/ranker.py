"""Model ranking by compression ratio, and ratio-vs-accuracy correlation.

Accuracy numbers are ingested as data with provenance strings, never
recomputed. Sample sizes here are tiny (two or three models per task),
so the report carries Spearman's rho, Pearson's r, and a plain
order-agreement flag side by side; correlations that do not exist at
these sizes are reported as undefined, never silently as zero.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import InputError


@dataclass(frozen=True)
class RatioRecord:
    """A (model, compression ratio) pair usable anywhere a report is."""

    model_id: str
    ratio: float
    source: str = ""


@dataclass(frozen=True)
class AccuracyRow:
    model_id: str
    task_id: str
    accuracy: float
    source: str


class AccuracyTable:
    """Rows of (model, task, accuracy percent, provenance)."""

    def __init__(self, rows: Iterable[AccuracyRow]):
        rows = tuple(rows)
        seen = set()
        for row in rows:
            if not 0.0 <= row.accuracy <= 100.0:
                raise InputError(
                    f"accuracy {row.accuracy} for ({row.model_id}, {row.task_id}) "
                    "outside 0..100"
                )
            key = (row.model_id, row.task_id)
            if key in seen:
                raise InputError(f"duplicate (model, task) pair {key}")
            seen.add(key)
        self.rows = rows

    @classmethod
    def from_csv(cls, source: str | Path) -> "AccuracyTable":
        return cls(_accuracy_rows_from_text(Path(source).read_text(encoding="utf-8")))

    def task_ids(self) -> list[str]:
        return sorted({r.task_id for r in self.rows})

    def rows_for(self, task_id: str) -> list[AccuracyRow]:
        return [r for r in self.rows if r.task_id == task_id]

    def __len__(self) -> int:
        return len(self.rows)


def _accuracy_rows_from_text(text: str) -> list[AccuracyRow]:
    reader = csv.reader(text.splitlines())
    try:
        header = next(reader)
    except StopIteration:
        raise InputError("accuracy table is empty") from None
    if [h.strip() for h in header] != ["model", "task", "accuracy", "source"]:
        raise InputError(
            f"accuracy table header must be model,task,accuracy,source, got {header}"
        )
    rows = []
    for lineno, rec in enumerate(reader, start=2):
        if not rec:
            continue
        if len(rec) != 4:
            raise InputError(f"accuracy table line {lineno}: expected 4 fields, got {len(rec)}")
        try:
            acc = float(rec[2])
        except ValueError:
            raise InputError(f"accuracy table line {lineno}: bad accuracy {rec[2]!r}") from None
        rows.append(AccuracyRow(rec[0], rec[1], acc, rec[3]))
    return rows


def ratios_from_csv(source: str | Path) -> list[RatioRecord]:
    """Load model,ratio,source records (a pre-computed ratio fixture)."""
    reader = csv.reader(Path(source).read_text(encoding="utf-8").splitlines())
    try:
        header = next(reader)
    except StopIteration:
        raise InputError("ratio table is empty") from None
    if [h.strip() for h in header] != ["model", "ratio", "source"]:
        raise InputError(f"ratio table header must be model,ratio,source, got {header}")
    records = []
    for lineno, rec in enumerate(reader, start=2):
        if not rec:
            continue
        if len(rec) != 3:
            raise InputError(f"ratio table line {lineno}: expected 3 fields, got {len(rec)}")
        try:
            records.append(RatioRecord(rec[0], float(rec[1]), rec[2]))
        except ValueError:
            raise InputError(f"ratio table line {lineno}: bad ratio {rec[1]!r}") from None
    return records


def _fixture_path(name: str):
    return resources.files("lmac").joinpath("fixtures", name)


def load_reference_ratios() -> list[RatioRecord]:
    """Published text8 ratios for the five reference compressors."""
    with resources.as_file(_fixture_path("reference_ratios.csv")) as p:
        return ratios_from_csv(p)


def load_reference_accuracies() -> AccuracyTable:
    """Published task accuracies for the reference models, with citations."""
    with resources.as_file(_fixture_path("reference_accuracies.csv")) as p:
        return AccuracyTable.from_csv(p)


def rank_models(reports: Sequence) -> list[RatioRecord]:
    """Order anything with .model_id and .ratio by ratio descending,
    breaking ties by lexicographic model id."""
    seen = set()
    for r in reports:
        if r.model_id in seen:
            raise InputError(f"duplicate model id {r.model_id!r} in reports")
        seen.add(r.model_id)
    ordered = sorted(reports, key=lambda r: (-r.ratio, r.model_id))
    return [RatioRecord(r.model_id, r.ratio) for r in ordered]


def _as_vector(values: Sequence[float], name: str) -> np.ndarray:
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1:
        raise InputError(f"{name} must be 1-d")
    return v


def pearson(x: Sequence[float], y: Sequence[float]) -> Optional[float]:
    """Product-moment correlation; None when undefined (n < 2 or a zero
    variance)."""
    xv = _as_vector(x, "x")
    yv = _as_vector(y, "y")
    if xv.size != yv.size:
        raise InputError("x and y must have the same length")
    if xv.size < 2:
        return None
    xc = xv - xv.mean()
    yc = yv - yv.mean()
    sx2 = float((xc * xc).sum())
    sy2 = float((yc * yc).sum())
    if sx2 == 0.0 or sy2 == 0.0:
        return None
    return float((xc * yc).sum() / np.sqrt(sx2 * sy2))


def _average_ranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.size, dtype=np.float64)
    sv = values[order]
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and sv[j + 1] == sv[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def spearman(x: Sequence[float], y: Sequence[float]) -> Optional[float]:
    """Rank correlation with average ranks for ties; None when undefined."""
    xv = _as_vector(x, "x")
    yv = _as_vector(y, "y")
    if xv.size != yv.size:
        raise InputError("x and y must have the same length")
    if xv.size < 2:
        return None
    return pearson(_average_ranks(xv), _average_ranks(yv))


@dataclass(frozen=True)
class TaskCorrelation:
    task_id: str
    n: int
    spearman: Optional[float]
    pearson: Optional[float]
    order_agreement: Optional[bool]


@dataclass
class RankingReport:
    """Models ordered by ratio, plus per-task correlation entries."""

    models: list[RatioRecord]
    tasks: list[TaskCorrelation]

    def to_json_dict(self) -> dict:
        return {
            "models": [{"model": m.model_id, "ratio": m.ratio} for m in self.models],
            "tasks": [
                {
                    "task": t.task_id,
                    "n": t.n,
                    "spearman": t.spearman,
                    "pearson": t.pearson,
                    "order_agreement": t.order_agreement,
                }
                for t in self.tasks
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=2)

    def summary_lines(self) -> list[str]:
        def show(v) -> str:
            return "undefined" if v is None else (f"{v:.6f}" if isinstance(v, float) else str(v))

        lines = ["rank\tmodel\tratio"]
        for i, m in enumerate(self.models, start=1):
            lines.append(f"{i}\t{m.model_id}\t{m.ratio:.6f}")
        lines.append("")
        lines.append("task\tn\tspearman\tpearson\torder_agreement")
        for t in self.tasks:
            lines.append(
                f"{t.task_id}\t{t.n}\t{show(t.spearman)}\t{show(t.pearson)}"
                f"\t{show(t.order_agreement)}"
            )
        return lines


def correlation_report(reports: Sequence, table: AccuracyTable) -> RankingReport:
    """Per-task correlation between compression ratio and task accuracy.

    Every (task, model) row needs a matching report; order agreement asks
    whether ranking by ratio equals ranking by accuracy (id tie-break on
    both sides), and is undefined for single-model tasks.
    """
    ranking = rank_models(reports)
    ratios = {m.model_id: m.ratio for m in ranking}
    tasks = []
    for task_id in table.task_ids():
        rows = table.rows_for(task_id)
        for row in rows:
            if row.model_id not in ratios:
                raise InputError(
                    f"no compression report for model {row.model_id!r} (task {task_id})"
                )
        x = [ratios[r.model_id] for r in rows]
        y = [r.accuracy for r in rows]
        if len(rows) >= 2:
            by_ratio = sorted(rows, key=lambda r: (-ratios[r.model_id], r.model_id))
            by_accuracy = sorted(rows, key=lambda r: (-r.accuracy, r.model_id))
            agreement = [r.model_id for r in by_ratio] == [r.model_id for r in by_accuracy]
        else:
            agreement = None
        tasks.append(
            TaskCorrelation(
                task_id=task_id,
                n=len(rows),
                spearman=spearman(x, y),
                pearson=pearson(x, y),
                order_agreement=agreement,
            )
        )
    return RankingReport(models=ranking, tasks=tasks)

"""Correlation and bias tables over a completed score table.

Both reports share one tabular container that renders machine-readably
(JSON payload) and as an aligned plain-text grid.  Undefined correlations
(constant series) are recorded per cell instead of failing the report.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..correlation import METHODS, correlate, system_means
from ..errors import EmptySummary, IncompleteGrid, UndefinedCorrelation
from ..textproc import SummaryText, summary_stats
from .batch import ScoreTable
from .dataset import EvalDataset

LEVELS = ("system", "summary")


@dataclass(frozen=True)
class ReportTable:
    title: str
    row_labels: tuple[str, ...]
    col_labels: tuple[str, ...]
    cells: dict[tuple[str, str], float] = field(hash=False)
    cell_errors: dict[tuple[str, str], str] = field(hash=False)
    meta: dict[str, object] = field(hash=False)

    def value(self, row: str, col: str) -> float | None:
        return self.cells.get((row, col))

    def to_payload(self) -> dict:
        body = {}
        for row in self.row_labels:
            body[row] = {}
            for col in self.col_labels:
                if (row, col) in self.cells:
                    body[row][col] = {"value": self.cells[(row, col)]}
                else:
                    body[row][col] = {"error": self.cell_errors[(row, col)]}
        return {
            "title": self.title,
            "meta": dict(self.meta),
            "rows": list(self.row_labels),
            "columns": list(self.col_labels),
            "cells": body,
        }

    def render_text(self) -> str:
        """Aligned plain-text grid; undefined cells show as n/a."""
        header = [""] + list(self.col_labels)
        rows = [header]
        for row in self.row_labels:
            line = [row]
            for col in self.col_labels:
                if (row, col) in self.cells:
                    line.append(f"{self.cells[(row, col)]:+.4f}")
                else:
                    line.append("n/a")
            rows.append(line)
        widths = [
            max(len(r[i]) for r in rows) for i in range(len(header))
        ]
        out = [self.title]
        for k, v in self.meta.items():
            out.append(f"# {k}: {v}")
        for i, line in enumerate(rows):
            out.append("  ".join(c.rjust(w) for c, w in zip(line, widths)))
            if i == 0:
                out.append("  ".join("-" * w for w in widths))
        undefined = [
            f"{row}/{col}: {self.cell_errors[(row, col)]}"
            for row in self.row_labels
            for col in self.col_labels
            if (row, col) in self.cell_errors
        ]
        if undefined:
            out.append("")
            out.append("undefined cells:")
            out.extend(f"  {u}" for u in undefined)
        return "\n".join(out) + "\n"


def _check_complete(
    dataset: EvalDataset, table: ScoreTable, metrics: tuple[str, ...]
) -> None:
    missing = []
    for doc_id, system_id in dataset.grid:
        have = table.values.get((doc_id, system_id), {})
        for metric in metrics:
            if metric not in have:
                missing.append((doc_id, system_id, metric))
    if missing:
        raise IncompleteGrid(
            f"score table is missing {len(missing)} cells on the dataset grid",
            missing=missing,
        )


def _check_annotations(dataset: EvalDataset, dimensions: tuple[str, ...]) -> None:
    missing = [
        (e.doc_id, e.system_id, f"rating:{dim}")
        for e in dataset.entries
        for dim in dimensions
        if dim not in e.annotations
    ]
    if missing:
        raise IncompleteGrid(
            f"{len(missing)} entries lack ratings for declared dimensions",
            missing=missing,
        )


def _cell(cells, errors, row, col, xs, ys, method) -> None:
    try:
        cells[(row, col)] = correlate(method, xs, ys)
    except (UndefinedCorrelation, ValueError) as exc:
        errors[(row, col)] = str(exc)


def correlation_table(
    dataset: EvalDataset,
    table: ScoreTable,
    level: str = "system",
    method: str = "kendall-tau-b",
    metrics: tuple[str, ...] | None = None,
) -> ReportTable:
    """Correlate metric values against human ratings per dimension.

    system level aggregates both sides to per-system means before
    correlating; summary level correlates across individual entries.  The
    score table must cover every (document, system) pair of the dataset
    for the requested metrics, else IncompleteGrid.
    """
    if level not in LEVELS:
        raise ValueError(f"unknown level {level!r}; choose from {LEVELS}")
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {METHODS}")
    metrics = tuple(metrics) if metrics is not None else table.metrics
    if not metrics:
        raise ValueError("score table carries no metric values")
    if not dataset.dimensions:
        raise ValueError("dataset declares no annotation dimensions")
    _check_complete(dataset, table, metrics)
    _check_annotations(dataset, dataset.dimensions)

    cells: dict[tuple[str, str], float] = {}
    errors: dict[tuple[str, str], str] = {}
    if level == "system":
        for metric in metrics:
            by_system = system_means(
                {
                    (system_id, doc_id): table.values[(doc_id, system_id)][metric]
                    for doc_id, system_id in dataset.grid
                }
            )
            for dim in dataset.dimensions:
                rating_by_system = system_means(
                    {
                        (e.system_id, e.doc_id): e.mean_rating(dim)
                        for e in dataset.entries
                    }
                )
                systems = sorted(by_system)
                xs = [by_system[s] for s in systems]
                ys = [rating_by_system[s] for s in systems]
                _cell(cells, errors, dim, metric, xs, ys, method)
    else:
        for metric in metrics:
            xs = [
                table.values[(e.doc_id, e.system_id)][metric]
                for e in dataset.entries
            ]
            for dim in dataset.dimensions:
                ys = [e.mean_rating(dim) for e in dataset.entries]
                _cell(cells, errors, dim, metric, xs, ys, method)

    return ReportTable(
        title=f"{level}-level correlation ({method})",
        row_labels=dataset.dimensions,
        col_labels=metrics,
        cells=cells,
        cell_errors=errors,
        meta={
            "level": level,
            "method": method,
            "n_systems": len(dataset.system_ids),
            "n_entries": len(dataset.entries),
            "config_hash": table.config_hash or "",
        },
    )


def bias_table(
    dataset: EvalDataset,
    table: ScoreTable,
    method: str = "kendall-tau-b",
    metrics: tuple[str, ...] | None = None,
) -> ReportTable:
    """Correlate metrics and human dimensions against summary statistics.

    Every row is a metric or an annotation dimension; every column is a
    summary statistic (length, compression, coverage, density, novel-n,
    repeat-n).  Entries whose summary has no words carry no statistics and
    are skipped (count reported in the metadata).
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {METHODS}")
    metrics = tuple(metrics) if metrics is not None else table.metrics
    if not metrics:
        raise ValueError("score table carries no metric values")
    _check_complete(dataset, table, metrics)
    _check_annotations(dataset, dataset.dimensions)

    stat_rows = []
    kept_entries = []
    skipped_empty = 0
    for entry in dataset.entries:
        doc = dataset.documents[entry.doc_id]
        summary = SummaryText(
            id=f"{entry.doc_id}/{entry.system_id}",
            system_id=entry.system_id,
            text=entry.summary_text,
        )
        try:
            stats = summary_stats(doc, summary)
        except EmptySummary:
            skipped_empty += 1
            continue
        stat_rows.append(stats.as_row())
        kept_entries.append(entry)
    if not stat_rows:
        raise ValueError("no entries with non-empty summaries")

    col_labels = tuple(stat_rows[0].keys())
    row_labels = metrics + dataset.dimensions
    cells: dict[tuple[str, str], float] = {}
    errors: dict[tuple[str, str], str] = {}
    for row in row_labels:
        if row in metrics:
            xs = [
                table.values[(e.doc_id, e.system_id)][row] for e in kept_entries
            ]
        else:
            xs = [e.mean_rating(row) for e in kept_entries]
        for col in col_labels:
            ys = [r[col] for r in stat_rows]
            _cell(cells, errors, row, col, xs, ys, method)

    return ReportTable(
        title=f"bias against summary statistics ({method})",
        row_labels=row_labels,
        col_labels=col_labels,
        cells=cells,
        cell_errors=errors,
        meta={
            "method": method,
            "n_entries": len(kept_entries),
            "skipped_empty_summaries": skipped_empty,
            "config_hash": table.config_hash or "",
        },
    )

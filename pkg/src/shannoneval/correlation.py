"""Rank and linear correlation with exact tie handling.

All three coefficients are assembled from exactly computed integer pair
counts (tau-b) or exact small-magnitude sums (Spearman/Pearson), finished
with one fixed floating-point expression.  That makes them reproducible and
lets tests compare them bit-for-bit against brute-force oracles.

An all-tied side raises UndefinedCorrelation instead of returning 0: a
silent zero would quietly distort benchmark tables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import IncompleteGrid, UndefinedCorrelation

METHODS = ("kendall-tau-b", "spearman", "pearson")


@dataclass(frozen=True)
class PairedSeries:
    xs: tuple[float, ...]
    ys: tuple[float, ...]

    def __post_init__(self):
        if len(self.xs) != len(self.ys):
            raise ValueError(f"length mismatch: {len(self.xs)} vs {len(self.ys)}")
        if len(self.xs) < 2:
            raise ValueError(f"need n >= 2, got {len(self.xs)}")
        for v in self.xs + self.ys:
            if math.isnan(v):
                raise ValueError("NaN entries are not allowed")


def _series(xs, ys=None) -> PairedSeries:
    if ys is None and isinstance(xs, PairedSeries):
        return xs
    return PairedSeries(tuple(float(v) for v in xs), tuple(float(v) for v in ys))


def kendall_tau_b(xs, ys=None) -> float:
    """Tau-b: (C - D) / sqrt((n0 - n1)(n0 - n2)) with tie corrections."""
    s = _series(xs, ys)
    x = np.asarray(s.xs)
    y = np.asarray(s.ys)
    n = len(x)
    dx = np.sign(x[:, None] - x[None, :])
    dy = np.sign(y[:, None] - y[None, :])
    prod = dx * dy
    concordant = int((prod > 0).sum()) // 2
    discordant = int((prod < 0).sum()) // 2
    n0 = n * (n - 1) // 2
    n1 = (int((dx == 0).sum()) - n) // 2
    n2 = (int((dy == 0).sum()) - n) // 2
    if n0 == n1 or n0 == n2:
        raise UndefinedCorrelation("one side of the series is entirely tied")
    return (concordant - discordant) / math.sqrt((n0 - n1) * (n0 - n2))


def _midranks(values: tuple[float, ...]) -> list[float]:
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        rank = (i + j + 2) / 2  # average of 1-based positions i+1..j+1
        for k in range(i, j + 1):
            ranks[order[k]] = rank
        i = j + 1
    return ranks


def _pearson_core(xs, ys) -> float:
    n = len(xs)
    mean_x = sum(xs) / n
    mean_y = sum(ys) / n
    sxy = sxx = syy = 0.0
    for a, b in zip(xs, ys):
        da = a - mean_x
        db = b - mean_y
        sxy += da * db
        sxx += da * da
        syy += db * db
    if sxx == 0.0 or syy == 0.0:
        raise UndefinedCorrelation("one side of the series has zero variance")
    return sxy / math.sqrt(sxx * syy)


def spearman_rho(xs, ys=None) -> float:
    """Pearson correlation of mid-ranks (average ranks for ties)."""
    s = _series(xs, ys)
    return _pearson_core(_midranks(s.xs), _midranks(s.ys))


def pearson_r(xs, ys=None) -> float:
    s = _series(xs, ys)
    return _pearson_core(list(s.xs), list(s.ys))


_FUNCS = {
    "kendall-tau-b": kendall_tau_b,
    "spearman": spearman_rho,
    "pearson": pearson_r,
}


def correlate(method: str, xs, ys=None) -> float:
    try:
        func = _FUNCS[method]
    except KeyError:
        raise ValueError(f"unknown method {method!r}; choose from {METHODS}")
    return func(xs, ys)


def system_means(cells: dict[tuple[str, str], float]) -> dict[str, float]:
    """Per-system means over a complete (system, document) grid.

    Every system must cover the same document set; holes raise
    IncompleteGrid listing the missing cells.
    """
    systems = sorted({sys_id for sys_id, _ in cells})
    docs = sorted({doc_id for _, doc_id in cells})
    missing = [
        (sys_id, doc_id)
        for sys_id in systems
        for doc_id in docs
        if (sys_id, doc_id) not in cells
    ]
    if missing:
        raise IncompleteGrid(
            f"{len(missing)} missing (system, document) cells", missing=missing
        )
    if not systems:
        raise IncompleteGrid("empty grid")
    out = {}
    for sys_id in systems:
        values = [cells[(sys_id, doc_id)] for doc_id in docs]
        out[sys_id] = sum(values) / len(values)
    return out

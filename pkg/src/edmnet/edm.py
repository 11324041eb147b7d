"""Tail cross-moment estimator of pairwise extremal dependence."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSeriesError, EdmnetError, InsufficientTailError, PreconditionError
from .ingest import ReturnPanel


@dataclass(frozen=True)
class TailPolicy:
    quantile: float = 0.10
    min_tail: int = 20

    def __post_init__(self):
        if not 0 < self.quantile < 1:
            raise PreconditionError(f"tail quantile must lie in (0, 1), got {self.quantile}")
        if self.min_tail < 2:
            raise PreconditionError("min_tail must be at least 2")

    @property
    def min_length(self) -> int:
        return math.ceil(self.min_tail / self.quantile - 1e-9)


@dataclass(frozen=True)
class EdmMatrix:
    tickers: tuple
    values: np.ndarray
    tail_counts: np.ndarray

    def value(self, a: str, b: str) -> float:
        return float(self.values[self.tickers.index(a), self.tickers.index(b)])


def radius_threshold(r2: np.ndarray, quantile: float) -> float:
    """Type-1 empirical (1 - quantile)-quantile, on squared radii."""
    k = math.ceil((1.0 - quantile) * len(r2) - 1e-9)
    k = min(max(k, 1), len(r2))
    return float(np.partition(r2, k - 1)[k - 1])


def edm_pair(x, y, policy: TailPolicy = TailPolicy()) -> tuple[float, int]:
    """Estimate the extremal dependence of two equally long return series.

    Keeps the observations whose Euclidean radius reaches the empirical
    ``1 - policy.quantile`` radius quantile (ties included) and averages
    ``x*y / (x**2 + y**2)`` over them. Zero-radius observations never count.

    Returns ``(edm, tail_count)``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise PreconditionError("series must be 1-d and of equal length")
    if len(x) < policy.min_length:
        raise PreconditionError(
            f"series length {len(x)} below min_tail/quantile = {policy.min_length}"
        )
    # Working with squared radii avoids a sqrt and keeps identical pairs at exactly 1/2.
    r2 = x * x + y * y
    if not np.any(r2 > 0):
        raise DegenerateSeriesError("all pairwise radii are zero")
    threshold = radius_threshold(r2, policy.quantile)
    mask = (r2 >= threshold) & (r2 > 0)
    count = int(mask.sum())
    if count < policy.min_tail:
        raise InsufficientTailError(f"only {count} tail observations, need {policy.min_tail}")
    terms = x[mask] * y[mask] / r2[mask]
    # Symmetric summation order so that edm_pair(x, y) == edm_pair(y, x) bit for bit.
    return float(np.sum(terms) / count), count


def edm_matrix(panel: ReturnPanel, policy: TailPolicy = TailPolicy()) -> EdmMatrix:
    n = len(panel.tickers)
    if n < 2:
        raise PreconditionError("need at least 2 assets")
    values = np.full((n, n), 0.5)
    counts = np.zeros((n, n), dtype=int)
    cols = panel.returns
    for i in range(n):
        for j in range(i + 1, n):
            try:
                v, c = edm_pair(cols[:, i], cols[:, j], policy)
            except EdmnetError as exc:
                raise type(exc)(f"pair ({panel.tickers[i]}, {panel.tickers[j]}): {exc}") from exc
            values[i, j] = values[j, i] = v
            counts[i, j] = counts[j, i] = c
    for i in range(n):
        counts[i, i] = int(_self_tail_count(cols[:, i], policy))
    return EdmMatrix(panel.tickers, values, counts)


def _self_tail_count(x: np.ndarray, policy: TailPolicy) -> int:
    r2 = 2 * x * x
    if not np.any(r2 > 0):
        return 0
    t = radius_threshold(r2, policy.quantile)
    return int(((r2 >= t) & (r2 > 0)).sum())


def write_edm_csv(m: EdmMatrix, fh) -> None:
    fh.write("," + ",".join(m.tickers) + "\n")
    for t, row in zip(m.tickers, m.values):
        fh.write(t + "," + ",".join(repr(float(v)) for v in row) + "\n")


def read_edm_csv(fh) -> EdmMatrix:
    lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    tickers = tuple(lines[0].split(",")[1:])
    rows = []
    for ln, t in zip(lines[1:], tickers):
        parts = ln.split(",")
        if parts[0] != t:
            raise PreconditionError("EDM CSV row labels must match the header order")
        rows.append([float(v) for v in parts[1:]])
    values = np.array(rows, dtype=float)
    return EdmMatrix(tickers, values, np.zeros(values.shape, dtype=int))


def edm_to_json(m: EdmMatrix) -> str:
    doc = {
        "tickers": list(m.tickers),
        "values": [[float(v) for v in row] for row in m.values],
        "tail_counts": [[int(c) for c in row] for row in m.tail_counts],
    }
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"

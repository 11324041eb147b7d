"""Price ingestion: long-format CSV parsing, calendar alignment, log-returns."""

from __future__ import annotations

import csv
import datetime as dt
import io
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import BinaryIO, Iterable, Sequence

import numpy as np

from .errors import AlignmentError, ParseError

HEADER = ("date", "ticker", "adj_close")


@dataclass(frozen=True)
class PriceRecord:
    date: dt.date
    ticker: str
    adj_close: float


@dataclass(frozen=True)
class PricePanel:
    dates: tuple
    tickers: tuple
    prices: np.ndarray  # shape (T, n)

    def __post_init__(self):
        if self.prices.shape != (len(self.dates), len(self.tickers)):
            raise AlignmentError("price matrix shape does not match dates x tickers")
        if len(self.dates) < 2:
            raise AlignmentError("a price panel needs at least 2 dates")

    def column(self, ticker: str) -> np.ndarray:
        return self.prices[:, self.tickers.index(ticker)]


@dataclass(frozen=True)
class ReturnPanel:
    dates: tuple
    tickers: tuple
    returns: np.ndarray  # shape (T-1, n)

    def column(self, ticker: str) -> np.ndarray:
        return self.returns[:, self.tickers.index(ticker)]

    def subset(self, tickers: Iterable[str]) -> "ReturnPanel":
        tickers = tuple(tickers)
        idx = [self.tickers.index(t) for t in tickers]
        return ReturnPanel(self.dates, tickers, self.returns[:, idx])


def parse_prices(source: BinaryIO | bytes | str) -> list[PriceRecord]:
    """Parse a ``date,ticker,adj_close`` CSV into records, in file order.

    Accepts a binary stream, raw bytes, or already-decoded text.
    """
    if hasattr(source, "read"):
        source = source.read()
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    reader = csv.reader(io.StringIO(source))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty input: missing header", line=1) from None
    if tuple(h.strip() for h in header) != HEADER:
        raise ParseError(f"bad header at line 1: expected {','.join(HEADER)}", line=1)

    records = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 3:
            raise ParseError(f"wrong number of fields at line {lineno}", line=lineno)
        raw_date, ticker, raw_price = (field.strip() for field in row)
        try:
            date = dt.date.fromisoformat(raw_date)
        except ValueError:
            raise ParseError(f"unparseable date at line {lineno}", line=lineno) from None
        if not ticker:
            raise ParseError(f"empty ticker at line {lineno}", line=lineno)
        try:
            price = float(raw_price)
        except ValueError:
            raise ParseError(f"unparseable price at line {lineno}", line=lineno) from None
        if not math.isfinite(price):
            raise ParseError(f"non-finite price at line {lineno}", line=lineno)
        if price <= 0:
            raise ParseError(f"non-positive price at line {lineno}", line=lineno)
        records.append(PriceRecord(date, ticker, price))
    return records


def read_prices(path) -> list[PriceRecord]:
    with open(path, "rb") as fh:
        return parse_prices(fh)


def align_panel(records: Sequence[PriceRecord], policy: str = "intersect") -> PricePanel:
    """Align ragged per-ticker series onto a common trading calendar.

    ``policy`` is ``"intersect"`` or ``"drop-sparse(f)"`` with ``f`` in (0, 1];
    the latter first removes tickers observed on fewer than a fraction ``f``
    of all dates seen in the input.
    """
    min_coverage = _parse_policy(policy)
    series: dict[str, dict[dt.date, float]] = defaultdict(dict)
    for rec in records:
        by_date = series[rec.ticker]
        if rec.date in by_date:
            raise AlignmentError(f"duplicate observation for ({rec.date.isoformat()}, {rec.ticker})")
        by_date[rec.date] = rec.adj_close
    if not series:
        raise AlignmentError("no price records")

    if min_coverage is not None:
        all_dates = set().union(*(s.keys() for s in series.values()))
        series = {t: s for t, s in series.items() if len(s) >= min_coverage * len(all_dates)}
        if not series:
            raise AlignmentError("every ticker dropped by the sparsity filter")

    tickers = tuple(sorted(series))
    common = set.intersection(*(set(series[t]) for t in tickers))
    if not common:
        raise AlignmentError("empty date intersection")
    dates = tuple(sorted(common))
    if len(dates) < 2:
        raise AlignmentError("aligned panel has fewer than 2 dates")
    prices = np.array([[series[t][d] for t in tickers] for d in dates], dtype=float)
    return PricePanel(dates, tickers, prices)


def _parse_policy(policy: str) -> float | None:
    policy = policy.strip()
    if policy == "intersect":
        return None
    if policy.startswith("drop-sparse(") and policy.endswith(")"):
        frac = float(policy[len("drop-sparse("):-1])
        if not 0 < frac <= 1:
            raise AlignmentError(f"drop-sparse fraction must lie in (0, 1], got {frac}")
        return frac
    raise AlignmentError(f"unknown alignment policy {policy!r}")


def log_returns(panel: PricePanel) -> ReturnPanel:
    logp = np.log(panel.prices)
    returns = logp[1:] - logp[:-1]
    return ReturnPanel(panel.dates[1:], panel.tickers, returns)


def load_panel(path, policy: str = "intersect") -> PricePanel:
    return align_panel(read_prices(path), policy)


def write_prices(records: Iterable[PriceRecord], fh) -> None:
    """Write records back out in the canonical long format (text stream)."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(HEADER)
    for rec in records:
        writer.writerow([rec.date.isoformat(), rec.ticker, repr(float(rec.adj_close))])


def panel_records(panel: PricePanel) -> list[PriceRecord]:
    return [
        PriceRecord(d, t, float(panel.prices[i, j]))
        for i, d in enumerate(panel.dates)
        for j, t in enumerate(panel.tickers)
    ]


def write_returns(panel: ReturnPanel, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["date", *panel.tickers])
    for d, row in zip(panel.dates, panel.returns):
        writer.writerow([d.isoformat(), *(repr(float(v)) for v in row)])


def read_returns(fh) -> ReturnPanel:
    reader = csv.reader(fh)
    header = next(reader)
    if not header or header[0] != "date":
        raise ParseError("returns file must start with a 'date' column", line=1)
    dates, rows = [], []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise ParseError(f"wrong number of fields at line {lineno}", line=lineno)
        dates.append(dt.date.fromisoformat(row[0]))
        rows.append([float(v) for v in row[1:]])
    return ReturnPanel(tuple(dates), tuple(header[1:]), np.array(rows, dtype=float).reshape(len(dates), len(header) - 1))

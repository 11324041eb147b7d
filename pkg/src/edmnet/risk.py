"""Empirical VaR / ES and quantile-regression CoVaR on loss series.

Losses are negated log-returns, so adverse moves are positive numbers.
Quantiles are type-1 order statistics (no interpolation).
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import EdmnetError, EdmnetWarning, PreconditionError, ShortSeriesError
from .ingest import ReturnPanel
from .simplex import solve_lp

MIN_LENGTH = 20


def _check(losses, level: float, name: str = "alpha") -> np.ndarray:
    losses = np.asarray(losses, dtype=float)
    if not 0 < level < 1:
        raise PreconditionError(f"{name} must lie in (0, 1), got {level}")
    if losses.ndim != 1 or len(losses) < MIN_LENGTH:
        raise ShortSeriesError(f"need at least {MIN_LENGTH} observations, got {losses.size}")
    if not np.all(np.isfinite(losses)):
        raise PreconditionError("losses must be finite")
    return losses


def order_statistic_index(level: float, n: int) -> int:
    """Zero-based index of the ceil(level * n)-th smallest observation."""
    # The slack keeps e.g. 0.95 * 100 from rounding up to 96.
    return min(max(math.ceil(level * n - 1e-9), 1), n) - 1


def var(losses, alpha: float = 0.95) -> float:
    losses = _check(losses, alpha)
    k = order_statistic_index(alpha, len(losses))
    return float(np.partition(losses, k)[k])


def es(losses, alpha: float = 0.95) -> float:
    """Mean loss strictly beyond VaR; VaR itself if nothing lies beyond."""
    losses = _check(losses, alpha)
    v = var(losses, alpha)
    tail = losses[losses > v]
    return float(tail.mean()) if tail.size else v


@dataclass(frozen=True)
class QuantileFit:
    intercept: float
    slope: float
    degenerate: bool = False
    iterations: int = 0


def quantile_regression(y, x, q: float) -> QuantileFit:
    """Linear q-quantile regression of ``y`` on ``x`` by linear programming.

    The check-loss problem is solved through its bounded dual
    ``max y@d  s.t.  sum(d) = (1-q) T,  x@d = (1-q) sum(x),  0 <= d <= 1``,
    whose simplex multipliers are the fitted (intercept, slope). When several
    lines attain the minimum, the lexicographically smallest one is returned.
    """
    y = _check(y, q, "q")
    x = _check(x, q, "q")
    if len(x) != len(y):
        raise PreconditionError("series must have equal length")
    if np.ptp(x) == 0:
        warnings.warn("degenerate regressor (zero variance): slope set to 0", EdmnetWarning, stacklevel=2)
        return QuantileFit(var(y, q), 0.0, True)

    n = len(y)
    A = np.vstack([np.ones(n), x])
    b = (1.0 - q) * np.array([n, x.sum()])
    # Warm start: mass on the largest responses, as the unconditional quantile would.
    start = np.zeros(n, dtype=bool)
    start[np.argsort(-y, kind="stable")[: int(math.floor((1.0 - q) * n))]] = True
    res = solve_lp(-y, A, b, np.zeros(n), np.ones(n), start_at_upper=start)
    if res.status != "optimal":
        raise EdmnetError(f"quantile regression LP ended with status {res.status}")
    beta = -res.duals
    beta = _lexicographic_min(y, x, res.x, beta)
    return QuantileFit(float(beta[0]) + 0.0, float(beta[1]) + 0.0, False, res.iterations)


def _lexicographic_min(y, x, d, beta):
    """Smallest (intercept, slope) among all check-loss minimizers.

    For the optimal dual ``d``, a line is optimal iff it is complementary to
    ``d``: residuals >= 0 where d = 1, <= 0 where d = 0, = 0 where 0 < d < 1.
    Two fractional entries pin the line; otherwise the optimal set is a
    polygon, minimized over first in the intercept (a small LP) and then in
    the slope (a 1-d bound).
    """
    eps = 1e-9
    frac = (d > eps) & (d < 1 - eps)
    if frac.sum() >= 2:
        return beta
    upper = d >= 1 - eps  # residual >= 0:  -a - b x >= -y
    lower = d <= eps      # residual <= 0:   a + b x >=  y
    upper |= frac
    lower |= frac
    G = np.vstack([
        np.column_stack([-np.ones(upper.sum()), -x[upper]]),
        np.column_stack([np.ones(lower.sum()), x[lower]]),
    ])
    h = np.concatenate([-y[upper], y[lower]])
    slack = 1e-12 * max(1.0, float(np.abs(y).max()))
    # min a  s.t.  G beta >= h, as the dual:  max h@w  s.t.  G.T w = e1, w >= 0.
    res = solve_lp(-h, G.T, np.array([1.0, 0.0]), np.zeros(len(h)), np.full(len(h), np.inf))
    if res.status != "optimal":
        return beta
    a_min = float(-res.duals[0])
    if a_min > beta[0]:
        a_min = float(beta[0])
    # With the intercept fixed, each constraint bounds the slope from one side.
    gb = G[:, 1]
    rhs = h - G[:, 0] * a_min - slack
    lo = rhs[gb > 0] / gb[gb > 0]
    b_min = float(lo.max()) if lo.size else float(beta[1])
    hi = rhs[gb < 0] / gb[gb < 0]
    if hi.size and b_min > hi.min() + 1e-9 * max(1.0, abs(b_min)):
        return beta
    return np.array([a_min, b_min])


def delta_covar(i_losses, j_losses, q: float = 0.99, fit: QuantileFit | None = None) -> float:
    """Systemic contribution of j to i: slope * (VaR_q(j) - VaR_0.5(j))."""
    if fit is None:
        fit = quantile_regression(i_losses, j_losses, q)
    return fit.slope * (var(j_losses, q) - var(j_losses, 0.5))


@dataclass
class RiskReport:
    tickers: tuple
    alpha: float
    q: float
    var: np.ndarray
    es: np.ndarray
    delta_covar: np.ndarray  # cell (i, j): contribution of j to i
    slopes: np.ndarray
    heat: np.ndarray
    degenerate_pairs: list = field(default_factory=list)


def risk_report(panel: ReturnPanel, alpha: float = 0.95, q: float = 0.99) -> RiskReport:
    losses = -panel.returns
    n = len(panel.tickers)
    names = panel.tickers
    try:
        v = np.array([var(losses[:, k], alpha) for k in range(n)])
        e = np.array([es(losses[:, k], alpha) for k in range(n)])
    except EdmnetError as exc:
        raise type(exc)(f"risk: {exc}") from exc
    spread = np.array([var(losses[:, k], q) - var(losses[:, k], 0.5) for k in range(n)])
    dc = np.zeros((n, n))
    slopes = np.zeros((n, n))
    degenerate = []
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            try:
                with warnings.catch_warnings():
                    # re-issued below with the pair named
                    warnings.simplefilter("ignore", EdmnetWarning)
                    fit = quantile_regression(losses[:, i], losses[:, j], q)
            except EdmnetError as exc:
                raise type(exc)(f"pair ({names[i]} | {names[j]}): {exc}") from exc
            if fit.degenerate:
                degenerate.append((names[i], names[j]))
                warnings.warn(
                    f"pair ({names[i]} | {names[j]}): degenerate regressor, slope set to 0", EdmnetWarning, stacklevel=2
                )
            slopes[i, j] = fit.slope
            dc[i, j] = fit.slope * spread[j]
    heat = (dc + dc.T) / 2.0
    return RiskReport(names, alpha, q, v, e, dc, slopes, heat, degenerate)


def ordered_tickers(tickers, members=()) -> list:
    """MIS members first (sorted), then everyone else (sorted)."""
    members = set(members)
    return sorted(t for t in tickers if t in members) + sorted(t for t in tickers if t not in members)


def risk_to_csv(r: RiskReport) -> str:
    rows = ["ticker,var,es"] + [f"{t},{float(v)!r},{float(e)!r}" for t, v, e in zip(r.tickers, r.var, r.es)]
    return "\n".join(rows) + "\n"


def heat_to_csv(r: RiskReport, members=()) -> str:
    order = ordered_tickers(r.tickers, members)
    idx = [r.tickers.index(t) for t in order]
    lines = ["," + ",".join(order)]
    for i in idx:
        lines.append(r.tickers[i] + "," + ",".join(repr(float(r.heat[i, j])) for j in idx))
    return "\n".join(lines) + "\n"


def risk_to_json(r: RiskReport, members=()) -> str:
    doc = {
        "alpha": r.alpha,
        "q": r.q,
        "order": ordered_tickers(r.tickers, members),
        "assets": {t: {"var": float(v), "es": float(e)} for t, v, e in zip(r.tickers, r.var, r.es)},
        "slopes": {
            f"{r.tickers[i]}|{r.tickers[j]}": float(r.slopes[i, j])
            for i in range(len(r.tickers)) for j in range(len(r.tickers)) if i != j
        },
        "delta_covar": [[float(v) for v in row] for row in r.delta_covar],
        "degenerate_pairs": [list(p) for p in r.degenerate_pairs],
    }
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


def read_risk_csv(text: str) -> dict:
    out = {}
    for ln in text.splitlines()[1:]:
        if ln.strip():
            t, v, e = ln.split(",")
            out[t] = (float(v), float(e))
    return out

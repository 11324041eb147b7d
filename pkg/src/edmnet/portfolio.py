"""ES-minimizing allocation over an independent set, and interval backtests."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import PreconditionError
from .ingest import PricePanel, ReturnPanel
from .mis import IndependentSet
from .risk import es as expected_shortfall
from .simplex import solve_lp

FEAS_TOL = 1e-9


@dataclass(frozen=True)
class LpProblem:
    cost: np.ndarray
    returns: np.ndarray
    cap: float = 0.1
    floor: float = 0.0
    budget: float = 1.0
    min_return: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "cost", np.asarray(self.cost, dtype=float))
        object.__setattr__(self, "returns", np.asarray(self.returns, dtype=float))
        if self.cost.shape != self.returns.shape or self.cost.ndim != 1:
            raise PreconditionError("cost and returns must be vectors of equal length")
        if not 0 <= self.floor < self.cap <= 1:
            raise PreconditionError("need 0 <= floor < cap <= 1")


@dataclass
class PortfolioSolution:
    weights: np.ndarray
    objective: float
    achieved_return: float
    status: str  # "optimal" | "infeasible"
    iterations: int
    tickers: tuple = ()
    es: np.ndarray | None = None
    returns: np.ndarray | None = None
    message: str = ""
    window: tuple = ()
    extras: dict = field(default_factory=dict)


def simplex_solve(p: LpProblem) -> PortfolioSolution:
    """min cost@w  s.t.  sum(w) = budget, returns@w >= min_return, floor <= w <= cap."""
    n = len(p.cost)
    # A surplus column turns the return floor into an equality row.
    c = np.concatenate([p.cost, [0.0]])
    A = np.vstack([
        np.concatenate([np.ones(n), [0.0]]),
        np.concatenate([p.returns, [-1.0]]),
    ])
    b = np.array([p.budget, p.min_return])
    lower = np.concatenate([np.full(n, p.floor), [0.0]])
    upper = np.concatenate([np.full(n, p.cap), [np.inf]])
    res = solve_lp(c, A, b, lower, upper)
    if res.status != "optimal":
        why = "budget unreachable under the weight cap" if n * p.cap < p.budget - FEAS_TOL else "return floor unattainable"
        return PortfolioSolution(np.full(n, np.nan), math.nan, math.nan, "infeasible", res.iterations, message=why)
    w = res.x[:n]
    return PortfolioSolution(w, float(p.cost @ w), float(p.returns @ w), "optimal", res.iterations)


def check_feasible(p: LpProblem, w: np.ndarray, tol: float = FEAS_TOL) -> bool:
    return bool(
        abs(w.sum() - p.budget) <= tol
        and np.all(w >= p.floor - tol)
        and np.all(w <= p.cap + tol)
        and p.returns @ w >= p.min_return - tol
    )


def optimize_portfolio(
    panel: ReturnPanel,
    members: IndependentSet,
    alpha: float = 0.95,
    cap: float = 0.1,
    min_return: float = 0.0,
) -> PortfolioSolution:
    """Size the independent-set members by minimizing weighted ES.

    ES is per-asset at level ``alpha`` on daily losses; expected returns are
    mean daily log-returns over the panel window.
    """
    tickers = tuple(members.members)
    missing = [t for t in tickers if t not in panel.tickers]
    if missing:
        raise PreconditionError(f"members not in the return panel: {', '.join(missing)}")
    window = (panel.dates[0].isoformat(), panel.dates[-1].isoformat()) if panel.dates else ()
    sub = panel.subset(tickers)
    es_vals = np.array([expected_shortfall(-sub.returns[:, k], alpha) for k in range(len(tickers))])
    mean_ret = sub.returns.mean(axis=0) if len(tickers) else np.zeros(0)
    need = math.ceil(1.0 / cap - 1e-9)
    if len(tickers) < need:
        sol = PortfolioSolution(
            np.full(len(tickers), np.nan), math.nan, math.nan, "infeasible", 0,
            message=f"{len(tickers)} members cannot reach a full budget with cap {cap}: need at least {need}",
        )
    else:
        sol = simplex_solve(LpProblem(es_vals, mean_ret, cap=cap, min_return=min_return))
    sol.tickers, sol.es, sol.returns, sol.window = tickers, es_vals, mean_ret, window
    sol.extras = {"alpha": alpha, "cap": cap, "min_return": min_return, "return_horizon": "mean daily log-return"}
    return sol


def portfolio_to_csv(sol: PortfolioSolution) -> str:
    rows = ["ticker,es,weight"]
    for t, e, w in zip(sol.tickers, sol.es, sol.weights):
        rows.append(f"{t},{float(e)!r},{float(w)!r}")
    return "\n".join(rows) + "\n"


def portfolio_from_csv(text: str) -> dict:
    out = {}
    for ln in text.splitlines()[1:]:
        if ln.strip():
            t, _, w = ln.split(",")
            out[t] = float(w)
    return out


def _num(v):
    return None if v is None or (isinstance(v, float) and math.isnan(v)) else float(v)


def portfolio_to_json(sol: PortfolioSolution) -> str:
    doc = {
        "status": sol.status,
        "objective": _num(sol.objective),
        "achieved_return": _num(sol.achieved_return),
        "iterations": sol.iterations,
        "message": sol.message,
        "window": list(sol.window),
        "tickers": list(sol.tickers),
        **sol.extras,
    }
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


# -- backtest --------------------------------------------------------------


@dataclass
class BacktestReport:
    interval_length: int
    intervals: list  # (start date, end date) anchor prices of each block
    strategy_returns: dict  # book -> list of interval simple returns
    strategy_risk: dict  # book -> list of within-interval daily log-return std


def backtest(prices: PricePanel, books: dict, interval_length: int = 10) -> BacktestReport:
    """Fixed-weight baskets rebalanced at the start of each block.

    Block ``k`` covers the ``interval_length`` daily returns between price
    rows ``k*L`` and ``(k+1)*L``; a trailing partial block is dropped.
    """
    if interval_length < 1:
        raise PreconditionError("interval_length must be positive")
    n_days = len(prices.dates)
    if n_days < interval_length + 1:
        raise PreconditionError(
            f"price panel spans {n_days} days, need at least {interval_length + 1} for one interval"
        )
    n_int = (n_days - 1) // interval_length
    resolved = {}
    for name, weights in books.items():
        missing = [t for t in weights if t not in prices.tickers]
        if missing:
            raise KeyError(f"book {name!r}: tickers not in price panel: {', '.join(missing)}")
        idx = [prices.tickers.index(t) for t in weights]
        resolved[name] = (np.array(idx, dtype=int), np.array(list(weights.values()), dtype=float))

    intervals = []
    rets = {name: [] for name in books}
    risks = {name: [] for name in books}
    for k in range(n_int):
        s, e = k * interval_length, (k + 1) * interval_length
        intervals.append((prices.dates[s], prices.dates[e]))
        block = prices.prices[s:e + 1]
        for name, (idx, w) in resolved.items():
            rel = block[:, idx] / block[0, idx]
            value = rel @ w
            rets[name].append(float(value[-1] - w.sum()))
            daily = np.diff(np.log(value)) if w.sum() > 0 else np.zeros(interval_length)
            risks[name].append(float(daily.std()))
    return BacktestReport(interval_length, intervals, rets, risks)


def benchmark_books(prices: PricePanel, portfolio: dict, universe=None, index_tickers=()) -> dict:
    """The MIS book plus equal-weight universe and one book per index series."""
    if universe is None:
        universe = [t for t in prices.tickers if t not in set(index_tickers)]
    books = {"mis": {t: w for t, w in portfolio.items() if w != 0.0}}
    if universe:
        books["equal_weight"] = {t: 1.0 / len(universe) for t in universe}
    for t in index_tickers:
        books[f"index:{t}"] = {t: 1.0}
    return books


def backtest_to_csv(rep: BacktestReport) -> str:
    rows = ["interval_start,interval_end,book,return,risk"]
    for k, (s, e) in enumerate(rep.intervals):
        for name in rep.strategy_returns:
            rows.append(
                f"{s.isoformat()},{e.isoformat()},{name},"
                f"{rep.strategy_returns[name][k]!r},{rep.strategy_risk[name][k]!r}"
            )
    return "\n".join(rows) + "\n"

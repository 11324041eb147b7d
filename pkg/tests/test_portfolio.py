import datetime as dt

import numpy as np
import pytest

from edmnet.errors import PreconditionError
from edmnet.ingest import PricePanel, ReturnPanel
from edmnet.mis import IndependentSet
from edmnet.portfolio import (
    LpProblem,
    backtest,
    backtest_to_csv,
    benchmark_books,
    check_feasible,
    optimize_portfolio,
    portfolio_from_csv,
    portfolio_to_csv,
    portfolio_to_json,
    simplex_solve,
)
from edmnet.risk import es
from oracles import enumerate_vertices_lp

DAYS = tuple(dt.date(2024, 1, 1) + dt.timedelta(days=k) for k in range(30))


def test_cap_forces_equal_weights():
    rng = np.random.default_rng(0)
    sol = simplex_solve(LpProblem(rng.uniform(0.01, 0.05, 10), rng.normal(0, 1e-3, 10), min_return=-1))
    assert sol.status == "optimal"
    assert np.all(sol.weights == 0.1)


def test_too_few_assets_is_infeasible():
    sol = simplex_solve(LpProblem(np.full(9, 0.02), np.zeros(9)))
    assert sol.status == "infeasible"
    assert "cap" in sol.message


def test_twelve_cheapest_ten():
    costs = np.arange(1, 13) / 100
    sol = simplex_solve(LpProblem(costs, np.zeros(12), min_return=-1))
    np.testing.assert_allclose(sol.weights, [0.1] * 10 + [0, 0], atol=1e-12)
    assert sol.objective == pytest.approx(0.055, abs=1e-12)
    assert enumerate_vertices_lp(costs, np.zeros(12), 0.1, -1) == pytest.approx(0.055)


def test_binding_return_floor():
    rng = np.random.default_rng(4)
    costs = np.sort(rng.uniform(0.01, 0.05, 11))
    returns = np.linspace(-0.002, 0.002, 11)  # the cheapest names return the least
    free = simplex_solve(LpProblem(costs, returns, min_return=-1))
    # swapping the cheapest name for the priciest can add at most 0.1 * 0.004
    floor = free.achieved_return + 0.0002
    sol = simplex_solve(LpProblem(costs, returns, min_return=floor))
    assert sol.status == "optimal"
    assert sol.achieved_return == pytest.approx(floor, abs=1e-12)
    assert sol.objective > free.objective
    assert sol.objective == pytest.approx(enumerate_vertices_lp(costs, returns, 0.1, floor), abs=1e-9)


def test_unreachable_floor():
    sol = simplex_solve(LpProblem(np.full(12, 0.02), np.full(12, 0.001), min_return=0.01))
    assert sol.status == "infeasible" and "return floor" in sol.message


def test_random_instances_match_enumeration():
    rng = np.random.default_rng(12)
    for _ in range(30):
        n = int(rng.integers(10, 13))
        costs = rng.uniform(0.01, 0.06, n)
        rets = rng.normal(0, 0.002, n)
        floor = float(rng.uniform(rets.min(), rets.max()))
        p = LpProblem(costs, rets, min_return=floor)
        sol = simplex_solve(p)
        ref = enumerate_vertices_lp(costs, rets, 0.1, floor)
        if ref is None:
            assert sol.status == "infeasible"
            continue
        assert sol.status == "optimal" and check_feasible(p, sol.weights)
        assert sol.objective == pytest.approx(ref, abs=1e-6)
        scaled = simplex_solve(LpProblem(3 * costs, rets, min_return=floor))
        assert scaled.objective == pytest.approx(3 * sol.objective, abs=1e-9)


def test_problem_validation():
    with pytest.raises(PreconditionError):
        LpProblem(np.ones(3), np.ones(2))
    with pytest.raises(PreconditionError):
        LpProblem(np.ones(3), np.ones(3), cap=0.0)


def _returns_panel(cols):
    cols = np.column_stack(cols)
    n = cols.shape[1]
    return ReturnPanel(tuple(DAYS[0] + dt.timedelta(days=k) for k in range(len(cols))), tuple(f"A{i:02d}" for i in range(n)), cols)


def test_known_es_ranks_get_zero_weight():
    rng = np.random.default_rng(8)
    base = rng.standard_t(4, 250) * 0.01
    cols = [base * (1 + 0.1 * k) + 0.0001 * rng.standard_normal(250) for k in range(12)]
    panel = _returns_panel(cols)
    members = IndependentSet(panel.tickers, ())
    sol = optimize_portfolio(panel, members, 0.95, 0.1, -1.0)
    ranks = np.argsort(sol.es)
    assert np.all(sol.weights[ranks[-2:]] == 0)
    assert sol.objective == pytest.approx(enumerate_vertices_lp(sol.es, sol.returns, 0.1, -1.0))
    assert sol.window == (panel.dates[0].isoformat(), panel.dates[-1].isoformat())
    assert sol.es[0] == es(-cols[0], 0.95)
    text = portfolio_to_csv(sol)
    assert portfolio_from_csv(text) == dict(zip(sol.tickers, sol.weights))
    assert '"status": "optimal"' in portfolio_to_json(sol)


def test_flat_objective():
    col = np.random.default_rng(2).standard_normal(100) * 0.01
    panel = _returns_panel([col] * 11)
    sol = optimize_portfolio(panel, IndependentSet(panel.tickers, ()), min_return=-1.0)
    assert sol.objective == pytest.approx(es(-col, 0.95))


def test_too_few_members():
    panel = _returns_panel([np.random.default_rng(1).standard_normal(50)] * 9)
    sol = optimize_portfolio(panel, IndependentSet(panel.tickers, ()))
    assert sol.status == "infeasible" and "need at least 10" in sol.message
    with pytest.raises(PreconditionError):
        optimize_portfolio(panel, IndependentSet(("ZZZ",), ()))


def _prices(mat, tickers):
    mat = np.asarray(mat, float)
    return PricePanel(DAYS[: len(mat)], tuple(tickers), mat)


def test_backtest_examples():
    flat = _prices(np.full((11, 2), 5.0), "AB")
    rep = backtest(flat, {"b": {"A": 0.5, "B": 0.5}}, 10)
    assert rep.strategy_returns["b"] == [0.0] and rep.strategy_risk["b"] == [0.0]

    double = _prices(np.linspace(1, 2, 11)[:, None], "A")
    assert backtest(double, {"b": {"A": 1.0}}, 10).strategy_returns["b"] == [pytest.approx(1.0)]

    pm = _prices(np.column_stack([np.linspace(1, 1.1, 11), np.linspace(1, 0.9, 11)]), "AB")
    assert backtest(pm, {"b": {"A": 0.5, "B": 0.5}}, 10).strategy_returns["b"][0] == pytest.approx(0.0, abs=1e-15)


def test_backtest_segmentation_and_errors():
    rng = np.random.default_rng(3)
    mat = np.exp(np.cumsum(rng.normal(0, 0.01, (26, 3)), axis=0))
    panel = _prices(mat, "ABC")
    rep = backtest(panel, {"x": {"A": 0.2, "C": 0.8}}, 10)
    assert len(rep.intervals) == 2  # 25 returns: two full blocks, 5 dropped
    assert rep.intervals[0][1] == rep.intervals[1][0]
    with pytest.raises(KeyError):
        backtest(panel, {"x": {"Q": 1.0}}, 10)
    with pytest.raises(PreconditionError):
        backtest(panel, {"x": {"A": 1.0}}, 30)


def test_full_length_interval_is_buy_and_hold():
    rng = np.random.default_rng(6)
    mat = np.exp(np.cumsum(rng.normal(0, 0.01, (21, 3)), axis=0))
    w = {"A": 0.3, "B": 0.3, "C": 0.4}
    rep = backtest(_prices(mat, "ABC"), {"x": w}, 20)
    hold = sum(wt * (mat[-1, k] / mat[0, k] - 1) for k, wt in enumerate(w.values()))
    assert rep.strategy_returns["x"] == [pytest.approx(hold, abs=1e-15)]


def test_benchmark_books():
    panel = _prices(np.ones((11, 3)), ["A", "B", "IDX"])
    books = benchmark_books(panel, {"A": 1.0, "B": 0.0}, index_tickers=("IDX",))
    assert books["mis"] == {"A": 1.0}
    assert books["equal_weight"] == {"A": 0.5, "B": 0.5}
    assert books["index:IDX"] == {"IDX": 1.0}
    csv = backtest_to_csv(backtest(panel, books, 5))
    assert csv.splitlines()[0] == "interval_start,interval_end,book,return,risk"
    assert len(csv.splitlines()) == 1 + 2 * 3

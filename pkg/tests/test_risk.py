import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.optimize import linprog

from edmnet.errors import PreconditionError, ShortSeriesError
from edmnet.ingest import ReturnPanel
from edmnet.risk import (
    delta_covar,
    es,
    heat_to_csv,
    ordered_tickers,
    quantile_regression,
    read_risk_csv,
    risk_report,
    risk_to_csv,
    risk_to_json,
    var,
)

L100 = np.arange(1, 101, dtype=float)
# Multiples of 1/64 keep l + c exact, so shifting cannot merge distinct values.
grid = st.integers(-640, 640).map(lambda v: v / 64)
losses = arrays(np.float64, st.integers(20, 120), elements=grid)


def test_enumeration_values():
    assert var(L100, 0.95) == 95
    assert es(L100, 0.95) == 98
    assert es(L100, 0.5) == 75.5
    assert var(np.full(30, 2.5), 0.7) == 2.5 and es(np.full(30, 2.5), 0.7) == 2.5


def test_preconditions():
    with pytest.raises(PreconditionError):
        var(L100, 1.0)
    with pytest.raises(ShortSeriesError):
        var(np.arange(10.0), 0.9)
    with pytest.raises(PreconditionError):
        es(np.r_[L100, np.nan], 0.9)


@settings(max_examples=80, deadline=None)
@given(losses, st.integers(-320, 320).map(lambda v: v / 64), st.floats(0.1, 10), st.sampled_from([0.5, 0.9, 0.95, 0.99]))
def test_coherence_properties(l, c, k, a):
    assert var(l + c, a) == pytest.approx(var(l, a) + c, abs=1e-9)
    assert es(l + c, a) == pytest.approx(es(l, a) + c, abs=1e-9)
    assert var(k * l, a) == pytest.approx(k * var(l, a), abs=1e-9)
    assert es(k * l, a) == pytest.approx(k * es(l, a), abs=1e-9)
    assert es(l, a) >= var(l, a)


distinct = arrays(np.float64, st.integers(20, 120), elements=st.floats(-10, 10, allow_nan=False), unique=True)


@settings(max_examples=80, deadline=None)
@given(distinct, st.sampled_from([0.5, 0.9, 0.95, 0.99]), st.integers(0, 2**32 - 1))
def test_monotonicity_on_distinct_values(l, a, seed):
    bump = np.random.default_rng(seed).exponential(1.0, len(l))
    assert es(l, a) <= es(l + bump, a) + 1e-9
    assert var(l, a) <= var(l + bump, a)


def test_ties_can_break_monotonicity():
    # the strictly-beyond-VaR mean counts fewer terms when the tail is tied
    l = np.r_[1.0, np.zeros(19)]
    bumped = l + np.abs(np.sin(np.arange(20)))
    assert es(l, 0.5) == 1.0
    assert es(bumped, 0.5) < 1.0


def _check_loss(y, x, a, b, q):
    r = y - a - b * x
    return float(np.sum(np.where(r >= 0, q * r, (q - 1) * r)))


def test_affine_exactness():
    x = np.linspace(-3, 5, 60)
    for q in (0.1, 0.5, 0.99):
        fit = quantile_regression(x.copy(), x, q)
        assert (fit.intercept, fit.slope) == pytest.approx((0, 1), abs=1e-9)
        fit = quantile_regression(2 * x + 3, x, q)
        assert (fit.intercept, fit.slope) == pytest.approx((3, 2), abs=1e-9)


def test_quantile_regression_is_optimal_against_highs(rng):
    for _ in range(15):
        T = 80
        x = rng.standard_t(4, T)
        y = 0.3 * x + rng.standard_t(4, T)
        q = float(rng.choice([0.5, 0.9, 0.99]))
        fit = quantile_regression(y, x, q)
        # primal: min q*1'u + (1-q)*1'v, y = a + b x + u - v
        c = np.r_[0, 0, np.full(T, q), np.full(T, 1 - q)]
        A = np.hstack([np.ones((T, 1)), x[:, None], np.eye(T), -np.eye(T)])
        ref = linprog(c, A_eq=A, b_eq=y, bounds=[(None, None)] * 2 + [(0, None)] * (2 * T), method="highs")
        assert _check_loss(y, x, fit.intercept, fit.slope, q) == pytest.approx(ref.fun, abs=1e-8)


def test_degenerate_regressor_warns():
    y = np.arange(30.0)
    with pytest.warns(UserWarning, match="degenerate"):
        fit = quantile_regression(y, np.ones(30), 0.9)
    assert fit.degenerate and fit.slope == 0 and fit.intercept == var(y, 0.9)


def test_independence_slope():
    rng = np.random.default_rng(17)
    x, y = rng.standard_normal(10_000), rng.standard_normal(10_000)
    assert abs(quantile_regression(y, x, 0.99).slope) <= 0.05


def test_delta_covar_examples():
    rng = np.random.default_rng(1)
    j = rng.standard_t(4, 3000)
    spread = var(j, 0.99) - var(j, 0.5)
    assert delta_covar(j, j, 0.99) == pytest.approx(spread, abs=1e-9)
    i = 0.5 * j + 0.01 * rng.standard_normal(3000)
    assert delta_covar(i, j, 0.99) == pytest.approx(0.5 * spread, rel=0.1)


def test_report_and_exports(rng):
    a = rng.standard_t(4, 300)
    b = rng.standard_t(4, 300)
    panel = ReturnPanel(tuple(range(300)), ("A", "B", "C"), np.column_stack([a, a, b]))
    r = risk_report(panel, 0.95, 0.99)
    assert np.all(r.es >= r.var)
    np.testing.assert_array_equal(r.heat, r.heat.T)
    assert np.all(np.diag(r.delta_covar) == 0)
    la = -a
    assert r.heat[0, 1] == pytest.approx(var(la, 0.99) - var(la, 0.5), abs=1e-9)
    assert ordered_tickers(r.tickers, ["C"]) == ["C", "A", "B"]
    assert heat_to_csv(r, ["C"]).splitlines()[0] == ",C,A,B"
    assert read_risk_csv(risk_to_csv(r))["A"] == (r.var[0], r.es[0])
    assert '"A|B"' in risk_to_json(r)


def test_report_flags_degenerate_pairs():
    cols = np.column_stack([np.linspace(-1, 1, 40), np.zeros(40)])
    panel = ReturnPanel(tuple(range(40)), ("A", "Z"), cols)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        r = risk_report(panel)
    assert ("A", "Z") in r.degenerate_pairs

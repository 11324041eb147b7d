"""Synthetic regularly varying samples with a known extremal dependence.

Samples are built in polar form: a Pareto radius times a direction drawn from
one of three angular laws on the positive quarter circle. The angular law
fixes the limiting cross moment exactly, which gives an analytic target for
the estimator in :mod:`edmnet.edm`.

The module also builds the deterministic synthetic market used as the bundled
fixture.
"""

from __future__ import annotations

import datetime as dt
import hashlib
import io
import math
from dataclasses import dataclass

import numpy as np

from .ingest import PricePanel, panel_records, write_prices

ANGLE_LAWS = ("point", "uniform", "axes")


@dataclass(frozen=True)
class SyntheticSpec:
    alpha: float
    radial_scale: float = 1.0
    angle_law: str = "uniform"
    phi0: float = math.pi / 4
    seed: int = 0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not self.radial_scale > 0:
            raise ValueError("radial_scale must be positive")
        if self.angle_law not in ANGLE_LAWS:
            raise ValueError(f"angle_law must be one of {ANGLE_LAWS}")
        if self.angle_law == "point" and not 0 <= self.phi0 <= math.pi / 2:
            raise ValueError("phi0 must lie in [0, pi/2]")


@dataclass(frozen=True)
class SampleBatch:
    pairs: np.ndarray  # shape (count, 2), nonnegative
    spec: SyntheticSpec

    @property
    def count(self) -> int:
        return len(self.pairs)


def sample_mrv(spec: SyntheticSpec, count: int) -> SampleBatch:
    if count < 1:
        raise ValueError("count must be at least 1")
    rng = np.random.default_rng(spec.seed)
    # 1 - U lies in (0, 1], so the inverse CDF never divides by zero.
    u = 1.0 - rng.random(count)
    radius = spec.radial_scale * u ** (-1.0 / spec.alpha)
    if spec.angle_law == "point":
        phi = np.full(count, spec.phi0)
    elif spec.angle_law == "uniform":
        phi = rng.random(count) * (math.pi / 2)
    else:
        phi = np.where(rng.random(count) < 0.5, 0.0, math.pi / 2)

    if spec.angle_law == "point" and spec.phi0 == math.pi / 4:
        # cos and sin of pi/4 differ in the last bit; keep the diagonal exact.
        c = s = np.full(count, math.sqrt(0.5))
    else:
        c, s = np.cos(phi), np.sin(phi)
        # Axis directions must carry an exact zero, not cos(pi/2) ~ 6e-17.
        c = np.where(phi == math.pi / 2, 0.0, c)
        s = np.where(phi == 0.0, 0.0, s)
    pairs = np.column_stack([radius * c, radius * s])
    return SampleBatch(pairs, spec)


def analytic_edm(spec: SyntheticSpec) -> float:
    """Limiting cross moment E[Z1 Z2 / R^2] of the angular law."""
    if spec.angle_law == "point":
        # cos(p) sin(p) written as sin(2p)/2, exact on the diagonal
        return 0.5 * math.sin(2.0 * spec.phi0)
    if spec.angle_law == "uniform":
        return 1.0 / math.pi
    return 0.0


def derive_seed(seed: int, stage: str) -> int:
    """Per-stage 64-bit seed: sha256 over the base seed and the stage name."""
    digest = hashlib.sha256(f"{int(seed)}:{stage}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


def business_days(start: dt.date, count: int) -> tuple:
    days = []
    d = start
    while len(days) < count:
        if d.weekday() < 5:
            days.append(d)
        d += dt.timedelta(days=1)
    return tuple(days)


# Sector layout of the synthetic market: block sizes of tightly linked names,
# then loosely linked bridge names and independent names.
FIXTURE_BLOCKS = (6, 5, 5, 4, 4, 3, 3, 3, 3, 2, 2)
FIXTURE_BRIDGES = 4
FIXTURE_LONERS = 50 - sum(FIXTURE_BLOCKS) - FIXTURE_BRIDGES


def synthetic_market(
    seed: int,
    n_days: int = 242,
    start: dt.date = dt.date(2023, 1, 3),
    initial_prices: np.ndarray | None = None,
    stage: str = "fixture",
) -> PricePanel:
    """Heavy-tailed block-factor price panel with 50 tickers.

    Each block shares a Student-t(3) factor; bridge names load on two
    neighbouring blocks; loners carry only idiosyncratic noise plus a weak
    market factor. Returns are exponentiated into prices starting at
    ``initial_prices`` (default: 10 + ticker index). The layout is fixed;
    ``stage`` salts the seed so a continuation period draws fresh shocks.
    """
    layout = np.random.default_rng(derive_seed(seed, "fixture-layout"))
    rng = np.random.default_rng(derive_seed(seed, stage))
    n_assets = sum(FIXTURE_BLOCKS) + FIXTURE_BRIDGES + FIXTURE_LONERS
    n_blocks = len(FIXTURE_BLOCKS)
    n_ret = n_days - 1

    loadings = np.zeros((n_assets, n_blocks))
    strength = layout.uniform(0.55, 1.2, size=n_blocks)
    pos = 0
    for b, size in enumerate(FIXTURE_BLOCKS):
        loadings[pos:pos + size, b] = strength[b] * layout.uniform(0.85, 1.15, size=size)
        pos += size
    for k in range(FIXTURE_BRIDGES):
        b = (2 * k) % n_blocks
        loadings[pos, b] = 0.75
        loadings[pos, (b + 1) % n_blocks] = 0.75
        pos += 1
    drift = layout.uniform(-0.0005, 0.0015, size=n_assets)
    vol = layout.uniform(0.008, 0.015, size=n_assets)
    idio = np.full(n_assets, 0.9)
    idio[pos:] = 1.2
    beta = np.full(n_assets, 0.25)

    market = rng.standard_t(3, size=n_ret)
    factors = rng.standard_t(3, size=(n_ret, n_blocks))
    noise = rng.standard_t(3, size=(n_ret, n_assets))
    scaled = factors @ loadings.T + noise * idio + market[:, None] * beta
    returns = drift + vol * scaled / math.sqrt(3.0)

    if initial_prices is None:
        initial_prices = 10.0 + np.arange(n_assets, dtype=float)
    logp = np.log(initial_prices) + np.vstack([np.zeros(n_assets), np.cumsum(returns, axis=0)])
    prices = np.round(np.exp(logp), 4)
    tickers = tuple(f"S{i:02d}" for i in range(n_assets))
    return PricePanel(business_days(start, n_days), tickers, prices)


def fixture_files(seed: int = 0) -> dict:
    """CSV text of the bundled fixture set, keyed by file name.

    ``prices_2023.csv`` is the formation year; ``prices_2024.csv`` continues
    from its last row with fresh shocks; ``index_2024.csv`` is an
    equal-weighted price-relative index (ticker ``IDX``, base 100) over the
    continuation year.
    """
    first = synthetic_market(seed)
    nxt = synthetic_market(
        seed, n_days=61, start=dt.date(2024, 1, 2), initial_prices=first.prices[-1], stage="fixture-next"
    )
    rel = nxt.prices / nxt.prices[0]
    index = PricePanel(nxt.dates, ("IDX",), np.round(100.0 * rel.mean(axis=1, keepdims=True), 4))
    out = {}
    for name, panel in (("prices_2023.csv", first), ("prices_2024.csv", nxt), ("index_2024.csv", index)):
        buf = io.StringIO()
        write_prices(panel_records(panel), buf)
        out[name] = buf.getvalue()
    return out

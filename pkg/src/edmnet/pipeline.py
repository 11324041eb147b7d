"""Stage runners and the end-to-end pipeline.

Every stage reads its inputs from files in the output directory (or from the
configured input CSVs) and writes its exports back there, so stages can be
re-run individually. :func:`run_pipeline` chains them and writes
``manifest.json`` listing every artifact with its sha256.
"""

from __future__ import annotations

import dataclasses
import hashlib
import io
import json
import logging
import warnings
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .community import (
    aggregate_communities,
    community_graph_to_dot,
    girvan_newman,
    levels_to_json,
    partition_to_csv,
    select_partition,
)
from .edm import TailPolicy, edm_matrix, edm_to_json, read_edm_csv, write_edm_csv
from .errors import DependencyError, EdmnetError, EdmnetWarning, InfeasibleError, PreconditionError
from .ingest import align_panel, load_panel, log_returns, panel_records, read_prices, read_returns, write_returns
from .mis import greedy_mis, mis_from_csv, mis_to_csv
from .network import (
    betweenness,
    build_graph,
    ccdf_to_csv,
    degree_stats,
    fit_power_law,
    graph_from_json,
    graph_to_dot,
    graph_to_json,
    network_stats,
    PATH_MODES,
)
from .portfolio import (
    backtest,
    backtest_to_csv,
    benchmark_books,
    optimize_portfolio,
    portfolio_from_csv,
    portfolio_to_csv,
    portfolio_to_json,
)
from .report import load_artifacts, render_summary
from .risk import heat_to_csv, risk_report, risk_to_csv, risk_to_json

log = logging.getLogger(__name__)

DEFAULT_SWEEP = (0.18, 0.20, 0.22, 0.24)


@dataclass
class PipelineConfig:
    prices: str | None = None
    prices_next: str | None = None
    index: str | None = None
    tail_quantile: float = 0.10
    min_tail: int = 20
    theta: float = 0.22
    theta_sweep: tuple = DEFAULT_SWEEP
    alpha: float = 0.95
    q: float = 0.99
    cap: float = 0.1
    min_return: float = 0.0
    interval: int = 10
    seed: int = 0
    out: str = "out"
    policy: str = "intersect"
    path_mode: str = "paper-compat"

    def validate(self) -> "PipelineConfig":
        if self.theta > 0.5:
            raise PreconditionError("theta exceeds 0.5")
        for t in (self.theta, *self.theta_sweep):
            if not -0.5 < t <= 0.5:
                raise PreconditionError(f"theta {t} outside (-0.5, 0.5]")
        for name in ("tail_quantile", "alpha", "q"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise PreconditionError(f"{name} must lie in (0, 1), got {v}")
        if not 0 < self.cap <= 1:
            raise PreconditionError(f"cap must lie in (0, 1], got {self.cap}")
        if self.interval < 1:
            raise PreconditionError("interval must be a positive integer")
        if self.min_tail < 2:
            raise PreconditionError("min_tail must be at least 2")
        if self.path_mode not in PATH_MODES:
            raise PreconditionError(f"path_mode must be one of {PATH_MODES}")
        for name in ("prices", "prices_next", "index"):
            p = getattr(self, name)
            if p is not None and not Path(p).is_file():
                raise PreconditionError(f"{name} file not found: {p}")
        return self

    def echo(self) -> dict:
        doc = dataclasses.asdict(self)
        doc["theta_sweep"] = list(self.theta_sweep)
        # Paths are echoed by file name; their content is pinned by hash in "inputs".
        for name in ("prices", "prices_next", "index"):
            if doc[name] is not None:
                doc[name] = Path(doc[name]).name
        del doc["out"]
        return doc


_CASTS = {f.name: f.type for f in dataclasses.fields(PipelineConfig)}


def coerce(key: str, raw):
    key = key.strip().replace("-", "_")
    if key == "interval_length":
        key = "interval"
    if key not in _CASTS:
        raise PreconditionError(f"unknown config key {key!r}")
    if raw is None or not isinstance(raw, str):
        return key, raw
    raw = raw.strip()
    kind = _CASTS[key]
    try:
        if key == "theta_sweep":
            return key, tuple(float(v) for v in raw.split(",") if v.strip())
        if kind == "float":
            return key, float(raw)
        if kind == "int":
            return key, int(raw)
    except ValueError:
        raise PreconditionError(f"bad value for {key}: {raw!r}") from None
    return key, raw


def read_config_file(path) -> dict:
    """``key = value`` lines; ``#`` starts a comment."""
    values = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise PreconditionError(f"cannot read config file {path}: {exc}") from None
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise PreconditionError(f"config line {lineno}: expected key = value")
        key, value = line.split("=", 1)
        k, v = coerce(key, value)
        values[k] = v
    return values


# -- artifact bookkeeping ---------------------------------------------------


@dataclass
class RunManifest:
    config: dict
    inputs: dict = field(default_factory=dict)
    artifacts: dict = field(default_factory=dict)  # file name -> sha256
    warnings: list = field(default_factory=list)
    status: str = "running"
    error: str | None = None

    def to_json(self) -> str:
        doc = {
            "version": __version__,
            "config": self.config,
            "inputs": self.inputs,
            "artifacts": [{"file": k, "sha256": v} for k, v in sorted(self.artifacts.items())],
            "warnings": self.warnings,
            "status": self.status,
            "error": self.error,
        }
        return json.dumps(doc, sort_keys=True, indent=1) + "\n"


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


class Stage:
    """Execution context: output directory, config and manifest."""

    def __init__(self, config: PipelineConfig, manifest: RunManifest | None = None):
        self.config = config
        self.out = Path(config.out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.manifest = manifest or RunManifest(config.echo())

    def write(self, name: str, text: str) -> Path:
        path = self.out / name
        data = text.encode("utf-8")
        path.write_bytes(data)
        self.manifest.artifacts[name] = hashlib.sha256(data).hexdigest()
        return path

    def require(self, name: str, producer: str) -> Path:
        path = self.out / name
        if not path.is_file():
            raise DependencyError(name, producer)
        return path

    def note_input(self, name: str, path) -> None:
        self.manifest.inputs[name] = sha256_file(path)

    def run(self, name: str, fn):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", EdmnetWarning)
            try:
                return fn(self)
            finally:
                for w in caught:
                    if issubclass(w.category, EdmnetWarning):
                        msg = f"{name}: {w.message}"
                        if msg not in self.manifest.warnings:
                            self.manifest.warnings.append(msg)
                    else:
                        warnings.showwarning(w.message, w.category, w.filename, w.lineno)


# -- stages -------------------------------------------------------------------


def stage_returns(st: Stage):
    cfg = st.config
    if cfg.prices is None:
        raise PreconditionError("--prices is required to compute returns")
    st.note_input("prices", cfg.prices)
    panel = load_panel(cfg.prices, cfg.policy)
    rets = log_returns(panel)
    buf = io.StringIO()
    write_returns(rets, buf)
    st.write("returns.csv", buf.getvalue())
    log.info("returns: %d days x %d tickers", len(rets.dates), len(rets.tickers))
    return rets


def load_returns(st: Stage):
    path = st.require("returns.csv", "returns")
    with open(path, newline="") as fh:
        return read_returns(fh)


def stage_edm(st: Stage):
    rets = load_returns(st)
    m = edm_matrix(rets, TailPolicy(st.config.tail_quantile, st.config.min_tail))
    buf = io.StringIO()
    write_edm_csv(m, buf)
    st.write("edm.csv", buf.getvalue())
    st.write("edm.json", edm_to_json(m))
    return m


def load_edm(st: Stage):
    with open(st.require("edm.csv", "edm")) as fh:
        return read_edm_csv(fh)


def stage_graph(st: Stage):
    g = build_graph(load_edm(st), st.config.theta)
    st.write("graph.json", graph_to_json(g, betweenness(g)))
    st.write("graph.dot", graph_to_dot(g))
    return g


def load_graph(st: Stage):
    return graph_from_json(st.require("graph.json", "graph").read_text())


def stage_stats(st: Stage):
    m = load_edm(st)
    thetas = sorted(set(st.config.theta_sweep) | {st.config.theta})
    rows, extra = [], {}
    for theta in thetas:
        g = build_graph(m, theta)
        stats = network_stats(g, st.config.path_mode)
        summary = degree_stats(g)
        try:
            fit = fit_power_law(summary)
            fit_doc = {"alpha_hat": fit.alpha_hat, "slope": fit.slope, "r_squared": fit.r_squared,
                       "support": list(fit.support)}
        except EdmnetError as exc:
            warnings.warn(f"theta {theta:.2f}: power-law fit skipped ({exc})", EdmnetWarning)
            fit_doc = None
        rows.append(stats.as_dict())
        extra[f"{theta:.2f}"] = {"degrees": [int(d) for d in summary.degrees], "power_law": fit_doc}
        st.write(f"ccdf_{theta:.2f}.csv", ccdf_to_csv(summary))
    doc = {"selected_theta": st.config.theta, "rows": rows, "by_theta": extra}
    st.write("stats.json", json.dumps(doc, sort_keys=True, indent=1) + "\n")
    return doc


def stage_centrality(st: Stage):
    g = load_graph(st)
    c = betweenness(g)
    lines = ["ticker,b,b_n"] + [f"{t},{b!r},{bn!r}" for t, b, bn in c.as_rows()]
    st.write("centrality.csv", "\n".join(lines) + "\n")
    doc = {"n": g.n, "normalization_undefined": c.normalization_undefined,
           "b": {t: b for t, b, _ in c.as_rows()}, "b_n": {t: bn for t, _, bn in c.as_rows()}}
    st.write("centrality.json", json.dumps(doc, sort_keys=True, indent=1) + "\n")
    return c


def stage_communities(st: Stage):
    g = load_graph(st)
    levels = girvan_newman(g)
    chosen = select_partition(levels, g)
    cg = aggregate_communities(g, chosen)
    st.write("communities.csv", partition_to_csv(chosen))
    st.write("communities.json", levels_to_json(levels, chosen))
    st.write("community_graph.dot", community_graph_to_dot(cg))
    st.write("graph_communities.dot", graph_to_dot(g, chosen.assignment))
    st.write("network.json", graph_to_json(g, betweenness(g), chosen.assignment))
    return chosen


def stage_mis(st: Stage):
    g = load_graph(st)
    s = greedy_mis(g, betweenness(g))
    st.write("mis.csv", mis_to_csv(g, s))
    return s


def load_mis(st: Stage):
    return mis_from_csv(st.require("mis.csv", "mis").read_text())


def stage_risk(st: Stage):
    rets = load_returns(st)
    mis_path = st.out / "mis.csv"
    members = mis_from_csv(mis_path.read_text()).members if mis_path.is_file() else ()
    r = risk_report(rets, st.config.alpha, st.config.q)
    st.write("risk.csv", risk_to_csv(r))
    st.write("heatmap.csv", heat_to_csv(r, members))
    st.write("risk.json", risk_to_json(r, members))
    return r


def stage_optimize(st: Stage):
    rets = load_returns(st)
    members = load_mis(st)
    sol = optimize_portfolio(rets, members, st.config.alpha, st.config.cap, st.config.min_return)
    st.write("portfolio.json", portfolio_to_json(sol))
    if sol.status != "optimal":
        raise InfeasibleError(f"portfolio optimization infeasible: {sol.message}")
    st.write("portfolio.csv", portfolio_to_csv(sol))
    return sol


def stage_backtest(st: Stage):
    cfg = st.config
    if cfg.prices_next is None:
        raise PreconditionError("--prices-next is required for the backtest")
    weights = portfolio_from_csv(st.require("portfolio.csv", "optimize").read_text())
    st.note_input("prices_next", cfg.prices_next)
    panel = load_panel(cfg.prices_next, cfg.policy)
    index_tickers = ()
    if cfg.index is not None:
        st.note_input("index", cfg.index)
        idx_records = read_prices(cfg.index)
        index_tickers = tuple(sorted({r.ticker for r in idx_records}))
        panel = align_panel(panel_records(panel) + idx_records, cfg.policy)
    universe = [t for t in panel.tickers if t not in set(index_tickers)]
    books = benchmark_books(panel, weights, universe, index_tickers)
    rep = backtest(panel, books, cfg.interval)
    st.write("backtest.csv", backtest_to_csv(rep))
    return rep


def stage_summary(st: Stage):
    doc = render_summary(load_artifacts(st.out))
    st.write("summary.txt", doc.to_text())
    st.write("summary.json", doc.to_json())
    return doc


STAGES = {
    "returns": stage_returns,
    "edm": stage_edm,
    "graph": stage_graph,
    "stats": stage_stats,
    "centrality": stage_centrality,
    "communities": stage_communities,
    "mis": stage_mis,
    "risk": stage_risk,
    "optimize": stage_optimize,
    "backtest": stage_backtest,
    "summary": stage_summary,
}

PIPELINE_ORDER = ("returns", "edm", "graph", "stats", "centrality", "communities", "mis", "risk", "optimize")


def run_pipeline(config: PipelineConfig) -> RunManifest:
    """Run every stage in order and write ``manifest.json``.

    On failure the manifest is still written, listing the artifacts completed
    so far, and the error is re-raised.
    """
    config.validate()
    if config.prices is None:
        raise PreconditionError("--prices is required")
    st = Stage(config)
    order = list(PIPELINE_ORDER)
    if config.prices_next is not None:
        order.append("backtest")
    order.append("summary")
    try:
        for name in order:
            log.info("stage %s", name)
            st.run(name, STAGES[name])
    except EdmnetError as exc:
        st.manifest.status = "failed"
        st.manifest.error = f"{name}: {exc}"
        (st.out / "manifest.json").write_text(st.manifest.to_json())
        raise
    st.manifest.status = "complete"
    (st.out / "manifest.json").write_text(st.manifest.to_json())
    return st.manifest


def run_stage(name: str, config: PipelineConfig) -> Stage:
    """Run one stage; returns the context so callers can inspect the manifest."""
    config.validate()
    st = Stage(config)
    st.run(name, STAGES[name])
    for w in st.manifest.warnings:
        log.warning("%s", w)
    return st

"""Threshold graphs over an EDM matrix and their summary statistics."""

from __future__ import annotations

import json
import warnings
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from .edm import EdmMatrix
from .errors import EdmnetWarning, InsufficientSupportError, PreconditionError, UndefinedMetricError

PATH_MODES = ("paper-compat", "connected-only")


@dataclass(frozen=True)
class ThresholdGraph:
    tickers: tuple
    theta: float
    adjacency: np.ndarray  # (n, n) bool, symmetric, false diagonal
    weights: np.ndarray  # (n, n) float, EDM on present edges, 0 elsewhere

    @classmethod
    def from_edges(cls, tickers: Sequence[str], edges: Iterable[tuple], theta: float = 0.0, weight: float = 1.0):
        """Build a graph from labelled edges; handy for hand-made examples."""
        tickers = tuple(tickers)
        pos = {t: i for i, t in enumerate(tickers)}
        n = len(tickers)
        adj = np.zeros((n, n), dtype=bool)
        w = np.zeros((n, n))
        for a, b in edges:
            i, j = pos[a], pos[b]
            if i == j:
                raise PreconditionError("self-loops are not allowed")
            adj[i, j] = adj[j, i] = True
            w[i, j] = w[j, i] = weight
        return cls(tickers, theta, adj, w)

    @property
    def n(self) -> int:
        return len(self.tickers)

    @property
    def edge_count(self) -> int:
        return int(self.adjacency.sum()) // 2

    def edges(self) -> list[tuple[int, int]]:
        i, j = np.nonzero(np.triu(self.adjacency, 1))
        return list(zip(i.tolist(), j.tolist()))

    def degrees(self) -> np.ndarray:
        return self.adjacency.sum(axis=1).astype(int)

    def neighbors(self, i: int) -> list[int]:
        return np.flatnonzero(self.adjacency[i]).tolist()

    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        return csr_from_adjacency(self.adjacency)

    def isolated(self) -> list[int]:
        return np.flatnonzero(self.degrees() == 0).tolist()


def csr_from_adjacency(adj: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    rows, cols = np.nonzero(adj)  # row-major, so neighbour lists come out sorted
    indptr = np.zeros(adj.shape[0] + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=adj.shape[0]), out=indptr[1:])
    return indptr, cols.astype(np.int64)


def build_graph(edm: EdmMatrix, theta: float) -> ThresholdGraph:
    if not -0.5 < theta <= 0.5:
        if theta > 0.5:
            raise PreconditionError("theta exceeds 0.5")
        raise PreconditionError("theta must exceed -0.5")
    adj = edm.values >= theta
    np.fill_diagonal(adj, False)
    adj = adj & adj.T
    weights = np.where(adj, edm.values, 0.0)
    return ThresholdGraph(edm.tickers, float(theta), adj, weights)


# -- degrees ---------------------------------------------------------------


@dataclass(frozen=True)
class DegreeSummary:
    degrees: np.ndarray
    ccdf_points: tuple  # ((k, survival), ...) ascending in k


@dataclass(frozen=True)
class PowerLawFit:
    alpha_hat: float
    slope: float
    intercept: float
    r_squared: float
    support: tuple


def summarize_degrees(degrees) -> DegreeSummary:
    degrees = np.asarray(degrees, dtype=int)
    n = len(degrees)
    points = tuple(
        (int(k), float(np.count_nonzero(degrees > k)) / n) for k in np.unique(degrees)
    ) if n else ()
    return DegreeSummary(degrees, points)


def degree_stats(g: ThresholdGraph) -> DegreeSummary:
    return summarize_degrees(g.degrees())


def fit_power_law(summary: DegreeSummary) -> PowerLawFit:
    """Least-squares line through the log-log CCDF.

    The CCDF of a density ``~ k**-a`` decays like ``k**-(a-1)``, so the
    density exponent is recovered as ``1 + |slope|``.
    """
    support = tuple((k, s) for k, s in summary.ccdf_points if k > 0 and s > 0)
    if len(support) < 3:
        raise InsufficientSupportError(
            f"power-law fit needs 3 support points with positive degree and survival, got {len(support)}"
        )
    lx = np.log([k for k, _ in support])
    ly = np.log([s for _, s in support])
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    r2 = min(max(r2, 0.0), 1.0)
    return PowerLawFit(1.0 + abs(float(slope)), float(slope), float(intercept), r2, tuple(k for k, _ in support))


# -- distances, clustering, density ----------------------------------------


def distance_matrix(g: ThresholdGraph) -> np.ndarray:
    indptr, indices = g.csr()
    return kernels.bfs_distances(indptr, indices, g.n)


def path_metrics(g: ThresholdGraph, mode: str = "paper-compat") -> tuple[float, float]:
    """Average path length and diameter from unweighted hop counts.

    ``paper-compat`` averages over all N(N-1)/2 pairs with unreachable pairs
    counted as 0; ``connected-only`` averages over reachable pairs only.
    """
    if mode not in PATH_MODES:
        raise PreconditionError(f"mode must be one of {PATH_MODES}")
    n = g.n
    if n < 2:
        return 0.0, 0.0
    d = distance_matrix(g)
    upper = d[np.triu_indices(n, 1)]
    reach = upper[upper > 0]
    diameter = float(reach.max()) if reach.size else 0.0
    total = float(reach.sum())
    if mode == "paper-compat":
        avg = 2.0 * total / (n * (n - 1))
    else:
        avg = total / reach.size if reach.size else 0.0
    return avg, diameter


def clustering(g: ThresholdGraph) -> tuple[np.ndarray, float]:
    a = g.adjacency.astype(np.int64)
    k = a.sum(axis=1)
    links = np.einsum("ij,jk,ki->i", a, a, a) // 2  # edges among neighbours
    with np.errstate(divide="ignore", invalid="ignore"):
        c = np.where(k >= 2, 2.0 * links / (k * (k - 1)), 0.0)
    avg = float(c.mean()) if g.n else 0.0
    return c, avg


def density(g: ThresholdGraph) -> float:
    return density_from_counts(g.n, g.edge_count)


def density_from_counts(n: int, m: int) -> float:
    if n < 2:
        raise UndefinedMetricError("density is undefined for fewer than 2 vertices")
    return 2.0 * m / (n * (n - 1))


@dataclass(frozen=True)
class NetworkStats:
    theta: float
    vertex_count: int
    edge_count: int
    isolated_count: int
    average_degree: float
    diameter: float
    density: float
    average_clustering: float
    average_path_length: float
    mode: str

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def network_stats(g: ThresholdGraph, mode: str = "paper-compat") -> NetworkStats:
    n, m = g.n, g.edge_count
    avg_len, diam = path_metrics(g, mode)
    _, avg_c = clustering(g)
    return NetworkStats(
        theta=g.theta,
        vertex_count=n,
        edge_count=m,
        isolated_count=len(g.isolated()),
        average_degree=2.0 * m / n if n else 0.0,
        diameter=diam,
        density=density(g),
        average_clustering=avg_c,
        average_path_length=avg_len,
        mode=mode,
    )


# -- betweenness -----------------------------------------------------------


@dataclass(frozen=True)
class CentralityReport:
    tickers: tuple
    b: np.ndarray
    b_n: np.ndarray
    normalization_undefined: bool = False

    def as_rows(self):
        return [(t, float(b), float(bn)) for t, b, bn in zip(self.tickers, self.b, self.b_n)]


def normalize_betweenness(b, n: int):
    """B_N = 2B / ((n-1)(n-2)); works on scalars, arrays and Fractions."""
    if n < 3:
        raise UndefinedMetricError("normalized betweenness needs n >= 3")
    denom = (n - 1) * (n - 2)
    if isinstance(b, (int, Fraction)):
        return Fraction(2 * b, denom)
    if np.ndim(b) == 0:
        return 2.0 * float(b) / denom
    return 2.0 * np.asarray(b, dtype=float) / denom


def betweenness(g: ThresholdGraph, exact: bool = False) -> CentralityReport:
    """Vertex betweenness by Brandes accumulation.

    With ``exact=True`` the accumulation runs in rational arithmetic and the
    report holds :class:`fractions.Fraction` values.
    """
    n = g.n
    if exact:
        b = np.array(exact_vertex_betweenness(g), dtype=object)
    else:
        indptr, indices = g.csr()
        b = kernels.vertex_betweenness(indptr, indices, n)
    if n < 3:
        warnings.warn(f"normalized betweenness undefined for n={n}; reporting 0", EdmnetWarning, stacklevel=2)
        zero = np.array([Fraction(0)] * n, dtype=object) if exact else np.zeros(n)
        return CentralityReport(g.tickers, b, zero, True)
    if exact:
        scale = Fraction(2, (n - 1) * (n - 2))
        b_n = np.array([v * scale for v in b], dtype=object)
    else:
        b_n = normalize_betweenness(b, n)
    return CentralityReport(g.tickers, b, b_n)


def exact_vertex_betweenness(g: ThresholdGraph) -> list[Fraction]:
    n = g.n
    nbrs = [g.neighbors(i) for i in range(n)]
    total = [Fraction(0)] * n
    for s in range(n):
        stack, preds = [], [[] for _ in range(n)]
        sigma, dist = [0] * n, [-1] * n
        sigma[s], dist[s] = 1, 0
        queue = deque([s])
        while queue:
            v = queue.popleft()
            stack.append(v)
            for w in nbrs[v]:
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    queue.append(w)
                if dist[w] == dist[v] + 1:
                    sigma[w] += sigma[v]
                    preds[w].append(v)
        delta = [Fraction(0)] * n
        while stack:
            w = stack.pop()
            for v in preds[w]:
                delta[v] += Fraction(sigma[v], sigma[w]) * (1 + delta[w])
            if w != s:
                total[w] += delta[w]
    return [t / 2 for t in total]


# -- exports ---------------------------------------------------------------


def _fmt(v: float) -> str:
    return repr(float(v))


def graph_to_json(
    g: ThresholdGraph,
    centrality: CentralityReport | None = None,
    communities: dict | None = None,
) -> str:
    deg = g.degrees()
    nodes = []
    for i, t in enumerate(g.tickers):
        node = {"id": t, "degree": int(deg[i])}
        if centrality is not None:
            node["b"] = float(centrality.b[i])
            node["b_n"] = float(centrality.b_n[i])
        if communities is not None:
            node["community"] = int(communities[t])
        nodes.append(node)
    edges = [
        {"source": g.tickers[i], "target": g.tickers[j], "weight": float(g.weights[i, j])}
        for i, j in g.edges()
    ]
    doc = {"theta": g.theta, "nodes": nodes, "edges": edges}
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


def graph_from_json(text: str) -> ThresholdGraph:
    doc = json.loads(text)
    tickers = tuple(node["id"] for node in doc["nodes"])
    pos = {t: i for i, t in enumerate(tickers)}
    n = len(tickers)
    adj = np.zeros((n, n), dtype=bool)
    w = np.zeros((n, n))
    for e in doc["edges"]:
        i, j = pos[e["source"]], pos[e["target"]]
        adj[i, j] = adj[j, i] = True
        w[i, j] = w[j, i] = e["weight"]
    return ThresholdGraph(tickers, float(doc["theta"]), adj, w)


# A fixed qualitative palette; community ids cycle through it.
PALETTE = (
    "#e41a1c", "#377eb8", "#4daf4a", "#984ea3", "#ff7f00", "#ffff33",
    "#a65628", "#f781bf", "#999999", "#66c2a5", "#fc8d62", "#8da0cb",
)


def graph_to_dot(g: ThresholdGraph, communities: dict | None = None) -> str:
    lines = ["graph edm {"]
    for t in g.tickers:
        attrs = [f'label="{t}"']
        if communities is not None:
            cid = int(communities[t])
            attrs.append(f"community={cid}")
            attrs.append(f'color="{PALETTE[cid % len(PALETTE)]}"')
        lines.append(f'  "{t}" [{", ".join(attrs)}];')
    for i, j in g.edges():
        lines.append(f'  "{g.tickers[i]}" -- "{g.tickers[j]}" [weight={_fmt(g.weights[i, j])}];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def ccdf_to_csv(summary: DegreeSummary) -> str:
    rows = ["degree,survival"] + [f"{k},{_fmt(s)}" for k, s in summary.ccdf_points]
    return "\n".join(rows) + "\n"


def stats_to_json(stats: NetworkStats, summary: DegreeSummary, fit: PowerLawFit | None) -> str:
    doc = stats.as_dict()
    doc["degrees"] = [int(d) for d in summary.degrees]
    doc["power_law"] = None if fit is None else {
        "alpha_hat": fit.alpha_hat,
        "slope": fit.slope,
        "intercept": fit.intercept,
        "r_squared": fit.r_squared,
        "support": list(fit.support),
    }
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"

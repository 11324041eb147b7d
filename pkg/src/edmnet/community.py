"""Girvan-Newman community detection with modularity-based level selection."""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import EdmnetWarning, PreconditionError, UndefinedMetricError
from .network import ThresholdGraph, csr_from_adjacency

# Edge betweenness values closer than this (relative) are treated as tied.
TIE_RTOL = 1e-9


@dataclass(frozen=True)
class Partition:
    tickers: tuple
    labels: tuple  # community id per vertex, aligned with tickers
    modularity: float | None = None
    selection_warning: bool = False

    @property
    def community_count(self) -> int:
        return len(set(self.labels))

    @property
    def assignment(self) -> dict:
        return dict(zip(self.tickers, self.labels))

    def blocks(self) -> list[frozenset]:
        out: dict[int, set] = {}
        for i, c in enumerate(self.labels):
            out.setdefault(c, set()).add(i)
        return [frozenset(out[c]) for c in sorted(out)]


@dataclass(frozen=True)
class CommunityGraph:
    sizes: tuple  # vertex count per community id
    edges: tuple  # (a, b, inter-edge count) with a < b
    displayed: tuple  # community ids holding at least two vertices


def _components(adj: np.ndarray) -> list[list[int]]:
    n = adj.shape[0]
    seen = np.zeros(n, dtype=bool)
    comps = []
    for s in range(n):
        if seen[s]:
            continue
        seen[s] = True
        stack, comp = [s], []
        while stack:
            v = stack.pop()
            comp.append(v)
            for w in np.flatnonzero(adj[v] & ~seen):
                seen[w] = True
                stack.append(int(w))
        comps.append(sorted(comp))
    return comps


def _label(tickers: tuple, comps: list[list[int]], isolated: frozenset) -> tuple:
    """Dense ids: communities with non-isolated vertices first, isolates after."""
    def key(comp):
        return (comp[0] in isolated, comp[0])

    labels = [0] * len(tickers)
    for cid, comp in enumerate(sorted(comps, key=key)):
        for v in comp:
            labels[v] = cid
    return tuple(labels)


def girvan_newman(g: ThresholdGraph) -> list[Partition]:
    """Dendrogram levels from repeated removal of the top edge-betweenness edge.

    Betweenness is recomputed after every removal. Ties go to the
    lexicographically smallest (label, label) endpoint pair. A level is
    emitted initially and after every removal that splits a component.
    """
    adj = g.adjacency.copy()
    isolated = frozenset(g.isolated())
    comps = _components(adj)
    levels = [_partition(g, _label(g.tickers, comps, isolated))]
    n_comp = len(comps)
    while adj.any():
        indptr, indices = csr_from_adjacency(adj)
        eb = kernels.edge_betweenness(indptr, indices, g.n)
        eb = np.where(adj, eb, -np.inf)
        top = eb.max()
        cand_i, cand_j = np.nonzero(np.triu(eb >= top - TIE_RTOL * max(1.0, abs(top)), 1))
        u, v = min(
            zip(cand_i.tolist(), cand_j.tolist()),
            key=lambda e: tuple(sorted((g.tickers[e[0]], g.tickers[e[1]]))),
        )
        adj[u, v] = adj[v, u] = False
        comps = _components(adj)
        if len(comps) != n_comp:
            n_comp = len(comps)
            levels.append(_partition(g, _label(g.tickers, comps, isolated)))
    return levels


def _partition(g: ThresholdGraph, labels: tuple) -> Partition:
    p = Partition(g.tickers, labels)
    if g.edge_count == 0:
        return p
    return Partition(g.tickers, labels, modularity(g, p))


def modularity(g: ThresholdGraph, p: Partition) -> float:
    """Newman modularity of ``p`` on ``g``: sum_c [m_c/M - (d_c/2M)^2]."""
    m = g.edge_count
    if m == 0:
        raise UndefinedMetricError("modularity is undefined on an edgeless graph")
    if p.tickers != g.tickers:
        raise PreconditionError("partition and graph disagree on vertices")
    labels = np.asarray(p.labels)
    deg = g.degrees()
    q = 0.0
    for c in np.unique(labels):
        members = labels == c
        internal = int(g.adjacency[np.ix_(members, members)].sum()) // 2
        d_c = int(deg[members].sum())
        q += internal / m - (d_c / (2.0 * m)) ** 2
    return q


def select_partition(levels: list[Partition], g: ThresholdGraph) -> Partition:
    """Highest-modularity level; ties prefer fewer communities, then earlier levels."""
    if not levels:
        raise PreconditionError("no dendrogram levels to select from")
    if g.edge_count == 0:
        warnings.warn("edgeless graph: modularity undefined, using singleton communities", EdmnetWarning, stacklevel=2)
        labels = _label(g.tickers, [[i] for i in range(g.n)], frozenset(range(g.n)))
        return Partition(g.tickers, labels, None, True)
    scored = [(lvl.modularity if lvl.modularity is not None else modularity(g, lvl), k, lvl) for k, lvl in enumerate(levels)]
    best_q = max(q for q, _, _ in scored)
    tied = [(lvl.community_count, k, lvl) for q, k, lvl in scored if q >= best_q - 1e-12]
    _, _, chosen = min(tied, key=lambda t: (t[0], t[1]))
    return chosen


def aggregate_communities(g: ThresholdGraph, p: Partition) -> CommunityGraph:
    if p.tickers != g.tickers:
        raise PreconditionError("partition and graph disagree on vertices")
    k = p.community_count
    sizes = np.bincount(np.asarray(p.labels), minlength=k)
    tally: dict[tuple, int] = {}
    for i, j in g.edges():
        a, b = p.labels[i], p.labels[j]
        if a != b:
            key = (min(a, b), max(a, b))
            tally[key] = tally.get(key, 0) + 1
    edges = tuple((a, b, c) for (a, b), c in sorted(tally.items()))
    displayed = tuple(int(c) for c in range(k) if sizes[c] >= 2)
    return CommunityGraph(tuple(int(s) for s in sizes), edges, displayed)


def partition_to_csv(p: Partition) -> str:
    return "ticker,community\n" + "".join(f"{t},{c}\n" for t, c in zip(p.tickers, p.labels))


def partition_from_csv(text: str) -> Partition:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != "ticker,community":
        raise PreconditionError("partition CSV must start with 'ticker,community'")
    pairs = [ln.split(",") for ln in lines[1:]]
    return Partition(tuple(t for t, _ in pairs), tuple(int(c) for _, c in pairs))


def community_graph_to_dot(cg: CommunityGraph) -> str:
    lines = ["graph communities {"]
    for cid, size in enumerate(cg.sizes):
        shown = "true" if cid in cg.displayed else "false"
        lines.append(f'  c{cid} [label="{cid}", size={size}, width={0.25 * size:.2f}, displayed={shown}];')
    for a, b, count in cg.edges:
        lines.append(f"  c{a} -- c{b} [weight={count}, penwidth={count}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def levels_to_json(levels: list[Partition], chosen: Partition) -> str:
    doc = {
        "levels": [
            {"community_count": lvl.community_count, "modularity": lvl.modularity}
            for lvl in levels
        ],
        "selected": {
            "community_count": chosen.community_count,
            "modularity": chosen.modularity,
            "warning": chosen.selection_warning,
        },
    }
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"

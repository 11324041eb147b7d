"""Greedy maximum independent set with centrality tie-breaks."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import MembershipError
from .network import CentralityReport, ThresholdGraph


@dataclass(frozen=True)
class IndependentSet:
    members: tuple  # sorted tickers
    excluded_isolated: tuple  # sorted tickers
    pick_order: tuple = ()  # tickers in the order the greedy loop took them


def greedy_mis(g: ThresholdGraph, centrality: CentralityReport) -> IndependentSet:
    """Min-degree greedy on the graph with isolated vertices removed.

    Each step takes the remaining vertex of smallest residual degree, breaking
    ties by lower normalized betweenness on the full graph and then by ticker,
    and deletes it together with its neighbours.
    """
    if centrality.tickers != g.tickers:
        raise MembershipError("centrality report does not match the graph's vertices")
    adj = g.adjacency
    deg = adj.sum(axis=1)
    isolated = [g.tickers[i] for i in np.flatnonzero(deg == 0)]
    alive = set(np.flatnonzero(deg > 0).tolist())
    residual = {v: int(deg[v]) for v in alive}
    nbrs = {v: set(np.flatnonzero(adj[v]).tolist()) for v in alive}
    b_n = [float(x) for x in centrality.b_n]

    picked = []
    while alive:
        v = min(alive, key=lambda u: (residual[u], b_n[u], g.tickers[u]))
        picked.append(v)
        removed = {v} | (nbrs[v] & alive)
        alive -= removed
        for u in removed:
            for w in nbrs[u] & alive:
                residual[w] -= 1
    order = tuple(g.tickers[v] for v in picked)
    return IndependentSet(tuple(sorted(order)), tuple(sorted(isolated)), order)


def verify_independent(g: ThresholdGraph, s: Iterable[str]) -> bool:
    pos = {t: i for i, t in enumerate(g.tickers)}
    idx = []
    for t in s:
        if t not in pos:
            raise MembershipError(f"unknown vertex {t!r}")
        idx.append(pos[t])
    return not g.adjacency[np.ix_(idx, idx)].any()


def is_maximal(g: ThresholdGraph, members: Iterable[str]) -> bool:
    """True when no non-isolated outsider can join without breaking independence."""
    pos = {t: i for i, t in enumerate(g.tickers)}
    inside = np.zeros(g.n, dtype=bool)
    inside[[pos[t] for t in members]] = True
    deg = g.degrees()
    for v in range(g.n):
        if inside[v] or deg[v] == 0:
            continue
        if not (g.adjacency[v] & inside).any():
            return False
    return True


def mis_to_csv(g: ThresholdGraph, s: IndependentSet) -> str:
    members = set(s.members)
    isolated = set(s.excluded_isolated)
    rows = ["ticker,selected,reason"]
    for t in g.tickers:
        if t in members:
            rows.append(f"{t},1,member")
        elif t in isolated:
            rows.append(f"{t},0,isolated-excluded")
        else:
            rows.append(f"{t},0,neighbor-removed")
    return "\n".join(rows) + "\n"


def mis_from_csv(text: str) -> IndependentSet:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    members, isolated = [], []
    for ln in lines[1:]:
        t, sel, reason = ln.split(",")
        if sel == "1":
            members.append(t)
        elif reason == "isolated-excluded":
            isolated.append(t)
    return IndependentSet(tuple(sorted(members)), tuple(sorted(isolated)))

"""Pure-Python graph kernels; reference for, and fallback of, ``_core``.

Graphs arrive in CSR form: ``indptr`` (n+1,) and ``indices`` (2M,) int arrays
of an undirected simple graph with sorted neighbour lists.
"""

from collections import deque

import numpy as np


def bfs_distances(indptr, indices, n):
    """All-pairs hop distances, -1 where unreachable."""
    indptr = list(map(int, indptr))
    indices = list(map(int, indices))
    out = np.full((n, n), -1, dtype=np.int64)
    for s in range(n):
        dist = [-1] * n
        dist[s] = 0
        queue = deque([s])
        while queue:
            v = queue.popleft()
            dv = dist[v] + 1
            for k in range(indptr[v], indptr[v + 1]):
                w = indices[k]
                if dist[w] < 0:
                    dist[w] = dv
                    queue.append(w)
        out[s] = dist
    return out


def _brandes(indptr, indices, n, edges):
    indptr = list(map(int, indptr))
    indices = list(map(int, indices))
    vb = [0.0] * n
    eb = np.zeros((n, n)) if edges else None
    for s in range(n):
        stack = []
        preds = [[] for _ in range(n)]
        sigma = [0] * n
        dist = [-1] * n
        sigma[s] = 1
        dist[s] = 0
        queue = deque([s])
        while queue:
            v = queue.popleft()
            stack.append(v)
            for k in range(indptr[v], indptr[v + 1]):
                w = indices[k]
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    queue.append(w)
                if dist[w] == dist[v] + 1:
                    sigma[w] += sigma[v]
                    preds[w].append(v)
        delta = [0.0] * n
        while stack:
            w = stack.pop()
            coeff = (1.0 + delta[w]) / sigma[w]
            for v in preds[w]:
                c = sigma[v] * coeff
                delta[v] += c
                if edges:
                    eb[v, w] += c
                    eb[w, v] += c
            if w != s:
                vb[w] += delta[w]
    # Every unordered pair was visited from both endpoints.
    if edges:
        return eb / 2.0
    return np.array(vb) / 2.0


def vertex_betweenness(indptr, indices, n):
    return _brandes(indptr, indices, n, False)


def edge_betweenness(indptr, indices, n):
    """Symmetric n x n matrix; entry (u, v) is the betweenness of edge {u, v}."""
    return _brandes(indptr, indices, n, True)

# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled graph kernels. Same contract as ``edmnet._pycore``."""

import numpy as np
cimport numpy as cnp

cnp.import_array()

ctypedef cnp.int64_t idx_t


def bfs_distances(indptr, indices, Py_ssize_t n):
    cdef idx_t[::1] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef idx_t[::1] ix = np.ascontiguousarray(indices, dtype=np.int64)
    out = np.full((n, n), -1, dtype=np.int64)
    cdef idx_t[:, ::1] d = out
    cdef idx_t[::1] queue = np.empty(max(n, 1), dtype=np.int64)
    cdef Py_ssize_t s, head, tail, v, w, k
    for s in range(n):
        d[s, s] = 0
        queue[0] = s
        head = 0
        tail = 1
        while head < tail:
            v = queue[head]
            head += 1
            for k in range(ip[v], ip[v + 1]):
                w = ix[k]
                if d[s, w] < 0:
                    d[s, w] = d[s, v] + 1
                    queue[tail] = w
                    tail += 1
    return out


cdef _brandes(indptr, indices, Py_ssize_t n, bint edges):
    cdef idx_t[::1] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef idx_t[::1] ix = np.ascontiguousarray(indices, dtype=np.int64)
    cdef Py_ssize_t m2 = ix.shape[0]
    cdef double[::1] vb = np.zeros(n)
    eb_arr = np.zeros((n, n)) if edges else np.zeros((1, 1))
    cdef double[:, ::1] eb = eb_arr
    cdef double[::1] sigma = np.zeros(n)
    cdef double[::1] delta = np.zeros(n)
    cdef idx_t[::1] dist = np.zeros(n, dtype=np.int64)
    cdef idx_t[::1] order = np.zeros(max(n, 1), dtype=np.int64)
    # Predecessors stored per vertex in CSR slots: at most deg(w) of them.
    cdef idx_t[::1] pred = np.zeros(max(m2, 1), dtype=np.int64)
    cdef idx_t[::1] npred = np.zeros(n, dtype=np.int64)
    cdef Py_ssize_t s, head, tail, v, w, k, j
    cdef double coeff, c
    for s in range(n):
        for v in range(n):
            sigma[v] = 0.0
            delta[v] = 0.0
            dist[v] = -1
            npred[v] = 0
        sigma[s] = 1.0
        dist[s] = 0
        order[0] = s
        head = 0
        tail = 1
        while head < tail:
            v = order[head]
            head += 1
            for k in range(ip[v], ip[v + 1]):
                w = ix[k]
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    order[tail] = w
                    tail += 1
                if dist[w] == dist[v] + 1:
                    sigma[w] += sigma[v]
                    pred[ip[w] + npred[w]] = v
                    npred[w] += 1
        # BFS order reversed is the non-increasing distance order Brandes needs.
        for j in range(tail - 1, -1, -1):
            w = order[j]
            coeff = (1.0 + delta[w]) / sigma[w]
            for k in range(ip[w], ip[w] + npred[w]):
                v = pred[k]
                c = sigma[v] * coeff
                delta[v] += c
                if edges:
                    eb[v, w] += c
                    eb[w, v] += c
            if w != s:
                vb[w] += delta[w]
    if edges:
        return eb_arr / 2.0
    return np.asarray(vb) / 2.0


def vertex_betweenness(indptr, indices, Py_ssize_t n):
    return _brandes(indptr, indices, n, False)


def edge_betweenness(indptr, indices, Py_ssize_t n):
    return _brandes(indptr, indices, n, True)

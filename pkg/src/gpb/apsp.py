"""All-pairs shortest paths on DAGs whose vertices are already topologically sorted.

The horizontal pass works on a dense matrix ``mt`` and a column shift ``f``: the
edge ``w -> v`` costs ``mt[w, v] - f[v]`` and exists when that is finite and
``v >= first[w]``.  Both kernels return ``SP(u, v) + f[v]`` with the diagonal
set to ``f[u]`` (the empty path), and ``inf`` where no path exists.

``reference`` relaxes every edge once per source.  ``useful_edge`` reweights
with potentials from a virtual super-source, then builds each column of the
distance matrix while only expanding edges that are strictly shorter than
every other path between their endpoints (up to a relative tolerance, which
stands in for a random perturbation that would make shortest paths unique).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

BACKENDS = ("reference", "useful_edge")
TIE_TOL = 1e-12


class CycleError(RuntimeError):
    """The edge set is not acyclic."""


@dataclass
class ApspStats:
    backend: str
    relaxations: int = 0
    useful_edges: int = 0


@njit(cache=True, fastmath={"nsz", "arcp", "contract", "reassoc"})
def _reference(out, f, first):
    """``out`` holds the shifted costs ``mt - f[col]`` on entry and the result on exit.

    Row ``u`` of the costs is last read by source ``u``, so each source saves its
    row before reusing it as the distance vector.
    """
    V = out.shape[0]
    inf = np.inf
    own = np.empty(V)
    relax = 0
    for u in range(V):
        dist = out[u]
        for v in range(V):
            own[v] = dist[v]
            dist[v] = inf
        dist[u] = 0.0
        for w in range(u, V):
            dw = dist[w]
            if dw == inf:
                continue
            row = own if w == u else out[w]
            for v in range(first[w], V):
                dist[v] = min(dist[v], dw + row[v])
            relax += V - first[w]
        for v in range(u):
            dist[v] = inf
        for v in range(u, V):
            dist[v] += f[v]
        dist[u] = f[u]
    return relax


@njit(cache=True)
def _potentials(mt, f, first):
    V = mt.shape[0]
    r = np.zeros(V)
    for w in range(V):
        rw = r[w]
        row = mt[w]
        for v in range(first[w], V):
            r[v] = min(r[v], rw + (row[v] - f[v]))
    return r


@njit(cache=True)
def _useful(ct, f, first, lo, r, dist_t, tol):
    """Columns of the reweighted distance matrix, stored transposed in ``dist_t``."""
    V = ct.shape[0]
    inf = np.inf
    best = np.empty(V)
    useful = 0
    pushes = 0
    for v in range(V):
        dv = dist_t[v]
        for w in range(V):
            dv[w] = inf
        m = lo[v]
        for w in range(m):
            best[w] = inf
        for w2 in range(m - 1, -1, -1):
            if first[w2] > v:
                dv[w2] = best[w2]
                continue
            c = ct[v, w2]
            b = best[w2]
            if c < inf:
                c = (c - f[v]) + r[w2] - r[v]
                if b == inf or c < b - tol * (1.0 + abs(b)):
                    dv[w2] = c
                    useful += 1
                    row = dist_t[w2]
                    top = lo[w2]
                    for w in range(top):
                        best[w] = min(best[w], row[w] + c)
                    pushes += top
                    continue
            dv[w2] = b
    return useful, pushes


@njit(cache=True)
def _unweight(dist_t, r, f, out):
    V = dist_t.shape[0]
    inf = np.inf
    block = 64
    for u0 in range(0, V, block):
        for v0 in range(0, V, block):
            for u in range(u0, min(u0 + block, V)):
                for v in range(v0, min(v0 + block, V)):
                    d = dist_t[v, u]
                    out[u, v] = d - r[u] + r[v] + f[v] if d < inf else inf
    for u in range(V):
        out[u, u] = f[u]


def shortest_paths(mt: np.ndarray, f: np.ndarray, first: np.ndarray, lo: np.ndarray,
                   backend: str = "useful_edge") -> tuple[np.ndarray, ApspStats]:
    """``SP(u, v) + f[v]`` for all pairs of a topologically sorted DAG.

    ``first[w]``: smallest index that may follow ``w``; ``lo[v]``: every
    predecessor of ``v`` has a smaller index.  Edge costs are ``mt - f[col]``.
    """
    mt = np.ascontiguousarray(mt, dtype=float)
    f = np.ascontiguousarray(f, dtype=float)
    first = np.ascontiguousarray(first, dtype=np.int64)
    lo = np.ascontiguousarray(lo, dtype=np.int64)
    V = mt.shape[0]
    stats = ApspStats(backend)
    if backend == "reference":
        out = mt - f[None, :]
        stats.relaxations = int(_reference(out, f, first))
        return out, stats
    if backend != "useful_edge":
        raise ValueError(f"unknown APSP backend {backend!r}; choose from {BACKENDS}")
    r = _potentials(mt, f, first)
    ct = np.ascontiguousarray(mt.T)
    dist_t = np.empty((V, V))
    useful, pushes = _useful(ct, f, first, lo, r, dist_t, TIE_TOL)
    stats.useful_edges, stats.relaxations = int(useful), int(pushes) + V * V
    _unweight(dist_t, r, f, ct)
    return ct, stats


def topological_order(cost: np.ndarray) -> np.ndarray:
    """Kahn's order of the graph with edges at finite off-diagonal entries."""
    V = cost.shape[0]
    adj = np.isfinite(cost)
    np.fill_diagonal(adj, False)
    indeg = adj.sum(axis=0)
    order = []
    ready = sorted(np.flatnonzero(indeg == 0).tolist())
    while ready:
        u = ready.pop(0)
        order.append(u)
        for v in np.flatnonzero(adj[u]):
            indeg[v] -= 1
            if indeg[v] == 0:
                ready.append(int(v))
    if len(order) != V:
        raise CycleError("shortest-path graph has a cycle")
    return np.array(order, dtype=np.int64)


def apsp_dag(cost: np.ndarray, backend: str = "reference") -> np.ndarray:
    """Exact all-pairs distances of a DAG given as a dense cost matrix (inf = no edge).

    Negative costs are allowed; a cycle raises :class:`CycleError`.
    """
    cost = np.asarray(cost, dtype=float)
    V = cost.shape[0]
    order = topological_order(cost)
    mt = cost[np.ix_(order, order)].copy()
    np.fill_diagonal(mt, np.inf)
    idx = np.arange(V, dtype=np.int64)
    out, _ = shortest_paths(mt, np.zeros(V), idx + 1, idx, backend)
    back = np.empty(V, dtype=np.int64)
    back[order] = idx
    return out[np.ix_(back, back)]

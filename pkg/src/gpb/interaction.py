"""MAP inference for interaction grammars of depth d.

Level messages ``M_k(α, β)`` are dense matrices over a vertex set of patterns.
By default the vertex set is the set of states reachable from ``ε_0`` through
the lsp automaton: every message that can influence the final minimum has both
arguments in it, and it is closed under ``lsp(αu)`` and ``lsp(γv)``.

The diagonal ``M_k(α, α) = f(α)`` stands for an empty derived substring.  It
lets the vertical pass use an empty middle word (every ``S^k`` derives ε
through ``S^0 -> ε``) and makes the empty path the base of the horizontal pass.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .apsp import shortest_paths
from .grammar import Derivation, InteractionGrammar, Rule
from .patterns import CostTables, Pattern, PatternIndex

INF = np.inf


# ----------------------------------------------------------------------------- frame

def reachable_states(index: PatternIndex) -> np.ndarray:
    """Boolean mask of patterns that are lsp(x) for some prefix labeling x."""
    mask = np.zeros(len(index), dtype=bool)
    mask[index.empty(0)] = True
    for s in range(index.n):
        g = np.arange(index.group_start[s], index.group_start[s + 1])
        live = g[mask[g]]
        mask[index.ext[live].ravel()] = True
    return mask


@dataclass
class Frame:
    """Local (dense) view of a vertex set, sorted by end position."""

    index: PatternIndex
    tables: CostTables
    vertices: np.ndarray
    local: np.ndarray
    end: np.ndarray
    f: np.ndarray
    phi: np.ndarray
    ext: np.ndarray
    first: np.ndarray     # first local index with a larger end
    lo: np.ndarray        # first local index with the same end

    def __len__(self):
        return len(self.vertices)

    def group(self, s: int) -> range:
        a = int(np.searchsorted(self.end, s, "left"))
        b = int(np.searchsorted(self.end, s, "right"))
        return range(a, b)

    def walk(self, word) -> tuple[np.ndarray, np.ndarray]:
        """For every vertex p: local lsp(p w) (or -1) and f(p w) (inf when -1)."""
        ids = self.vertices.copy()
        acc = self.tables.f[ids].copy()
        for a in self.index.encode(word):
            ok = ids >= 0
            ids[ok] = self.index.ext[ids[ok], a]
            ok = ids >= 0
            acc[ok] += self.tables.phi[ids[ok]]
        out = np.where(ids >= 0, self.local[np.maximum(ids, 0)], -1)
        return out.astype(np.int64), np.where(ids >= 0, acc, INF)


def make_frame(index: PatternIndex, tables: CostTables, states: str = "reachable") -> Frame:
    if states == "reachable":
        vertices = np.flatnonzero(reachable_states(index))
    elif states == "all":
        vertices = np.arange(len(index))
    else:
        raise ValueError(f"unknown vertex set {states!r}")
    local = np.full(len(index), -1, dtype=np.int64)
    local[vertices] = np.arange(len(vertices))
    end = index.end[vertices]
    gext = index.ext[vertices]
    ext = np.where(gext >= 0, local[np.maximum(gext, 0)], -1).astype(np.int64)
    return Frame(index, tables, vertices, local, end,
                 np.ascontiguousarray(tables.f[vertices]),
                 np.ascontiguousarray(tables.phi[vertices]), np.ascontiguousarray(ext),
                 np.searchsorted(end, end, "right").astype(np.int64),
                 np.searchsorted(end, end, "left").astype(np.int64))


@dataclass
class LevelMessages:
    """``levels[k]`` holds M_k; ``tilde[k]`` the level-k values before the horizontal pass."""

    frame: Frame
    levels: list = field(default_factory=list)
    tilde: list = field(default_factory=list)
    counters: dict = field(default_factory=dict)

    def _loc(self, p) -> int:
        g = self.frame.index.id(p) if isinstance(p, Pattern) else int(p)
        k = int(self.frame.local[g])
        if k < 0:
            raise KeyError(f"pattern {self.frame.index.patterns[g]} is not a vertex")
        return k

    def value(self, k: int, alpha, beta) -> float:
        return float(self.levels[k][self._loc(alpha), self._loc(beta)])


# ----------------------------------------------------------------------------- kernels

@njit(cache=True)
def _m0_kernel(ext, phi, f, out):
    V, D = ext.shape
    steps = 0
    for a0 in range(V):
        row = out[a0]
        for v in range(V):
            row[v] = np.inf
        row[a0] = f[a0]
        for v in range(a0, V):
            val = row[v]
            if val == np.inf:
                continue
            for a in range(D):
                t = ext[v, a]
                if t >= 0:
                    row[t] = min(row[t], val + phi[t])
            steps += D
    return steps


@njit(cache=True)
def _vertical_kernel(prev, out, au, cu, bv, cv, theta, end):
    V = prev.shape[0]
    for a in range(V):
        a2 = au[a]
        if a2 < 0:
            continue
        row = prev[a2]
        orow = out[a]
        base = cu[a]
        i = end[a] + 1
        for g in range(a2, V):
            val = row[g]
            if val == np.inf:
                continue
            b = bv[g]
            if b < 0:
                continue
            c = val + base + cv[g] + theta[i, end[b]]
            if c < orow[b]:
                orow[b] = c


@njit(cache=True)
def _sssp_kernel(mt, f, first, src):
    V = mt.shape[0]
    dist = np.full(V, np.inf)
    dist[src] = 0.0
    relax = 0
    for w in range(src, V):
        dw = dist[w]
        if dw == np.inf:
            continue
        row = mt[w]
        for v in range(first[w], V):
            dist[v] = min(dist[v], dw + (row[v] - f[v]))
        relax += V - first[w]
    return dist + f, relax


# ----------------------------------------------------------------------------- passes

def compute_M0(index: PatternIndex, tables: CostTables, states: str = "all",
               frame: Frame | None = None) -> LevelMessages:
    """Pattern-only messages M_0(α, β) for every ordered pair of vertices."""
    frame = frame or make_frame(index, tables, states)
    V = len(frame)
    m0 = np.empty((V, V))
    steps = _m0_kernel(frame.ext, frame.phi, frame.f, m0)
    return LevelMessages(frame, [m0], [None], {"m0_steps": int(steps)})


def theta_grid(ig: InteractionGrammar, k: int, p: int, n: int) -> np.ndarray:
    """Dense ``grid[i, j]`` = θ^k_p on span [i, j] for 0 <= i, j <= n (row 0 unused)."""
    i = np.arange(n + 1)[:, None]
    j = np.arange(n + 1)[None, :]
    sw = ig.span_theta.get((k, p))
    if sw is None:
        return np.full((n + 1, n + 1), float(ig.theta[k - 1, p]))
    safe_i = np.maximum(i, 1)
    return np.asarray(sw.grid(np.broadcast_to(safe_i, (n + 1, n + 1)),
                              np.broadcast_to(j, (n + 1, n + 1))), dtype=float)


@dataclass
class PairWalks:
    au: list
    cu: list
    bv: list
    cv: list


def pair_walks(frame: Frame, ig: InteractionGrammar) -> PairWalks:
    out = PairWalks([], [], [], [])
    for u, v in ig.pairs:
        a, fa = frame.walk(u)
        b, fb = frame.walk(v)
        ca = fa - frame.f[np.maximum(a, 0)]     # f(αu) - f(lsp(αu))
        cb = fb - frame.f                       # f(γv) - f(γ)
        out.au.append(a)
        out.cu.append(ca)
        out.bv.append(b)
        out.cv.append(cb)
    return out


def vertical_pass(msgs: LevelMessages, k: int, ig: InteractionGrammar,
                  walks: PairWalks | None = None, prev: np.ndarray | None = None
                  ) -> tuple[np.ndarray, int]:
    """Candidates M̃_k: level k-1 carried over, improved by one rule S^k -> u S^(k-1) v.

    Returns the matrix and the number of (u, v, γ) triples enumerated.
    """
    frame = msgs.frame
    walks = walks or pair_walks(frame, ig)
    prev = msgs.levels[k - 1] if prev is None else prev
    out = prev.copy()
    triples = 0
    n = frame.index.n
    for p in range(len(ig.pairs)):
        triples += int(np.count_nonzero(walks.bv[p] >= 0))
        _vertical_kernel(prev, out, walks.au[p], walks.cu[p], walks.bv[p], walks.cv[p],
                         theta_grid(ig, k, p, n), frame.end)
    return out, triples


def horizontal_pass(tilde: np.ndarray, frame: Frame, backend: str = "useful_edge"):
    """M_k = SP + f(β) on the DAG with edge costs M̃_k(α, β) - f(β)."""
    return shortest_paths(tilde, frame.f, frame.first, frame.lo, backend)


# ----------------------------------------------------------------------------- driver

@dataclass
class Algorithm2Run:
    value: float
    labeling: tuple | None
    derivation: Derivation | None
    messages: LevelMessages
    counters: dict


def run_algorithm2_full(index: PatternIndex, tables: CostTables, ig: InteractionGrammar,
                        backend: str = "useful_edge", keep_levels: bool = True,
                        argmin: bool = True, states: str = "reachable") -> Algorithm2Run:
    frame = make_frame(index, tables, states)
    msgs = compute_M0(index, tables, frame=frame)
    walks = pair_walks(frame, ig)
    counters = dict(msgs.counters)
    counters.update(triples=[], useful_edges=[], relaxations=[])
    current = msgs.levels[0]
    for k in range(1, ig.depth + 1):
        tilde, triples = vertical_pass(msgs, k, ig, walks, prev=current)
        full, stats = horizontal_pass(tilde, frame, backend)
        counters["triples"].append(triples)
        counters["useful_edges"].append(stats.useful_edges)
        counters["relaxations"].append(stats.relaxations)
        if keep_levels:
            msgs.tilde.append(tilde)
            msgs.levels.append(full)
        else:
            del tilde
            msgs.levels = [full]
        current = full
    msgs.counters = counters
    finals = list(frame.group(index.n))
    row = current[0, finals]
    value = float(row.min())
    labeling = derivation = None
    if argmin and value < INF:
        if not keep_levels:
            raise ValueError("argmin extraction needs keep_levels=True")
        labeling, derivation = _extract(msgs, ig, walks, finals[int(np.argmin(row))])
    return Algorithm2Run(value, labeling, derivation, msgs, counters)


def run_algorithm2(index: PatternIndex, tables: CostTables, ig: InteractionGrammar,
                   backend: str = "useful_edge"):
    """(M, argmin labeling, derivation) for the interaction grammar ``ig``."""
    run = run_algorithm2_full(index, tables, ig, backend)
    return run.value, run.labeling, run.derivation


def run_d1_single_source(index: PatternIndex, tables: CostTables, ig: InteractionGrammar,
                         counters: dict | None = None) -> float:
    """Depth-1 minimum with one DAG shortest-path pass from ε_0 instead of APSP."""
    if ig.depth != 1:
        raise ValueError("the single-source variant needs an interaction grammar of depth 1")
    frame = make_frame(index, tables)
    msgs = compute_M0(index, tables, frame=frame)
    tilde, triples = vertical_pass(msgs, 1, ig)
    dist, relax = _sssp_kernel(tilde, frame.f, frame.first, 0)
    if counters is not None:
        counters.update(m0_steps=msgs.counters["m0_steps"], triples=triples,
                        relaxations=int(relax))
    return float(dist[list(frame.group(index.n))].min())


# ----------------------------------------------------------------------------- argmin

def _s(k):
    return f"S{k}"


def _epsilon_tree(k: int, pos: int) -> Derivation:
    node = Derivation(Rule.epsilon(_s(0)), pos + 1, pos, 0.0)
    for j in range(1, k + 1):
        node = Derivation(Rule(_s(j), (_s(j - 1),)), pos + 1, pos, 0.0, (node,))
    return node


def _chain(k: int, pieces: list[Derivation]) -> Derivation:
    node = pieces[-1]
    for left in reversed(pieces[:-1]):
        node = Derivation(Rule.binary(_s(k), _s(k), _s(k)), left.start, node.end, 0.0,
                          (left, node))
    return node


def _extract(msgs: LevelMessages, ig: InteractionGrammar, walks: PairWalks, beta: int):
    """Rebuild an optimal labeling and parse by searching the stored level tables."""
    frame = msgs.frame
    index = frame.index
    labels: list = [None] * index.n
    alphabet = index.alphabet
    end, f = frame.end, frame.f

    def level0(a, b):
        pieces = []
        m0 = msgs.levels[0]
        cur = b
        while cur != a:
            j = int(end[cur])
            cand = np.array(list(frame.group(j - 1)), dtype=np.int64)
            hits = frame.ext[cand] == cur
            q_idx, sym = np.nonzero(hits)
            vals = m0[a, cand[q_idx]]
            t = int(np.argmin(vals))
            labels[j - 1] = alphabet[sym[t]]
            pieces.append(Derivation(Rule.word(_s(0), (alphabet[sym[t]],)), j, j, 0.0,
                                     (alphabet[sym[t]],)))
            cur = int(cand[q_idx[t]])
        return pieces[::-1]

    def span(k, a, b) -> Derivation:
        if a == b:
            return _epsilon_tree(k, int(end[a]))
        pieces = level0(a, b) if k == 0 else full_pieces(k, a, b)
        return _chain(k, pieces)

    def full_pieces(k, a, b):
        pieces = []
        mk, tk = msgs.levels[k], msgs.tilde[k]
        while b != a:
            lo = int(frame.lo[b])
            vals = mk[a, a:lo] - f[a:lo] + tk[a:lo, b]
            g = a + int(np.argmin(vals))
            pieces.append(tilde_piece(k, g, b))
            b = g
        return pieces[::-1]

    def tilde_piece(k, a, b) -> Derivation:
        prev = msgs.levels[k - 1]
        i, j = int(end[a]) + 1, int(end[b])
        best, choice = prev[a, b], None
        for p, (u, v) in enumerate(ig.pairs):
            a2 = walks.au[p][a]
            if a2 < 0:
                continue
            gs = np.flatnonzero(walks.bv[p] == b)
            if not len(gs):
                continue
            theta = ig.weight(k, p, i, j)
            vals = prev[a2, gs] + walks.cu[p][a] + walks.cv[p][gs] + theta
            t = int(np.argmin(vals))
            if vals[t] < best:
                best, choice = vals[t], (p, int(a2), int(gs[t]), theta)
        if choice is None:
            return Derivation(Rule(_s(k), (_s(k - 1),)), i, j, 0.0, (span(k - 1, a, b),))
        p, a2, g, theta = choice
        u, v = ig.pairs[p]
        labels[i - 1:i - 1 + len(u)] = u
        labels[j - len(v):j] = v
        mid = span(k - 1, a2, g)
        rule = Rule(_s(k), tuple(u) + (_s(k - 1),) + tuple(v), theta)
        return Derivation(rule, i, j, theta, tuple(u) + (mid,) + tuple(v))

    root = span(ig.depth, 0, beta)
    return tuple(labels), root

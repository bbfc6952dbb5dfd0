"""Left-to-right minimization for depth-1 interaction grammars.

Each position carries one value per (dotted rule state, lsp state).  A dotted
state is one of: outside any rule, ``t`` letters of ``u`` read, inside the
middle word (at least one letter read), or ``t`` letters of ``v`` read.  A rule
completes when the last letter of ``v`` is read; the value then flows back into
the outside state.  Rule weights must be scalar or separable,
``ν(r, i, j) = f(r, i) + g(r, j)``: the ``f`` part is paid when ``u`` starts and
the ``g`` part on completion.
"""
from __future__ import annotations

import math

import numpy as np

from .grammar import InteractionGrammar
from .interaction import make_frame
from .patterns import CostTables, PatternIndex

STEP_CONSTANT = 32


class UnsupportedWeights(ValueError):
    """Position-dependent weights that do not split into start and end parts."""


def _separable_parts(ig: InteractionGrammar, p: int, n: int):
    sw = ig.span_theta.get((1, p))
    if sw is None:
        return np.zeros(n + 2), np.full(n + 2, float(ig.theta[0, p]))
    if not sw.separable:
        raise UnsupportedWeights(
            f"pair {p} has a non-separable span weight; only f(r,i) + g(r,j) is supported")
    left = np.zeros(n + 2)
    right = np.zeros(n + 2)
    m = min(n + 2, len(sw.left))
    left[:m] = sw.left[:m]
    m = min(n + 2, len(sw.right))
    right[:m] = sw.right[:m]
    return left, right


def earley_step_bound(index: PatternIndex, ig: InteractionGrammar, k: int = STEP_CONSTANT) -> float:
    """K·(|P|·nL·(l_min·min(|D|, log2 l_min) + |P|) + nL·|D|), with nL = n(L+1)+1."""
    n, L = index.n, index.total_length
    nl = n * (L + 1) + 1
    lengths = [len(w) for w in index.weights.vocabulary] or [1]
    lmin = min(lengths)
    D = len(index.alphabet)
    P = len(ig.pairs)
    return k * (P * nl * (lmin * min(D, math.log2(lmin)) + P) + nl * D)


def run_d1_earley(index: PatternIndex, tables: CostTables, ig: InteractionGrammar,
                  counters: dict | None = None) -> float:
    """min over x of f(x) + C(x) for a depth-1 interaction grammar."""
    if ig.depth != 1:
        raise ValueError("the Earley-style algorithm needs an interaction grammar of depth 1")
    n = index.n
    parts = [_separable_parts(ig, p, n) for p in range(len(ig.pairs))]
    frame = make_frame(index, tables)
    V = len(frame)
    sym = index.symbol
    pairs = [([sym[a] for a in u], [sym[a] for a in v]) for u, v in ig.pairs]
    D = len(index.alphabet)

    out = np.full(V, np.inf)
    out[0] = 0.0
    us = [np.full((len(u), V), np.inf) for u, _ in pairs]
    mids = [np.full(V, np.inf) for _ in pairs]
    vs = [np.full((len(v), V), np.inf) for _, v in pairs]   # row t: t+1 letters of v read
    steps = 0

    for j in range(n):
        cols = np.arange(frame.group(j).start, frame.group(j).stop)
        nxt_out = np.full(V, np.inf)
        nxt_us = [np.full_like(a, np.inf) for a in us]
        nxt_mids = [np.full(V, np.inf) for _ in mids]
        nxt_vs = [np.full_like(a, np.inf) for a in vs]
        tgt = frame.ext[cols]                      # (|cols|, D)
        gain = frame.phi[tgt]

        def relax(dst, src, a):
            nonlocal steps
            vals = src[cols] + gain[:, a]
            ok = vals < np.inf
            steps += int(np.count_nonzero(ok))
            np.minimum.at(dst, tgt[ok, a], vals[ok])

        for a in range(D):
            relax(nxt_out, out, a)
        for p, (u, v) in enumerate(pairs):
            left, right = parts[p]
            # outside -> first letter of u, paying the start part of the weight
            relax(nxt_us[p][0], out + left[j + 1], u[0])
            for t in range(1, len(u)):
                relax(nxt_us[p][t], us[p][t - 1], u[t])
            done_u = us[p][-1]
            for src in (done_u, mids[p]):
                for a in range(D):
                    relax(nxt_mids[p], src, a)
                relax(nxt_vs[p][0], src, v[0])
            for t in range(1, len(v)):
                relax(nxt_vs[p][t], vs[p][t - 1], v[t])
        # completions at position j + 1
        for p, (u, v) in enumerate(pairs):
            _, right = parts[p]
            np.minimum(nxt_out, nxt_vs[p][-1] + right[j + 1], out=nxt_out)
            nxt_vs[p][-1] = np.inf
        out, us, mids, vs = nxt_out, nxt_us, nxt_mids, nxt_vs

    if counters is not None:
        counters["earley_steps"] = steps
    final = list(frame.group(n))
    return float(out[final].min())

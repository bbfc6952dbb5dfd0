"""Brute-force ground truth.

Everything here is deliberately naive and shares no code with the message
algorithms; it only relies on CYK and derivation enumeration from
:mod:`gpb.grammar`.  Enumeration limits are hard: exceeding one raises
:class:`OracleRefusal` instead of truncating.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .grammar import (CnfGrammar, DerivationOverflow, InteractionGrammar,
                      compile_interaction_grammar, cyk_min_parse, enumerate_derivations)
from .patterns import Pattern, PatternWeights, as_word

MAX_LABELINGS = 10 ** 6
MAX_DERIVATIONS = 10 ** 4


class OracleRefusal(RuntimeError):
    """The instance is too large to enumerate."""


@dataclass(frozen=True, eq=False)
class Instance:
    weights: PatternWeights
    grammar: CnfGrammar | InteractionGrammar
    objective: str = "min"

    def cnf(self) -> CnfGrammar:
        if isinstance(self.grammar, InteractionGrammar):
            return compile_interaction_grammar(self.grammar)
        return self.grammar


def naive_f(x, weights: PatternWeights) -> float:
    x = as_word(x)
    total = 0.0
    for (w, i), c in weights.costs.items():
        if tuple(x[i - 1:i - 1 + len(w)]) == w:
            total += c
    return total


def _labelings(weights: PatternWeights):
    count = len(weights.alphabet) ** weights.n
    if count > MAX_LABELINGS:
        raise OracleRefusal(
            f"{count} labelings exceed the enumeration bound |D|^n <= {MAX_LABELINGS}")
    return itertools.product(weights.alphabet, repeat=weights.n)


def brute_min(inst: Instance):
    """(min over x of f(x) + C(x), lexicographically first minimizer or None)."""
    g = inst.cnf()
    best, arg = math.inf, None
    for x in _labelings(inst.weights):
        c, _ = cyk_min_parse(x, g)
        if c == math.inf:
            continue
        val = naive_f(x, inst.weights) + c
        if val < best:
            best, arg = val, x
    return best, arg


def brute_logZ(inst: Instance) -> float:
    """log Σ over (x, λ) of exp(-f(x) - cost(λ))."""
    g = inst.cnf()
    terms = []
    for x in _labelings(inst.weights):
        try:
            derivs = enumerate_derivations(x, g, cap=MAX_DERIVATIONS)
        except DerivationOverflow as exc:
            raise OracleRefusal(str(exc)) from exc
        fx = naive_f(x, inst.weights)
        terms.extend(-(fx + d.cost()) for d in derivs)
    terms = [t for t in terms if t != -math.inf]
    if not terms:
        return -math.inf
    m = max(terms)
    return m + math.log(sum(math.exp(t - m) for t in terms))


def interaction_min_cost(x, ig: InteractionGrammar) -> float:
    """Least derivation cost of ``x`` from ``S^d`` using the raw interaction rules."""
    x = as_word(x)
    n = len(x)

    @lru_cache(maxsize=None)
    def cost(k, i, j):
        if k == 0 or i == j:
            return 0.0
        best = cost(k - 1, i, j)
        for p, (u, v) in enumerate(ig.pairs):
            if i + len(u) + len(v) <= j and x[i:i + len(u)] == u and x[j - len(v):j] == v:
                inner = cost(k - 1, i + len(u), j - len(v))
                best = min(best, ig.weight(k, p, i + 1, j) + inner)
        for t in range(i + 1, j):
            best = min(best, cost(k, i, t) + cost(k, t, j))
        return best

    return cost(ig.depth, 0, n)


# ---------------------------------------------------------------- structural oracles

def naive_closure(weights: PatternWeights) -> set[Pattern]:
    out = {Pattern.empty(s) for s in range(weights.n + 1)}
    for w in weights.vocabulary:
        for i in range(1, weights.n - len(w) + 2):
            for k in range(1, len(w) + 1):
                out.add(Pattern(i, i + k - 1, w[:k]))
    return out


def _suffixes(p: Pattern):
    for k in range(len(p.word) + 1):
        yield Pattern(p.start + k, p.end, p.word[k:])


def naive_lsp(weights: PatternWeights, p: Pattern) -> Pattern:
    closure = naive_closure(weights)
    return max((q for q in _suffixes(p) if q in closure), key=len)


def naive_forest(weights: PatternWeights, s: int) -> set[tuple[Pattern, Pattern]]:
    group = [p for p in naive_closure(weights) if p.end == s]
    edges = set()
    for a in group:
        for b in group:
            if len(b) > len(a) and b.word[len(b) - len(a):] == a.word:
                between = any(len(b) > len(c) > len(a) and b.word[len(b) - len(c):] == c.word
                              for c in group)
                if not between:
                    edges.add((a, b))
    return edges


def _placements(weights: PatternWeights):
    for w in weights.vocabulary:
        for i in range(1, weights.n - len(w) + 2):
            yield Pattern(i, i + len(w) - 1, w), weights.costs.get((w, i), 0.0)


def naive_phi(weights: PatternWeights, p: Pattern) -> float:
    return sum(c for q, c in _placements(weights)
               if q.end == p.end and q.start >= p.start
               and p.word[q.start - p.start:] == q.word)


def naive_pattern_f(weights: PatternWeights, p: Pattern) -> float:
    return sum(c for q, c in _placements(weights)
               if q.start >= p.start and q.end <= p.end
               and p.word[q.start - p.start:q.end - p.start + 1] == q.word)


def naive_tables(weights: PatternWeights):
    """Dictionaries phi[p], f[p] and f_pair[(a, b)] by exhaustive scans."""
    closure = sorted(naive_closure(weights))
    phi = {p: naive_phi(weights, p) for p in closure}
    f = {p: naive_pattern_f(weights, p) for p in closure}
    pair = {}
    for a in closure:
        for b in closure:
            if b.start == a.end + 1:
                ab = Pattern(a.start, b.end, a.word + b.word)
                pair[(a, b)] = naive_pattern_f(weights, ab)
    return phi, f, pair


def pattern_viterbi(weights: PatternWeights) -> float:
    """min over x of f(x) by a plain window DP over the last (ℓ_max - 1) labels."""
    n = weights.n
    if n == 0:
        return 0.0
    span = max((len(w) for w in weights.vocabulary), default=1)
    keep = max(span - 1, 0)

    def gain(window, i):
        # cost of placements ending at position i (1-based), window ends at i
        total = 0.0
        for w in weights.vocabulary:
            k = len(w)
            if k <= len(window) and tuple(window[len(window) - k:]) == w:
                total += weights.costs.get((w, i - k + 1), 0.0)
        return total

    best = {(): 0.0}
    for i in range(1, n + 1):
        nxt = {}
        for ctx, val in best.items():
            for a in weights.alphabet:
                window = ctx + (a,)
                v = val + gain(window, i)
                key = window[len(window) - keep:] if keep else ()
                if v < nxt.get(key, np.inf):
                    nxt[key] = v
        best = nxt
    return min(best.values())

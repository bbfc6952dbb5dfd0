"""Weighted grammars in extended CNF, interaction grammars, and CYK.

Extended CNF allows three rule shapes: ``A -> B C``, ``A -> w`` for a non-empty
word ``w`` and ``S -> ε`` for the start symbol.  The epsilon rule only derives
the empty chain; it never fires inside a longer derivation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .patterns import PatternWeights, Word, as_word

INF = math.inf


@dataclass(frozen=True)
class SpanWeight:
    """Position-dependent rule weight ν(r, i, j) over 1-based spans.

    Either a dense ``table`` with ``table[i, j]`` = weight of span ``[i, j]``, or a
    separable form ``left[i] + right[j]``.
    """

    table: np.ndarray | None = None
    left: np.ndarray | None = None
    right: np.ndarray | None = None

    def __post_init__(self):
        if (self.table is None) == (self.left is None or self.right is None):
            raise ValueError("give either a span table or both separable parts")

    @property
    def separable(self) -> bool:
        return self.table is None

    def __call__(self, i: int, j: int) -> float:
        if self.table is not None:
            return float(self.table[i, j])
        return float(self.left[i] + self.right[j])

    def grid(self, i, j) -> np.ndarray:
        """Broadcast evaluation over arrays of span starts and ends."""
        i, j = np.asarray(i), np.asarray(j)
        if self.table is not None:
            return self.table[i, j]
        return self.left[i] + self.right[j]

    def __eq__(self, other):
        if not isinstance(other, SpanWeight):
            return NotImplemented
        def same(a, b):
            return (a is None and b is None) or (
                a is not None and b is not None and np.array_equal(a, b))
        return same(self.table, other.table) and same(self.left, other.left) \
            and same(self.right, other.right)

    __hash__ = None


@dataclass(frozen=True)
class Rule:
    """A grammar rule.  ``terminal`` rules have a word (possibly empty) on the right."""

    lhs: str
    rhs: tuple
    weight: float = 0.0
    terminal: bool = False

    @classmethod
    def binary(cls, lhs, b, c, weight=0.0):
        return cls(lhs, (b, c), float(weight))

    @classmethod
    def word(cls, lhs, w, weight=0.0):
        return cls(lhs, as_word(w), float(weight), terminal=True)

    @classmethod
    def epsilon(cls, lhs, weight=0.0):
        return cls(lhs, (), float(weight), terminal=True)

    @property
    def is_binary(self):
        return not self.terminal and len(self.rhs) == 2

    @property
    def is_word(self):
        return self.terminal and len(self.rhs) > 0

    @property
    def is_epsilon(self):
        return self.terminal and len(self.rhs) == 0

    def __str__(self):
        rhs = "".join(self.rhs) if self.terminal else " ".join(self.rhs)
        return f"{self.lhs} -> {rhs or 'ε'}"


@dataclass(frozen=True, eq=False)
class CnfGrammar:
    nonterminals: tuple[str, ...]
    start: str
    rules: tuple[Rule, ...]
    span_weights: Mapping[int, SpanWeight] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "nonterminals", tuple(self.nonterminals))
        object.__setattr__(self, "rules", tuple(self.rules))
        object.__setattr__(self, "span_weights", dict(self.span_weights))

    def __eq__(self, other):
        if not isinstance(other, CnfGrammar):
            return NotImplemented
        return (self.nonterminals, self.start, self.rules) == \
            (other.nonterminals, other.start, other.rules) and \
            self.span_weights == other.span_weights

    __hash__ = None

    def weight(self, r: int, i: int, j: int) -> float:
        """ν(r, i, j); falls back to the scalar rule weight."""
        sw = self.span_weights.get(r)
        return sw(i, j) if sw is not None else self.rules[r].weight

    def weight_grid(self, r: int, i, j) -> np.ndarray | float:
        sw = self.span_weights.get(r)
        return sw.grid(i, j) if sw is not None else self.rules[r].weight

    def terminal_words(self) -> set[Word]:
        return {r.rhs for r in self.rules if r.is_word}

    def nt_index(self) -> dict[str, int]:
        return {a: k for k, a in enumerate(self.nonterminals)}


@dataclass(frozen=True, eq=False)
class InteractionGrammar:
    """Interaction grammar of depth ``depth`` over interacting word pairs.

    ``theta[k - 1][p]`` is the weight of ``S^k -> u_p S^(k-1) v_p``;
    ``span_theta[(k, p)]`` optionally replaces it by a span-dependent weight.
    """

    alphabet: tuple[str, ...]
    pairs: tuple[tuple[Word, Word], ...]
    depth: int
    theta: np.ndarray
    span_theta: Mapping[tuple[int, int], SpanWeight] = field(default_factory=dict)

    def __post_init__(self):
        pairs = tuple((as_word(u), as_word(v)) for u, v in self.pairs)
        object.__setattr__(self, "pairs", pairs)
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        theta = np.asarray(self.theta, dtype=float).reshape(self.depth, len(pairs))
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "span_theta", dict(self.span_theta))
        if self.depth < 1:
            raise ValueError("interaction depth must be at least 1")
        for u, v in pairs:
            if not u or not v:
                raise ValueError("interacting words must be non-empty")
            for a in u + v:
                if a not in self.alphabet:
                    raise ValueError(f"label {a!r} is not in the alphabet")

    def __eq__(self, other):
        if not isinstance(other, InteractionGrammar):
            return NotImplemented
        return (self.alphabet, self.pairs, self.depth) == \
            (other.alphabet, other.pairs, other.depth) and \
            np.array_equal(self.theta, other.theta) and self.span_theta == other.span_theta

    __hash__ = None

    def weight(self, k: int, p: int, i: int, j: int) -> float:
        sw = self.span_theta.get((k, p))
        return sw(i, j) if sw is not None else float(self.theta[k - 1, p])

    def weight_grid(self, k: int, p: int, i, j):
        sw = self.span_theta.get((k, p))
        return sw.grid(i, j) if sw is not None else float(self.theta[k - 1, p])

    def words(self) -> set[Word]:
        return {w for pair in self.pairs for w in pair}


@dataclass
class Derivation:
    """Parse tree node.  ``children`` mixes sub-derivations and terminal labels."""

    rule: object
    start: int
    end: int
    weight: float
    children: tuple = ()

    def cost(self) -> float:
        return self.weight + sum(c.cost() for c in self.children if isinstance(c, Derivation))

    def yield_(self) -> Word:
        out: list[str] = []
        for c in self.children:
            out.extend(c.yield_() if isinstance(c, Derivation) else (c,))
        return tuple(out)

    def check_spans(self) -> bool:
        pos = self.start
        for c in self.children:
            if isinstance(c, Derivation):
                if c.start != pos or not c.check_spans():
                    return False
                pos = c.end + 1
            else:
                pos += 1
        return pos == self.end + 1

    def bracketed(self) -> str:
        lhs = getattr(self.rule, "lhs", "?")
        parts = [c.bracketed() if isinstance(c, Derivation) else c for c in self.children]
        return f"({lhs} {' '.join(parts)})" if parts else f"({lhs} ε)"


class DerivationOverflow(RuntimeError):
    pass


# --------------------------------------------------------------------------- validation

def validate_cnf(g: CnfGrammar, vocabulary: Iterable | None = None) -> list[str]:
    """Every extended-CNF violation of ``g``; an empty list means valid."""
    problems = []
    nts = set(g.nonterminals)
    if g.start not in nts:
        problems.append(f"start symbol {g.start!r} is not a nonterminal")
    vocab = None if vocabulary is None else {as_word(w) for w in vocabulary}
    for r in g.rules:
        if r.lhs not in nts:
            problems.append(f"rule {r}: unknown nonterminal {r.lhs!r}")
        if r.terminal:
            if r.is_epsilon and r.lhs != g.start:
                problems.append(f"rule {r}: epsilon rule allowed only for the start symbol")
            if r.is_word and vocab is not None and r.rhs not in vocab:
                problems.append(f"rule {r}: terminal word not in Λ")
        elif len(r.rhs) != 2:
            problems.append(f"rule {r}: rule arity {len(r.rhs)} (binary rules need 2)")
        else:
            for b in r.rhs:
                if b not in nts:
                    problems.append(f"rule {r}: unknown nonterminal {b!r}")
    reach = {g.start}
    frontier = [g.start]
    while frontier:
        a = frontier.pop()
        for r in g.rules:
            if r.lhs == a and not r.terminal:
                for b in r.rhs:
                    if b in nts and b not in reach:
                        reach.add(b)
                        frontier.append(b)
    for a in g.nonterminals:
        if a not in reach:
            problems.append(f"unreachable nonterminal {a!r}")
    for r_idx in g.span_weights:
        if not 0 <= r_idx < len(g.rules):
            problems.append(f"span weights given for unknown rule index {r_idx}")
    return problems


def normalize_terminal_words(g: CnfGrammar, weights: PatternWeights):
    """Add every terminal word of ``g`` missing from Λ at zero cost."""
    missing = g.terminal_words() - set(weights.vocabulary)
    if not missing:
        return g, weights
    return g, weights.with_words(missing)


# --------------------------------------------------------------------------- compilation

def _nt_x(w: Word) -> str:
    return "X:" + ".".join(w)


def compile_interaction_grammar(ig: InteractionGrammar, vocabulary: Iterable | None = None
                                ) -> CnfGrammar:
    """Extended-CNF grammar deriving the same strings at the same least cost.

    Nullable symbols (every ``S^k``) are eliminated first, then the zero-weight
    unit chains ``S^k => S^j`` (j <= k), then ``u S v`` bodies are binarized as
    ``S^k -> X_u Y`` / ``Y -> S^(j-1) X_v``; the pair weight sits on ``S^k -> X_u Y``
    (or ``S^k -> X_u X_v`` for the empty middle) and is evaluated on the outer span.
    """
    d = ig.depth
    if vocabulary is not None:
        vocab = {as_word(w) for w in vocabulary}
        for w in sorted(ig.words() - vocab):
            raise ValueError(f"interacting word {''.join(w)!r} is not in Λ")
    level = [f"S{k}" for k in range(d + 1)]
    words = sorted(ig.words())
    carriers = [f"Y{j}:{p}" for j in range(1, d + 1) for p in range(len(ig.pairs))]
    nts = level + [_nt_x(w) for w in words] + carriers
    rules: list[Rule] = []
    span_weights: dict[int, SpanWeight] = {}

    def carrier_rule(lhs, b, c, j, p):
        rules.append(Rule.binary(lhs, b, c, ig.theta[j - 1, p]))
        if (j, p) in ig.span_theta:
            span_weights[len(rules) - 1] = ig.span_theta[(j, p)]

    for k in range(d + 1):
        for j in range(k + 1):
            rules.append(Rule.binary(level[k], level[j], level[j]))
        for a in ig.alphabet:
            rules.append(Rule.word(level[k], (a,)))
        for j in range(1, k + 1):
            for p, (u, v) in enumerate(ig.pairs):
                carrier_rule(level[k], _nt_x(u), f"Y{j}:{p}", j, p)
                carrier_rule(level[k], _nt_x(u), _nt_x(v), j, p)
    for j in range(1, d + 1):
        for p, (u, v) in enumerate(ig.pairs):
            rules.append(Rule.binary(f"Y{j}:{p}", level[j - 1], _nt_x(v)))
    for w in words:
        rules.append(Rule.word(_nt_x(w), w))
    rules.append(Rule.epsilon(level[d]))
    return CnfGrammar(tuple(nts), level[d], tuple(rules), span_weights)


# --------------------------------------------------------------------------- CYK

def _chart_setup(x, g: CnfGrammar):
    x = as_word(x)
    nt = g.nt_index()
    binary = [(r, nt[rule.lhs], nt[rule.rhs[0]], nt[rule.rhs[1]])
              for r, rule in enumerate(g.rules) if rule.is_binary]
    words = [(r, nt[rule.lhs], rule.rhs) for r, rule in enumerate(g.rules) if rule.is_word]
    return x, nt, binary, words


def cyk_min_parse(x, g: CnfGrammar, offset: int = 0):
    """Least-weight derivation of ``x`` from the start symbol.

    Returns ``(cost, derivation)``; ``(inf, None)`` when ``x`` is not derivable.
    Span positions are 1-based, shifted by ``offset``.
    """
    x, nt, binary, words = _chart_setup(x, g)
    n = len(x)
    if n == 0:
        best, arg = INF, None
        for r, rule in enumerate(g.rules):
            if rule.is_epsilon and rule.lhs == g.start:
                w = g.weight(r, offset + 1, offset)
                if w < best:
                    best, arg = w, r
        if arg is None or best == INF:
            return INF, None
        return best, Derivation(g.rules[arg], offset + 1, offset, best)
    m = len(g.nonterminals)
    # chart[i][j][A] over 0-based half-open spans [i, j); plain lists beat numpy at this size
    chart = [[[INF] * m for _ in range(n + 1)] for _ in range(n + 1)]
    back: dict = {}
    for r, a, w in words:
        k = len(w)
        for i in range(n - k + 1):
            if x[i:i + k] == w:
                c = g.weight(r, offset + i + 1, offset + i + k)
                if c < chart[i][i + k][a]:
                    chart[i][i + k][a] = c
                    back[i, i + k, a] = (r, None)
    for span in range(2, n + 1):
        for i in range(n - span + 1):
            j = i + span
            cell = chart[i][j]
            for r, a, b, c in binary:
                best, arg = INF, -1
                for t in range(i + 1, j):
                    v = chart[i][t][b] + chart[t][j][c]
                    if v < best:
                        best, arg = v, t
                if arg < 0:
                    continue
                val = best + g.weight(r, offset + i + 1, offset + j)
                if val < cell[a]:
                    cell[a] = val
                    back[i, j, a] = (r, arg)
    s = nt[g.start]
    cost = float(chart[0][n][s])
    if cost == INF:
        return INF, None

    def build(i, j, a):
        r, t = back[i, j, a]
        rule = g.rules[r]
        w = g.weight(r, offset + i + 1, offset + j)
        if t is None:
            return Derivation(rule, offset + i + 1, offset + j, w, tuple(rule.rhs))
        return Derivation(rule, offset + i + 1, offset + j, w,
                          (build(i, t, nt[rule.rhs[0]]), build(t, j, nt[rule.rhs[1]])))

    return cost, build(0, n, s)


def _logaddexp_reduce(v: np.ndarray) -> float:
    m = np.max(v) if v.size else -INF
    if m == -INF:
        return -INF
    return float(m + np.log(np.sum(np.exp(v - m))))


def cyk_log_inside(x, g: CnfGrammar, offset: int = 0) -> float:
    """log of Σ over derivations λ of x of exp(-cost(λ)); -inf if underivable."""
    x, nt, binary, words = _chart_setup(x, g)
    n = len(x)
    if n == 0:
        terms = [-g.weight(r, offset + 1, offset) for r, rule in enumerate(g.rules)
                 if rule.is_epsilon and rule.lhs == g.start]
        return _logaddexp_reduce(np.array(terms)) if terms else -INF
    m = len(g.nonterminals)
    chart = np.full((n + 1, n + 1, m), -INF)
    for r, a, w in words:
        k = len(w)
        for i in range(n - k + 1):
            if x[i:i + k] == w:
                chart[i, i + k, a] = np.logaddexp(
                    chart[i, i + k, a], -g.weight(r, offset + i + 1, offset + i + k))
    for span in range(2, n + 1):
        for i in range(n - span + 1):
            j = i + span
            for r, a, b, c in binary:
                tot = chart[i, i + 1:j, b] + chart[i + 1:j, j, c]
                val = _logaddexp_reduce(tot) - g.weight(r, offset + i + 1, offset + j)
                chart[i, j, a] = np.logaddexp(chart[i, j, a], val)
    return float(chart[0, n, nt[g.start]])


def enumerate_derivations(x, g: CnfGrammar, cap: int = 10_000, offset: int = 0
                          ) -> list[Derivation]:
    """All derivations of ``x`` from the start symbol; raises past ``cap``."""
    x = as_word(x)
    n = len(x)
    if n == 0:
        return [Derivation(rule, offset + 1, offset, g.weight(r, offset + 1, offset))
                for r, rule in enumerate(g.rules) if rule.is_epsilon and rule.lhs == g.start]
    memo: dict = {}

    def derive(a, i, j):
        key = (a, i, j)
        if key in memo:
            return memo[key]
        out = []
        for r, rule in enumerate(g.rules):
            if rule.lhs != a:
                continue
            w = g.weight(r, offset + i + 1, offset + j)
            if rule.is_word:
                if rule.rhs == x[i:j]:
                    out.append(Derivation(rule, offset + i + 1, offset + j, w, tuple(rule.rhs)))
            elif rule.is_binary:
                for t in range(i + 1, j):
                    lefts = derive(rule.rhs[0], i, t)
                    if not lefts:
                        continue
                    rights = derive(rule.rhs[1], t, j)
                    for left in lefts:
                        for right in rights:
                            out.append(Derivation(rule, offset + i + 1, offset + j, w,
                                                  (left, right)))
                            if len(out) > cap:
                                raise DerivationOverflow(
                                    f"more than {cap} derivations of {a} over [{i + 1}, {j}]")
        memo[key] = out
        return out

    return derive(g.start, 0, n)

"""MAP inference and partition sums for GPB energies with an extended-CNF grammar.

Messages ``M_A(α, β)`` are kept in one dense array per nonterminal, indexed by
pattern ids.  Entries are filled by increasing distance between the end
positions of ``α`` and ``β``; all arithmetic goes through a :class:`ValueAlgebra`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import LOG, TROPICAL, ValueAlgebra
from .grammar import CnfGrammar, Derivation, cyk_min_parse
from .patterns import CostTables, PatternIndex, PatternWeights, as_word


class ConfigurationError(ValueError):
    """The grammar and the pattern index do not fit together."""


class NoDerivation(RuntimeError):
    """No labeling of the chain is derivable from the start symbol."""


@dataclass
class MessageTable:
    index: PatternIndex
    grammar: CnfGrammar
    algebra: ValueAlgebra
    values: np.ndarray          # [A, α, β]
    back_rule: np.ndarray | None
    back_split: np.ndarray | None
    value: float
    iterations: int = 0

    def message(self, a: str, alpha: int, beta: int) -> float:
        return float(self.values[self.grammar.nt_index()[a], alpha, beta])


def check_terminal_words(index: PatternIndex, g: CnfGrammar):
    missing = g.terminal_words() - set(index.weights.vocabulary)
    if missing:
        shown = ", ".join(sorted("".join(w) for w in missing))
        raise ConfigurationError(f"terminal words not in the pattern vocabulary: {shown}")


def run_algorithm1(index: PatternIndex, tables: CostTables, g: CnfGrammar,
                   algebra: ValueAlgebra = TROPICAL) -> tuple[float, MessageTable]:
    """Aggregate of f(x) + C(x) over all labelings x (the minimum, in tropical mode)."""
    check_terminal_words(index, g)
    n = index.n
    nt = g.nt_index()
    size = len(index)
    alg = algebra
    values = np.full((len(g.nonterminals), size, size), alg.zero)
    track = alg.supports_argmin
    back_rule = np.full(values.shape, -1, dtype=np.int64) if track else None
    back_split = np.full(values.shape, -1, dtype=np.int64) if track else None
    f_lift = alg.lift(tables.f)
    all_ids = np.arange(size)

    for r, rule in enumerate(g.rules):
        if not rule.is_word:
            continue
        a, k = nt[rule.lhs], len(rule.rhs)
        ids = all_ids[index.end + k <= n]
        fw, lw = tables.extend_word(ids, rule.rhs)
        starts = index.end[ids] + 1
        val = alg.times(alg.lift(fw), alg.lift(g.weight_grid(r, starts, starts + k - 1)))
        old = values[a, ids, lw]
        if track:
            better = val < old
            back_rule[a, ids[better], lw[better]] = r
            back_split[a, ids[better], lw[better]] = -1
        values[a, ids, lw] = alg.plus(old, val)

    binary = [(r, nt[rule.lhs], nt[rule.rhs[0]], nt[rule.rhs[1]])
              for r, rule in enumerate(g.rules) if rule.is_binary]
    gs = index.group_start
    iterations = 0
    for span in range(2, n + 1):
        for s in range(0, n - span + 1):
            t = s + span
            rows = slice(gs[s], gs[s + 1])
            cols = slice(gs[t], gs[t + 1])
            lo, hi = gs[s + 1], gs[t]
            for r, a, b, c in binary:
                left = values[b, rows, lo:hi]
                right = alg.divide(values[c, lo:hi, cols], f_lift[lo:hi, None])
                prod = alg.times(left[:, :, None], right[None, :, :])
                iterations += prod.size
                nu = alg.lift(g.weight(r, s + 1, t))
                cand = alg.times(alg.reduce(prod, 1), nu)
                old = values[a, rows, cols]
                if track:
                    better = cand < old
                    if better.any():
                        split = lo + np.argmin(prod, axis=1)
                        back_rule[a, rows, cols][better] = r
                        back_split[a, rows, cols][better] = split[better]
                values[a, rows, cols] = alg.plus(old, cand)

    if n == 0:
        eps = [r for r, rule in enumerate(g.rules) if rule.is_epsilon and rule.lhs == g.start]
        total = alg.zero
        for r in eps:
            total = alg.plus(total, alg.lift(g.weight(r, 1, 0)))
        value = float(total)
    else:
        final = values[nt[g.start], index.empty(0), gs[n]:gs[n + 1]]
        value = float(alg.reduce(final, 0))
    return value, MessageTable(index, g, alg, values, back_rule, back_split, value, iterations)


def extract_argmin(msgs: MessageTable) -> tuple[tuple[str, ...], Derivation, float]:
    """Walk the backpointers of a tropical run: (labeling, derivation, F)."""
    if not msgs.algebra.supports_argmin:
        raise ValueError("argmin extraction needs a tropical run")
    if msgs.value == np.inf:
        raise NoDerivation("no derivable labeling")
    index, g = msgs.index, msgs.grammar
    n = index.n
    nt = g.nt_index()
    if n == 0:
        eps = [r for r, rule in enumerate(g.rules) if rule.is_epsilon and rule.lhs == g.start]
        r = min(eps, key=lambda r: g.weight(r, 1, 0))
        return (), Derivation(g.rules[r], 1, 0, g.weight(r, 1, 0)), msgs.value
    labels: list[str | None] = [None] * n
    gs = index.group_start
    s0 = nt[g.start]
    final = msgs.values[s0, index.empty(0), gs[n]:gs[n + 1]]
    beta = int(gs[n] + np.argmin(final))

    def walk(a, alpha, beta):
        r = int(msgs.back_rule[a, alpha, beta])
        split = int(msgs.back_split[a, alpha, beta])
        rule = g.rules[r]
        i, j = int(index.end[alpha]) + 1, int(index.end[beta])
        w = g.weight(r, i, j)
        if split < 0:
            labels[i - 1:j] = rule.rhs
            return Derivation(rule, i, j, w, tuple(rule.rhs))
        left = walk(nt[rule.rhs[0]], alpha, split)
        right = walk(nt[rule.rhs[1]], split, beta)
        return Derivation(rule, i, j, w, (left, right))

    tree = walk(s0, index.empty(0), beta)
    return tuple(labels), tree, msgs.value


def log_partition(index: PatternIndex, tables: CostTables, g: CnfGrammar) -> float:
    """log Σ over (x, λ) of exp(-E(x, λ))."""
    value, _ = run_algorithm1(index, tables, g, LOG)
    return value


def score_labeling(x, weights: PatternWeights, g: CnfGrammar) -> float:
    """F(x) = f(x) + least derivation cost, computed without any pattern index."""
    x = as_word(x)
    cost, _ = cyk_min_parse(x, g)
    if cost == np.inf:
        return np.inf
    return weights.energy(x) + cost

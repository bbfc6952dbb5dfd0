"""Seeded random instances shared by the test modules."""
from __future__ import annotations

import numpy as np

from gpb.grammar import CnfGrammar, InteractionGrammar, Rule, SpanWeight, normalize_terminal_words
from gpb.patterns import PatternWeights, build_pattern_index, compute_cost_tables

LABELS = "abc"


def random_word(rng, alphabet, lo=1, hi=3):
    k = int(rng.integers(lo, hi + 1))
    return tuple(alphabet[int(i)] for i in rng.integers(0, len(alphabet), k))


def random_weights(rng, n, alphabet, max_words=5, max_len=3, integer=True):
    words = {random_word(rng, alphabet, 1, max_len) for _ in range(int(rng.integers(0, max_words + 1)))}
    costs = {}
    for w in sorted(words):
        shared = rng.random() < 0.3
        c0 = draw(rng, integer)
        for i in range(1, n - len(w) + 2):
            if shared:
                costs[(w, i)] = c0
            elif rng.random() < 0.8:
                costs[(w, i)] = draw(rng, integer)
    return PatternWeights(n, tuple(alphabet), frozenset(words), costs)


def draw(rng, integer=True, lo=-5, hi=5):
    return float(rng.integers(lo, hi + 1)) if integer else float(rng.uniform(lo, hi))


def span_table(rng, n, integer=True):
    return SpanWeight(table=np.array([[draw(rng, integer) for _ in range(n + 2)]
                                      for _ in range(n + 2)]))


def random_cnf(rng, n, alphabet, integer=True, span_prob=0.15):
    names = ("S", "A", "B")[:int(rng.integers(1, 4))]
    rules = [Rule.word(rng.choice(names), random_word(rng, alphabet, 1, 2), draw(rng, integer))]
    for _ in range(int(rng.integers(0, 8))):
        if rng.random() < 0.55:
            rules.append(Rule.binary(str(rng.choice(names)), str(rng.choice(names)),
                                     str(rng.choice(names)), draw(rng, integer)))
        else:
            rules.append(Rule.word(str(rng.choice(names)), random_word(rng, alphabet, 1, 2),
                                   draw(rng, integer)))
    if rng.random() < 0.3 and len(rules) < 8:
        rules.append(Rule.epsilon("S", draw(rng, integer)))
    span = {r: span_table(rng, n, integer) for r in range(len(rules))
            if not rules[r].is_epsilon and rng.random() < span_prob}
    return CnfGrammar(names, "S", tuple(rules), span)


def small_size(rng, max_n=7, max_d=3, cap=729):
    while True:
        D = int(rng.integers(1, max_d + 1))
        n = int(rng.integers(0, max_n + 1))
        if D ** n <= cap:
            return n, LABELS[:D]


def random_general_instance(seed, integer=True):
    """Criterion-1 style instance, already normalized: (weights, grammar)."""
    rng = np.random.default_rng(seed)
    n, alphabet = small_size(rng)
    weights = random_weights(rng, n, alphabet, integer=integer)
    g = random_cnf(rng, n, alphabet, integer)
    g, weights = normalize_terminal_words(g, weights)
    return weights, g


def random_interaction(rng, n, alphabet, max_depth=3, max_pairs=3, integer=True,
                       span_prob=0.2, separable=False):
    depth = int(rng.integers(1, max_depth + 1))
    pairs = [(random_word(rng, alphabet, 1, 2), random_word(rng, alphabet, 1, 2))
             for _ in range(int(rng.integers(0, max_pairs + 1)))]
    theta = [[draw(rng, integer) for _ in pairs] for _ in range(depth)]
    span = {}
    for k in range(1, depth + 1):
        for p in range(len(pairs)):
            if rng.random() < span_prob:
                if separable:
                    span[(k, p)] = SpanWeight(
                        left=np.array([draw(rng, integer) for _ in range(n + 2)]),
                        right=np.array([draw(rng, integer) for _ in range(n + 2)]))
                else:
                    span[(k, p)] = span_table(rng, n, integer)
    return InteractionGrammar(tuple(alphabet), tuple(pairs), depth, np.array(theta), span)


def random_interaction_instance(seed, max_n=7, integer=True, depth=None, separable=False,
                                max_alpha=3, cap=729):
    rng = np.random.default_rng(seed)
    n, alphabet = small_size(rng, max_n, max_alpha, cap)
    weights = random_weights(rng, n, alphabet, integer=integer)
    ig = random_interaction(rng, n, alphabet, integer=integer,
                            max_depth=depth or 3, separable=separable)
    if depth is not None and ig.depth != depth:
        ig = InteractionGrammar(ig.alphabet, ig.pairs, depth,
                                np.resize(ig.theta, (depth, len(ig.pairs))),
                                {key: sw for key, sw in ig.span_theta.items() if key[0] <= depth})
    return weights, ig


def tables_for(weights):
    index = build_pattern_index(weights)
    return index, compute_cost_tables(index)


# acceptance criterion number -> result line, printed in the pytest terminal summary
ACCEPTANCE: dict[int, str] = {}

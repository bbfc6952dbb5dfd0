"""Synthetic benchmark instances: D = {0,1}, Λ = D^4, one interaction rule 11 S 11, depth 2.

Random numbers come from ``numpy.random.Generator(PCG64(seed))`` in this order:

1. pattern costs, uniform on [0, 1): words of Λ in lexicographic order
   (0000, 0001, ..., 1111), and for each word the start positions 1 .. n-3;
2. rule weights ν(i, j), uniform on [0, C): spans with i = 1..n and, for each i,
   j = i..n.  One table serves the rule at both levels.

Table entries outside those spans are 0.
"""
from __future__ import annotations

import itertools

import numpy as np

from .grammar import InteractionGrammar, SpanWeight
from .oracle import Instance
from .patterns import PatternWeights

ALPHABET = ("0", "1")
PAIR = (("1", "1"), ("1", "1"))
DEPTH = 2
WORD_LENGTH = 4


def gen_synthetic(n: int, C: float, seed: int) -> Instance:
    if n < 1 or C < 0:
        raise ValueError("need n >= 1 and C >= 0")
    rng = np.random.Generator(np.random.PCG64(seed))
    words = list(itertools.product(ALPHABET, repeat=WORD_LENGTH))
    costs = {}
    for w in words:
        for i in range(1, n - WORD_LENGTH + 2):
            costs[(w, i)] = float(rng.random())
    table = np.zeros((n + 1, n + 1))
    for i in range(1, n + 1):
        table[i, i:] = C * rng.random(n - i + 1)
    weights = PatternWeights(n, ALPHABET, frozenset(words), costs)
    sw = SpanWeight(table=table)
    ig = InteractionGrammar(ALPHABET, (PAIR,), DEPTH, np.zeros((DEPTH, 1)),
                            {(k, 0): sw for k in range(1, DEPTH + 1)})
    return Instance(weights, ig)

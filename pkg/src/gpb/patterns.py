"""Patterns, their prefix closure and the cost tables built on top of it.

Positions are 1-based.  A pattern ``([i, j], w)`` pins the word ``w`` to the
interval ``[i, j]``; the empty pattern at position ``s`` is ``([s+1, s], ())``.
Every pattern of the prefix closure gets a dense integer id.  Ids are sorted by
end position first, so increasing id order is a topological order of the
pattern partial order.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

Word = tuple[str, ...]


class InstanceError(ValueError):
    """Raised for malformed instance data (bad placements, labels, ...)."""


def as_word(w) -> Word:
    """Normalize a word.  A plain string is split into single-character labels."""
    if isinstance(w, str):
        return tuple(w)
    return tuple(w)


@dataclass(frozen=True, order=True)
class Pattern:
    start: int
    end: int
    word: Word

    def __post_init__(self):
        if len(self.word) != self.end - self.start + 1:
            raise InstanceError(
                f"pattern word {self.word!r} does not fit [{self.start}, {self.end}]")

    @classmethod
    def at(cls, start: int, word) -> "Pattern":
        w = as_word(word)
        return cls(start, start + len(w) - 1, w)

    @classmethod
    def empty(cls, s: int) -> "Pattern":
        return cls(s + 1, s, ())

    def __len__(self):
        return len(self.word)

    def __str__(self):
        return f"[{self.start},{self.end}]{''.join(self.word) or 'ε'}"


@dataclass(frozen=True)
class PatternWeights:
    """Pattern vocabulary and per-placement costs for a chain of length ``n``.

    ``costs`` maps ``(word, start)`` to the energy of that placement.  Every
    placement of a vocabulary word that is not a key has cost 0.
    """

    n: int
    alphabet: tuple[str, ...]
    vocabulary: frozenset = frozenset()
    costs: Mapping[tuple[Word, int], float] = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 0:
            raise InstanceError("chain length must be non-negative")
        if len(set(self.alphabet)) != len(self.alphabet) or not self.alphabet:
            raise InstanceError("alphabet must be a non-empty list of distinct labels")
        symbols = set(self.alphabet)
        vocab = frozenset(as_word(w) for w in self.vocabulary)
        costs = {}
        for (w, i), c in self.costs.items():
            w = as_word(w)
            if (w, i) in costs:
                raise InstanceError(f"duplicate cost entry for ({''.join(w)}, {i})")
            costs[(w, i)] = float(c)
        vocab = vocab | {w for w, _ in costs}
        for w in vocab:
            if not w:
                raise InstanceError("the empty word cannot be a pattern")
            bad = [a for a in w if a not in symbols]
            if bad:
                raise InstanceError(f"word {w!r} uses labels {bad} outside the alphabet")
        for (w, i) in costs:
            if i < 1 or i + len(w) - 1 > self.n:
                raise InstanceError(
                    f"placement ({''.join(w)}, {i}) lies outside [1, {self.n}]")
        object.__setattr__(self, "vocabulary", vocab)
        object.__setattr__(self, "costs", costs)

    @classmethod
    def from_entries(cls, n: int, alphabet: Sequence[str],
                     entries: Iterable[tuple], vocabulary: Iterable = ()) -> "PatternWeights":
        """Build from ``(word, position_or_None, cost)`` triples.

        ``None`` as position spreads the cost over every placement of the word.
        Repeated ``(word, position)`` keys are rejected.
        """
        costs: dict[tuple[Word, int], float] = {}
        vocab = {as_word(w) for w in vocabulary}
        for w, pos, c in entries:
            w = as_word(w)
            vocab.add(w)
            positions = range(1, n - len(w) + 2) if pos is None else [pos]
            for i in positions:
                if (w, i) in costs:
                    raise InstanceError(f"duplicate cost entry for ({''.join(w)}, {i})")
                costs[(w, i)] = float(c)
        return cls(n, tuple(alphabet), frozenset(vocab), costs)

    def cost(self, word, start: int) -> float:
        return self.costs.get((as_word(word), start), 0.0)

    def with_words(self, words: Iterable) -> "PatternWeights":
        """Same weights with ``words`` added to the vocabulary at zero cost."""
        return PatternWeights(self.n, self.alphabet,
                              self.vocabulary | {as_word(w) for w in words}, self.costs)

    def with_cost(self, word, start: int, c: float) -> "PatternWeights":
        costs = dict(self.costs)
        costs[(as_word(word), start)] = float(c)
        return PatternWeights(self.n, self.alphabet, self.vocabulary | {as_word(word)}, costs)

    @property
    def total_length(self) -> int:
        """L, the summed length of the vocabulary words."""
        return sum(len(w) for w in self.vocabulary)

    def energy(self, x) -> float:
        """Pattern energy of a full labeling, by scanning every placement."""
        x = as_word(x)
        if len(x) != self.n:
            raise InstanceError(f"labeling has length {len(x)}, expected {self.n}")
        total = 0.0
        for w in self.vocabulary:
            k = len(w)
            for i in range(1, self.n - k + 2):
                if x[i - 1:i - 1 + k] == w:
                    total += self.costs.get((w, i), 0.0)
        return total


class PatternIndex:
    """Prefix closure of all vocabulary placements, with suffix forests and lsp.

    Attributes (all arrays indexed by pattern id):

    ``start``, ``end``, ``length``
        interval of each pattern.
    ``parent``
        longest proper suffix inside the same end group (-1 for empty patterns).
    ``prefix``
        id of the pattern with its last symbol removed (-1 for empty patterns).
    ``ext``
        ``ext[p, a]`` is the id of lsp(p a); -1 when ``p`` ends at ``n``.
    ``in_base``, ``cost``
        whether the pattern is a vocabulary placement, and its cost.
    """

    def __init__(self, weights: PatternWeights):
        self.weights = weights
        self.n = n = weights.n
        self.alphabet = weights.alphabet
        self.symbol = {a: k for k, a in enumerate(self.alphabet)}
        keys = {(s, ()) for s in range(n + 1)}
        for w in weights.vocabulary:
            for i in range(1, n - len(w) + 2):
                for k in range(1, len(w) + 1):
                    keys.add((i + k - 1, w[:k]))
        order = sorted(keys, key=lambda t: (t[0], len(t[1]), [self.symbol[a] for a in t[1]]))
        self.patterns = [Pattern(s - len(w) + 1, s, w) for s, w in order]
        self.id_of = {key: k for k, key in enumerate(order)}
        size = len(order)
        self.end = np.array([s for s, _ in order], dtype=np.int64)
        self.length = np.array([len(w) for _, w in order], dtype=np.int64)
        self.start = self.end - self.length + 1
        self.group_start = np.searchsorted(self.end, np.arange(n + 2))
        self.in_base = np.array([len(w) > 0 and w in weights.vocabulary for _, w in order])
        self.cost = np.array(
            [weights.costs.get((w, s - len(w) + 1), 0.0) if base else 0.0
             for (s, w), base in zip(order, self.in_base)])
        self.prefix = np.full(size, -1, dtype=np.int64)
        self.parent = np.full(size, -1, dtype=np.int64)
        self.ext = np.full((size, len(self.alphabet)), -1, dtype=np.int64)
        for k, (s, w) in enumerate(order):
            if w:
                self.prefix[k] = self.id_of[(s - 1, w[:-1])]
        # Aho-Corasick style: parent(q a) = ext(parent(q), a), ext(p, a) = p a or ext(parent(p), a).
        for s in range(n + 1):
            for k in range(self.group_start[s], self.group_start[s + 1]):
                w = order[k][1]
                if len(w) == 1:
                    self.parent[k] = self.id_of[(s, ())]
                elif len(w) > 1:
                    self.parent[k] = self.ext[self.parent[self.prefix[k]], self.symbol[w[-1]]]
                if s == n:
                    continue
                for a, sym in enumerate(self.alphabet):
                    nxt = self.id_of.get((s + 1, w + (sym,)))
                    if nxt is None:
                        nxt = self.ext[self.parent[k], a] if w else self.id_of[(s + 1, ())]
                    self.ext[k, a] = nxt

    def __len__(self):
        return len(self.patterns)

    def __iter__(self):
        return iter(self.patterns)

    def group(self, s: int) -> range:
        """Ids of the patterns ending at ``s``."""
        return range(int(self.group_start[s]), int(self.group_start[s + 1]))

    def empty(self, s: int) -> int:
        return int(self.group_start[s])

    def id(self, p: Pattern) -> int:
        return self.id_of[(p.end, p.word)]

    def get(self, p: Pattern):
        return self.id_of.get((p.end, p.word))

    def __contains__(self, p: Pattern):
        return (p.end, p.word) in self.id_of

    def encode(self, word) -> list[int]:
        return [self.symbol[a] for a in as_word(word)]

    @property
    def total_length(self) -> int:
        return self.weights.total_length

    def forest_edges(self, s: int) -> list[tuple[Pattern, Pattern]]:
        """Edges (suffix, extension) of the suffix tree over the patterns ending at ``s``."""
        return [(self.patterns[self.parent[k]], self.patterns[k])
                for k in self.group(s) if self.parent[k] >= 0]

    def lsp_id(self, p: Pattern) -> int:
        if not 0 <= p.end <= self.n or p.start < 1:
            raise InstanceError(f"pattern {p} is outside the chain")
        q = self.empty(p.start - 1)
        for a in p.word:
            q = self.ext[q, self.symbol[a]]
        return int(q)

    def extend_ids(self, ids, word) -> np.ndarray:
        """lsp(p w) for every id in ``ids``; -1 where ``p w`` runs past ``n``."""
        out = np.asarray(ids, dtype=np.int64).copy()
        for a in self.encode(word):
            ok = out >= 0
            out[ok] = self.ext[out[ok], a]
        return out


def build_pattern_index(weights: PatternWeights) -> PatternIndex:
    return PatternIndex(weights)


def lsp(index: PatternIndex, p: Pattern) -> Pattern:
    """Longest suffix of ``p`` that belongs to the prefix closure."""
    return index.patterns[index.lsp_id(p)]


def precedes(index: PatternIndex, a: Pattern, b: Pattern) -> bool:
    """True iff ``b`` follows ``a`` in the pattern partial order (b ≻ a)."""
    if not (b.end > a.end and b.start >= a.start):
        return False
    lo, hi = b.start, a.end
    if lo > hi:
        return True
    return a.word[lo - a.start:hi - a.start + 1] == b.word[:hi - lo + 1]


def order_matrix(index: PatternIndex, ids=None) -> np.ndarray:
    """Boolean matrix ``m[x, y]`` = pattern ``ids[y]`` ≻ pattern ``ids[x]``."""
    ids = np.arange(len(index)) if ids is None else np.asarray(ids)
    start, end = index.start[ids], index.end[ids]
    m = (end[None, :] > end[:, None]) & (start[None, :] >= start[:, None])
    # agreement on the overlap: the suffix of x starting at i_y is a prefix of y,
    # i.e. the longest Π-suffix of x that starts at i_y equals y truncated to j_x.
    overlap = m & (start[None, :] <= end[:, None])
    xs, ys = np.nonzero(overlap)
    for x, y in zip(xs, ys):
        px, py = index.patterns[ids[x]], index.patterns[ids[y]]
        if not precedes(index, px, py):
            m[x, y] = False
    return m


class CostTables:
    """phi, f and f-of-concatenation tables, filled with O(|Π|) / O(L|Π|) additions.

    ``pair_f[s]`` and ``pair_lsp[s]`` have one row per pattern ending at ``s`` and one
    column per pattern starting at ``s + 1`` (column 0 is the empty pattern).
    """

    def __init__(self, index: PatternIndex):
        self.index = index
        n = index.n
        size = len(index)
        additions = 0
        phi = np.zeros(size)
        f = np.zeros(size)
        for k in range(size):
            par = index.parent[k]
            if par < 0:
                continue
            phi[k] = phi[par]
            if index.in_base[k]:
                phi[k] += index.cost[k]
                additions += 1
        for k in range(size):
            if index.length[k]:
                f[k] = f[index.prefix[k]] + phi[k]
                additions += 1
        self.phi, self.f = phi, f

        starters = defaultdict(list)
        for k in np.argsort(index.length, kind="stable"):
            starters[int(index.start[k])].append(int(k))
        self.starter_col: dict[int, int] = {}
        self.pair_f: list[np.ndarray] = []
        self.pair_lsp: list[np.ndarray] = []
        for s in range(n + 1):
            rows = np.arange(index.group_start[s], index.group_start[s + 1])
            cols = starters.get(s + 1, [])
            pf = np.empty((len(rows), len(cols)))
            pl = np.empty((len(rows), len(cols)), dtype=np.int64)
            for c, b in enumerate(cols):
                self.starter_col[b] = c
                if index.length[b] == 0:
                    pf[:, c], pl[:, c] = f[rows], rows
                    continue
                prev = self.starter_col[int(index.prefix[b])]
                a = index.symbol[index.patterns[b].word[-1]]
                pl[:, c] = index.ext[pl[:, prev], a]
                pf[:, c] = pf[:, prev] + phi[pl[:, c]]
                additions += len(rows)
            self.pair_f.append(pf)
            self.pair_lsp.append(pl)
        self.additions = additions

    def concat(self, a: int, b: int) -> tuple[float, int]:
        """(f(ab), lsp(ab)) for ``a`` ending right before ``b`` starts."""
        s = int(self.index.end[a])
        if int(self.index.start[b]) != s + 1:
            raise ValueError("patterns are not adjacent")
        r = a - int(self.index.group_start[s])
        c = self.starter_col[b]
        return float(self.pair_f[s][r, c]), int(self.pair_lsp[s][r, c])

    def extend_word(self, ids, word) -> tuple[np.ndarray, np.ndarray]:
        """Vectorized (f(p w), lsp(p w)) for a vocabulary word ``w``.

        Entries whose extension runs past the chain end get ``nan`` / -1.
        """
        index = self.index
        ids = np.asarray(ids, dtype=np.int64)
        w = as_word(word)
        fv = np.full(len(ids), np.nan)
        lv = np.full(len(ids), -1, dtype=np.int64)
        ends = index.end[ids]
        for s in np.unique(ends):
            if s + len(w) > index.n:
                continue
            b = index.id_of.get((int(s) + len(w), w))
            sel = ends == s
            rows = ids[sel] - index.group_start[s]
            if b is None:
                # word outside the vocabulary: walk the automaton instead of the table
                cur, acc = ids[sel].copy(), self.f[ids[sel]].copy()
                for a in index.encode(w):
                    cur = index.ext[cur, a]
                    acc = acc + self.phi[cur]
                fv[sel], lv[sel] = acc, cur
                continue
            c = self.starter_col[b]
            fv[sel] = self.pair_f[s][rows, c]
            lv[sel] = self.pair_lsp[s][rows, c]
        return fv, lv


def compute_cost_tables(index: PatternIndex, weights: PatternWeights | None = None) -> CostTables:
    if weights is not None and weights is not index.weights:
        raise ValueError("cost tables must be built from the index's own weights")
    return CostTables(index)

import itertools
import math

import numpy as np
import pytest

from gpb.grammar import (CnfGrammar, DerivationOverflow, InteractionGrammar, Rule,
                         compile_interaction_grammar, cyk_log_inside, cyk_min_parse, enumerate_derivations,
                         normalize_terminal_words, validate_cnf)
from gpb.oracle import Instance, brute_min, interaction_min_cost
from gpb.patterns import PatternWeights

from helpers import draw, random_interaction, random_word

RNA = "UGCUCCUAGUACGUAAGGACCGGAGUG"
PAIRS = [("G", "C"), ("C", "G"), ("U", "A"), ("A", "U")]


def rna_grammar():
    nts = ["S"] + [f"X{a}" for a in "GAUC"] + [f"Y{a}{b}" for a, b in PAIRS]
    rules = [Rule.binary("S", "S", "S")]
    rules += [Rule.word("S", a) for a in "GAUC"]
    rules += [Rule.word(f"X{a}", a) for a in "GAUC"]
    for a, b in PAIRS:
        rules.append(Rule.binary("S", f"X{a}", f"Y{a}{b}", -1))
        rules.append(Rule.binary(f"Y{a}{b}", "S", f"X{b}"))
    return CnfGrammar(nts, "S", rules)


def nussinov(x):
    """Most bracket pairs; a pair must enclose at least one nucleotide."""
    n = len(x)
    best = [[0] * (n + 1) for _ in range(n + 1)]
    for span in range(2, n + 1):
        for i in range(n - span + 1):
            j = i + span - 1
            v = max(best[i + 1][j], best[i][j - 1])
            if span >= 3 and (x[i], x[j]) in PAIRS:
                v = max(v, best[i + 1][j - 1] + 1)
            for k in range(i + 1, j):
                v = max(v, best[i][k] + best[k + 1][j])
            best[i][j] = v
    return best[0][n - 1]


def test_rna_parse_counts_pairings():
    g = rna_grammar()
    assert not validate_cnf(g)
    cost, tree = cyk_min_parse(RNA, g)
    assert cost == -nussinov(RNA)
    assert cost <= -5          # the reference fold has five pairs
    assert tree.cost() == cost and "".join(tree.yield_()) == RNA and tree.check_spans()
    for k in range(3, 13):
        assert cyk_min_parse(RNA[:k], g)[0] == -nussinov(RNA[:k])


def test_cyk_small_cases():
    g = CnfGrammar(["S"], "S", [Rule.word("S", "a", 3)])
    cost, tree = cyk_min_parse("a", g)
    assert cost == 3 and tree.bracketed() == "(S a)"
    assert cyk_min_parse("ab", g) == (math.inf, None)
    assert cyk_log_inside("ab", g) == -math.inf
    assert enumerate_derivations("ab", g) == []
    assert len(enumerate_derivations("a", g)) == 1


def test_two_derivations_of_aa():
    g = CnfGrammar(["S"], "S", [Rule.binary("S", "S", "S"), Rule.word("S", "a"),
                                Rule.word("S", "aa")])
    assert cyk_log_inside("aa", g) == pytest.approx(math.log(2), rel=1e-12)
    assert len(enumerate_derivations("aa", g)) == 2


def test_single_derivation_log_inside():
    g = CnfGrammar(["S"], "S", [Rule.word("S", "ab", 2.5)])
    assert cyk_log_inside("ab", g) == -2.5


def random_small_cnf(rng):
    names = ["S", "A", "B", "C"][:int(rng.integers(1, 5))]
    rules = [Rule.word(str(rng.choice(names)), random_word(rng, "ab", 1, 2), draw(rng))]
    for _ in range(int(rng.integers(0, 10))):
        if rng.random() < 0.6:
            rules.append(Rule.binary(*(str(rng.choice(names)) for _ in range(3)), draw(rng)))
        else:
            rules.append(Rule.word(str(rng.choice(names)), random_word(rng, "ab", 1, 2), draw(rng)))
    return CnfGrammar(names, "S", rules)


def test_cyk_agrees_with_enumeration():
    rng = np.random.default_rng(0)
    for _ in range(150):
        g = random_small_cnf(rng)
        x = random_word(rng, "ab", 1, 6)
        try:
            derivs = enumerate_derivations(x, g)
        except DerivationOverflow:
            continue
        cost, tree = cyk_min_parse(x, g)
        if not derivs:
            assert cost == math.inf and cyk_log_inside(x, g) == -math.inf
            continue
        assert cost == min(d.cost() for d in derivs)
        assert tree.cost() == cost and tree.yield_() == x
        total = sum(math.exp(-d.cost()) for d in derivs)
        assert math.exp(cyk_log_inside(x, g)) == pytest.approx(total, rel=1e-9)


def test_validate_cnf_reports():
    ok = CnfGrammar(["S"], "S", [Rule.binary("S", "S", "S"), Rule.word("S", "a"), Rule.word("S", "b")])
    assert validate_cnf(ok, [("a",), ("b",)]) == []
    bad = CnfGrammar(["A", "B", "C", "D"], "A", [Rule("A", ("B", "C", "D"))])
    assert any("rule arity" in p for p in validate_cnf(bad))
    word = CnfGrammar(["A"], "A", [Rule.word("A", "ab")])
    assert any("terminal word not in Λ" in p for p in validate_cnf(word, [("b", "a")]))
    orphan = CnfGrammar(["S", "Z"], "S", [Rule.word("S", "a")])
    assert any("unreachable" in p for p in validate_cnf(orphan))


def test_normalize_adds_missing_words_at_zero_cost():
    w = PatternWeights.from_entries(3, "ab", [("ba", None, 1.0)])
    g = CnfGrammar(["A"], "A", [Rule.word("A", "ab")])
    g2, w2 = normalize_terminal_words(g, w)
    assert w2.vocabulary == {("b", "a"), ("a", "b")}
    assert w2.cost("ab", 1) == 0 and w2.costs == w.costs
    assert normalize_terminal_words(g2, w2)[1] is w2


def test_normalize_keeps_the_minimum():
    rng = np.random.default_rng(4)
    for n in range(1, 7):
        w = PatternWeights(n, ("a", "b"))
        g = CnfGrammar(["S"], "S", [Rule.binary("S", "S", "S", draw(rng)),
                                    Rule.word("S", "a", draw(rng)), Rule.word("S", "b", draw(rng))])
        _, w2 = normalize_terminal_words(g, w)
        assert w2.vocabulary == {("a",), ("b",)}
        assert brute_min(Instance(w, g))[0] == brute_min(Instance(w2, g))[0]


def test_compiled_grammar_matches_raw_rules():
    rng = np.random.default_rng(12)
    for _ in range(200):
        ig = random_interaction(rng, 6, "ab"[:int(rng.integers(1, 3))], span_prob=0.0)
        cg = compile_interaction_grammar(ig)
        x = random_word(rng, ig.alphabet, 0, 6)
        assert cyk_min_parse(x, cg)[0] == interaction_min_cost(x, ig)


def test_compiled_pair_1111():
    ig = InteractionGrammar("01", [("11", "11")], 2, [[-1.0], [-2.0]])
    cg = compile_interaction_grammar(ig)
    for k in range(7):
        for x in itertools.product("01", repeat=k):
            assert cyk_min_parse(x, cg)[0] == interaction_min_cost(x, ig)
    # two adjacent level-2 rules, each with an empty middle
    assert cyk_min_parse("11111111", cg)[0] == -4


def test_no_pairs_derives_everything_at_zero():
    cg = compile_interaction_grammar(InteractionGrammar("ab", [], 1, np.zeros((1, 0))))
    for k in range(5):
        for x in itertools.product("ab", repeat=k):
            assert cyk_min_parse(x, cg)[0] == 0


def test_disabled_second_level_equals_depth_one():
    rng = np.random.default_rng(9)
    for _ in range(40):
        one = random_interaction(rng, 6, "ab", max_depth=1, span_prob=0.0)
        theta = np.vstack([one.theta, np.full_like(one.theta, np.inf)])
        two = InteractionGrammar(one.alphabet, one.pairs, 2, theta)
        c1, c2 = compile_interaction_grammar(one), compile_interaction_grammar(two)
        x = random_word(rng, "ab", 1, 6)
        assert cyk_min_parse(x, c1)[0] == cyk_min_parse(x, c2)[0]


def test_pair_word_outside_vocabulary():
    ig = InteractionGrammar("ab", [("ab", "b")], 1, [[0.0]])
    with pytest.raises(ValueError, match="not in Λ"):
        compile_interaction_grammar(ig, vocabulary=[("b",)])

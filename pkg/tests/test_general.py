import math

import numpy as np
import pytest

from gpb.algebra import LOG, MAX_PRODUCT
from gpb.general import (ConfigurationError, NoDerivation, extract_argmin, log_partition,
                         run_algorithm1, score_labeling)
from gpb.grammar import CnfGrammar, Rule, SpanWeight, normalize_terminal_words
from gpb.oracle import Instance, brute_logZ, brute_min, naive_f
from gpb.patterns import PatternWeights

from helpers import random_general_instance, tables_for


def example1():
    w = PatternWeights.from_entries(2, "ab", [("ab", 1, -1)])
    g = CnfGrammar(["S"], "S", [Rule.word("S", x) for x in ("aa", "ab", "ba", "bb")])
    return normalize_terminal_words(g, w)[::-1]


def solve(w, g, algebra=None):
    index, tables = tables_for(w)
    if algebra is None:
        return run_algorithm1(index, tables, g)
    return run_algorithm1(index, tables, g, algebra)


def test_example1():
    w, g = example1()
    value, msgs = solve(w, g)
    assert value == -1
    x, tree, F = extract_argmin(msgs)
    assert x == ("a", "b") and F == -1
    assert tree.bracketed() == "(S a b)"
    assert score_labeling("ab", w, g) == -1


def test_example1_log_partition():
    w, g = example1()
    index, tables = tables_for(w)
    expected = math.log(math.exp(1) + 3)
    assert log_partition(index, tables, g) == pytest.approx(expected, rel=1e-12)
    assert brute_logZ(Instance(w, g)) == pytest.approx(expected, rel=1e-12)


def test_zero_energy():
    w = PatternWeights.from_entries(4, "ab", [("ab", None, 0.0)])
    g = CnfGrammar(["S"], "S", [Rule.binary("S", "S", "S"), Rule.word("S", "a"), Rule.word("S", "b")])
    g, w = normalize_terminal_words(g, w)
    value, msgs = solve(w, g)
    assert value == 0
    x, _, _ = extract_argmin(msgs)
    assert score_labeling(x, w, g) == 0


def test_single_forced_string():
    w = PatternWeights.from_entries(2, "ab", [("ab", 1, -1)])
    g, w = normalize_terminal_words(CnfGrammar(["S"], "S", [Rule.word("S", "ba", 2)]), w)
    value, msgs = solve(w, g)
    assert value == 2
    assert extract_argmin(msgs)[0] == ("b", "a")
    # one derivable string with one derivation of energy 2
    index, tables = tables_for(w)
    assert log_partition(index, tables, g) == pytest.approx(-2, abs=1e-12)


def test_underivable():
    w = PatternWeights(3, ("a", "b"), frozenset({("a",)}))
    g = CnfGrammar(["S"], "S", [Rule.word("S", "a")])
    value, msgs = solve(w, g)
    assert value == math.inf
    with pytest.raises(NoDerivation):
        extract_argmin(msgs)
    assert score_labeling("aaa", w, g) == math.inf
    index, tables = tables_for(w)
    assert log_partition(index, tables, g) == -math.inf


def test_missing_terminal_word_is_a_configuration_error():
    w = PatternWeights(2, ("a", "b"))
    g = CnfGrammar(["S"], "S", [Rule.word("S", "ab")])
    with pytest.raises(ConfigurationError, match="ab"):
        solve(w, g)


def test_epsilon_start_rule_at_n0():
    w = PatternWeights(0, ("a",))
    g = CnfGrammar(["S"], "S", [Rule.word("S", "a"), Rule.epsilon("S", 1.5)])
    g, w = normalize_terminal_words(g, w)
    value, msgs = solve(w, g)
    assert value == 1.5 == brute_min(Instance(w, g))[0]
    assert extract_argmin(msgs)[0] == ()


def test_span_weights_are_used():
    n = 4
    table = np.zeros((n + 2, n + 2))
    table[1, 4] = -7
    w = PatternWeights.from_entries(n, "ab", [("a", None, 0.0), ("b", None, 0.0)])
    g = CnfGrammar(["S"], "S", [Rule.binary("S", "S", "S", 1.0), Rule.word("S", "a"),
                                Rule.word("S", "b")], {0: SpanWeight(table=table)})
    assert solve(w, g)[0] == brute_min(Instance(w, g))[0] == -7  # the table replaces the scalar weight 1


@pytest.mark.parametrize("seed", range(40))
def test_random_instances(seed):
    w, g = random_general_instance(seed)
    value, msgs = solve(w, g)
    assert value == brute_min(Instance(w, g))[0]
    if value < math.inf:
        x, tree, F = extract_argmin(msgs)
        assert score_labeling(x, w, g) == value
        assert naive_f(x, w) + tree.cost() == value


def test_log_at_least_minus_min():
    for seed in range(20):
        w, g = random_general_instance(seed)
        value, _ = solve(w, g)
        logz, _ = solve(w, g, LOG)
        assert logz >= -value - 1e-9


def test_max_product_is_exp_of_minus_min():
    for seed in range(30):
        w, g = random_general_instance(seed)
        value, _ = solve(w, g)
        prod, _ = solve(w, g, MAX_PRODUCT)
        assert prod == pytest.approx(math.exp(-value), rel=1e-9)

"""Exact inference for grammatical pattern-based energies.

The energy of a labeling ``x`` with a parse ``λ`` is a pattern-based CRF term
``f(x)`` plus the weighted derivation cost of ``λ``.  The package computes
``min over (x, λ)`` and ``log Σ exp(-E)`` exactly.
"""
from .algebra import LOG, MAX_PRODUCT, TROPICAL, ValueAlgebra
from .apsp import apsp_dag
from .earley import run_d1_earley
from .general import (ConfigurationError, NoDerivation, extract_argmin, log_partition,
                      run_algorithm1, score_labeling)
from .grammar import (CnfGrammar, Derivation, InteractionGrammar, Rule, SpanWeight,
                      compile_interaction_grammar, cyk_log_inside, cyk_min_parse,
                      enumerate_derivations, normalize_terminal_words, validate_cnf)
from .interaction import (compute_M0, horizontal_pass, run_algorithm2, run_d1_single_source,
                          vertical_pass)
from .patterns import (CostTables, InstanceError, Pattern, PatternIndex, PatternWeights,
                       build_pattern_index, compute_cost_tables, lsp, precedes)

__version__ = "0.1.0"

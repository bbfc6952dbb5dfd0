"""Reading and writing instance files (JSON, see ``instance.schema.json``)."""
from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

import numpy as np
from jsonschema import Draft202012Validator
from jsonschema.exceptions import best_match

from .grammar import (CnfGrammar, InteractionGrammar, Rule, SpanWeight, validate_cnf)
from .oracle import Instance
from .patterns import InstanceError, PatternWeights

FORMAT = "gpb-instance/1"


class InstanceFormatError(InstanceError):
    """The document is not a valid instance; the message lists every problem found."""


def schema() -> dict:
    return json.loads(resources.files("gpb").joinpath("instance.schema.json").read_text())


def _where(path) -> str:
    out = "$"
    for p in path:  # absolute path, including the parents of nested errors
        out += f"[{p}]" if isinstance(p, int) else f".{p}"
    return out


def _span(doc, n: int, where: str) -> SpanWeight:
    if "table" in doc:
        table = np.array(doc["table"], dtype=float)
        if table.ndim != 2 or table.shape[0] < n + 1 or table.shape[1] < n + 1:
            raise InstanceFormatError(f"{where}: span table must be at least {n + 1} x {n + 1}")
        return SpanWeight(table=table)
    left, right = np.array(doc["left"], dtype=float), np.array(doc["right"], dtype=float)
    if len(left) < n + 1 or len(right) < n + 1:
        raise InstanceFormatError(f"{where}: separable parts need at least {n + 1} entries")
    return SpanWeight(left=left, right=right)


def _span_doc(sw: SpanWeight) -> dict:
    if sw.separable:
        return {"left": sw.left.tolist(), "right": sw.right.tolist()}
    return {"table": sw.table.tolist()}


def parse_instance(text: str) -> Instance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    # best_match descends into oneOf branches, so a typo inside the grammar is
    # reported at its own path instead of as "not valid under any of the given schemas"
    errors = sorted((best_match([e]) for e in Draft202012Validator(schema()).iter_errors(doc)),
                    key=lambda e: [str(p) for p in e.path])
    if errors:
        raise InstanceFormatError("\n".join(f"{_where(e.absolute_path)}: {e.message}" for e in errors))
    n = doc["n"]
    entries = [(tuple(p["word"]), p.get("position"), p["cost"]) for p in doc.get("patterns", [])]
    try:
        weights = PatternWeights.from_entries(n, doc["alphabet"], entries,
                                              [tuple(w) for w in doc.get("vocabulary", [])])
    except InstanceError as exc:
        raise InstanceFormatError(f"$.patterns: {exc}") from exc
    gdoc = doc["grammar"]
    if gdoc["type"] == "cnf":
        rules, spans = [], {}
        for r, rd in enumerate(gdoc["rules"]):
            w = rd.get("weight", 0.0)
            if "rhs" in rd:
                if len(rd["rhs"]) != 2:
                    raise InstanceFormatError(
                        f"$.grammar.rules[{r}]: rule arity {len(rd['rhs'])} (binary rules need 2)")
                rules.append(Rule.binary(rd["lhs"], *rd["rhs"], weight=w))
            elif "word" in rd:
                rules.append(Rule.word(rd["lhs"], tuple(rd["word"]), w))
            else:
                rules.append(Rule.epsilon(rd["lhs"], w))
            if "span_weight" in rd:
                spans[r] = _span(rd["span_weight"], n, f"$.grammar.rules[{r}].span_weight")
        grammar = CnfGrammar(tuple(gdoc["nonterminals"]), gdoc["start"], tuple(rules), spans)
        problems = [p for p in validate_cnf(grammar) if not p.startswith("unreachable")]
        for r in grammar.rules:
            bad = [a for a in (r.rhs if r.terminal else ()) if a not in weights.alphabet]
            if bad:
                problems.append(f"rule {r}: labels {bad} outside the alphabet")
        if problems:
            raise InstanceFormatError("$.grammar: " + "; ".join(problems))
    else:
        d = gdoc["depth"]
        pairs, theta, spans = [], [], {}
        for p, pd in enumerate(gdoc["pairs"]):
            if len(pd["theta"]) != d:
                raise InstanceFormatError(
                    f"$.grammar.pairs[{p}].theta: expected {d} level weights, got {len(pd['theta'])}")
            pairs.append((tuple(pd["u"]), tuple(pd["v"])))
            theta.append(pd["theta"])
            if "span_weight" in pd:
                sw = _span(pd["span_weight"], n, f"$.grammar.pairs[{p}].span_weight")
                for k in range(1, d + 1):
                    spans[(k, p)] = sw
            for key, sd in pd.get("level_span_weights", {}).items():
                k = int(key)
                if k > d:
                    raise InstanceFormatError(
                        f"$.grammar.pairs[{p}].level_span_weights.{key}: level exceeds depth {d}")
                spans[(k, p)] = _span(sd, n, f"$.grammar.pairs[{p}].level_span_weights.{key}")
        theta_arr = np.array(theta, dtype=float).T.reshape(d, len(pairs))
        try:
            grammar = InteractionGrammar(tuple(doc["alphabet"]), tuple(pairs), d, theta_arr, spans)
        except ValueError as exc:
            raise InstanceFormatError(f"$.grammar: {exc}") from exc
    return Instance(weights, grammar, doc.get("objective", "min"))


def load_instance(path) -> Instance:
    return parse_instance(Path(path).read_text())


def instance_document(inst: Instance) -> dict:
    w = inst.weights
    by_word: dict = {}
    for (word, i), c in w.costs.items():
        by_word.setdefault(word, {})[i] = c
    patterns = []
    for word in sorted(by_word):
        placed = by_word[word]
        values = set(placed.values())
        if len(placed) == w.n - len(word) + 1 and len(values) == 1:
            patterns.append({"word": list(word), "cost": values.pop()})
        else:
            patterns.extend({"word": list(word), "position": i, "cost": placed[i]}
                            for i in sorted(placed))
    doc = {"format": FORMAT, "n": w.n, "alphabet": list(w.alphabet)}
    if inst.objective != "min":
        doc["objective"] = inst.objective
    extra = sorted(set(w.vocabulary) - set(by_word))
    if extra:
        doc["vocabulary"] = [list(x) for x in extra]
    doc["patterns"] = patterns
    g = inst.grammar
    if isinstance(g, CnfGrammar):
        rules = []
        for r, rule in enumerate(g.rules):
            rd = {"lhs": rule.lhs}
            if rule.is_binary:
                rd["rhs"] = list(rule.rhs)
            elif rule.is_word:
                rd["word"] = list(rule.rhs)
            else:
                rd["epsilon"] = True
            rd["weight"] = rule.weight
            if r in g.span_weights:
                rd["span_weight"] = _span_doc(g.span_weights[r])
            rules.append(rd)
        doc["grammar"] = {"type": "cnf", "nonterminals": list(g.nonterminals),
                          "start": g.start, "rules": rules}
    else:
        pairs = []
        for p, (u, v) in enumerate(g.pairs):
            pd = {"u": list(u), "v": list(v), "theta": g.theta[:, p].tolist()}
            levels = [g.span_theta.get((k, p)) for k in range(1, g.depth + 1)]
            if levels[0] is not None and all(sw == levels[0] for sw in levels):
                pd["span_weight"] = _span_doc(levels[0])
            elif any(sw is not None for sw in levels):
                pd["level_span_weights"] = {str(k + 1): _span_doc(sw)
                                            for k, sw in enumerate(levels) if sw is not None}
            pairs.append(pd)
        doc["grammar"] = {"type": "interaction", "depth": g.depth, "pairs": pairs}
    return doc


def dump_instance(inst: Instance) -> str:
    return json.dumps(instance_document(inst), indent=1) + "\n"


def same_instance(a: Instance, b: Instance) -> bool:
    return (a.weights == b.weights and a.objective == b.objective
            and type(a.grammar) is type(b.grammar) and a.grammar == b.grammar)

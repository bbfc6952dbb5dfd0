import json
from pathlib import Path

import pytest

from gpb.instance import (InstanceFormatError, dump_instance, parse_instance, same_instance,
                          schema)
from gpb.oracle import Instance
from gpb.synthetic import gen_synthetic

from helpers import random_general_instance, random_interaction_instance

ROOT = Path(__file__).resolve().parents[1]


def test_round_trip_cnf():
    for seed in range(40):
        w, g = random_general_instance(seed)
        inst = Instance(w, g)
        text = dump_instance(inst)
        back = parse_instance(text)
        assert same_instance(inst, back)
        assert dump_instance(back) == text


def test_round_trip_interaction():
    for seed in range(40):
        w, ig = random_interaction_instance(seed, separable=seed % 2 == 0)
        inst = Instance(w, ig, "logZ" if seed % 3 == 0 else "min")
        assert same_instance(inst, parse_instance(dump_instance(inst)))


def test_round_trip_synthetic():
    inst = gen_synthetic(12, 10.0, 4)
    assert same_instance(inst, parse_instance(dump_instance(inst)))


def test_shipped_schema_matches_docs():
    docs = json.loads((ROOT / "docs" / "instance.schema.json").read_text())
    assert docs == schema()


def test_example_file_parses():
    inst = parse_instance((ROOT / "docs" / "examples" / "example1.json").read_text())
    assert inst.weights.n == 2 and inst.weights.cost("ab", 1) == -1


def base_doc():
    return {"format": "gpb-instance/1", "n": 2, "alphabet": ["a", "b"],
            "grammar": {"type": "cnf", "nonterminals": ["S"], "start": "S",
                        "rules": [{"lhs": "S", "word": ["a", "b"]}]}}


@pytest.mark.parametrize("edit, message", [
    (lambda d: d.update(extra=1), "'extra' was unexpected"),
    (lambda d: d["grammar"]["rules"][0].update(wieght=1), r"\$.grammar.rules\[0\]"),
    (lambda d: d.update(n=-1), r"\$.n"),
    (lambda d: d["grammar"]["rules"].append({"lhs": "S", "rhs": ["S", "S", "S"]}), "rule arity"),
    (lambda d: d["grammar"]["rules"].append({"lhs": "S", "word": ["c"]}), "outside the alphabet"),
    (lambda d: d["grammar"].update(type="pcfg"), r"\$.grammar.type"),
    (lambda d: d.update(patterns=[{"word": ["a"], "position": 3, "cost": 1}]), r"\(a, 3\)"),
])
def test_invalid_documents(edit, message):
    doc = base_doc()
    edit(doc)
    with pytest.raises(InstanceFormatError, match=message):
        parse_instance(json.dumps(doc))


def test_interaction_semantic_errors():
    doc = base_doc()
    doc["grammar"] = {"type": "interaction", "depth": 2,
                      "pairs": [{"u": ["a"], "v": ["b"], "theta": [0.0]}]}
    with pytest.raises(InstanceFormatError, match="expected 2 level weights"):
        parse_instance(json.dumps(doc))
    doc["grammar"]["pairs"][0]["theta"] = [0.0, 1.0]
    doc["grammar"]["pairs"][0]["span_weight"] = {"table": [[0.0]]}
    with pytest.raises(InstanceFormatError, match="span table"):
        parse_instance(json.dumps(doc))


def test_json_syntax_error_has_position():
    with pytest.raises(InstanceFormatError, match="line 2 column"):
        parse_instance('{"n": 1,\n "alphabet": [}')

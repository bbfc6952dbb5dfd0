"""Command-line entry point: ``gpb solve``, ``gpb gen`` and ``gpb bench``.

Exit codes: 0 success, 1 oracle mismatch, 2 invalid input, 3 instance too large
for the oracle.
"""
from __future__ import annotations

import argparse
import json
import math
import sys

from .algebra import LOG
from .bench import run_bench
from .earley import UnsupportedWeights, run_d1_earley
from .general import ConfigurationError, extract_argmin, run_algorithm1, score_labeling
from .grammar import InteractionGrammar, normalize_terminal_words
from .instance import dump_instance, load_instance
from .interaction import run_algorithm2, run_d1_single_source
from .oracle import OracleRefusal, brute_logZ, brute_min
from .patterns import InstanceError, build_pattern_index, compute_cost_tables
from .synthetic import gen_synthetic

EXIT_OK, EXIT_MISMATCH, EXIT_INPUT, EXIT_REFUSED = 0, 1, 2, 3
ALGORITHMS = ("auto", "general", "interaction", "d1", "earley-d1")
MATCH_TOL = 1e-9


class UsageError(Exception):
    """The requested algorithm does not apply to the instance."""


def _close(a: float, b: float) -> bool:
    if a == b:
        return True
    return abs(a - b) <= MATCH_TOL * (1.0 + abs(b))


def _fmt(v: float) -> str:
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.12g}"


def _solve(inst, algorithm: str, objective: str, backend: str) -> dict:
    g = inst.grammar
    if algorithm == "auto":
        algorithm = "interaction" if isinstance(g, InteractionGrammar) else "general"
    if algorithm != "general" and not isinstance(g, InteractionGrammar):
        raise UsageError(f"--algorithm {algorithm} needs an interaction grammar")
    if algorithm in ("d1", "earley-d1") and g.depth != 1:
        raise UsageError(f"--algorithm {algorithm} needs depth 1, the instance has depth {g.depth}")
    if objective == "logZ" and algorithm != "general":
        raise UsageError("logZ is computed by the general algorithm only")
    res = {"algorithm": algorithm, "objective": objective, "value": None,
           "labeling": None, "derivation": None}

    if algorithm == "general":
        cnf, weights = normalize_terminal_words(inst.cnf(), inst.weights)
        index = build_pattern_index(weights)
        tables = compute_cost_tables(index)
        if objective == "logZ":
            res["value"], _ = run_algorithm1(index, tables, cnf, LOG)
            return res
        value, msgs = run_algorithm1(index, tables, cnf)
        res["value"] = value
        if value < math.inf:
            x, tree, _ = extract_argmin(msgs)
            res["labeling"], res["derivation"] = list(x), tree.bracketed()
        return res

    index = build_pattern_index(inst.weights)
    tables = compute_cost_tables(index)
    if algorithm == "interaction":
        value, x, tree = run_algorithm2(index, tables, g, backend)
        res["value"] = value
        if x is not None:
            res["labeling"], res["derivation"] = list(x), tree.bracketed()
    elif algorithm == "d1":
        res["value"] = run_d1_single_source(index, tables, g)
    else:
        res["value"] = run_d1_earley(index, tables, g)
    return res


def _oracle(inst, res: dict) -> dict:
    """Brute-force check of the value, plus a re-score of the reported argmin."""
    if res["objective"] == "logZ":
        expected = brute_logZ(inst)
        ok = _close(res["value"], expected)
        return {"expected": expected, "match": ok}
    expected, _ = brute_min(inst)
    ok = _close(res["value"], expected)
    out = {"expected": expected, "match": ok}
    if res["labeling"] is not None:
        x = tuple(res["labeling"])
        g = inst.cnf()
        rescored = score_labeling(x, inst.weights, g)
        out["rescored"] = rescored
        out["match"] = ok and _close(rescored, res["value"])
    return out


def cmd_solve(args) -> int:
    try:
        inst = load_instance(args.instance)
    except OSError as exc:
        print(f"error: cannot read {args.instance}: {exc.strerror}", file=sys.stderr)
        return EXIT_INPUT
    except InstanceError as exc:
        print(f"error: invalid instance {args.instance}:\n{exc}", file=sys.stderr)
        return EXIT_INPUT
    objective = args.objective or inst.objective
    backend = args.backend.replace("-", "_")
    try:
        res = _solve(inst, args.algorithm, objective, backend)
    except (UsageError, ConfigurationError, UnsupportedWeights, InstanceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    code = EXIT_OK
    if args.oracle_check:
        try:
            res["oracle"] = _oracle(inst, res)
        except OracleRefusal as exc:
            res["oracle"] = {"refused": str(exc)}
            code = EXIT_REFUSED
        else:
            code = EXIT_OK if res["oracle"]["match"] else EXIT_MISMATCH

    if args.output == "text":
        name = "log Z" if objective == "logZ" else "M"
        print(f"{name} = {_fmt(res['value'])}")
        if res["labeling"] is not None:
            sep = "" if all(len(a) == 1 for a in res["labeling"]) else " "
            print(f"labeling: {sep.join(res['labeling'])}")
            print(f"derivation: {res['derivation']}")
        if "oracle" in res:
            o = res["oracle"]
            if "refused" in o:
                print(f"oracle: refused ({o['refused']})")
            else:
                line = f"oracle: {_fmt(o['expected'])}"
                if "rescored" in o:
                    line += f", argmin re-scores to {_fmt(o['rescored'])}"
                print(line + (" (match)" if o["match"] else " (MISMATCH)"))
    else:
        print(json.dumps(res, sort_keys=True, default=_fmt))
    return code


def cmd_gen(args) -> int:
    if args.n < 1 or args.C < 0:
        print("error: need --n >= 1 and --C >= 0", file=sys.stderr)
        return EXIT_INPUT
    text = dump_instance(gen_synthetic(args.n, args.C, args.seed))
    if args.output in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.output, "w") as fh:
            fh.write(text)
    return EXIT_OK


def cmd_bench(args) -> int:
    if args.n_step < 1 or args.n_min > args.n_max:
        print("error: need --n-step >= 1 and --n-min <= --n-max", file=sys.stderr)
        return EXIT_INPUT
    backends = (("reference", "useful_edge") if args.backend == "both"
                else (args.backend.replace("-", "_"),))
    ns = range(args.n_min, args.n_max + 1, args.n_step)

    def progress(row):
        if args.verbose:
            print(f"{row.backend} n={row.n} C={row.C} seed={row.seed}: "
                  f"{row.wall_seconds:.3f}s", file=sys.stderr)

    report = run_bench(ns, args.C_list, args.seeds, backends, tuple(args.fit_range), progress)
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(report.csv())
    else:
        sys.stdout.write(report.csv())
    summary = report.summary()
    if summary:
        print(summary, file=sys.stderr if not args.csv else sys.stdout)
    return EXIT_MISMATCH if report.disagreements else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gpb", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="minimize or sum the energy of an instance file")
    p.add_argument("--instance", required=True, metavar="PATH")
    p.add_argument("--algorithm", choices=ALGORITHMS, default="auto")
    p.add_argument("--objective", choices=("min", "logZ"),
                   help="defaults to the instance's objective field")
    p.add_argument("--backend", choices=("reference", "useful-edge"), default="useful-edge")
    p.add_argument("--oracle-check", action="store_true",
                   help="compare with brute-force enumeration (small instances only)")
    p.add_argument("--output", choices=("text", "machine-readable", "json"), default="text")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("gen", help="write a synthetic benchmark instance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--C", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", metavar="PATH", help="default: stdout")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="time the interaction solver on synthetic instances")
    p.add_argument("--n-min", type=int, default=10)
    p.add_argument("--n-max", type=int, default=350)
    p.add_argument("--n-step", type=int, default=10)
    p.add_argument("--C-list", type=float, nargs="+", default=[0.0, 1.0, 10.0])
    p.add_argument("--seeds", type=int, nargs="+", default=[0])
    p.add_argument("--fit-range", type=int, nargs=2, default=[100, 350], metavar=("LO", "HI"))
    p.add_argument("--backend", choices=("reference", "useful-edge", "both"),
                   default="useful-edge")
    p.add_argument("--csv", metavar="PATH", help="default: stdout")
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

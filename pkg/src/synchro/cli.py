"""Command-line driver.

Every subcommand is a thin wrapper over a library call.  Exit codes:
0 analysis completed, 1 a verdict failed under ``--expect-holds``,
2 input error, 3 budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import os
import signal
import sys
from contextlib import contextmanager
from fractions import Fraction

from . import extension, families, formats, reset, transitivity
from .core import Budget, format_word, parse_word
from .errors import BudgetExceeded, ExtensionFailure, InputError, SynchroError
from .verdicts import FAILS, HOLDS, INCONCLUSIVE, VerdictReport

EXIT_OK, EXIT_FAILED, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _env_int(name, default):
    value = os.environ.get(name)
    return int(value) if value else default


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--family", help="cerny:N, carpi:M,K or random:N,SIGMA,SEED")
    src.add_argument("--file", help="DFA text file ('-' for stdin)")
    common.add_argument("--json", action="store_true", help="emit JSON")
    common.add_argument("--node-budget", type=int,
                        default=_env_int("SYNCHRO_NODE_BUDGET", 1 << 24))
    common.add_argument("--max-states", type=int,
                        default=_env_int("SYNCHRO_MAX_STATES", extension.DEFAULT_MAX_STATES))
    common.add_argument("--time-budget", type=float,
                        default=float(os.environ.get("SYNCHRO_TIME_BUDGET", 0)) or None,
                        help="seconds")
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--expect-holds", action="store_true",
                        help="exit 1 if the verdict is 'fails'")

    p = _Parser(prog="synchro", description="Synchronizing automata analysis")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", parents=[common], help="write an automaton in DFA text format")
    g.add_argument("-o", "--output")
    sub.add_parser("info", parents=[common], help="size and structural predicates")
    sub.add_parser("reset", parents=[common], help="shortest reset word (subset BFS)")
    sub.add_parser("compress", parents=[common], help="greedy compression trace")

    e = sub.add_parser("extend", parents=[common], help="shortest extension word")
    e.add_argument("--set", required=True)
    e.add_argument("--ce", default="Q")
    e.add_argument("--max-length", type=int)

    ea = sub.add_parser("ea", parents=[common], help="run the Expansion Algorithm")
    ea.add_argument("--cs", required=True)
    ea.add_argument("--vs", required=True)
    ea.add_argument("--ce", default="Q")
    ea.add_argument("--ve", default="")
    ea.add_argument("--local", metavar="K",
                    help="also check the K·n local-extension conditions")

    r = sub.add_parser("radius", parents=[common], help="extension radius")
    r.add_argument("--ce", default="Q")
    r.add_argument("--c", default="1", help="verdict against c·n (default 1)")
    r.add_argument("--sample", type=int)
    r.add_argument("--seed", type=int, default=0)

    ind = sub.add_parser("independent", parents=[common], help="independent collections")
    ind.add_argument("--word", help="reset word to build from (default: shortest)")
    ind.add_argument("--k", help="decide the kn-independent-set conjecture")

    bal = sub.add_parser("balanced", parents=[common], help="balanced collections")
    bal.add_argument("--set", required=True)
    bal.add_argument("--max-len", type=int, required=True)
    bal.add_argument("--max-size", type=int)
    bal.add_argument("--within", help="balance on these coordinates only")
    bal.add_argument("--decide", action="store_true",
                     help="decide existence for any collection size")

    v = sub.add_parser("verify", parents=[common], help="re-derive a proposition item")
    v.add_argument("what", choices=["prop1"])
    v.add_argument("--item", type=int, required=True, choices=[1, 2, 3])
    v.add_argument("--n", type=int)
    v.add_argument("--c")
    v.add_argument("--m", type=int)
    v.add_argument("--k", type=int)

    f = sub.add_parser("fuzz", parents=[common], help="random extension-radius search")
    f.add_argument("--n", type=int, required=True)
    f.add_argument("--sigma", type=int, default=2)
    f.add_argument("--count", type=int, default=500)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--out", help="append JSON lines here")

    d = sub.add_parser("dot", parents=[common], help="Graphviz export")
    d.add_argument("--highlight")
    return p


def load_automaton(args):
    if args.family:
        return families.from_family_spec(args.family)
    if args.file:
        if args.file == "-":
            return formats.parse_automaton(sys.stdin.read())
        with open(args.file, encoding="utf-8") as fh:
            return formats.parse_automaton(fh.read())
    raise InputError("give --family or --file")


@contextmanager
def _time_limit(seconds):
    if not seconds or not hasattr(signal, "setitimer"):
        yield
        return

    def _expire(signum, frame):
        raise BudgetExceeded("time budget exceeded")

    old = signal.signal(signal.SIGALRM, _expire)
    signal.setitimer(signal.ITIMER_REAL, seconds)
    try:
        yield
    finally:
        signal.setitimer(signal.ITIMER_REAL, 0)
        signal.signal(signal.SIGALRM, old)


def _emit(args, data: dict, out):
    if args.json:
        out.write(json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False) + "\n")
        return
    width = max((len(k) for k in data), default=0)
    for key, value in data.items():
        if isinstance(value, (list, dict)):
            value = json.dumps(value, ensure_ascii=False)
        out.write(f"{key:<{width}}  {value}\n")


def _emit_report(args, report: VerdictReport, out) -> int:
    if args.json:
        out.write(report.to_json() + "\n")
    else:
        _emit(args, {"conjecture": report.conjecture, "verdict": report.verdict,
                     **report.parameters, **report.measured,
                     **({"witness": report.witness} if report.witness else {})}, out)
    if args.expect_holds and report.verdict == FAILS:
        return EXIT_FAILED
    return EXIT_OK


def _names(a, s):
    return a.set_names(s)


def cmd_gen(args, a, out):
    text = formats.serialize_automaton(a)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        out.write(text)
    return EXIT_OK


def cmd_info(args, a, out):
    _emit(args, {"states": a.n, "letters": a.sigma,
                 "fingerprint": formats.fingerprint(a),
                 "synchronizing": a.is_synchronizing(),
                 "strongly_connected": a.is_strongly_connected()}, out)
    return EXIT_OK


def cmd_reset(args, a, out):
    w = reset.shortest_reset_word(a, Budget(args.node_budget))
    data = {"synchronizing": w is not None}
    if w is not None:
        data.update(length=len(w), word=format_word(w),
                    reset_state=a.state_name(reset.reset_state(a, w)))
    _emit(args, data, out)
    return EXIT_OK


def cmd_compress(args, a, out):
    trace = reset.greedy_compress(a, Budget(args.node_budget))
    _emit(args, {"words": [format_word(w) for w in trace.words],
                 "cardinalities": list(trace.cardinalities),
                 "size": trace.size, "collection_length": trace.length,
                 "length": len(trace.word), "word": format_word(trace.word)}, out)
    return EXIT_OK


def cmd_extend(args, a, out):
    s = formats.parse_state_set(a, args.set)
    ce = formats.parse_state_set(a, args.ce)
    u = extension.shortest_extension_word(a, s, ce, Budget(args.node_budget),
                                          max_length=args.max_length)
    data = {"set": _names(a, s), "ce": _names(a, ce), "found": u is not None}
    if u is not None:
        data.update(length=len(u), word=format_word(u),
                    preimage=_names(a, a.preimage(s, u)))
    if args.max_length is not None:
        data["extendable"] = u is not None
        data["max_length"] = args.max_length
    _emit(args, data, out)
    return EXIT_OK


def _ea_input(args, a):
    return extension.EAInput(formats.parse_state_set(a, args.cs),
                             formats.parse_state_set(a, args.ce),
                             parse_word(args.vs, a.sigma), parse_word(args.ve, a.sigma))


def cmd_ea(args, a, out):
    inp = _ea_input(args, a)
    trace = extension.run_ea(a, inp, Budget(args.node_budget))
    data = {"length": len(trace.word), "word": format_word(trace.word),
            "steps": [{"S": _names(a, st.before), "u": format_word(st.word),
                       "S.u^-1": _names(a, st.after)} for st in trace.steps]}
    if args.local is None:
        _emit(args, data, out)
        return EXIT_OK
    k = Fraction(args.local)
    rep = extension.check_local_extension(a, inp, k, Budget(args.node_budget),
                                          max_states=args.max_states)
    measured = {"ea_word": data["word"], "ea_length": data["length"],
                "side_conditions": rep.side_conditions,
                "subsets_checked": rep.subsets_checked,
                "failing_subsets": [_names(a, s) for s in rep.failing_subsets],
                "sync_bound": str(rep.sync_bound)}
    # The conjecture is existential over inputs: a failing input refutes nothing.
    verdict = HOLDS if rep.passed else INCONCLUSIVE
    report = VerdictReport(families.subject(a), "local-extension", {"k": str(k)}, measured,
                           verdict, {"exhaustive": True, "max_states": args.max_states,
                                     "node_budget": args.node_budget})
    return _emit_report(args, report, out)


def cmd_radius(args, a, out):
    ce = formats.parse_state_set(a, args.ce)
    c = Fraction(args.c)
    conj = "extension" if c == 1 else "cn-extension"
    params = {"c": str(c), "bound": str(c * a.n), "ce": _names(a, ce)}
    budgets = {"exhaustive": args.sample is None, "max_states": args.max_states,
               "node_budget": args.node_budget}
    try:
        r = extension.extension_radius(a, ce, max_states=args.max_states,
                                       node_budget=args.node_budget, sample=args.sample,
                                       seed=args.seed, workers=args.workers)
    except BudgetExceeded as exc:
        report = VerdictReport(families.subject(a), conj, params, {"error": str(exc)},
                               INCONCLUSIVE, {**budgets, "exhaustive": False})
        _emit_report(args, report, out)
        return EXIT_BUDGET
    measured = {"radius": r.radius, "witness_set": _names(a, r.witness),
                "witness_word": format_word(r.witness_word),
                "subsets_checked": r.subsets_checked,
                "distribution": {str(k): v for k, v in r.distribution.items()},
                "lower_bound_only": not r.exhaustive}
    if r.radius > c * a.n:
        verdict, witness = FAILS, {"set": _names(a, r.witness),
                                   "word": format_word(r.witness_word)}
    else:
        verdict, witness = (HOLDS if r.exhaustive else INCONCLUSIVE), None
    report = VerdictReport(families.subject(a), conj, params, measured, verdict,
                           budgets, witness)
    return _emit_report(args, report, out)


def cmd_independent(args, a, out):
    if args.k is not None:
        report = families.verify_independent_set(a, Fraction(args.k), args.node_budget)
        code = _emit_report(args, report, out)
        return EXIT_BUDGET if report.verdict == INCONCLUSIVE else code
    if args.word is not None:
        u = parse_word(args.word, a.sigma)
    else:
        u = reset.shortest_reset_word(a, Budget(args.node_budget))
        if u is None:
            raise InputError("automaton is not synchronizing")
    w = transitivity.independent_from_synch(a, u)
    _emit(args, {"reset_word": format_word(u), "collection": [format_word(x) for x in w],
                 "length": w.length, "bound": len(u) + a.n - 1,
                 "independent": transitivity.is_independent(a, w)}, out)
    return EXIT_OK


def cmd_balanced(args, a, out):
    s = formats.parse_state_set(a, args.set)
    budget = Budget(args.node_budget)
    if args.decide:
        d = transitivity.decide_balanced(a, s, args.max_len, budget)
        data = {"set": _names(a, s), "max_len": args.max_len,
                "exists": "undecided" if d.exists is None else d.exists}
        if d.exists:
            data["collection"] = {format_word(w): c for w, c in d.multiplicities.items()}
        elif d.exists is False:
            data["farkas_certificate"] = [str(y) for y in d.certificate]
        _emit(args, data, out)
        return EXIT_OK
    within = formats.parse_state_set(a, args.within) if args.within else None
    max_size = args.max_size if args.max_size is not None else 2 * a.n
    coll = transitivity.search_balanced_collection(a, s, args.max_len, max_size, budget,
                                                   within=within)
    data = {"set": _names(a, s), "max_len": args.max_len, "max_size": max_size,
            "found": coll is not None}
    if coll is None:
        data["note"] = "none found within bounds"
    else:
        data["collection"] = [format_word(w) for w in coll]
    _emit(args, data, out)
    return EXIT_OK


def cmd_verify(args, a, out):
    report = families.verify_proposition(args.item, n=args.n, c=args.c, m=args.m, k=args.k,
                                         max_states=args.max_states,
                                         node_budget=args.node_budget)
    return _emit_report(args, report, out)


def cmd_fuzz(args, a, out):
    res = families.fuzz_extension_radius(args.count, args.n, args.sigma, args.seed,
                                         max_states=args.max_states)
    data = {"n": res.n, "sigma": res.sigma, "seed": res.seed, "count": res.count,
            "distribution": {str(k): v for k, v in res.distribution.items()},
            "counterexamples": len(res.counterexamples)}
    if args.out:
        with open(args.out, "a", encoding="utf-8") as fh:
            for row in res.counterexamples:
                fh.write(json.dumps({"n": res.n, "sigma": res.sigma, **row},
                                    sort_keys=True) + "\n")
    elif args.json:
        data["instances"] = res.counterexamples
    _emit(args, data, out)
    return EXIT_OK


def cmd_dot(args, a, out):
    hl = formats.parse_state_set(a, args.highlight) if args.highlight else None
    out.write(formats.export_dot(a, hl))
    return EXIT_OK


COMMANDS = {
    "gen": cmd_gen, "info": cmd_info, "reset": cmd_reset, "compress": cmd_compress,
    "extend": cmd_extend, "ea": cmd_ea, "radius": cmd_radius,
    "independent": cmd_independent, "balanced": cmd_balanced, "verify": cmd_verify,
    "fuzz": cmd_fuzz, "dot": cmd_dot,
}

_NO_AUTOMATON = {"verify", "fuzz"}


def run_command(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_INPUT
    try:
        with _time_limit(args.time_budget):
            a = None if args.command in _NO_AUTOMATON else load_automaton(args)
            return COMMANDS[args.command](args, a, out)
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (InputError, ExtensionFailure, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SynchroError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def main():
    sys.exit(run_command())


if __name__ == "__main__":
    main()

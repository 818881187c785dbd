"""Command-line front end: ``moka <command> [flags]``.

Every command prints a JSON report (or a short human view with
``--pretty``).  Exit codes: 0 the property holds or a proof was found,
1 true counterexamples, 2 alarm or unknown, 3 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
import time

from . import kaf as K
from .abstract import Alarm, StackDomain, check_abstract
from .abstraction import build_predicate_abstraction, load_predicates, load_state_abstraction
from .errors import BudgetExceeded, MokaError
from .lcl import (
    ObligationFailure, OutOfBudget, Proved, Prover, Refuted, derive, verify_with_repair_loop,
)
from .logic import check_concrete_mask, encode, infer_dialect, parse_formula, sem_mask
from .logic.formula import format_formula
from .stacks import current_mask, lift_states
from .transition import cfg_to_ts, load_cfg, load_ts

EXIT_OK, EXIT_CEX, EXIT_UNKNOWN, EXIT_USAGE = 0, 1, 2, 3

_STATE_TOKEN = re.compile(r"\([^)]*\)|[^,\s]+")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_common(p, system=True, domain=False):
    p.add_argument("--formula", help="formula text")
    p.add_argument("--formula-file", help="file holding the formula")
    p.add_argument("--dialect", choices=("actl", "mu", "pdl"), help="default: inferred")
    p.add_argument("--pretty", action="store_true", help="human-readable output")
    p.add_argument("--seed", type=int, default=0, help="seed echoed in the report")
    p.add_argument("--timing", action="store_true", help="include wall-clock time")
    if system:
        p.add_argument("--ts", help="transition system JSON")
        p.add_argument("--cfg", help="control flow graph JSON")
        p.add_argument("--modulus", type=int, help="value range Z_k for --cfg")
        p.add_argument("--predicates", help="predicate file (CFG labels and domain)")
        p.add_argument("--init", help="comma-separated states or 'all' (default: initial states)")
    if domain:
        p.add_argument("--domain", help="explicit state abstraction JSON")
        p.add_argument("--equiv", default="id", help="frame equivalence selector")
        p.add_argument("--mode", choices=("closed", "generic"), default="generic",
                       help="BCA mode")
        p.add_argument("--budget", type=int, default=10, help="repair or step budget")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="moka", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    _add_common(sub.add_parser("check", help="concrete counterexamples"))
    _add_common(sub.add_parser("oracle", help="direct semantics"))
    _add_common(sub.add_parser("abstract", help="abstract interpretation"), domain=True)
    _add_common(sub.add_parser("prove", help="LCL proof search"), domain=True)
    _add_common(sub.add_parser("repair-loop", help="proof search with domain repair"),
                domain=True)
    _add_common(sub.add_parser("encode", help="print the MOKA program"), system=False)
    return parser


# -- inputs ---------------------------------------------------------------

def _formula(args):
    if bool(args.formula) == bool(args.formula_file):
        raise UsageError("give exactly one of --formula and --formula-file")
    text = args.formula
    if args.formula_file:
        with open(args.formula_file) as fh:
            text = fh.read()
    return parse_formula(text, args.dialect)


def _system(args):
    if bool(args.ts) == bool(args.cfg):
        raise UsageError("give exactly one of --ts and --cfg")
    preds = {}
    if args.predicates:
        preds, _ = load_predicates(args.predicates)
    if args.ts:
        if args.modulus is not None:
            raise UsageError("--modulus only applies to --cfg")
        return load_ts(args.ts), preds
    return cfg_to_ts(load_cfg(args.cfg, args.modulus), preds), preds


def _init(args, ts) -> int:
    if args.init is None:
        return ts.init_mask if ts.init_mask else ts.all_mask
    if args.init.strip() == "all":
        return ts.all_mask
    return ts.mask(_STATE_TOKEN.findall(args.init))


def _domain(args, ts):
    if args.domain and args.predicates and not args.cfg:
        raise UsageError("give one of --domain and --predicates")
    if args.domain:
        A = load_state_abstraction(args.domain, ts)
    elif args.predicates:
        preds, per_node = load_predicates(args.predicates)
        A = build_predicate_abstraction(preds, ts, per_node)
    else:
        raise UsageError("an abstract domain is required (--domain or --predicates)")
    return StackDomain(A, args.equiv)


def _names(ts, mask):
    return sorted(ts.names(mask), key=ts.index.get)


# -- commands -------------------------------------------------------------

def _cmd_encode(args):
    f = _formula(args)
    prog = encode(f, args.dialect)
    return EXIT_OK, {"formula": format_formula(f), "dialect": args.dialect or infer_dialect(f),
                     "program": K.pretty(prog)}


def _cmd_check(args):
    f = _formula(args)
    ts, _ = _system(args)
    init = _init(args, ts)
    cex = check_concrete_mask(f, ts, init, args.dialect)
    return (EXIT_CEX if cex else EXIT_OK), {
        "verdict": "counterexamples" if cex else "holds",
        "init": _names(ts, init), "counterexamples": _names(ts, cex)}


def _cmd_oracle(args):
    f = _formula(args)
    ts, _ = _system(args)
    init = _init(args, ts)
    sat = sem_mask(f, ts)
    bad = init & ~sat
    return (EXIT_CEX if bad else EXIT_OK), {
        "verdict": "counterexamples" if bad else "holds",
        "init": _names(ts, init), "satisfying": _names(ts, sat), "counterexamples": _names(ts, bad)}


def _cmd_abstract(args):
    f = _formula(args)
    ts, _ = _system(args)
    D = _domain(args, ts)
    init = _init(args, ts)
    res = check_abstract(f, D, init, args.dialect, mode=args.mode)
    report = {"init": _names(ts, init), "equivalence": D.eq.name, "mode": args.mode,
              "abstract_init": D.format(D.lift(init)), "output": D.format(res.output)}
    if isinstance(res, Alarm):
        report.update(verdict="alarm", candidates=_names(ts, res.candidates))
        return EXIT_UNKNOWN, report
    report["verdict"] = "proved"
    return EXIT_OK, report


def _cmd_prove(args):
    f = _formula(args)
    ts, _ = _system(args)
    D = _domain(args, ts)
    init = _init(args, ts)
    prover = Prover(D, budget=max(args.budget, 1) * 10_000)
    prog = encode(f, args.dialect)
    tree = derive(prog, lift_states(ts, init), D, prover=prover)
    if isinstance(tree, ObligationFailure):
        return EXIT_UNKNOWN, {"verdict": "obligation-failed", "failure": tree.describe()}
    q = current_mask(tree.post)
    report = {"verdict": "refuted" if q else "proved", "counterexamples": _names(ts, q),
              "check": prover.check(tree).ok, "proof": tree.to_dict(ts)}
    return (EXIT_CEX if q else EXIT_OK), report


def _cmd_repair_loop(args):
    f = _formula(args)
    ts, _ = _system(args)
    D = _domain(args, ts)
    init = _init(args, ts)
    res = verify_with_repair_loop(encode(f, args.dialect), D, init, budget=args.budget)
    report = {"repairs": res.repairs}
    if isinstance(res, Proved):
        report.update(verdict="proved", proof_size=res.proof.size())
        return EXIT_OK, report
    if isinstance(res, Refuted):
        report.update(verdict="refuted", counterexamples=_names(ts, res.counterexamples))
        return EXIT_CEX, report
    assert isinstance(res, OutOfBudget)
    report.update(verdict="out-of-budget", reason=res.reason,
                  failure=res.failure.describe() if res.failure else None)
    return EXIT_UNKNOWN, report


COMMANDS = {
    "encode": _cmd_encode,
    "check": _cmd_check,
    "oracle": _cmd_oracle,
    "abstract": _cmd_abstract,
    "prove": _cmd_prove,
    "repair-loop": _cmd_repair_loop,
}


def _render(report, pretty):
    if not pretty:
        return json.dumps(report, sort_keys=True)
    lines = []
    for k, v in report.items():
        if isinstance(v, (dict, list)) and v and not all(isinstance(x, str) for x in v):
            lines.append(f"{k}:")
            lines.append(json.dumps(v, indent=2, sort_keys=True))
        elif isinstance(v, list):
            lines.append(f"{k}: {', '.join(v) if v else '-'}")
        else:
            lines.append(f"{k}: {v}")
    return "\n".join(lines)


def run_cli(argv=None, out=None) -> int:
    """Run one command; returns the exit code and writes the report to ``out``."""
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"moka: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    start = time.perf_counter()
    try:
        code, report = COMMANDS[args.command](args)
    except BudgetExceeded as exc:
        code, report = EXIT_UNKNOWN, {"verdict": "out-of-budget", "reason": str(exc)}
    except (UsageError, MokaError, OSError, ValueError) as exc:
        print(f"moka: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    report = {"command": args.command, "seed": args.seed, **report}
    if args.timing:
        report["seconds"] = round(time.perf_counter() - start, 6)
    print(_render(report, args.pretty), file=out)
    return code


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()

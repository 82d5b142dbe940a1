"""Command-line driver.

    cycletab run FILE -q QUERY [--max-answers N] [--max-depth D]
                 [--canonical-subgoals] [--json] [--all] [--timeout S]
    cycletab canon LITERAL
    cycletab bench [--mode M ...] [--n K] [--timeout S] [--json]

Exit status is 1 for unreadable files and syntax or directive errors, 2 for
runtime errors (including a run cut short by the depth limit or a timeout)
and 0 otherwise, whether or not the query had answers.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import bench as _bench
from .canonical import canonical_term
from .engine import Engine
from .errors import BuildError, CycletabError, PrologSyntaxError, ResolutionLimitExceeded, SolveTimeout
from .printer import format_term
from .reader import parse_query
from .terms import CellStore, Trail, build_bindings


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cycletab", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="consult a program and run a query")
    run.add_argument("file")
    run.add_argument("-q", "--query", required=True)
    run.add_argument("--max-answers", type=int, default=None, metavar="N")
    run.add_argument("--max-depth", type=int, default=1_000_000, metavar="D",
                     help="resolution step budget (default %(default)s)")
    run.add_argument("--canonical-subgoals", action="store_true",
                     help="key tables on canonical forms instead of variants")
    run.add_argument("--json", action="store_true", help="one JSON object per answer")
    run.add_argument("--all", action="store_true",
                     help="enumerate every answer and finish with false.")
    run.add_argument("--timeout", type=float, default=None, metavar="S")

    canon = sub.add_parser("canon", help="print the canonical form of a term literal")
    canon.add_argument("literal")

    b = sub.add_parser("bench", help="cyclic path benchmark on a fully connected graph")
    b.add_argument("--mode", action="append", choices=_bench.MODES,
                   help="may be repeated; default runs every mode")
    b.add_argument("--n", type=int, default=4)
    b.add_argument("--timeout", type=float, default=None, metavar="S")
    b.add_argument("--json", action="store_true")
    return ap


def _err(msg):
    print(f"cycletab: {msg}", file=sys.stderr)


def cmd_run(args, out) -> int:
    try:
        with open(args.file, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        _err(f"cannot read {args.file}: {exc.strerror or exc}")
        return 1
    try:
        engine = Engine(max_depth=args.max_depth, canonical_subgoals=args.canonical_subgoals,
                        timeout=args.timeout)
        engine.consult(text)
        query = parse_query(args.query)
    except CycletabError as exc:
        # anything raised while loading (syntax, directives, clause heads)
        _err(str(exc))
        return 1

    limit = None if args.all else args.max_answers
    count = 0
    try:
        for answer in engine.solve(query, max_answers=limit):
            count += 1
            if args.json:
                print(json.dumps(answer.json()), file=out)
            else:
                print(answer.text() + ".", file=out)
    except (ResolutionLimitExceeded, SolveTimeout) as exc:
        # a cut-off run is not a failure: say so and leave the answers printed so far
        if args.json:
            print(json.dumps({"status": "truncated", "reason": str(exc)}), file=out)
        else:
            print("truncated.", file=out)
        _err(str(exc))
        return 2
    except CycletabError as exc:
        _err(str(exc))
        return 2
    except RecursionError:
        _err("term too deep")
        return 2
    if args.all or count == 0:
        print(json.dumps({"status": "false"}) if args.json else "false.", file=out)
    return 0


def cmd_canon(args, out) -> int:
    store = CellStore()
    try:
        labels = build_bindings(store, args.literal)
    except (PrologSyntaxError, BuildError) as exc:
        _err(str(exc))
        return 1
    root = labels.pop("$root")
    name = next((n for n, c in labels.items() if c == root and not n.startswith("_")), None)
    canon = canonical_term(store, Trail(), root)
    print(format_term(store, canon, name), file=out)
    return 0


def cmd_bench(args, out) -> int:
    if args.n < 2:
        _err("--n must be at least 2")
        return 1
    for mode in args.mode or _bench.MODES:
        row = _bench.run(mode, args.n, timeout=args.timeout)
        if args.json:
            print(json.dumps(row), file=out)
        else:
            took = "timeout" if row["timeout"] else f"{row['seconds']:.3f}s"
            print(f"{mode:<13} n={row['n']:<3} {took:>10}  answers={row['answers']}"
                  f"  table_nodes={row['table_nodes']}", file=out)
        out.flush()
    return 0


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    out = sys.stdout
    handler = {"run": cmd_run, "canon": cmd_canon, "bench": cmd_bench}[args.command]
    return handler(args, out)


if __name__ == "__main__":
    sys.exit(main())

"""Command line interface.

    collana analyze <prog.hc> <ann.ca> [flags]    static collection analysis
    collana prove <seq.llq> [flags]               prove one standalone sequent
    collana oracle <prog.hc> <ann.ca> [flags]     randomised empirical check

Exit codes: 0 when everything is verified (analyze/prove) or no
counterexample was found (oracle); 1 when something is refuted, unknown, or
failed; 2 on diagnostics and I/O errors.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__, interp
from .approx import ApproxError, MixedModes
from .driver import LoadError, Options, analyze_program, load_program
from .frontend import MODES
from .sequents import parse_sequent, prove_sequent

EXIT_OK = 0
EXIT_NOT_VERIFIED = 1
EXIT_ERROR = 2


def _read(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _emit_diagnostics(diags, out=None):
    for d in diags:
        print(f"error: {d.render()}", file=out or sys.stderr)


def cmd_analyze(args) -> int:
    try:
        program = load_program(_read(args.program), _read(args.annotations),
                               mode_override=args.mode)
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    except LoadError as e:
        _emit_diagnostics(e.diagnostics)
        return EXIT_ERROR
    options = Options(max_states=args.max_states,
                      derive_ctors=args.derive_ctors, jobs=args.jobs)
    try:
        report = analyze_program(program, options)
    except LoadError as e:
        _emit_diagnostics(e.diagnostics)
        return EXIT_ERROR
    except (ApproxError, MixedModes) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    if args.report == "json":
        text = report.to_json()
    else:
        text = report.to_text(show_detail=args.trace)
    _write_out(text, args.out)
    return EXIT_OK if report.all_verified() else EXIT_NOT_VERIFIED


def cmd_prove(args) -> int:
    try:
        sf, diags = parse_sequent(_read(args.sequent))
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    if sf is None:
        _emit_diagnostics(diags)
        return EXIT_ERROR
    result = prove_sequent(sf, max_states=args.max_states)
    if args.report == "json":
        text = json.dumps({"status": result.status, "states": result.states},
                          indent=2)
    else:
        text = f"{result.status.upper()} ({result.states} state(s) explored)"
        if args.trace and result.detail:
            text += "\n" + result.detail
    _write_out(text, args.out)
    return EXIT_OK if result.status == "proved" else EXIT_NOT_VERIFIED


def cmd_oracle(args) -> int:
    try:
        program = load_program(_read(args.program), _read(args.annotations))
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    except LoadError as e:
        _emit_diagnostics(e.diagnostics)
        return EXIT_ERROR
    bounds = interp.GenBounds(max_size=args.max_size)
    reports = []
    for name in sorted(program.annotations):
        ann = program.annotations[name]
        if ann.trivial:
            continue
        if not any(a.pred == name for c in program.clauses
                   for a in (c.head, *c.body)):
            continue
        try:
            reports.append(interp.empirical_check(
                program, ann, trials=args.trials, bounds=bounds,
                seed=args.seed, depth_limit=args.depth))
        except interp.Unsupported as e:
            print(f"error: Unsupported: {e}", file=sys.stderr)
            return EXIT_ERROR
    failed = sum(r.failed for r in reports)
    if args.report == "json":
        text = json.dumps({
            "seed": args.seed,
            "trials": args.trials,
            "predicates": [
                {"predicate": r.predicate, "passed": r.passed,
                 "failed": r.failed, "inconclusive": r.inconclusive,
                 "counterexamples": [
                     {"query": q, "answer": a, "judgment": j}
                     for q, a, j in r.counterexamples]}
                for r in reports],
        }, indent=2, ensure_ascii=False)
    else:
        text = "\n".join(r.render() for r in reports)
    _write_out(text, args.out)
    return EXIT_OK if failed == 0 else EXIT_NOT_VERIFIED


def _write_out(text: str, out_path):
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="collana",
        description="Collection analysis for Horn clause programs.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    pa = sub.add_parser("analyze", help="prove collection judgments statically")
    pa.add_argument("program", help="Horn program (.hc)")
    pa.add_argument("annotations", help="collection annotations (.ca)")
    pa.add_argument("--mode", choices=MODES, default=None,
                    help="override the annotation header's mode")
    pa.add_argument("--max-states", type=int, default=100_000)
    pa.add_argument("--report", choices=("text", "json"), default="text")
    pa.add_argument("--trace", action="store_true",
                    help="print proof traces and derivations")
    pa.add_argument("--jobs", type=int, default=1)
    pa.add_argument("--derive-ctors", action=argparse.BooleanOptionalAction,
                    default=True,
                    help="derive constructor maps from type declarations "
                         "(--no-derive-ctors restricts to the builtin list "
                         "constructors)")
    pa.add_argument("--out", default=None, help="write the report to a file")
    pa.set_defaults(func=cmd_analyze)

    pp = sub.add_parser("prove", help="prove one standalone sequent file")
    pp.add_argument("sequent", help="sequent file (.llq)")
    pp.add_argument("--max-states", type=int, default=100_000)
    pp.add_argument("--report", choices=("text", "json"), default="text")
    pp.add_argument("--trace", action="store_true")
    pp.add_argument("--out", default=None)
    pp.set_defaults(func=cmd_prove)

    po = sub.add_parser("oracle", help="empirical check via the interpreter")
    po.add_argument("program")
    po.add_argument("annotations")
    po.add_argument("--trials", type=int, default=100)
    po.add_argument("--seed", type=int, default=0)
    po.add_argument("--max-size", type=int, default=8,
                    help="item budget for generated collections")
    po.add_argument("--depth", type=int, default=interp.DEFAULT_DEPTH,
                    help="resolution step limit per query")
    po.add_argument("--report", choices=("text", "json"), default="text")
    po.add_argument("--out", default=None)
    po.set_defaults(func=cmd_oracle)
    return ap


def main(argv=None) -> int:
    # reports use ⅋/⊕/⟨⟩; degrade gracefully on non-UTF-8 terminals
    for stream in (sys.stdout, sys.stderr):
        try:
            stream.reconfigure(errors="replace")
        except (AttributeError, ValueError):
            pass
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: putback validate | derive-get | incrementalize |
compile | put | put-incremental | test-roundtrip."""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

from .datalog import ProgramError, check_putback_program, format_program, is_lvgn, parse_program
from .engine import (ConstraintViolation, ContradictoryDelta, DeltaSet, get, put,
                     read_database, write_database)
from .engine.database import from_json_obj
from .engine.sampling import minimize, roundtrip
from .incremental import (IncrementalizationError, eval_incremental, incrementalize_lvgn,
                          incrementalize_put)
from .satcheck import BoundParams
from .satcheck.smt import UnsupportedConstruct, export_solver
from .validator import VALID, INVALID, derive_get, validate

EXIT_VALID, EXIT_INVALID, EXIT_UNKNOWN, EXIT_USAGE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _read_text(path):
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror or e}") from None


def load_program(path):
    text = _read_text(path)
    try:
        p = parse_program(text)
    except ProgramError as e:
        raise UsageError(f"{path}: {e}") from None
    problems = check_putback_program(p)
    if problems:
        raise UsageError(f"{path}: " + "; ".join(map(str, problems)))
    return p


def load_get(path, p):
    try:
        return parse_program(_read_text(path), p.schema)
    except ProgramError as e:
        raise UsageError(f"{path}: {e}") from None


def _bounds(args):
    return BoundParams.uniform(args.bound, time_budget=args.time_budget)


def _write(text, out):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _emit_smt(report, directory):
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    for c in report.checks:
        name = re.sub(r"[^A-Za-z0-9_.-]", "_", c.name)
        try:
            text = export_solver(c.sentence, c.assumptions, c.schema, c.name)
        except UnsupportedConstruct as e:
            print(f"warning: no SMT export for {c.name}: {e}", file=sys.stderr)
            continue
        (d / f"{name}.smt2").write_text(text, encoding="utf-8")


def _exit_for(overall):
    return {VALID: EXIT_VALID, INVALID: EXIT_INVALID}.get(overall, EXIT_UNKNOWN)


def _get_program(p, args, b):
    """Expected get if given, otherwise the derived one; None if neither."""
    if getattr(args, "expected_get", None):
        return load_get(args.expected_get, p)
    return derive_get(p, b=b).get


# ------------------------------------------------------------ commands

def cmd_validate(args):
    p = load_program(args.program)
    expected = load_get(args.expected_get, p) if args.expected_get else None
    report = validate(p, expected, b=_bounds(args))
    text = report.to_json() + "\n" if args.format == "json" else report.to_text()
    sys.stdout.write(text)
    if args.report:
        path = Path(args.report)
        path.write_text(report.to_json() + "\n", encoding="utf-8")
        path.with_suffix(".txt").write_text(report.to_text(), encoding="utf-8")
    if args.emit_smt:
        _emit_smt(report, args.emit_smt)
    return _exit_for(report.overall)


def cmd_derive_get(args):
    p = load_program(args.program)
    result = derive_get(p, b=_bounds(args))
    if result.get is None:
        print(f"no get: {result.detail or result.status}", file=sys.stderr)
        for c in result.checks:
            if c.witness is not None:
                print(f"  {c.name}: {c.witness!r}", file=sys.stderr)
        return EXIT_INVALID if result.status == "fails" else EXIT_UNKNOWN
    _write(format_program(result.get, headers=False), args.output)
    return EXIT_VALID


def incrementalize(p, general=False):
    """LVGN programs take the fast path unless `general` is set."""
    if not general and is_lvgn(p):
        return incrementalize_lvgn(p)
    return incrementalize_put(p)


def cmd_incrementalize(args):
    p = load_program(args.program)
    try:
        dput = incrementalize(p, args.general)
    except IncrementalizationError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    _write(format_program(dput), args.output)
    return EXIT_VALID


def cmd_compile(args):
    from .sqlgen import compile_sql

    p = load_program(args.program)
    expected = load_get(args.expected_get, p) if args.expected_get else None
    report = validate(p, expected, b=_bounds(args))
    if report.overall != VALID:
        if not args.force:
            print(f"refusing to compile: validation result is {report.overall} "
                  "(use --force to compile anyway)", file=sys.stderr)
            return _exit_for(report.overall)
        print(f"warning: compiling a program whose validation result is {report.overall}",
              file=sys.stderr)
    get_program = report.derived_get or expected
    if get_program is None:
        print("error: no view definition to compile", file=sys.stderr)
        return EXIT_INVALID
    strategy = incrementalize(p) if args.incremental else p
    _write(compile_sql(strategy, get_program), args.output)
    return EXIT_VALID


def _report_delta(delta: DeltaSet):
    print(json.dumps(delta.to_json_obj(), sort_keys=True), file=sys.stderr)


def _finish_put(p, s, compute, args):
    try:
        s2 = compute()
    except ConstraintViolation as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except ContradictoryDelta as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    applied = DeltaSet({n: s2[n] - s[n] for n in p.schema.source_names},
                       {n: s[n] - s2[n] for n in p.schema.source_names})
    _report_delta(applied)
    if args.output:
        write_database(s2, args.output, p.schema.sources)
    else:
        sys.stdout.write(json.dumps(s2.to_json_obj(), indent=2, sort_keys=True) + "\n")
    return EXIT_VALID


def _read(path, relations):
    try:
        return read_database(path, relations)
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror or e}") from None
    except ValueError as e:
        raise UsageError(str(e)) from None


def cmd_put(args):
    p = load_program(args.program)
    s = _read(args.source, p.schema.sources)
    v = _read(args.view, [p.schema.view])
    return _finish_put(p, s, lambda: put(p, s, v), args)


def _read_delta(path, p):
    try:
        obj = json.loads(_read_text(path))
        rels = [p.schema.view]
        return DeltaSet(from_json_obj(obj.get("insert", {}), rels, str(path)),
                        from_json_obj(obj.get("delete", {}), rels, str(path)))
    except (ValueError, AttributeError) as e:
        raise UsageError(f"{path}: {e}") from None


def cmd_put_incremental(args):
    p = load_program(args.program)
    s = _read(args.source, p.schema.sources)
    dv = _read_delta(args.delta, p)
    if args.view:
        v = _read(args.view, [p.schema.view])
    else:
        get_program = _get_program(p, args, _bounds(args))
        if get_program is None:
            print("error: no view definition; pass --view or --expected-get", file=sys.stderr)
            return EXIT_INVALID
        v = get(get_program, s)
    try:
        dput = incrementalize(p)
    except IncrementalizationError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    return _finish_put(p, s, lambda: eval_incremental(dput, s, v, dv), args)


def cmd_test_roundtrip(args):
    p = load_program(args.program)
    b = _bounds(args)
    expected = load_get(args.expected_get, p) if args.expected_get else None
    if args.force:
        get_program = expected or derive_get(p, b=b).get
    else:
        report = validate(p, expected, b=b)
        if report.overall != VALID:
            print(f"program is {report.overall}; use --force to test it anyway", file=sys.stderr)
            return _exit_for(report.overall)
        get_program = report.derived_get
    if get_program is None:
        print("error: no view definition to test against", file=sys.stderr)
        return EXIT_INVALID
    if args.trials == 0:
        print("warning: 0 trials, nothing was tested", file=sys.stderr)
    result = roundtrip(p, get_program, args.trials, args.seed, size=args.bound)
    print(f"trials: {result.trials}, skipped: {result.skipped}, failures: {len(result.failures)}")
    if result.failures:
        f = minimize(result.failures[0], p, get_program)
        print(f"first failure ({f.law}), minimized:")
        print(f"  source: {json.dumps(f.source.to_json_obj(), sort_keys=True)}")
        print(f"  view:   {json.dumps(f.view.to_json_obj(), sort_keys=True)}")
        print(f"  {f.detail}")
        return EXIT_INVALID
    return EXIT_VALID


# ------------------------------------------------------------ parser

def build_parser():
    parser = _Parser(prog="putback", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_text, solver=True):
        sp = sub.add_parser(name, help=help_text, description=help_text)
        sp.add_argument("program", help="putback program (.dl)")
        if solver:
            sp.add_argument("--bound", type=int, default=3,
                            help="fresh values per type in the model search (default 3)")
            sp.add_argument("--time-budget", type=float, default=60.0,
                            help="seconds for all satisfiability checks (default 60)")
        sp.set_defaults(func=func)
        return sp

    sp = add("validate", cmd_validate, "check well-definedness, GetPut and PutGet")
    sp.add_argument("--expected-get", help="view definition to check instead of deriving one")
    sp.add_argument("--report", help="write the JSON report here (and a .txt next to it)")
    sp.add_argument("--emit-smt", metavar="DIR", help="write one SMT-LIB file per check")
    sp.add_argument("--format", choices=("json", "text"), default="text")

    sp = add("derive-get", cmd_derive_get, "derive the view definition of a strategy")
    sp.add_argument("-o", "--output")

    sp = add("incrementalize", cmd_incrementalize, "rewrite a strategy to consume view deltas",
             solver=False)
    sp.add_argument("--general", action="store_true",
                    help="use the general algorithm even for LVGN programs")
    sp.add_argument("-o", "--output")

    sp = add("compile", cmd_compile, "generate the PostgreSQL view and trigger script")
    sp.add_argument("--expected-get")
    sp.add_argument("--incremental", action="store_true", help="compile the incremental strategy")
    sp.add_argument("--force", action="store_true", help="compile even if validation fails")
    sp.add_argument("-o", "--output")

    sp = add("put", cmd_put, "apply a strategy to a source and an updated view", solver=False)
    sp.add_argument("--source", required=True, help="source database (CSV directory or JSON)")
    sp.add_argument("--view", required=True, help="updated view (CSV directory or JSON)")
    sp.add_argument("-o", "--output", help="where to write the updated source")

    sp = add("put-incremental", cmd_put_incremental, "apply a view delta incrementally")
    sp.add_argument("--source", required=True)
    sp.add_argument("--delta", required=True, help='JSON {"insert": {...}, "delete": {...}}')
    sp.add_argument("--view", help="current view; computed with the get if omitted")
    sp.add_argument("--expected-get")
    sp.add_argument("-o", "--output")

    sp = add("test-roundtrip", cmd_test_roundtrip, "randomized GetPut/PutGet testing")
    sp.add_argument("--trials", type=int, default=500)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--expected-get")
    sp.add_argument("--force", action="store_true", help="test even if validation fails")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

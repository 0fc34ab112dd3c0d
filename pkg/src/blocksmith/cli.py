"""Command-line front door.

Exit codes: 0 success, 1 refuted or no result, 2 usage/parse/type error,
3 timeout or unknown.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from typing import Optional

from . import corpus, interp
from .jsonstate import StateFormatError, state_from_json, state_to_json
from .lowering import LowerError, lower_spec, tidy_spec
from .parse import (
    ParseError, parse_alewife_file, parse_lowering_file, parse_lowering_text,
    parse_machine_file, parse_machine_text, parse_program_file,
    parse_spec_file, parse_spec_text,
)
from .printer import fmt_spec
from .typecheck import CheckError, type_machine, type_program, type_spec

EXIT_OK = 0
EXIT_REFUTED = 1
EXIT_USAGE = 2
EXIT_UNKNOWN = 3


def _fail(msg: str) -> int:
    print(msg, file=sys.stderr)
    return EXIT_USAGE


def _load_machine(path: str):
    mfile = parse_machine_file(path)
    types = type_machine(mfile)
    env = interp.eval_decls(mfile, name=path)
    return mfile, types, env


# ---------------------------------------------------------------- check

def _check_casp(path: str) -> str:
    """A .casp file is a machine, a spec, or a lowering; try in that
    order and report what it was. Re-raises the error of the parse that
    got furthest when nothing fits."""
    text = open(path).read()
    errors: list[ParseError] = []
    try:
        m = parse_machine_text(text, path)
        type_machine(m)
        return "machine"
    except ParseError as e:
        errors.append(e)
    try:
        parse_spec_text(text, path)
        return "spec (typecheck needs --machine)"
    except ParseError as e:
        errors.append(e)
    try:
        parse_lowering_text(text, path)
        return "lowering"
    except ParseError as e:
        errors.append(e)
    raise max(errors, key=lambda e: (e.line, e.col))


def cmd_check(args) -> int:
    path = args.file
    try:
        if path.endswith(".ale"):
            parse_alewife_file(path)
            kind = "portable spec"
        elif path.endswith(".prog"):
            prog = parse_program_file(path)
            if args.machine:
                _, types, _ = _load_machine(args.machine)
                type_program(types, prog)
                kind = "program"
            else:
                kind = "program (typecheck needs --machine)"
        elif args.machine:
            spec = parse_spec_file(path)
            _, types, _ = _load_machine(args.machine)
            type_spec(types, spec)
            kind = "spec"
        else:
            kind = _check_casp(path)
    except (ParseError, CheckError, OSError) as e:
        return _fail(f"{path}: {e}")
    print(f"{path}: ok ({kind})")
    return EXIT_OK


# ------------------------------------------------------------------ run

def _run_env(args):
    _, types, env = _load_machine(args.machine)
    if args.spec:
        spec = parse_spec_file(args.spec)
        type_spec(types, spec)
        ctx = interp.prepare_spec(env, spec)
        return types, ctx.env
    return types, env


def cmd_run(args) -> int:
    try:
        types, env = _run_env(args)
        prog = parse_program_file(args.prog)
        type_program(types, prog)
        if args.state:
            with open(args.state) as f:
                data = json.load(f)
        else:
            data = {}
        state = state_from_json(env, data)
    except (ParseError, CheckError, StateFormatError, OSError,
            json.JSONDecodeError) as e:
        return _fail(f"{e}")

    result = interp.run_program(env, state, prog)
    if isinstance(result, interp.Bottom):
        report = {"bottom": {"index": result.index, "cause": result.cause}}
        code = EXIT_REFUTED
    else:
        out, branch = result
        report = dict(state_to_json(env, out), branchto=branch)
        code = EXIT_OK
    text = json.dumps(report, indent=2)
    if args.output:
        with open(args.output, "w") as f:
            f.write(text + "\n")
    else:
        print(text)
    return code


# ---------------------------------------------------------------- lower

def cmd_lower(args) -> int:
    try:
        mfile = parse_machine_file(args.machine)
        low = parse_lowering_file(args.lowering)
        ale = parse_alewife_file(args.spec)
        mt = type_machine(mfile)
        spec = tidy_spec(mt, lower_spec(mfile, low, ale))
    except (ParseError, CheckError, LowerError, OSError) as e:
        return _fail(f"{e}")
    text = fmt_spec(spec)
    if args.output:
        with open(args.output, "w") as f:
            f.write(text)
    else:
        print(text, end="")
    return EXIT_OK


# ------------------------------------------------------------ corpus check

@dataclass(frozen=True)
class ValidationIssue:
    name: str       # corpus file the problem is in
    problem: str


def corpus_validate() -> list[ValidationIssue]:
    """Recheck everything the corpus manifest promises.

    Machines and specs must typecheck, witness programs must typecheck
    against their machines, and each golden spec must re-derive
    byte-for-byte from its inputs. Returns the problems found; an empty
    list is a clean bill.
    """
    issues: list[ValidationIssue] = []

    machines: dict[str, tuple] = {}
    for name in corpus.MACHINES:
        try:
            machines[name] = _load_machine(str(corpus.corpus_path(name)))
        except (ParseError, CheckError, OSError) as e:
            issues.append(ValidationIssue(name, str(e)))
    for name in corpus.LOWERINGS:
        try:
            parse_lowering_file(str(corpus.corpus_path(name)))
        except (ParseError, OSError) as e:
            issues.append(ValidationIssue(name, str(e)))
    for name in corpus.ALEWIFE:
        try:
            parse_alewife_file(str(corpus.corpus_path(name)))
        except (ParseError, OSError) as e:
            issues.append(ValidationIssue(name, str(e)))

    for case in corpus.SPEC_CASES:
        if case.machine not in machines:
            continue  # already reported above
        _, types, _ = machines[case.machine]
        try:
            spec = parse_spec_file(str(corpus.corpus_path(case.spec)))
            type_spec(types, spec)
        except (ParseError, CheckError, OSError) as e:
            issues.append(ValidationIssue(case.spec, str(e)))

    for case in corpus.LOWERING_CASES:
        if case.machine not in machines:
            continue
        mfile, types, _ = machines[case.machine]
        try:
            low = parse_lowering_file(str(corpus.corpus_path(case.lowering)))
            ale = parse_alewife_file(str(corpus.corpus_path(case.alewife)))
            derived = fmt_spec(tidy_spec(types, lower_spec(mfile, low, ale)))
            golden = corpus.read(case.golden)
            if derived != golden:
                issues.append(ValidationIssue(
                    case.golden, "does not match what lowering derives"))
        except (ParseError, CheckError, LowerError, OSError) as e:
            issues.append(ValidationIssue(case.name, str(e)))
        try:
            prog = parse_program_file(str(corpus.corpus_path(case.witness)))
            type_program(types, prog)
        except (ParseError, CheckError, OSError) as e:
            issues.append(ValidationIssue(case.witness, str(e)))
        try:
            if not corpus.read(case.assembly).strip():
                issues.append(ValidationIssue(case.assembly, "empty"))
        except OSError as e:
            issues.append(ValidationIssue(case.assembly, str(e)))

    return issues


# ----------------------------------------------------------------- main

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="blocksmith",
        description="Machine descriptions, specs, and assembly-block "
                    "synthesis.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="parse and typecheck one file")
    c.add_argument("file")
    c.add_argument("--machine", help="machine description to check "
                                     "specs/programs against")
    c.set_defaults(func=cmd_check)

    r = sub.add_parser("run", help="execute a program on a state")
    r.add_argument("--machine", required=True)
    r.add_argument("--prog", required=True)
    r.add_argument("--spec", help="spec file whose memory regions the "
                                  "program expects")
    r.add_argument("--state", help="initial state JSON (default zeros)")
    r.add_argument("-o", "--output", help="write the final state here "
                                          "instead of stdout")
    r.set_defaults(func=cmd_run)

    lo = sub.add_parser("lower", help="compile a portable spec for one "
                                      "machine")
    lo.add_argument("--machine", required=True)
    lo.add_argument("--lowering", required=True,
                    help="file of lowering modules the spec names")
    lo.add_argument("--spec", required=True, help="portable .ale spec")
    lo.add_argument("-o", "--output", help="write the lowered spec here "
                                           "instead of stdout")
    lo.set_defaults(func=cmd_lower)

    return p


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

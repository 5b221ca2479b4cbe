"""``metakernel`` command line.

Exit status: 0 when everything checked out, 1 when diagnostics were found,
2 for usage, parse and other errors.  Machine-readable lines go to stdout,
human diagnostics (one line each) to stderr.  ``METAKERNEL_COLOR=1`` colours
the stderr output.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import clones
from .constraints import eval_all
from .errors import MetakernelError, ValidationError
from .evolution import diff_metamodels, evolution_report
from .merge import merge
from .meta_core import validate_metamodel
from .model_store import check_conformance, entity_path, resolve
from .syntax_io import (
    lint_syntax_overrides,
    parse_equivalence,
    parse_metamodel,
    parse_model,
    serialize_metamodel,
    serialize_model,
)

OK, FOUND, ERROR = 0, 1, 2

_COLORS = {"error": "31", "warning": "33", "note": "36"}


def _color() -> bool:
    return os.environ.get("METAKERNEL_COLOR", "0") == "1"


def _err(line: str, severity: str = "error") -> None:
    if _color():
        head, sep, rest = line.partition(" ")
        line = f"\x1b[{_COLORS.get(severity, '0')}m{head}\x1b[0m{sep}{rest}"
    print(line, file=sys.stderr)


def _out(line: str) -> None:
    print(line)


def _read(path: str) -> bytes:
    return Path(path).read_bytes()


def _load_mm(path: str):
    return parse_metamodel(_read(path))


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _report_diags(diags) -> int:
    for d in diags:
        _err(str(d), d.severity)
    return FOUND if any(d.severity == "error" for d in diags) else OK


def cmd_validate(args) -> int:
    mm = parse_metamodel(_read(args.metamodel), validate=False)
    diags = validate_metamodel(mm)
    for d in diags:
        _out(f"INVALID {d.location}")
    return _report_diags(diags)


def cmd_check(args) -> int:
    mm = _load_mm(args.metamodel)
    model = parse_model(_read(args.model), mm)
    diags = check_conformance(model, mm, skip_constraints=args.skip_constraints)
    for d in diags:
        _out(f"NONCONFORMING {d.code} {d.location}")
    return _report_diags(diags)


def cmd_constraints(args) -> int:
    mm = _load_mm(args.metamodel)
    model = parse_model(_read(args.model), mm)
    structural = check_conformance(model, mm, skip_constraints=True)
    if structural:
        _err(f"error {args.model}: constraints not evaluated, the model has {len(structural)} structural problem(s)")
        return _report_diags(structural)
    results, ok = eval_all(model, mm)
    for res in results:
        for v in res.violations:
            _out(f"CONSTRAINT {res.name} VIOLATED at {entity_path(model, v.context)}")
    width = max((len(r.name) for r in results), default=0)
    for res in results:
        status = "ok" if res.overall else f"FAILED ({len(res.violations)} violation(s))"
        _err(f"{res.name.ljust(width)}  {status}", "note" if res.overall else "error")
    return OK if ok else FOUND


def cmd_clone(args) -> int:
    mm = _load_mm(args.metamodel)
    model = parse_model(_read(args.model), mm)
    proto = resolve(model, args.prototype)
    parent = None if args.parent in ("/", "") else resolve(model, args.parent)
    kind = clones.SUBPROTOTYPE if args.subprototype else clones.CLONE
    root = clones.clone(model, mm, proto, parent, name=args.name, kind=kind)
    _write(args.output, serialize_model(model))
    if args.output not in (None, "-"):
        _out(f"CLONED {entity_path(model, proto)} -> {entity_path(model, root)}")
    return OK


def cmd_clone_tree(args) -> int:
    mm = _load_mm(args.metamodel)
    model = parse_model(_read(args.model), mm)
    for proto, copy, kind in clones.derivation_tree(model):
        _out(f"{kind.upper()} {entity_path(model, proto)} -> {entity_path(model, copy)}")
    return OK


def cmd_merge(args) -> int:
    left = _load_mm(args.left)
    right = _load_mm(args.right)
    spec = parse_equivalence(_read(args.spec))
    merged, report = merge(left, right, spec, name=args.name)
    _write(args.output, serialize_metamodel(merged))
    lines = report.lines()
    if args.report:
        Path(args.report).write_text("".join(l + "\n" for l in lines), encoding="utf-8")
    elif args.output not in (None, "-"):
        for l in lines:
            _out(l)
    for name, reason in report.flagged:
        _err(f"warning {name}: {reason}", "warning")
    return OK


def cmd_evolve_report(args) -> int:
    old = _load_mm(args.old)
    new = _load_mm(args.new)
    model = parse_model(_read(args.model), old)
    for change in diff_metamodels(old, new):
        _err(f"note {change}", "note")
    impacts = evolution_report(model, old, new)
    if impacts:
        w = max(len(i.kind) for i in impacts)
        for i in impacts:
            _err(f"{i.kind.ljust(w)}  {i.path}: {i.message}", "error")
    for i in impacts:
        _out(f"IMPACT {i.kind} {i.path}")
    return FOUND if impacts else OK


def cmd_lint(args) -> int:
    mm = _load_mm(args.metamodel)
    model = parse_model(_read(args.model), mm)
    warnings = lint_syntax_overrides(model, mm)
    for w in warnings:
        _out(f"LINT {w.code} {w.location}")
    _report_diags(warnings)
    return OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="metakernel", description="Metamodels, models, clones and merges from text files.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", help="check a metamodel file")
    s.add_argument("metamodel")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("check", help="check a model against its metamodel")
    s.add_argument("model")
    s.add_argument("metamodel")
    s.add_argument("--skip-constraints", action="store_true")
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("constraints", help="evaluate constraints")
    cs = s.add_subparsers(dest="action", required=True)
    e = cs.add_parser("eval", help="per-constraint results")
    e.add_argument("model")
    e.add_argument("metamodel")
    e.set_defaults(func=cmd_constraints)

    s = sub.add_parser("clone", help="clone a prototype (or 'clone tree MODEL MM')")
    s.add_argument("model")
    s.add_argument("metamodel")
    s.add_argument("prototype", help="entity path or #id")
    s.add_argument("parent", help="entity path or #id; '/' for a root")
    s.add_argument("-o", "--output")
    s.add_argument("--name")
    s.add_argument("--subprototype", action="store_true")
    s.set_defaults(func=cmd_clone)

    s = sub.add_parser("clone-tree", help="show prototype/clone derivations")
    s.add_argument("model")
    s.add_argument("metamodel")
    s.set_defaults(func=cmd_clone_tree)

    s = sub.add_parser("merge", help="merge two metamodels")
    s.add_argument("left")
    s.add_argument("right")
    s.add_argument("spec")
    s.add_argument("-o", "--output")
    s.add_argument("--report")
    s.add_argument("--name")
    s.set_defaults(func=cmd_merge)

    s = sub.add_parser("evolve", help="metamodel evolution")
    es = s.add_subparsers(dest="action", required=True)
    r = es.add_parser("report", help="which model elements break under a new version")
    r.add_argument("old")
    r.add_argument("new")
    r.add_argument("model")
    r.set_defaults(func=cmd_evolve_report)

    s = sub.add_parser("lint", help="warn about per-entity glyph overrides")
    s.add_argument("model")
    s.add_argument("metamodel")
    s.set_defaults(func=cmd_lint)
    return p


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv[:2] == ["clone", "tree"]:
        argv = ["clone-tree"] + argv[2:]
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as err:
        for d in err.diagnostics:
            _err(str(d), d.severity)
        return ERROR
    except MetakernelError as err:
        _err(f"error {type(err).__name__}: {err}")
        return ERROR
    except OSError as err:
        _err(f"error {err.filename or ''}: {err.strerror}")
        return ERROR


if __name__ == "__main__":
    sys.exit(main())

"""Golden-test corpus: manifest reading and case execution.

A manifest has one case per line, tab separated::

    path    entry    args    expected

``args`` is a list literal holding the call arguments.  ``expected`` is a
value literal, ``!Name`` for an expected error (matched against the error
class hierarchy or the constructor of a thrown value), or ``@file`` naming
a text file whose contents the call must return.  Blank lines and lines
starting with ``#`` are ignored.
"""

import io
import os
from dataclasses import dataclass
from importlib import resources

from . import values as V
from .errors import LoadError, MrlError, Thrown
from .interpreter import Interpreter
from .valueparse import parse_value


@dataclass
class CorpusCase:
    path: str
    entry: str
    args: str
    expected: str
    line: int = 0

    @property
    def name(self):
        return "%s %s %s" % (self.path, self.entry, self.args)


@dataclass
class CaseReport:
    case: CorpusCase
    passed: bool
    detail: str = ""


def default_manifest():
    return str(resources.files("mrl") / "corpus" / "manifest.tsv")


def read_manifest(path):
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as e:
        raise LoadError("cannot read manifest %s: %s" % (path, e.strerror)) from None
    cases = []
    for n, line in enumerate(lines, 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) != 4:
            raise LoadError("manifest line %d: expected 4 tab-separated columns, found %d" % (n, len(cols)),
                            (os.path.basename(path), 0, 0))
        cases.append(CorpusCase(*[c.strip() for c in cols], line=n))
    return cases


def _error_names(exc):
    names = {cls.__name__ for cls in type(exc).__mro__}
    if isinstance(exc, Thrown) and exc.value.kind == V.NODE:
        names.add(exc.value.name)
    return names


def run_case(case, base_dir, **options):
    """Load the case's module in a fresh interpreter, call the entry and
    compare the outcome with the expectation."""
    out = io.StringIO()
    interp = Interpreter(out=out, **options)
    try:
        interp.load_file(os.path.join(base_dir, case.path))
        args = parse_value(case.args, interp.decls)
    except MrlError as e:
        return CaseReport(case, False, "load failed: %s" % e)
    if args.kind != V.LIST:
        return CaseReport(case, False, "args column must be a list literal")
    exp = case.expected
    try:
        result = interp.call(case.entry, *args.elems)
    except MrlError as e:
        if exp.startswith("!"):
            if exp[1:] in _error_names(e):
                return CaseReport(case, True)
            return CaseReport(case, False, "expected %s, got %s: %s" % (exp[1:], type(e).__name__, e))
        return CaseReport(case, False, "%s: %s" % (type(e).__name__, e))
    except RecursionError:
        return CaseReport(case, False, "recursion too deep")
    got = "void" if result is None else V.render(result)
    if exp.startswith("!"):
        return CaseReport(case, False, "expected %s, got %s" % (exp[1:], got))
    if exp.startswith("@"):
        golden_path = os.path.join(base_dir, exp[1:])
        try:
            with open(golden_path, encoding="utf-8", newline="") as fh:
                golden = fh.read()
        except OSError as e:
            return CaseReport(case, False, "cannot read golden file: %s" % e.strerror)
        if result is not None and result.kind == V.STR and result.value == golden:
            return CaseReport(case, True)
        return CaseReport(case, False, "output differs from %s: got %s" % (exp[1:], got))
    try:
        want = parse_value(exp, interp.decls)
    except MrlError as e:
        return CaseReport(case, False, "bad expected literal: %s" % e)
    if result == want:
        return CaseReport(case, True)
    return CaseReport(case, False, "expected %s, got %s" % (V.render(want), got))


def run_in_language_tests(path, **options):
    """Call every nullary ``test*`` function of a module; each must return true."""
    reports = []
    interp = Interpreter(out=io.StringIO(), **options)
    rel = os.path.basename(path)
    try:
        interp.load_file(path)
    except MrlError as e:
        case = CorpusCase(rel, "<load>", "[]", "true")
        return [CaseReport(case, False, "load failed: %s" % e)]
    for name, arity in sorted(interp.functions):
        if arity or not name.startswith("test"):
            continue
        case = CorpusCase(rel, name, "[]", "true")
        try:
            r = interp.call(name)
        except MrlError as e:
            reports.append(CaseReport(case, False, "%s: %s" % (type(e).__name__, e)))
            continue
        ok = r is not None and r == V.TRUE
        reports.append(CaseReport(case, ok, "" if ok else "returned %s" % ("void" if r is None else V.render(r))))
    return reports


def run_manifest(path, **options):
    cases = read_manifest(path)
    base = os.path.dirname(os.path.abspath(path))
    reports = [run_case(c, base, **options) for c in cases]
    seen = []
    for c in cases:
        if c.path not in seen:
            seen.append(c.path)
    for p in seen:
        reports.extend(run_in_language_tests(os.path.join(base, p), **options))
    return reports

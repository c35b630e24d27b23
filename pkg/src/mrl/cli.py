"""Command line front end: ``mrl run``, ``mrl repl`` and ``mrl test``.

Exit codes: 0 success, 1 uncaught exception or runtime error, 2 load or
parse error (or unreadable manifest), 3 internal error.
"""

import argparse
import sys
import threading
import warnings

from . import values as V
from .errors import MrlError, Thrown
from .interpreter import DEFAULT_BUDGET, FailSignal, Interpreter

EXIT_OK, EXIT_RUNTIME, EXIT_LOAD, EXIT_INTERNAL = 0, 1, 2, 3


def _positive(text):
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("%r is not an integer" % text) from None
    if n < 1:
        raise argparse.ArgumentTypeError("budget must be at least 1")
    return n


def _add_common(p, suppress):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--ambiguity", choices=("error", "first"), default=d("error"),
                   help="what parse() does with ambiguous input (default: error)")
    p.add_argument("--solve-budget", type=_positive, default=d(DEFAULT_BUDGET), metavar="N",
                   help="iteration bound for solve (default: %d)" % DEFAULT_BUDGET)
    p.add_argument("--visit-budget", type=_positive, default=d(DEFAULT_BUDGET), metavar="N",
                   help="pass bound for innermost/outermost visits (default: %d)" % DEFAULT_BUDGET)
    p.add_argument("--path", action="append", default=d([]), metavar="DIR",
                   help="directory searched for imported modules (repeatable)")


def build_parser():
    p = argparse.ArgumentParser(prog="mrl", description="Run mrl meta-programs.")
    _add_common(p, False)
    sub = p.add_subparsers(dest="mode", required=True)
    run = sub.add_parser("run", help="load a module and call its entry function")
    run.add_argument("file")
    run.add_argument("--entry", default="main", help="function to call (default: main)")
    _add_common(run, True)
    repl = sub.add_parser("repl", help="interactive session")
    _add_common(repl, True)
    test = sub.add_parser("test", help="run a corpus manifest")
    test.add_argument("manifest", nargs="?", help="manifest file (default: bundled corpus)")
    _add_common(test, True)
    return p


def _options(args):
    return dict(search_paths=args.path, ambiguity=args.ambiguity,
                solve_budget=args.solve_budget, visit_budget=args.visit_budget)


def _report(err, exc):
    if isinstance(exc, Thrown):
        where = exc.where()
        err.write("%suncaught: %s\n" % (where + ": " if where else "", V.render(exc.value)))
    else:
        err.write("%s: %s\n" % (type(exc).__name__, exc))


def cmd_run(args, out, err):
    interp = Interpreter(out=out, **_options(args))
    try:
        interp.load_file(args.file)
    except MrlError as e:
        _report(err, e)
        return EXIT_LOAD
    except RecursionError:
        err.write("error: module nesting too deep\n")
        return EXIT_LOAD
    try:
        result = interp.call_function(args.entry, [])
    except FailSignal:
        err.write("FailOutsideBacktrackingScope: fail outside a backtracking scope\n")
        return EXIT_RUNTIME
    except MrlError as e:
        _report(err, e)
        return EXIT_RUNTIME
    except RecursionError:
        err.write("error: recursion too deep\n")
        return EXIT_RUNTIME
    if result is not None:
        out.write(V.to_text(result) + "\n")
    return EXIT_OK


def cmd_test(args, out, err):
    from .manifest import default_manifest, run_manifest
    path = args.manifest or default_manifest()
    try:
        reports = run_manifest(path, **_options(args))
    except MrlError as e:
        _report(err, e)
        return EXIT_LOAD
    failed = 0
    for r in reports:
        status = "PASS" if r.passed else "FAIL"
        line = "%s  %s" % (status, r.case.name)
        if not r.passed:
            failed += 1
            line += "\n      " + r.detail
        out.write(line + "\n")
    out.write("%d passed, %d failed\n" % (len(reports) - failed, failed))
    return EXIT_OK if failed == 0 else EXIT_RUNTIME


def cmd_repl(args, out, err):
    from .repl import Repl
    return Repl(Interpreter(out=out, **_options(args)), out=out).run()


def main(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    # deep object-language recursion needs a deep host stack
    result = []
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 50000))
    old = threading.stack_size(512 * 1024 * 1024)
    try:
        t = threading.Thread(target=lambda: result.append(_dispatch(args, out, err)))
        t.start()
        t.join()
    finally:
        threading.stack_size(old)
    return result[0] if result else EXIT_INTERNAL


def _dispatch(args, out, err):
    with warnings.catch_warnings():
        warnings.simplefilter("always")
        warnings.showwarning = lambda msg, *rest, **kw: err.write("warning: %s\n" % msg)
        try:
            if args.mode == "run":
                return cmd_run(args, out, err)
            if args.mode == "test":
                return cmd_test(args, out, err)
            return cmd_repl(args, out, err)
        except Exception as e:  # anything not anticipated is an interpreter bug
            err.write("internal error: %s: %s\n" % (type(e).__name__, e))
            return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())

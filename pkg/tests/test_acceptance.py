"""Acceptance suite: one check per criterion, each printing a PASS/FAIL line.

Run under pytest (lines are collected and shown in the terminal summary) or
directly with ``python3 tests/test_acceptance.py``.
"""

import io
import os
import sys
import time

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from mrl import values as V  # noqa: E402
from mrl.errors import AmbiguityError, FixpointBudgetExceeded  # noqa: E402
from mrl.grammar import NT, Lit, SyntaxDef, compile_grammar, parse  # noqa: E402
from mrl.interpreter import Env, Interpreter  # noqa: E402
from mrl.manifest import default_manifest  # noqa: E402
from mrl.patterns import ListPat, Multi, Single, Var, match_all  # noqa: E402
from mrl.valueparse import parse_value  # noqa: E402

import oracles as O  # noqa: E402

CORPUS = os.path.dirname(default_manifest())
RESULTS = []


def report(n, ok, detail):
    line = "criterion %2d: %s  %s" % (n, "PASS" if ok else "FAIL", detail)
    RESULTS.append(line)
    print(line)
    return ok


def corpus(name, **options):
    interp = Interpreter(out=io.StringIO(), **options)
    interp.load_file(os.path.join(CORPUS, name))
    return interp


# 1 ------------------------------------------------------------------------------------------


def check_peano():
    i = corpus("peano.mrl")
    nums = [O.peano(n) for n in range(21)]
    start = time.perf_counter()
    bad = []
    for n in range(21):
        for m in range(21):
            for f in ("add1", "add2"):
                if O.from_peano(i.call(f, nums[n], nums[m])) != n + m:
                    bad.append((f, n, m))
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 5.0
    return report(1, ok, "Peano add1/add2 on 441 pairs: %d mismatches, %.2fs (limit 5s)"
                  % (len(bad), elapsed))


# 2 ------------------------------------------------------------------------------------------


def check_colors():
    i = corpus("colored_tree.mrl")
    rng = O.seeded(2)
    bad = 0
    for _ in range(100):
        t = O.random_tree(rng, 8)
        if i.call("colorDistribution", t) != O.color_counts(t):
            bad += 1
    return report(2, bad == 0, "colorDistribution vs brute-force counter on 100 trees: %d mismatches"
                  % bad)


# 3 ------------------------------------------------------------------------------------------


def check_entities():
    i = corpus("entities.mrl")
    text = i.call("personJava").value
    with open(os.path.join(CORPUS, "person.java.golden"), encoding="utf-8", newline="") as fh:
        golden = fh.read()
    entity = i.call("person")
    fields = [f.args[1].value for f in entity.args[1]]
    pairs = all("public %s get%s()" % ("String", f.capitalize()) in text
                and "public void set%s(" % f.capitalize() in text
                and "private String %s;" % f in text for f in fields)
    ok = text.startswith("public class Person {") and pairs and fields == ["name"] and text == golden
    return report(3, ok, "Entities parse/implode/entity2java equals golden byte-for-byte: %s"
                  % (text == golden))


# 4 ------------------------------------------------------------------------------------------


def check_closure():
    i = corpus("relations.mrl")
    rng = O.seeded(4)
    bad_core = bad_solve = 0
    for _ in range(50):
        r = O.random_relation(rng, 50)
        want = O.naive_closure(r)
        bad_core += V.transitive_closure(r) != want
        bad_solve += i.call("closure", r) != want
    return report(4, bad_core == bad_solve == 0,
                  "closure vs naive fixed point on 50 relations: value-core %d, solve %d mismatches"
                  % (bad_core, bad_solve))


# 5 ------------------------------------------------------------------------------------------


def check_list_match():
    bad = []
    split = ListPat((Multi("a"), Multi("b")))
    pick = ListPat((Multi("a"), Single(Var("x")), Multi("b")))
    for n in range(13):
        xs = [V.Int(k) for k in range(n)]
        got = [(m["a"].elems, m["b"].elems) for m in match_all(split, V.List(xs))]
        want = [(tuple(a), tuple(b)) for a, b in O.list_splits(xs)]
        if len(got) != n + 1 or got != want:
            bad.append(("split", n))
        got = list(match_all(pick, V.List(xs)))
        if len(got) != n or [m["x"] for m in got] != xs:
            bad.append(("pick", n))
    return report(5, not bad, "list matching for n <= 12: %d wrong counts or orders" % len(bad))


# 6 ------------------------------------------------------------------------------------------


def check_ambiguity():
    g = compile_grammar([SyntaxDef("syntax", "E", (
        (None, (NT("E"), Lit("+"), NT("E"))), (None, (Lit("a"),))))])
    count = None
    try:
        parse(g, "E", "a+a+a")
    except AmbiguityError as e:
        count = e.count
    brute = O.brute_force_derivations({"E": [["E", ("+",), "E"], [("a",)]]}, "E", "a+a+a")
    first = parse(g, "E", "a+a+a", policy="first")
    ok = count == 2 and brute == 2 and first.yield_() == "a+a+a"
    return report(6, ok, "a+a+a: AmbiguityError count %s, brute force %d, first-policy yield %r"
                  % (count, brute, first.yield_()))


# 7 ------------------------------------------------------------------------------------------


def check_round_trips():
    rng = O.seeded(7)
    bad = 0
    for _ in range(1000):
        v = O.random_value(rng, 6)
        if parse_value(V.render(v)) != v:
            bad += 1
    i = corpus("entities.mrl")
    g = i.grammar()
    inputs = [i.call("personSource").value, "entity Person { string name }",
              "entity A { B b integer n date d }\n\nentity B{boolean ok currency c}", ""]
    tree_bad = 0
    for text in inputs:
        t = parse(g, "Entities", text)
        if parse(g, "Entities", t.yield_()) != t or t.yield_() != text:
            tree_bad += 1
    ok = bad == 0 and tree_bad == 0
    return report(7, ok, "round trips: %d/1000 value failures, %d/%d parse-tree failures"
                  % (bad, tree_bad, len(inputs)))


# 8 ------------------------------------------------------------------------------------------

_BACKTRACK = """
list[int] restore() {
  int n = 0;
  list[int] log = [];
  if ([*a, *b] := [1,2,3]) {
    n = n + 100;
    log = log + [size(a)];
    if (size(a) < 3) fail;
    return [n] + log;
  }
  return [];
}

int pick(int x) { println("first"); return 1; }
int pick(0) { println("zero"); return 0; }
default int pick(int x) { println("default"); return -1; }

int partial(int x) { if (x > 0) return 1; fail; }
default int partial(int x) { println("default"); return -1; }
"""


def check_backtracking():
    out = io.StringIO()
    i = Interpreter(out=out)
    with pytest.warns(Warning):
        i.load_source(_BACKTRACK, "backtrack.mrl")
    restored = i.call("restore") == V.List([V.Int(100), V.Int(3)])

    env = Env([{"x": V.Int(1)}])
    env.push()
    env.frames[-1]["y"] = V.Int(2)
    snap = env.snapshot()
    before = [dict(f) for f in env.frames]
    env.frames[0]["x"] = V.Int(9)
    env.frames[-1]["z"] = V.Int(3)
    env.restore(snap)
    env_ok = [dict(f) for f in env.frames] == before

    log = []
    for x in (5, 0, 7):
        out.truncate(0)
        out.seek(0)
        i.call("pick", V.Int(x))
        log.append(out.getvalue())
    dispatch_ok = all("default" not in s for s in log)
    out.truncate(0)
    out.seek(0)
    fallback = i.call("partial", V.Int(-1)) == V.Int(-1) and out.getvalue() == "default\n"
    out.truncate(0)
    out.seek(0)
    no_fallback = i.call("partial", V.Int(1)) == V.Int(1) and out.getvalue() == ""
    ok = restored and env_ok and dispatch_ok and fallback and no_fallback
    return report(8, ok, "fail restores env: %s/%s; defaults skipped after a completed match: %s"
                  % (restored, env_ok, dispatch_ok and no_fallback))


# 9 ------------------------------------------------------------------------------------------


def check_rewriting():
    i = corpus("nat_rewrite.mrl")
    rng = O.seeded(9)
    bad = 0
    for _ in range(100):
        t = O.random_nat_term(rng, 8)
        if i.call("innermostNormal", t) != O.li_normal_form(t):
            bad += 1
    return report(9, bad == 0, "innermost visit vs leftmost-innermost rewriter on 100 terms: "
                  "%d mismatches" % bad)


# 10 -----------------------------------------------------------------------------------------


def check_budgets():
    src = "bool flip() { bool b = true; solve (b) { b = !b; } return b; }"
    got = {}
    for bound in (1, 2, 10, 250):
        i = Interpreter(solve_budget=bound)
        i.load_source(src, "flip.mrl")
        try:
            i.call("flip")
            got[bound] = None
        except FixpointBudgetExceeded as e:
            got[bound] = e.iterations
    i = Interpreter()
    i.load_source(src, "flip.mrl")
    try:
        i.call("flip")
        got["default"] = None
    except FixpointBudgetExceeded as e:
        got["default"] = e.iterations
    ok = all(got[b] == b for b in (1, 2, 10, 250)) and got["default"] == 10000
    return report(10, ok, "non-converging solve stops at the bound: %s" % got)


CHECKS = [check_peano, check_colors, check_entities, check_closure, check_list_match,
          check_ambiguity, check_round_trips, check_backtracking, check_rewriting, check_budgets]


@pytest.mark.parametrize("check", CHECKS, ids=["criterion_%02d" % (k + 1) for k in range(len(CHECKS))])
def test_criterion(check):
    assert check()


if __name__ == "__main__":
    sys.setrecursionlimit(20000)
    results = [c() for c in CHECKS]
    print("%d/%d criteria pass" % (sum(results), len(results)))
    sys.exit(0 if all(results) else 1)

import io
import os
import warnings

import pytest

from mrl import values as V
from mrl.errors import (CyclicImport, DuplicateDeclaration, FixpointBudgetExceeded,
                        InsertOutsideVisit, IoError, KeyTypeError, LoadError, MrlSyntaxError,
                        NoApplicableAlternative, ReplacementTypeError, ReturnTypeError, Thrown,
                        UnbalancedTemplate, UndefinedName)
from mrl.interpreter import Env, Interpreter, OverlapWarning, ShadowWarning
from mrl.manifest import default_manifest
from mrl.valueparse import parse_value

import oracles as O

CORPUS = os.path.dirname(default_manifest())

NAT = "data NAT = z() | succ(NAT arg);\n"
TREE = ("data ColoredTree = leaf(int N) | red(ColoredTree left, ColoredTree right)"
        " | composite(str color, ColoredTree left, ColoredTree right);\n")


def prog(src, **options):
    interp = Interpreter(out=io.StringIO(), **options)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", OverlapWarning)
        interp.load_source(src, "t.mrl")
    return interp


def run(src, entry="f", *args, **options):
    interp = prog(src, **options)
    return interp.call(entry, *[parse_value(a, interp.decls) if isinstance(a, str) else a
                                for a in args])


def val(text, interp=None):
    return parse_value(text, interp.decls if interp else None)


# --- loading and dispatch --------------------------------------------------------------


def test_alternatives_grouped():
    i = prog(NAT + "NAT add2(NAT x, z()) = x;\nNAT add2(NAT x, succ(NAT y)) = succ(add2(x, y));\n")
    assert len(i.functions[("add2", 2)]) == 2
    assert V.render(i.call("add2", val("succ(succ(z()))", i), val("succ(z())", i))) == \
        "succ(succ(succ(z())))"
    assert i.call("add2", val("z()", i), val("z()", i)) == val("z()", i)


def test_no_applicable_alternative():
    with pytest.raises(NoApplicableAlternative):
        run(NAT + "int f(z()) = 0;", "f", "succ(z())")


def test_defaults_run_last():
    src = """
default int g(int x) { println("default"); return 0; }
int g(1) { println("one"); return 1; }
int g(int x) { if (x > 5) return 6; fail; }
"""
    i = prog(src)
    assert i.call("g", V.Int(1)) == V.Int(1)
    assert i.out.getvalue() == "one\n"
    assert i.call("g", V.Int(9)) == V.Int(6)
    assert i.out.getvalue() == "one\n"
    assert i.call("g", V.Int(2)) == V.Int(0)
    assert i.out.getvalue() == "one\ndefault\n"


def test_fail_without_alternatives():
    with pytest.raises(NoApplicableAlternative):
        run("int f(int x) { fail; }", "f", "1")


def test_return_type_checked():
    with pytest.raises(ReturnTypeError):
        run('int f() = "a";')
    with pytest.raises(ReturnTypeError):
        run("int f() { int x = 1; }")
    assert run("void f() { int x = 1; }") is None


def test_overlap_warning():
    i = Interpreter(out=io.StringIO())
    with pytest.warns(OverlapWarning):
        i.load_source("int f(int x) = 1;\nint f(int y) = 2;", "t.mrl")
    assert i.warnings
    assert i.call("f", V.Int(0)) == V.Int(1)


def test_no_warning_for_exclusive_patterns():
    i = prog(NAT + "int f(z()) = 0;\nint f(succ(_)) = 1;")
    assert not i.warnings


def test_duplicate_constructor():
    with pytest.raises(DuplicateDeclaration):
        prog("data T = leaf(int n);\ndata T = leaf(int m);")


def test_undefined_name():
    with pytest.raises(UndefinedName):
        run("int f() = y;")


def test_syntax_error_location():
    with pytest.raises(MrlSyntaxError) as info:
        prog("int f() = ;")
    assert info.value.loc[0] == "t.mrl"
    assert info.value.loc[1] == 10


# --- imports ------------------------------------------------------------------------------


def write(tmp_path, rel, text):
    p = tmp_path / rel
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(text)
    return p


def test_imports(tmp_path):
    write(tmp_path, "lib/nat.mrl", "module lib::nat;\n" + NAT + "NAT one() = succ(z());")
    main = write(tmp_path, "main.mrl", "module main;\nimport lib::nat;\nNAT two() = succ(one());")
    i = Interpreter()
    i.load_file(main)
    assert V.render(i.call("two")) == "succ(succ(z()))"


def test_self_import(tmp_path):
    main = write(tmp_path, "a.mrl", "module a;\nimport a;\nint f() = 1;")
    with pytest.raises(CyclicImport):
        Interpreter().load_file(main)


def test_import_cycle(tmp_path):
    write(tmp_path, "b.mrl", "module b;\nimport a;\nint g() = 1;")
    main = write(tmp_path, "a.mrl", "module a;\nimport b;\nint f() = 1;")
    with pytest.raises(CyclicImport):
        Interpreter().load_file(main)


def test_missing_import(tmp_path):
    main = write(tmp_path, "a.mrl", "module a;\nimport nowhere;\nint f() = 1;")
    with pytest.raises(LoadError):
        Interpreter().load_file(main)


def test_search_path(tmp_path):
    write(tmp_path, "libs/util.mrl", "module util;\nint k() = 7;")
    main = write(tmp_path, "src/a.mrl", "module a;\nimport util;\nint f() = k();")
    i = Interpreter(search_paths=[tmp_path / "libs"])
    i.load_file(main)
    assert i.call("f") == V.Int(7)


# --- switch -------------------------------------------------------------------------------


def test_switch():
    src = NAT + """
NAT add1(NAT x, NAT y) {
  switch (y) {
    case z(): return x;
    case succ(NAT y): return succ(add1(x, y));
  }
}
int none(int x) { int r = 0; switch (x) { case 1: r = 1; } return r; }
int second(int x) {
  switch (x) {
    case int n: { if (n > 0) fail; return 1; }
    case 3: return 3;
    default: return 4;
  }
}
"""
    i = prog(src)
    assert i.call("add1", val("succ(z())", i), val("z()", i)) == val("succ(z())", i)
    assert i.call("add1", val("z()", i), val("succ(succ(z()))", i)) == val("succ(succ(z()))", i)
    assert i.call("none", V.Int(5)) == V.Int(0)
    assert i.call("second", V.Int(3)) == V.Int(3)
    assert i.call("second", V.Int(7)) == V.Int(4)
    assert i.call("second", V.Int(-1)) == V.Int(1)


# --- backtracking -----------------------------------------------------------------------------


def test_bound_variable_in_case_is_equality():
    i = prog("int f(int x) { switch (3) { case x: return 1; default: return 0; } }")
    with pytest.warns(ShadowWarning):
        assert i.call("f", V.Int(3)) == V.Int(1)
    assert i.call("f", V.Int(4)) == V.Int(0)
    assert len(i.warnings) == 1


def test_fail_example():
    src = "list[int] f() { if ([*a, *b] := [1,2]) { if (size(a) == 0) fail; return a; } return []; }"
    assert run(src) == V.List([V.Int(1)])


def test_fail_restores_assignments():
    src = """
list[int] f() {
  int n = 0;
  list[int] seen = [];
  if ([*a, *b] := [1,2,3]) {
    n = n + 10;
    seen = seen + [size(a)];
    if (size(a) < 2) fail;
    return [n] + seen;
  }
  return [];
}
"""
    assert run(src) == V.List([V.Int(10), V.Int(2)])


def test_env_snapshot_restore():
    env = Env([{"x": V.Int(1)}])
    env.push()
    env.frames[-1]["y"] = V.Int(2)
    snap = env.snapshot()
    before = [dict(f) for f in env.frames]
    env.frames[-1]["y"] = V.Int(3)
    env.frames[0]["x"] = V.Int(4)
    env.frames[-1]["z"] = V.Int(5)
    env.restore(snap)
    assert [dict(f) for f in env.frames] == before


def test_for_with_fail_and_conditions():
    src = """
list[int] f() {
  list[int] out = [];
  for (x <- [1,2,3,4], x % 2 == 0) out = out + [x];
  return out;
}
"""
    assert run(src) == V.List([V.Int(2), V.Int(4)])


def test_match_operators():
    src = """
bool a() = [1, *_, 3] := [1,2,3];
bool b() = 4 !:= 4;
bool c() = /leaf(2) := red(leaf(1), leaf(2));
"""
    i = prog(TREE + src)
    assert i.call("a") == V.TRUE
    assert i.call("b") == V.FALSE
    assert i.call("c") == V.TRUE


# --- visit --------------------------------------------------------------------------------------


def test_color_distribution():
    i = Interpreter()
    i.load_file(os.path.join(CORPUS, "colored_tree.mrl"))
    t = val('composite("red",leaf(1),composite("blue",leaf(2),leaf(3)))', i)
    assert i.call("colorDistribution", t) == val('("red":1,"blue":1)', i)
    assert i.call("colors", t) == val('{"red","blue"}', i)


def test_visit_without_cases_and_purity():
    src = TREE + """
tuple[ColoredTree, ColoredTree] f(ColoredTree t) {
  u = visit(t) { case leaf(int n) => leaf(n * 10) };
  return <t, u>;
}
ColoredTree g(ColoredTree t) = visit(t) { };
"""
    i = prog(src)
    t = val("red(leaf(1),leaf(2))", i)
    before = V.render(t)
    pair = i.call("f", t)
    assert pair.elems[0] == t and V.render(t) == before
    assert V.render(pair.elems[1]) == "red(leaf(10),leaf(20))"
    assert i.call("g", t) == t


def test_replacement_type_error():
    src = TREE + 'ColoredTree f(ColoredTree t) = visit(t) { case leaf(int n) => "x" };'
    with pytest.raises(ReplacementTypeError):
        run(src, "f", "red(leaf(1),leaf(2))")


def test_top_down_does_not_revisit_replacement():
    src = TREE + """
ColoredTree f(ColoredTree t) = top-down visit(t) {
  case leaf(int n) => red(leaf(n), leaf(n))
};
"""
    assert V.render(run(src, "f", "leaf(1)")) == "red(leaf(1),leaf(1))"


def test_insert():
    src = TREE + "ColoredTree f(ColoredTree t) = visit(t) { case leaf(int n): insert leaf(n + 1); };"
    assert V.render(run(src, "f", "red(leaf(1),leaf(2))")) == "red(leaf(2),leaf(3))"
    with pytest.raises(InsertOutsideVisit):
        run("int f() { insert 1; return 0; }")


def test_innermost_and_outermost():
    i = Interpreter()
    i.load_file(os.path.join(CORPUS, "nat_rewrite.mrl"))
    t = val("add(succ(z()),succ(z()))", i)
    assert V.render(i.call("innermostNormal", t)) == "succ(succ(z()))"
    assert V.render(i.call("outermostNormal", t)) == "succ(succ(z()))"


def test_visit_budget():
    src = TREE + "ColoredTree f(ColoredTree t) = innermost visit(t) { case leaf(int n) => leaf(n + 1) };"
    with pytest.raises(FixpointBudgetExceeded) as info:
        run(src, "f", "leaf(0)", visit_budget=7)
    assert info.value.iterations == 7


def test_visit_strings_and_collections():
    src = 'list[value] f() = visit([1, "a", {2}]) { case int n => n + 1 };'
    assert V.render(run(src)) == '[2,"a",{3}]'


# --- solve ---------------------------------------------------------------------------------------


def test_solve_closure():
    src = """
rel[int,int] f(rel[int,int] edges) {
  rel[int,int] reach = edges;
  solve (reach) {
    reach = reach + (reach o edges);
  }
  return reach;
}
"""
    edges = val("{<1,2>,<2,3>}")
    assert run(src, "f", edges) == V.transitive_closure(edges)


def test_solve_counts_iterations():
    src = """
int f() {
  int n = 0;
  int x = 1;
  solve (x) { n += 1; }
  return n;
}
"""
    assert run(src) == V.Int(1)


@pytest.mark.parametrize("bound", [1, 5, 37])
def test_solve_budget(bound):
    src = "bool f() { bool b = true; solve (b) { b = !b; } return b; }"
    with pytest.raises(FixpointBudgetExceeded) as info:
        run(src, solve_budget=bound)
    assert info.value.iterations == bound


def test_solve_inline_bound():
    src = "int f() { int n = 0; solve (n; 3) { n += 1; } return n; }"
    with pytest.raises(FixpointBudgetExceeded) as info:
        run(src)
    assert info.value.iterations == 3


# --- comprehensions --------------------------------------------------------------------------------


def test_comprehensions():
    assert run("list[int] f() = [ x * x | x <- [1,2,3] ];") == val("[1,4,9]")
    assert run('map[str,int] f() = ( k : 0 | k <- {"a","b"} );') == val('("a":0,"b":0)')
    assert run("set[int] f() = { x + y | x <- [1,2], y <- {10,20}, x < 2 };") == val("{11,21}")
    assert run('list[str] f() = [ k | k <- ("b":1,"a":2) ];') == val('["a","b"]')


# --- templates ---------------------------------------------------------------------------------------


def test_template_identity():
    assert run('str f() = "plain text";') == V.Str("plain text")


def test_template_margin_and_interpolation():
    src = 'str f(int n) = "a <n>\n          \'b <[n]>";'
    assert run(src, "f", "3") == V.Str("a 3\nb [3]")


def test_auto_indent():
    src = 'str f(str s) = "ab <s>";'
    assert run(src, "f", '"x\\ny"') == V.Str("ab x\n   y")


def test_template_for_and_if():
    src = 'str f(list[int] xs) = "<for (x <- xs) {><x>,<}><if (size(xs) > 1) {>many<} else {>few<}>";'
    assert run(src, "f", "[1,2]") == V.Str("1,2,many")
    assert run(src, "f", "[]") == V.Str("few")


def test_unbalanced_template():
    with pytest.raises(UnbalancedTemplate):
        prog('str f() = "<for (x <- [1]) {><x>";')


def test_entity2java_golden():
    i = Interpreter()
    i.load_file(os.path.join(CORPUS, "entities.mrl"))
    e = val('entity(name("Person"),[field(primitive(string()),"name")])', i)
    text = i.call("entity2java", e).value
    with open(os.path.join(CORPUS, "person.java.golden"), encoding="utf-8") as fh:
        assert text == fh.read()
    assert text.startswith("public class Person {")
    assert "  private String name;" in text


# --- subscripts, maps and exceptions --------------------------------------------------------


def test_default_subscript():
    assert run('int f() = ()["red"] ? 0;') == V.Int(0)
    assert run('int f() = ("red":2)["red"] ? 0;') == V.Int(2)
    src = 'map[str,int] f() { map[str,int] c = (); c["red"] ? 0 += 1; c["red"] ? 0 += 1; return c; }'
    assert run(src) == val('("red":2)')


def test_key_type_error():
    with pytest.raises(KeyTypeError):
        run("map[str,int] f() { map[str,int] m = (); m[1] = 2; return m; }")


def test_missing_key_throws():
    with pytest.raises(Thrown) as info:
        run('int f() = ("a":1)["b"];')
    assert V.render(info.value.value) == 'noSuchKey("b")'


def test_division():
    assert run("int f() = -7 / 2;") == V.Int(-3)
    assert run("int f() = -7 % 2;") == V.Int(-1)
    src = "int f() { try { return 1 / 0; } catch divByZero(): return -1; }"
    assert run(src) == V.Int(-1)


def test_throw_and_catch_binding():
    src = "data E = oops(int code);\nint f() { try throw oops(4); catch oops(int c): return c; }"
    assert run(src) == V.Int(4)
    with pytest.raises(Thrown):
        run("data E = oops(int code);\nint f() { throw oops(1); }")


def test_relations_in_programs():
    src = "set[int] f() = {<1,2>,<2,3>}+[1];"
    assert run(src) == val("{2,3}")
    assert run("rel[int,int] f() = {<1,2>} o {<2,5>};") == val("{<1,5>}")


def test_reified_type():
    assert V.render(run("value f() = #int;")) == 'type("int")'


# --- builtins --------------------------------------------------------------------------------------


def test_builtins():
    assert run('str f() = capitalize("name");') == V.Str("Name")
    assert run("int f() = size([]);") == V.Int(0)
    assert run('int f() = toInt("42");') == V.Int(42)
    assert run("str f() = toStr([1]);") == V.Str("[1]")
    with pytest.raises(Thrown) as info:
        run('int f() = toInt("4x");')
    assert info.value.value.name == "illegalArgument"


def test_file_io(tmp_path):
    p = str(tmp_path / "out.txt")
    src = 'str f(str p) { writeFile(p, "héllo"); return readFile(p); }'
    assert run(src, "f", V.Str(p)) == V.Str("héllo")
    with pytest.raises(IoError):
        run("str f(str p) = readFile(p);", "f", V.Str(str(tmp_path / "missing")))


def test_println_output():
    i = prog('void f() { println("a", 1); print("b"); }')
    i.call("f")
    assert i.out.getvalue() == "a1\nb"


def test_ecore_super_classes():
    i = Interpreter(out=io.StringIO())
    i.load_file(os.path.join(CORPUS, "ecore.mrl"))
    got = i.call("superClasses", V.Str("Manager"))
    assert got == val('{"Employee","NamedElement","Person","Serializable"}')
    assert sorted(i.out.getvalue().splitlines()) == [
        "Super: Employee", "Super: NamedElement", "Super: Person", "Super: Serializable"]


# --- whole-program properties ----------------------------------------------------------------------


def test_peano_styles_agree():
    i = Interpreter()
    i.load_file(os.path.join(CORPUS, "peano.mrl"))
    for n in range(0, 21, 4):
        for m in range(0, 21, 5):
            a, b = O.peano(n), O.peano(m)
            assert O.from_peano(i.call("add1", a, b)) == n + m
            assert O.from_peano(i.call("add2", a, b)) == n + m


def test_bottom_up_and_innermost_agree_with_rewriter():
    i = Interpreter()
    i.load_file(os.path.join(CORPUS, "nat_rewrite.mrl"))
    rng = O.seeded(3)
    for _ in range(30):
        t = O.random_nat_term(rng, 6)
        expected = O.li_normal_form(t)
        assert i.call("innermostNormal", t) == expected
        assert i.call("bottomUpNormal", t) == expected
        assert O.from_peano(expected) == O.nat_value(t)

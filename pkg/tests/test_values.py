import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mrl import types as T
from mrl import values as V
from mrl.errors import ArityError, UnknownTypeName, ValueSyntaxError
from mrl.valueparse import parse_value

import oracles as O


def ints(*xs):
    return [V.Int(x) for x in xs]


def pair(a, b):
    return V.Tuple(ints(a, b))


def rel(*pairs):
    return V.Set(pair(a, b) for a, b in pairs)


# --- rendering and parsing ------------------------------------------------------


def test_render_examples():
    assert V.render(V.List(ints(1, 2))) == "[1,2]"
    nat = V.Node("NAT", "succ", (V.Node("NAT", "z", ()),))
    assert V.render(nat) == "succ(z())"
    assert V.render(rel((2, 3), (1, 2))) == "{<1,2>,<2,3>}"


def test_render_atoms():
    assert V.render(V.TRUE) == "true"
    assert V.render(V.Int(-7)) == "-7"
    assert V.render(V.Str('a"b\\c\nd<')) == '"a\\"b\\\\c\\nd\\<"'
    assert V.render(V.Loc("file:///x.mrl", 3, 4)) == "|file:///x.mrl|(3,4)"
    assert V.render(V.Map({V.Str("b"): V.Int(2), V.Str("a"): V.Int(1)})) == '("a":1,"b":2)'


def test_parse_examples():
    assert parse_value("[1,2]") == V.List(ints(1, 2))
    assert parse_value("{<1,2>}") == rel((1, 2))
    d = T.Declarations()
    d.declare_adt("NAT")
    d.declare_ctor("NAT", "z", [])
    d.declare_ctor("NAT", "succ", [(T.Adt("NAT"), "n")])
    v = parse_value("succ(z())", d)
    assert v == V.Node("NAT", "succ", (V.Node("NAT", "z", ()),))
    assert v.adt == "NAT"


def test_parse_whitespace_and_big_ints():
    assert parse_value(" [ 1 , 2 ] ") == V.List(ints(1, 2))
    big = 10 ** 40
    assert parse_value(str(-big)) == V.Int(-big)


@pytest.mark.parametrize("text", ["[1,2", "{<1,2>", "\"abc", "(1:)", "1 2", "", "@", "|x|(1)"])
def test_malformed_values(text):
    with pytest.raises(ValueSyntaxError) as info:
        parse_value(text)
    assert info.value.offset >= 0


@settings(max_examples=300, deadline=None)
@given(O.values)
def test_round_trip(v):
    assert parse_value(V.render(v)) == v


@settings(max_examples=100, deadline=None)
@given(st.lists(O.values, max_size=6), st.randoms())
def test_set_canonical_under_permutation(items, rnd):
    shuffled = list(items)
    rnd.shuffle(shuffled)
    a, b = V.Set(items), V.Set(shuffled)
    assert a == b
    assert V.render(a) == V.render(b)
    assert hash(a) == hash(b)


def test_structural_equality():
    assert V.List(ints(1)) != V.Set(ints(1))
    assert V.Node("A", "f", ()) != V.Node("A", "g", ())
    assert V.Set(ints(1, 1, 2)) == V.Set(ints(2, 1))
    assert len(V.Set(ints(1, 1, 2))) == 2


def test_canonical_kind_order():
    vals = [V.Node("A", "f", ()), V.Map({}), V.Set([]), V.List([]), V.Tuple(ints(1)),
            V.Loc("u", 0, 0), V.Str("s"), V.Int(1), V.TRUE]
    assert sorted(vals, key=V.order_key) == list(reversed(vals))


# --- types ------------------------------------------------------------------------


def test_type_of_examples():
    assert T.type_of(V.Int(3)) == T.INT
    assert T.type_of(V.Set([])) == T.SetT(T.VOID)
    assert T.type_of(V.Node("ColoredTree", "leaf", (V.Int(1),))) == T.Adt("ColoredTree")
    assert T.type_of(V.List([V.Int(1), V.Str("a")])) == T.ListT(T.VALUE)
    assert T.type_str(T.type_of(rel((1, 2)))) == "rel[int,int]"


def test_subtype_examples():
    assert T.subtype_of(T.VOID, T.Adt("Statement"))
    assert T.subtype_of(T.Adt("Tree"), T.NODE)
    assert T.subtype_of(T.ListT(T.INT), T.ListT(T.VALUE))
    assert T.subtype_of(T.NonTerminal("Expr"), T.Adt("Tree"))
    assert not T.subtype_of(T.NODE, T.Adt("Tree"))
    assert not T.subtype_of(T.INT, T.STR)


def test_subtype_unknown_name():
    with pytest.raises(UnknownTypeName):
        T.subtype_of(T.Adt("Nope"), T.VALUE, T.Declarations())


@settings(max_examples=1000, deadline=None)
@given(O.types, O.types, O.types)
def test_lattice_laws(a, b, c):
    assert T.subtype_of(a, a)
    assert T.subtype_of(T.VOID, a)
    assert T.subtype_of(a, T.VALUE)
    if T.subtype_of(a, b) and T.subtype_of(b, c):
        assert T.subtype_of(a, c)
    j = T.lub(a, b)
    assert T.subtype_of(a, j) and T.subtype_of(b, j)


@settings(max_examples=200, deadline=None)
@given(O.values)
def test_value_is_instance_of_its_type(v):
    t = T.type_of(v)
    assert T.instance_of(v, t)
    assert T.instance_of(v, T.VALUE)


# --- set and relation operators -------------------------------------------------


def test_set_algebra():
    assert V.set_union(V.Set(ints(1)), V.Set(ints(2))) == V.Set(ints(1, 2))
    assert V.set_intersect(V.Set(ints(1, 2)), V.Set(ints(2, 3))) == V.Set(ints(2))
    assert V.set_diff(V.Set(ints(1, 2)), V.Set(ints(2))) == V.Set(ints(1))


def test_compose():
    assert V.compose(rel((1, 2)), rel((2, 3))) == rel((1, 3))
    assert V.compose(rel(), rel((1, 2))) == rel()
    assert V.compose(rel((1, 2), (2, 3)), rel((2, 3), (3, 4))) == rel((1, 3), (2, 4))


def test_compose_arity_error():
    bad = V.Set([V.Tuple(ints(1, 2, 3))])
    with pytest.raises(ArityError):
        V.compose(bad, rel((1, 2)))
    with pytest.raises(ArityError):
        V.transitive_closure(bad)


def test_transitive_closure_examples():
    assert V.transitive_closure(rel((1, 2), (2, 3))) == rel((1, 2), (2, 3), (1, 3))
    assert V.transitive_closure(rel()) == rel()
    assert V.transitive_closure(rel((1, 1))) == rel((1, 1))


def test_reflexive_closure():
    assert V.reflexive_transitive_closure(rel((1, 2))) == rel((1, 1), (2, 2), (1, 2))


def test_image():
    assert V.rel_image(rel((1, 2), (1, 3)), V.Int(1)) == V.Set(ints(2, 3))
    assert V.rel_image(rel((1, 2)), V.Int(9)) == V.Set([])
    r = V.Set([V.Tuple((V.Str("a"), V.Str("b")))])
    assert V.rel_image(r, V.Str("a")) == V.Set([V.Str("b")])


@settings(max_examples=200, deadline=None)
@given(O.relations)
def test_closure_matches_naive(r):
    tc = V.transitive_closure(r)
    assert tc == O.naive_closure(r)
    assert V.transitive_closure(tc) == tc


def test_operations_do_not_mutate_operands():
    a, b = V.Set(ints(1, 2)), V.Set(ints(2, 3))
    ra, rb = V.render(a), V.render(b)
    V.set_union(a, b)
    V.set_diff(a, b)
    r = rel((1, 2), (2, 3))
    V.transitive_closure(r)
    assert (V.render(a), V.render(b)) == (ra, rb)
    assert r == rel((1, 2), (2, 3))

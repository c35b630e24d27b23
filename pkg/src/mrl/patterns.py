"""Backtracking pattern matcher.

``match_all`` is a generator: every yielded dict is one way the pattern
matches, and the consumer may stop or resume at will.  Enumeration order is
fixed so that programs relying on ``fail`` behave the same on every run:

* list multi-variables: leftmost variable first, shortest slice first;
* set items: candidate elements in canonical value order;
* deep match: subterms in preorder.
"""

from dataclasses import dataclass
from typing import Optional

from . import values as V
from .errors import TypeAnnotationError, UndeclaredConstructor, UnknownTypeName
from .types import (BoolT, IntT, ListT, LocT, SetT, StrT, TypeExpr,
                    instance_of)


class Pattern:
    __slots__ = ()


@dataclass(frozen=True)
class Literal(Pattern):
    value: V.Value


@dataclass(frozen=True)
class Var(Pattern):
    """Variable.  A typed variable (``T x``) declares a fresh name; a bare one
    that is already bound in the enclosing scope acts as an equality test."""
    name: str
    type: Optional[TypeExpr] = None

    @property
    def fresh(self):
        return self.type is not None


@dataclass(frozen=True)
class Wildcard(Pattern):
    pass


@dataclass(frozen=True)
class Ctor(Pattern):
    name: str
    args: tuple
    adt: Optional[str] = None


@dataclass(frozen=True)
class Single:
    pattern: Pattern


@dataclass(frozen=True)
class Multi:
    """``*xs`` inside a list pattern, ``*rest`` inside a set pattern."""
    name: Optional[str] = None
    elem_type: Optional[TypeExpr] = None


@dataclass(frozen=True)
class ListPat(Pattern):
    items: tuple


@dataclass(frozen=True)
class SetPat(Pattern):
    items: tuple

    def __post_init__(self):
        if sum(isinstance(i, Multi) for i in self.items) > 1:
            raise ValueError("a set pattern takes at most one rest variable")


@dataclass(frozen=True)
class TuplePat(Pattern):
    elems: tuple


@dataclass(frozen=True)
class Deep(Pattern):
    inner: Pattern


@dataclass(frozen=True)
class Neg(Pattern):
    inner: Pattern


_MISSING = object()
_EMPTY = {}


def match_all(p, v, outer=None, decls=None, on_outer=None):
    """Yield every binding dict under which ``p`` matches ``v``.

    ``outer`` supplies names bound in enclosing scopes (anything with a
    ``get(name, default)``); bare variables found there must match by
    equality, and ``on_outer(name)`` is called when that happens.  With
    ``decls`` the pattern is validated first.
    """
    if decls is not None:
        check_pattern(p, decls)
    m = _Matcher(outer if outer is not None else _EMPTY, decls, on_outer)
    return m.match(p, v, {})


def check_pattern(p, decls):
    if isinstance(p, Ctor):
        if not decls.constructors(p.name, len(p.args)):
            raise UndeclaredConstructor("undeclared constructor %s/%d" % (p.name, len(p.args)))
        for a in p.args:
            check_pattern(a, decls)
    elif isinstance(p, Var):
        if p.type is not None:
            try:
                decls.check(p.type)
            except UnknownTypeName as e:
                raise TypeAnnotationError(str(e)) from None
    elif isinstance(p, (ListPat, SetPat)):
        for item in p.items:
            if isinstance(item, Single):
                check_pattern(item.pattern, decls)
            elif item.elem_type is not None:
                try:
                    decls.check(item.elem_type)
                except UnknownTypeName as e:
                    raise TypeAnnotationError(str(e)) from None
    elif isinstance(p, TuplePat):
        for e in p.elems:
            check_pattern(e, decls)
    elif isinstance(p, (Deep, Neg)):
        check_pattern(p.inner, decls)


def pattern_vars(p):
    """Names a successful match of ``p`` may bind, in first-occurrence order."""
    out = []

    def walk(q):
        if isinstance(q, Var):
            if q.name != "_" and q.name not in out:
                out.append(q.name)
        elif isinstance(q, Ctor):
            for a in q.args:
                walk(a)
        elif isinstance(q, TuplePat):
            for a in q.elems:
                walk(a)
        elif isinstance(q, (ListPat, SetPat)):
            for item in q.items:
                if isinstance(item, Single):
                    walk(item.pattern)
                elif item.name and item.name != "_" and item.name not in out:
                    out.append(item.name)
        elif isinstance(q, Deep):
            walk(q.inner)

    walk(p)
    return out


def _head_kind(p):
    if isinstance(p, Literal):
        return p.value.kind
    if isinstance(p, Ctor):
        return V.NODE
    if isinstance(p, TuplePat):
        return V.TUPLE
    if isinstance(p, ListPat):
        return V.LIST
    if isinstance(p, SetPat):
        return V.SET
    return None


class _Matcher:
    def __init__(self, outer, decls, on_outer=None):
        self.outer = outer
        self.decls = decls
        self.on_outer = on_outer

    def bound(self, name, b, fresh=False):
        x = b.get(name, _MISSING)
        if x is _MISSING and not fresh:
            x = self.outer.get(name, _MISSING)
            if x is not _MISSING and self.on_outer is not None:
                self.on_outer(name)
        return x

    def match(self, p, v, b):
        t = type(p)
        if t is Var:
            if p.name == "_":
                if p.type is None or instance_of(v, p.type, self.decls):
                    yield b
                return
            old = self.bound(p.name, b, p.fresh)
            if old is not _MISSING:
                if old == v:
                    yield b
                return
            if p.type is not None and not instance_of(v, p.type, self.decls):
                return
            nb = dict(b)
            nb[p.name] = v
            yield nb
        elif t is Literal:
            if p.value == v:
                yield b
        elif t is Wildcard:
            yield b
        elif t is Ctor:
            if (v.kind == V.NODE and v.name == p.name and len(v.args) == len(p.args)
                    and (p.adt is None or p.adt == v.adt)):
                yield from self.conj(p.args, v.args, 0, b)
        elif t is TuplePat:
            if v.kind == V.TUPLE and len(v.elems) == len(p.elems):
                yield from self.conj(p.elems, v.elems, 0, b)
        elif t is ListPat:
            if v.kind == V.LIST:
                yield from self.list_items(p.items, 0, v.elems, 0, b)
        elif t is SetPat:
            if v.kind == V.SET:
                singles = [i.pattern for i in p.items if isinstance(i, Single)]
                rest = next((i for i in p.items if isinstance(i, Multi)), None)
                yield from self.set_items(singles, 0, v.ordered(), rest, b)
        elif t is Deep:
            for s in subterms(v):
                yield from self.match(p.inner, s, b)
        elif t is Neg:
            for _ in self.match(p.inner, v, b):
                return
            yield b
        else:
            raise TypeError("not a pattern: %r" % (p,))

    def conj(self, pats, vals, i, b):
        if i == len(pats):
            yield b
            return
        if i == len(pats) - 1:
            yield from self.match(pats[i], vals[i], b)
            return
        for b2 in self.match(pats[i], vals[i], b):
            yield from self.conj(pats, vals, i + 1, b2)

    def list_items(self, items, k, elems, pos, b):
        if k == len(items):
            if pos == len(elems):
                yield b
            return
        item = items[k]
        if isinstance(item, Single):
            if pos < len(elems):
                for b2 in self.match(item.pattern, elems[pos], b):
                    yield from self.list_items(items, k + 1, elems, pos + 1, b2)
            return
        name = item.name if item.name != "_" else None
        if name is not None:
            old = self.bound(name, b)
            if old is not _MISSING:
                if old.kind == V.LIST and tuple(elems[pos:pos + len(old.elems)]) == old.elems:
                    yield from self.list_items(items, k + 1, elems, pos + len(old.elems), b)
                return
        singles_after = sum(1 for i in items[k + 1:] if isinstance(i, Single))
        for end in range(pos, len(elems) - singles_after + 1):
            chunk = V.List(elems[pos:end])
            if item.elem_type is not None and not instance_of(chunk, ListT(item.elem_type), self.decls):
                # longer slices contain this one
                return
            if name is None:
                b2 = b
            else:
                b2 = dict(b)
                b2[name] = chunk
            yield from self.list_items(items, k + 1, elems, end, b2)

    def set_items(self, singles, k, remaining, rest, b):
        if k == len(singles):
            yield from self.set_rest(remaining, rest, b)
            return
        p = singles[k]
        fixed = self.fixed_value(p, b)
        if fixed is not _MISSING:
            if fixed in remaining:
                left = tuple(e for e in remaining if e != fixed)
                yield from self.set_items(singles, k + 1, left, rest, b)
            return
        want = _head_kind(p)
        for idx, e in enumerate(remaining):
            if want is not None and e.kind != want:
                continue
            left = remaining[:idx] + remaining[idx + 1:]
            for b2 in self.match(p, e, b):
                yield from self.set_items(singles, k + 1, left, rest, b2)

    def set_rest(self, remaining, rest, b):
        if rest is None:
            if not remaining:
                yield b
            return
        value = V.Set(remaining)
        name = rest.name if rest.name != "_" else None
        if name is not None:
            old = self.bound(name, b)
            if old is not _MISSING:
                if old == value:
                    yield b
                return
        if rest.elem_type is not None and not instance_of(value, SetT(rest.elem_type), self.decls):
            return
        if name is None:
            yield b
        else:
            nb = dict(b)
            nb[name] = value
            yield nb

    def fixed_value(self, p, b):
        if isinstance(p, Literal):
            return p.value
        if isinstance(p, Var) and not p.fresh and p.name != "_":
            return self.bound(p.name, b)
        return _MISSING


def children(v):
    kind = v.kind
    if kind == V.NODE:
        return v.args
    if kind == V.LIST or kind == V.TUPLE:
        return v.elems
    if kind == V.SET:
        return v.ordered()
    if kind == V.MAP:
        out = []
        for k, x in v.items():
            out.append(k)
            out.append(x)
        return out
    return ()


def subterms(v):
    """Preorder walk; ``v`` itself comes first."""
    stack = [v]
    while stack:
        x = stack.pop()
        yield x
        kids = children(x)
        if kids:
            stack.extend(reversed(kids))


_ATOMIC_KIND = {BoolT: V.BOOL, IntT: V.INT, StrT: V.STR, LocT: V.LOC}


def matches_non_overlapping(p1, p2):
    """Conservative disjointness test: True only when no value can match both."""
    if isinstance(p1, (Wildcard, Deep, Neg)) or isinstance(p2, (Wildcard, Deep, Neg)):
        return False
    if isinstance(p1, Var) or isinstance(p2, Var):
        var, other = (p1, p2) if isinstance(p1, Var) else (p2, p1)
        if var.type is None:
            return False
        atomic = _ATOMIC_KIND.get(type(var.type))
        kind = _head_kind(other)
        if isinstance(other, Var) and other.type is not None:
            kind = _ATOMIC_KIND.get(type(other.type))
        return atomic is not None and kind is not None and atomic != kind
    k1, k2 = _head_kind(p1), _head_kind(p2)
    if k1 != k2:
        return True
    if isinstance(p1, Literal) and isinstance(p2, Literal):
        return p1.value != p2.value
    if isinstance(p1, Literal) or isinstance(p2, Literal):
        lit, other = (p1, p2) if isinstance(p1, Literal) else (p2, p1)
        if isinstance(other, Ctor):
            v = lit.value
            if v.name != other.name or len(v.args) != len(other.args):
                return True
            return any(matches_non_overlapping(Literal(a), q) for a, q in zip(v.args, other.args))
        return False
    if isinstance(p1, Ctor):
        if p1.name != p2.name or len(p1.args) != len(p2.args):
            return True
        if p1.adt and p2.adt and p1.adt != p2.adt:
            return True
        return any(matches_non_overlapping(a, c) for a, c in zip(p1.args, p2.args))
    if isinstance(p1, TuplePat):
        if len(p1.elems) != len(p2.elems):
            return True
        return any(matches_non_overlapping(a, c) for a, c in zip(p1.elems, p2.elems))
    if isinstance(p1, ListPat):
        if any(isinstance(i, Multi) for i in p1.items + p2.items):
            return False
        if len(p1.items) != len(p2.items):
            return True
        return any(matches_non_overlapping(a.pattern, c.pattern) for a, c in zip(p1.items, p2.items))
    return False

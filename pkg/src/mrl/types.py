"""Type expressions, the subtype lattice and the declaration table.

    void <: ... <: adt <: node <: value
    void <: N (nonterminal) <: Tree <: node <: value
"""

from dataclasses import dataclass

from . import values as V
from .errors import DuplicateDeclaration, UnknownTypeName


class TypeExpr:
    __slots__ = ()

    def __str__(self):
        return type_str(self)


@dataclass(frozen=True)
class ValueT(TypeExpr):
    pass


@dataclass(frozen=True)
class NodeT(TypeExpr):
    pass


@dataclass(frozen=True)
class VoidT(TypeExpr):
    pass


@dataclass(frozen=True)
class BoolT(TypeExpr):
    pass


@dataclass(frozen=True)
class IntT(TypeExpr):
    pass


@dataclass(frozen=True)
class StrT(TypeExpr):
    pass


@dataclass(frozen=True)
class LocT(TypeExpr):
    pass


@dataclass(frozen=True)
class ListT(TypeExpr):
    elem: TypeExpr


@dataclass(frozen=True)
class SetT(TypeExpr):
    elem: TypeExpr


@dataclass(frozen=True)
class MapT(TypeExpr):
    key: TypeExpr
    val: TypeExpr


@dataclass(frozen=True)
class TupleT(TypeExpr):
    elems: tuple


@dataclass(frozen=True)
class Adt(TypeExpr):
    name: str


@dataclass(frozen=True)
class NonTerminal(TypeExpr):
    name: str


VALUE, NODE, VOID = ValueT(), NodeT(), VoidT()
BOOL, INT, STR, LOC = BoolT(), IntT(), StrT(), LocT()
TREE = Adt("Tree")

_ATOMS = {V.BOOL: BOOL, V.INT: INT, V.STR: STR, V.LOC: LOC}


def rel(*elems):
    """``rel[A,B,...]`` is sugar for ``set[tuple[A,B,...]]``."""
    return SetT(TupleT(tuple(elems)))


def type_str(t):
    if isinstance(t, ValueT):
        return "value"
    if isinstance(t, NodeT):
        return "node"
    if isinstance(t, VoidT):
        return "void"
    if isinstance(t, BoolT):
        return "bool"
    if isinstance(t, IntT):
        return "int"
    if isinstance(t, StrT):
        return "str"
    if isinstance(t, LocT):
        return "loc"
    if isinstance(t, ListT):
        return "list[%s]" % type_str(t.elem)
    if isinstance(t, SetT):
        if isinstance(t.elem, TupleT):
            return "rel[%s]" % ",".join(type_str(e) for e in t.elem.elems)
        return "set[%s]" % type_str(t.elem)
    if isinstance(t, MapT):
        return "map[%s,%s]" % (type_str(t.key), type_str(t.val))
    if isinstance(t, TupleT):
        return "tuple[%s]" % ",".join(type_str(e) for e in t.elems)
    return t.name


class Constructor:
    __slots__ = ("adt", "name", "field_types", "field_names")

    def __init__(self, adt, name, fields):
        self.adt = adt
        self.name = name
        self.field_types = tuple(t for t, _ in fields)
        self.field_names = tuple(n for _, n in fields)

    @property
    def arity(self):
        return len(self.field_types)

    def __repr__(self):
        return "%s %s(%s)" % (self.adt, self.name, ", ".join(
            "%s %s" % (type_str(t), n) for t, n in zip(self.field_types, self.field_names)))


class Declarations:
    """ADT constructors and nonterminal names visible to a program."""

    def __init__(self, builtins=True):
        self.adts = {}            # adt name -> {(ctor, arity): Constructor}
        self.by_name = {}         # ctor name -> [Constructor] in declaration order
        self.nonterminals = set()
        if builtins:
            self.declare_adt("Tree")
            self.declare_ctor("Tree", "appl", [(STR, "prod"), (ListT(TREE), "args")])
            self.declare_ctor("Tree", "leaf", [(STR, "text")])
            self.declare_adt("RuntimeException")
            self.declare_ctor("RuntimeException", "divByZero", [])
            self.declare_ctor("RuntimeException", "noSuchKey", [(VALUE, "key")])
            self.declare_ctor("RuntimeException", "indexOutOfBounds", [(INT, "index")])
            self.declare_ctor("RuntimeException", "ioError", [(STR, "msg")])
            self.declare_ctor("RuntimeException", "illegalArgument", [(VALUE, "arg")])

    def declare_adt(self, name):
        self.adts.setdefault(name, {})

    def declare_ctor(self, adt, name, fields):
        table = self.adts.setdefault(adt, {})
        key = (name, len(fields))
        if key in table:
            raise DuplicateDeclaration("constructor %s/%d of %s declared twice" % (name, len(fields), adt))
        c = Constructor(adt, name, fields)
        table[key] = c
        self.by_name.setdefault(name, []).append(c)
        return c

    def declare_nonterminal(self, name):
        self.nonterminals.add(name)

    def constructors(self, name, arity=None):
        cs = self.by_name.get(name, ())
        return [c for c in cs if arity is None or c.arity == arity]

    def lookup(self, adt, name, arity):
        return self.adts.get(adt, {}).get((name, arity))

    def construct(self, name, args):
        """Build a node, choosing the first declared constructor whose field
        types accept ``args``.  Returns None when nothing fits."""
        for c in self.constructors(name, len(args)):
            if all(instance_of(a, t, self) for a, t in zip(args, c.field_types)):
                return V.Node(c.adt, name, args)
        return None

    def resolve(self, t):
        """Map a written type name onto Adt or NonTerminal; ADTs win a clash."""
        if isinstance(t, (Adt, NonTerminal)):
            if t.name in self.adts:
                return Adt(t.name)
            if t.name in self.nonterminals:
                return NonTerminal(t.name)
            raise UnknownTypeName("unknown type %s" % t.name)
        if isinstance(t, ListT):
            return ListT(self.resolve(t.elem))
        if isinstance(t, SetT):
            return SetT(self.resolve(t.elem))
        if isinstance(t, MapT):
            return MapT(self.resolve(t.key), self.resolve(t.val))
        if isinstance(t, TupleT):
            return TupleT(tuple(self.resolve(e) for e in t.elems))
        return t

    def check(self, t):
        self.resolve(t)


def type_of(v):
    """Least type describing ``v``."""
    kind = v.kind
    t = _ATOMS.get(kind)
    if t is not None:
        return t
    if kind == V.LIST:
        return ListT(lub_all(type_of(e) for e in v.elems))
    if kind == V.SET:
        return SetT(lub_all(type_of(e) for e in v.elems))
    if kind == V.MAP:
        return MapT(lub_all(type_of(k) for k in v.entries),
                    lub_all(type_of(x) for x in v.entries.values()))
    if kind == V.TUPLE:
        return TupleT(tuple(type_of(e) for e in v.elems))
    if kind == V.NODE:
        if isinstance(v, V.TreeNode) and v.sort is not None:
            return NonTerminal(v.sort)
        return Adt(v.adt) if v.adt else NODE
    return VALUE


def lub_all(types):
    out = VOID
    for t in types:
        out = lub(out, t)
    return out


def lub(a, b):
    if subtype_of(a, b):
        return b
    if subtype_of(b, a):
        return a
    if isinstance(a, ListT) and isinstance(b, ListT):
        return ListT(lub(a.elem, b.elem))
    if isinstance(a, SetT) and isinstance(b, SetT):
        return SetT(lub(a.elem, b.elem))
    if isinstance(a, MapT) and isinstance(b, MapT):
        return MapT(lub(a.key, b.key), lub(a.val, b.val))
    if isinstance(a, TupleT) and isinstance(b, TupleT) and len(a.elems) == len(b.elems):
        return TupleT(tuple(lub(x, y) for x, y in zip(a.elems, b.elems)))
    if isinstance(a, NonTerminal) and isinstance(b, NonTerminal):
        return TREE
    if _is_nodeish(a) and _is_nodeish(b):
        return NODE
    return VALUE


def _is_nodeish(t):
    return isinstance(t, (NodeT, Adt, NonTerminal))


def subtype_of(a, b, decls=None):
    """Partial order of the lattice; ``decls`` (optional) validates names."""
    if decls is not None:
        a = decls.resolve(a)
        b = decls.resolve(b)
    return _sub(a, b)


def _sub(a, b):
    if a == b or isinstance(a, VoidT) or isinstance(b, ValueT):
        return True
    if isinstance(b, VoidT) or isinstance(a, ValueT):
        return False
    if isinstance(b, NodeT):
        return isinstance(a, (Adt, NonTerminal))
    if isinstance(a, NonTerminal):
        return b == TREE
    if isinstance(a, ListT):
        return isinstance(b, ListT) and _sub(a.elem, b.elem)
    if isinstance(a, SetT):
        return isinstance(b, SetT) and _sub(a.elem, b.elem)
    if isinstance(a, MapT):
        return isinstance(b, MapT) and _sub(a.key, b.key) and _sub(a.val, b.val)
    if isinstance(a, TupleT):
        return (isinstance(b, TupleT) and len(a.elems) == len(b.elems)
                and all(_sub(x, y) for x, y in zip(a.elems, b.elems)))
    return False


def instance_of(v, t, decls=None):
    """``subtype_of(type_of(v), t)`` without materializing type_of."""
    if isinstance(t, ValueT):
        return True
    kind = v.kind
    if isinstance(t, (Adt, NonTerminal)):
        if kind != V.NODE:
            return False
        if decls is not None and t.name not in decls.adts and t.name not in decls.nonterminals:
            raise UnknownTypeName("unknown type %s" % t.name)
        if v.adt == t.name:
            return True
        return isinstance(v, V.TreeNode) and v.sort == t.name
    if isinstance(t, NodeT):
        return kind == V.NODE
    if isinstance(t, VoidT):
        return False
    if isinstance(t, ListT):
        return kind == V.LIST and all(instance_of(e, t.elem, decls) for e in v.elems)
    if isinstance(t, SetT):
        return kind == V.SET and all(instance_of(e, t.elem, decls) for e in v.elems)
    if isinstance(t, MapT):
        return kind == V.MAP and all(
            instance_of(k, t.key, decls) and instance_of(x, t.val, decls)
            for k, x in v.entries.items())
    if isinstance(t, TupleT):
        return (kind == V.TUPLE and len(v.elems) == len(t.elems)
                and all(instance_of(e, et, decls) for e, et in zip(v.elems, t.elems)))
    return _ATOMS.get(kind) == t

"""Immutable runtime values, their canonical order and textual rendering,
plus the set/relation operator suite."""

from .errors import ArityError

# kind tags double as the first component of the canonical order
BOOL, INT, STR, LOC, TUPLE, LIST, SET, MAP, NODE, CLOSURE = range(10)


class Value:
    __slots__ = ("_hash", "_key")
    kind = -1

    def __ne__(self, other):
        return not self == other

    def __lt__(self, other):
        return order_key(self) < order_key(other)

    def __repr__(self):
        return render(self)


class Bool(Value):
    __slots__ = ("value",)
    kind = BOOL

    def __init__(self, value):
        self.value = bool(value)
        self._hash = None
        self._key = None

    def __eq__(self, other):
        return self is other or (isinstance(other, Bool) and other.value == self.value)

    def __hash__(self):
        return hash((BOOL, self.value))


TRUE = Bool(True)
FALSE = Bool(False)


def boolean(b):
    return TRUE if b else FALSE


class Int(Value):
    __slots__ = ("value",)
    kind = INT

    def __init__(self, value):
        self.value = value
        self._hash = None
        self._key = None

    def __eq__(self, other):
        return self is other or (isinstance(other, Int) and other.value == self.value)

    def __hash__(self):
        return hash((INT, self.value))


class Str(Value):
    __slots__ = ("value",)
    kind = STR

    def __init__(self, value):
        self.value = value
        self._hash = None
        self._key = None

    def __eq__(self, other):
        return self is other or (isinstance(other, Str) and other.value == self.value)

    def __hash__(self):
        return hash((STR, self.value))


class Loc(Value):
    __slots__ = ("uri", "offset", "length")
    kind = LOC

    def __init__(self, uri, offset, length):
        if offset < 0 or length < 0:
            raise ValueError("location offset and length must be non-negative")
        self.uri = uri
        self.offset = offset
        self.length = length
        self._hash = None
        self._key = None

    def __eq__(self, other):
        return self is other or (
            isinstance(other, Loc)
            and (other.uri, other.offset, other.length) == (self.uri, self.offset, self.length))

    def __hash__(self):
        return hash((LOC, self.uri, self.offset, self.length))


class _Seq(Value):
    __slots__ = ("elems",)

    def __init__(self, elems=()):
        self.elems = tuple(elems)
        self._hash = None
        self._key = None

    def __eq__(self, other):
        return self is other or (
            type(other) is type(self) and hash(other) == hash(self) and other.elems == self.elems)

    def __hash__(self):
        h = self._hash
        if h is None:
            h = self._hash = hash((self.kind, self.elems))
        return h

    def __len__(self):
        return len(self.elems)

    def __iter__(self):
        return iter(self.elems)


class List(_Seq):
    __slots__ = ()
    kind = LIST


class Tuple(_Seq):
    __slots__ = ()
    kind = TUPLE

    def __init__(self, elems):
        super().__init__(elems)
        if not self.elems:
            raise ValueError("tuples have at least one element")


class Set(Value):
    __slots__ = ("elems", "_ordered")
    kind = SET

    def __init__(self, elems=()):
        self.elems = elems if isinstance(elems, frozenset) else frozenset(elems)
        self._ordered = None
        self._hash = None
        self._key = None

    def __eq__(self, other):
        return self is other or (isinstance(other, Set) and other.elems == self.elems)

    def __hash__(self):
        h = self._hash
        if h is None:
            h = self._hash = hash((SET, self.elems))
        return h

    def __len__(self):
        return len(self.elems)

    def __iter__(self):
        return iter(self.ordered())

    def __contains__(self, v):
        return v in self.elems

    def ordered(self):
        """Elements in canonical order."""
        if self._ordered is None:
            self._ordered = tuple(sorted(self.elems, key=order_key))
        return self._ordered


class Map(Value):
    __slots__ = ("entries", "_ordered")
    kind = MAP

    def __init__(self, entries=()):
        # never mutated after construction
        self.entries = dict(entries)
        self._ordered = None
        self._hash = None
        self._key = None

    def __eq__(self, other):
        return self is other or (isinstance(other, Map) and other.entries == self.entries)

    def __hash__(self):
        h = self._hash
        if h is None:
            h = self._hash = hash((MAP, frozenset(self.entries.items())))
        return h

    def __len__(self):
        return len(self.entries)

    def get(self, key, default=None):
        return self.entries.get(key, default)

    def ordered_keys(self):
        if self._ordered is None:
            self._ordered = tuple(sorted(self.entries, key=order_key))
        return self._ordered

    def items(self):
        return [(k, self.entries[k]) for k in self.ordered_keys()]

    def updated(self, key, value):
        d = dict(self.entries)
        d[key] = value
        return Map(d)


class Node(Value):
    __slots__ = ("adt", "name", "args")
    kind = NODE

    def __init__(self, adt, name, args=()):
        self.adt = adt
        self.name = name
        self.args = tuple(args)
        self._hash = None
        self._key = None

    def __eq__(self, other):
        return self is other or (
            isinstance(other, Node)
            and hash(other) == hash(self)
            and other.name == self.name
            and other.adt == self.adt
            and other.args == self.args)

    def __hash__(self):
        h = self._hash
        if h is None:
            h = self._hash = hash((NODE, self.adt, self.name, self.args))
        return h

    def with_args(self, args):
        return Node(self.adt, self.name, args)


class TreeNode(Node):
    """A parse tree exposed to programs as a node of the built-in ADT ``Tree``.

    ``tree`` is the host ParseTree it came from and ``sort`` the nonterminal it
    derives; neither takes part in equality.
    """
    __slots__ = ("tree", "sort")

    def __init__(self, name, args, tree, sort):
        super().__init__("Tree", name, args)
        self.tree = tree
        self.sort = sort


class Closure(Value):
    __slots__ = ("name", "target")
    kind = CLOSURE

    def __init__(self, name, target):
        self.name = name
        self.target = target
        self._hash = None
        self._key = None

    def __eq__(self, other):
        return self is other

    def __hash__(self):
        return id(self)


def order_key(v):
    """Sort key realizing the canonical total order on values.

    Kind first (bool < int < str < loc < tuple < list < set < map < node),
    then fields or elements lexicographically.  Node keys compare constructor
    name, then arguments, then ADT name.
    """
    k = v._key
    if k is not None:
        return k
    kind = v.kind
    if kind == BOOL or kind == INT or kind == STR:
        k = (kind, v.value)
    elif kind == LOC:
        k = (kind, v.uri, v.offset, v.length)
    elif kind == TUPLE or kind == LIST:
        k = (kind, tuple(order_key(e) for e in v.elems))
    elif kind == SET:
        k = (kind, tuple(order_key(e) for e in v.ordered()))
    elif kind == MAP:
        k = (kind, tuple((order_key(a), order_key(b)) for a, b in v.items()))
    elif kind == NODE:
        k = (kind, v.name, tuple(order_key(a) for a in v.args), v.adt)
    else:
        k = (kind, v.name, id(v))
    v._key = k
    return k


# --- rendering -------------------------------------------------------------

KEYWORDS = frozenset("""
    module import data syntax lexical layout start public private default
    if else while for do switch case visit solve return fail insert throw try
    catch finally break continue true false in notin o bool int str loc value
    node void list set map tuple rel top-down bottom-up innermost outermost
""".split())

_ESCAPES = {'"': '\\"', "\\": "\\\\", "\n": "\\n", "\t": "\\t", "\r": "\\r",
            "<": "\\<", ">": "\\>", "'": "\\'"}


def quote(text):
    out = []
    for ch in text:
        e = _ESCAPES.get(ch)
        if e is not None:
            out.append(e)
        elif ord(ch) < 0x20 or ord(ch) == 0x7F:
            out.append("\\u%04x" % ord(ch))
        else:
            out.append(ch)
    return '"' + "".join(out) + '"'


def ident(name):
    return "\\" + name if name in KEYWORDS else name


def render(v):
    """Canonical text of a value; coincides with the expression syntax."""
    out = []
    _render(v, out)
    return "".join(out)


def _render(v, out):
    kind = v.kind
    if kind == BOOL:
        out.append("true" if v.value else "false")
    elif kind == INT:
        out.append(str(v.value))
    elif kind == STR:
        out.append(quote(v.value))
    elif kind == LOC:
        out.append("|%s|(%d,%d)" % (v.uri, v.offset, v.length))
    elif kind == NODE:
        out.append(ident(v.name))
        out.append("(")
        _render_all(v.args, out)
        out.append(")")
    elif kind == LIST:
        out.append("[")
        _render_all(v.elems, out)
        out.append("]")
    elif kind == TUPLE:
        out.append("<")
        _render_all(v.elems, out)
        out.append(">")
    elif kind == SET:
        out.append("{")
        _render_all(v.ordered(), out)
        out.append("}")
    elif kind == MAP:
        out.append("(")
        for i, (key, val) in enumerate(v.items()):
            if i:
                out.append(",")
            _render(key, out)
            out.append(":")
            _render(val, out)
        out.append(")")
    else:
        out.append("<fun %s>" % v.name)


def _render_all(vals, out):
    for i, e in enumerate(vals):
        if i:
            out.append(",")
        _render(e, out)


def to_text(v):
    """Text used by print and string interpolation: strings raw, parse trees
    as their yield, anything else rendered."""
    if isinstance(v, Str):
        return v.value
    if isinstance(v, TreeNode) and v.tree is not None:
        return v.tree.yield_()
    return render(v)


# --- set and relation operators ----------------------------------------------

def set_union(a, b):
    return Set(a.elems | b.elems)


def set_intersect(a, b):
    return Set(a.elems & b.elems)


def set_diff(a, b):
    return Set(a.elems - b.elems)


def _binary(r, what):
    for t in r.elems:
        if not isinstance(t, Tuple) or len(t.elems) != 2:
            raise ArityError("%s expects a binary relation, found element %s" % (what, render(t)))


def compose(r, s):
    _binary(r, "composition")
    _binary(s, "composition")
    by_first = {}
    for t in s.elems:
        by_first.setdefault(t.elems[0], []).append(t.elems[1])
    out = set()
    for t in r.elems:
        a, b = t.elems
        for c in by_first.get(b, ()):
            out.add(Tuple((a, c)))
    return Set(out)


def transitive_closure(r):
    """Least relation containing r and closed under composition (per-node DFS)."""
    _binary(r, "transitive closure")
    succ = {}
    for t in r.elems:
        succ.setdefault(t.elems[0], set()).add(t.elems[1])
    out = set()
    for start in succ:
        seen = set()
        stack = list(succ[start])
        while stack:
            x = stack.pop()
            if x in seen:
                continue
            seen.add(x)
            stack.extend(succ.get(x, ()))
        out.update(Tuple((start, y)) for y in seen)
    return Set(out)


def carrier(r):
    out = set()
    for t in r.elems:
        if not isinstance(t, Tuple):
            raise ArityError("carrier expects a relation, found element %s" % render(t))
        out.update(t.elems)
    return Set(out)


def reflexive_transitive_closure(r):
    closed = transitive_closure(r)
    return Set(closed.elems | {Tuple((x, x)) for x in carrier(r).elems})


def rel_image(r, key):
    _binary(r, "relation image")
    return Set(t.elems[1] for t in r.elems if t.elems[0] == key)


def domain(r):
    return Set(t.elems[0] for t in r.elems if isinstance(t, Tuple))


def range_(r):
    _binary(r, "range")
    return Set(t.elems[1] for t in r.elems)

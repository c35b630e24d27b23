"""Library functions available to every mrl program."""

from . import types as T
from . import values as V
from .errors import IoError, MrlTypeError, Thrown
from .grammar import implode as implode_tree
from .grammar import parse as parse_tree
from .grammar import tree_value


def _arity(name, args, n):
    if len(args) != n:
        raise MrlTypeError("%s expects %d argument(s), got %d" % (name, n, len(args)))


def _want(name, v, kind, what):
    if v.kind != kind:
        raise MrlTypeError("%s expects %s, got %s" % (name, what, V.render(v)))


def _illegal(v):
    return Thrown(V.Node("RuntimeException", "illegalArgument", (v,)))


def size(interp, args):
    _arity("size", args, 1)
    v = args[0]
    if v.kind == V.STR:
        return V.Int(len(v.value))
    if v.kind in (V.LIST, V.SET, V.MAP, V.TUPLE):
        return V.Int(len(v))
    raise MrlTypeError("size is not defined on %s" % V.render(v))


def is_empty(interp, args):
    return V.boolean(size(interp, args).value == 0)


def capitalize(interp, args):
    _arity("capitalize", args, 1)
    _want("capitalize", args[0], V.STR, "a str")
    s = args[0].value
    return V.Str(s[:1].upper() + s[1:])


def _print(interp, args, end):
    interp.out.write("".join(V.to_text(a) for a in args) + end)


def print_(interp, args):
    _print(interp, args, "")


def println(interp, args):
    _print(interp, args, "\n")


def read_file(interp, args):
    _arity("readFile", args, 1)
    path = _path(args[0])
    try:
        with open(path, encoding="utf-8") as fh:
            return V.Str(fh.read())
    except (OSError, UnicodeDecodeError) as e:
        raise IoError(V.Node("RuntimeException", "ioError", (V.Str("%s: %s" % (path, e)),))) from None


def write_file(interp, args):
    _arity("writeFile", args, 2)
    path = _path(args[0])
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(V.to_text(args[1]))
    except OSError as e:
        raise IoError(V.Node("RuntimeException", "ioError", (V.Str("%s: %s" % (path, e)),))) from None
    return None


def _path(v):
    if v.kind == V.LOC:
        uri = v.uri
        return uri[len("file://"):] if uri.startswith("file://") else uri
    if v.kind == V.STR:
        return v.value
    raise MrlTypeError("expected a file path, got %s" % V.render(v))


def to_int(interp, args):
    _arity("toInt", args, 1)
    v = args[0]
    if v.kind == V.INT:
        return v
    if v.kind == V.STR:
        text = v.value.strip()
        body = text[1:] if text[:1] in "+-" else text
        if body and body.isascii() and body.isdigit():
            return V.Int(int(text))
    raise _illegal(v)


def to_str(interp, args):
    _arity("toStr", args, 1)
    return V.Str(V.to_text(args[0]))


def render(interp, args):
    _arity("render", args, 1)
    return V.Str(V.render(args[0]))


def type_of(interp, args):
    _arity("typeOf", args, 1)
    return V.Str(T.type_str(T.type_of(args[0])))


def _type_arg(interp, v, what):
    """Nonterminal or type name from ``#T`` or a plain string."""
    if v.kind == V.NODE and v.adt == "#Type" and v.name == "type":
        return v.args[0].value
    if v.kind == V.STR:
        return v.value
    raise MrlTypeError("%s expects a type (#T) or a type name, got %s" % (what, V.render(v)))


def parse(interp, args):
    if len(args) not in (2, 3):
        raise MrlTypeError("parse expects a type and a string")
    start = _type_arg(interp, args[0], "parse")
    _want("parse", args[1], V.STR, "a str")
    source = "unknown"
    if len(args) == 3:
        source = _path(args[2])
    g = interp.grammar()
    t = parse_tree(g, start, args[1].value, interp.ambiguity, source)
    return tree_value(t)


def implode(interp, args):
    _arity("implode", args, 2)
    name = _type_arg(interp, args[0], "implode")
    tree = args[1]
    if not isinstance(tree, V.TreeNode) or tree.tree is None:
        raise MrlTypeError("implode expects a parse tree, got %s" % V.render(tree))
    t = interp.reified.get(name)
    if t is None:
        t = interp.resolve(T.Adt(name))
    return implode_tree(tree.tree, interp.decls, t)


def unparse(interp, args):
    _arity("unparse", args, 1)
    tree = args[0]
    if not isinstance(tree, V.TreeNode) or tree.tree is None:
        raise MrlTypeError("unparse expects a parse tree, got %s" % V.render(tree))
    return V.Str(tree.tree.yield_())


def _relation(name, args):
    _arity(name, args, 1)
    r = args[0]
    if r.kind == V.MAP:
        return r
    _want(name, r, V.SET, "a relation")
    return r


def domain(interp, args):
    r = _relation("domain", args)
    if r.kind == V.MAP:
        return V.Set(r.entries)
    return V.domain(r)


def range_(interp, args):
    r = _relation("range", args)
    if r.kind == V.MAP:
        return V.Set(r.entries.values())
    return V.range_(r)


def carrier(interp, args):
    r = _relation("carrier", args)
    return V.carrier(r)


def to_list(interp, args):
    _arity("toList", args, 1)
    v = args[0]
    if v.kind == V.SET:
        return V.List(v.ordered())
    if v.kind == V.MAP:
        return V.List(V.Tuple(kv) for kv in v.items())
    _want("toList", v, V.LIST, "a collection")
    return v


def to_set(interp, args):
    _arity("toSet", args, 1)
    v = args[0]
    if v.kind == V.LIST:
        return V.Set(v.elems)
    _want("toSet", v, V.SET, "a collection")
    return v


BUILTINS = {
    "size": size,
    "isEmpty": is_empty,
    "capitalize": capitalize,
    "print": print_,
    "println": println,
    "readFile": read_file,
    "writeFile": write_file,
    "toInt": to_int,
    "toStr": to_str,
    "render": render,
    "typeOf": type_of,
    "parse": parse,
    "implode": implode,
    "unparse": unparse,
    "domain": domain,
    "range": range_,
    "carrier": carrier,
    "toList": to_list,
    "toSet": to_set,
}

"""Reader for the canonical value syntax produced by ``values.render``."""

from . import values as V
from .errors import ValueSyntaxError

_DIGITS = frozenset("0123456789")
_SIMPLE_ESCAPES = {'"': '"', "\\": "\\", "n": "\n", "t": "\t", "r": "\r",
                   "<": "<", ">": ">", "'": "'"}


def parse_value(text, decls=None):
    """Parse one value literal.

    Constructor applications are resolved against ``decls`` (a
    ``types.Declarations``); without a table nodes get the ADT name ``node``.
    """
    p = _Reader(text, decls)
    p.ws()
    v = p.value()
    p.ws()
    if p.pos != len(text):
        p.fail("trailing input")
    return v


def unescape(body, offset=0):
    out = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "\\":
            if i + 1 >= len(body):
                raise ValueSyntaxError("dangling escape", offset + i)
            nxt = body[i + 1]
            if nxt == "u":
                digits = body[i + 2:i + 6]
                if len(digits) != 4 or any(c not in "0123456789abcdefABCDEF" for c in digits):
                    raise ValueSyntaxError("bad \\u escape", offset + i)
                out.append(chr(int(digits, 16)))
                i += 6
                continue
            if nxt not in _SIMPLE_ESCAPES:
                raise ValueSyntaxError("unknown escape \\%s" % nxt, offset + i)
            out.append(_SIMPLE_ESCAPES[nxt])
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


class _Reader:
    def __init__(self, text, decls):
        self.text = text
        self.pos = 0
        self.decls = decls

    def fail(self, msg):
        raise ValueSyntaxError(msg, self.pos)

    def ws(self):
        t = self.text
        while self.pos < len(t) and t[self.pos] in " \t\r\n":
            self.pos += 1

    def peek(self):
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch):
        self.ws()
        if self.peek() != ch:
            self.fail("expected %r" % ch)
        self.pos += 1

    def items(self, close):
        out = []
        self.ws()
        if self.peek() == close:
            self.pos += 1
            return out
        while True:
            self.ws()
            out.append(self.value())
            self.ws()
            ch = self.peek()
            self.pos += 1
            if ch == close:
                return out
            if ch != ",":
                self.pos -= 1
                self.fail("expected ',' or %r" % close)

    def value(self):
        self.ws()
        ch = self.peek()
        if ch == "[":
            self.pos += 1
            return V.List(self.items("]"))
        if ch == "{":
            self.pos += 1
            return V.Set(self.items("}"))
        if ch == "<":
            self.pos += 1
            elems = self.items(">")
            if not elems:
                self.fail("empty tuple")
            return V.Tuple(elems)
        if ch == "(":
            return self.map()
        if ch == '"':
            return V.Str(self.string())
        if ch == "|":
            return self.loc()
        if ch and ch in "-0123456789":
            return self.integer()
        if ch.isalpha() or ch in "_\\":
            return self.word()
        self.fail("unexpected %r" % ch if ch else "unexpected end of input")

    def map(self):
        self.pos += 1
        entries = {}
        self.ws()
        if self.peek() == ")":
            self.pos += 1
            return V.Map()
        while True:
            k = self.value()
            self.expect(":")
            entries[k] = self.value()
            self.ws()
            ch = self.peek()
            self.pos += 1
            if ch == ")":
                return V.Map(entries)
            if ch != ",":
                self.pos -= 1
                self.fail("expected ',' or ')'")

    def string(self):
        start = self.pos + 1
        i = start
        t = self.text
        while i < len(t) and t[i] != '"':
            i += 2 if t[i] == "\\" else 1
        if i >= len(t):
            self.fail("unterminated string")
        self.pos = i + 1
        return unescape(t[start:i], start)

    def integer(self):
        start = self.pos
        if self.peek() == "-":
            self.pos += 1
        if self.peek() not in _DIGITS:
            self.fail("expected digits")
        while self.peek() in _DIGITS:
            self.pos += 1
        return V.Int(int(self.text[start:self.pos]))

    def loc(self):
        start = self.pos + 1
        end = self.text.find("|", start)
        if end < 0:
            self.fail("unterminated location")
        uri = self.text[start:end]
        self.pos = end + 1
        self.expect("(")
        self.ws()
        off = self.integer().value
        self.expect(",")
        self.ws()
        length = self.integer().value
        self.expect(")")
        if off < 0 or length < 0:
            self.fail("negative location component")
        return V.Loc(uri, off, length)

    def word(self):
        start = self.pos
        escaped = self.peek() == "\\"
        if escaped:
            self.pos += 1
        while self.peek().isalnum() or self.peek() == "_":
            self.pos += 1
        name = self.text[start + escaped:self.pos]
        if not name:
            self.fail("expected identifier")
        if not escaped and name in ("true", "false"):
            return V.boolean(name == "true")
        self.ws()
        if self.peek() != "(":
            self.fail("expected '(' after constructor name %s" % name)
        at = self.pos
        self.pos += 1
        args = self.items(")")
        if self.decls is None:
            return V.Node("node", name, args)
        node = self.decls.construct(name, args)
        if node is None:
            self.pos = at
            self.fail("no declared constructor %s/%d accepts these arguments" % (name, len(args)))
        return node

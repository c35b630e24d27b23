"""User-defined concrete syntax: grammars, a scannerless Earley parser with
ambiguity detection, parse trees, and implosion of parse trees into ADT
values.

Layout handling: between consecutive symbols of a non-lexical production
the parser accepts a *gap*, which consumes the longest prefix derivable from
the layout nonterminal at that position.  Because a gap has exactly one
extent, empty lists or optionals flanked by gaps stay unambiguous.
"""

from dataclasses import dataclass, field
from typing import Optional

from . import values as V
from .errors import (AmbiguityError, DuplicateLabel, ImplodeError,
                     MultipleLayoutDecls, NoProductions, ParseError,
                     UnknownSymbol)
from .types import IntT, ListT, instance_of

# --- symbols -----------------------------------------------------------------


class Symbol:
    __slots__ = ()


@dataclass(frozen=True)
class Lit(Symbol):
    text: str

    def __str__(self):
        return V.quote(self.text)


@dataclass(frozen=True)
class CharClass(Symbol):
    ranges: tuple          # ((lo, hi), ...) inclusive code points
    negated: bool = False

    def matches(self, ch):
        c = ord(ch)
        inside = any(lo <= c <= hi for lo, hi in self.ranges)
        return inside != self.negated

    def __str__(self):
        def esc(c):
            ch = chr(c)
            return {"\n": "\\n", "\t": "\\t", "\r": "\\r", " ": "\\ ",
                    "]": "\\]", "-": "\\-", "\\": "\\\\"}.get(ch, ch)
        body = "".join(esc(lo) if lo == hi else "%s-%s" % (esc(lo), esc(hi))
                       for lo, hi in self.ranges)
        return ("!" if self.negated else "") + "[" + body + "]"


@dataclass(frozen=True)
class NT(Symbol):
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Star(Symbol):
    sym: Symbol

    def __str__(self):
        return "%s*" % self.sym


@dataclass(frozen=True)
class Plus(Symbol):
    sym: Symbol

    def __str__(self):
        return "%s+" % self.sym


@dataclass(frozen=True)
class Opt(Symbol):
    sym: Symbol

    def __str__(self):
        return "%s?" % self.sym


@dataclass(frozen=True)
class Production:
    lhs: str
    label: Optional[str]
    body: tuple
    lexical: bool = False

    def __str__(self):
        rhs = " ".join(str(s) for s in self.body)
        return "%s = %s%s" % (self.lhs, self.label + ": " if self.label else "", rhs)


@dataclass(frozen=True)
class Regular:
    """Pseudo-production of a list or optional node."""
    sym: Symbol

    def __str__(self):
        return str(self.sym)


@dataclass(frozen=True)
class StartProd:
    name: str

    def __str__(self):
        return "start[%s]" % self.name


@dataclass(frozen=True)
class SyntaxDef:
    """One ``syntax``/``lexical``/``layout``/``start syntax`` declaration.

    ``alternatives`` holds ``(label or None, (symbol, ...))`` pairs.
    """
    kind: str
    name: str
    alternatives: tuple


class Grammar:
    def __init__(self, productions, layout, starts):
        self.productions = tuple(productions)
        self.nonterminals = frozenset(p.lhs for p in self.productions)
        self.layout = layout
        self.starts = frozenset(starts)
        self.lexical = frozenset(p.lhs for p in self.productions if p.lexical)
        self._parser = None

    def __eq__(self, other):
        return (isinstance(other, Grammar) and self.productions == other.productions
                and self.layout == other.layout and self.starts == other.starts)

    def __hash__(self):
        return hash((self.productions, self.layout, self.starts))

    def parser(self):
        if self._parser is None:
            self._parser = _Compiled(self)
        return self._parser


def compile_grammar(defs):
    """Union a sequence of SyntaxDef into a validated Grammar."""
    prods = []
    seen = set()
    layouts = []
    starts = set()
    labels = {}
    for d in defs:
        if d.kind == "layout" and d.name not in layouts:
            layouts.append(d.name)
        if d.kind == "start":
            starts.add(d.name)
        for label, body in d.alternatives:
            p = Production(d.name, label, tuple(body), d.kind in ("lexical", "layout"))
            if p in seen:
                continue
            if label is not None:
                other = labels.get((d.name, label))
                if other is not None:
                    raise DuplicateLabel("label %s used twice for %s" % (label, d.name))
                labels[(d.name, label)] = p
            seen.add(p)
            prods.append(p)
    if not prods:
        raise NoProductions("grammar has no productions")
    if len(layouts) > 1:
        raise MultipleLayoutDecls("more than one layout nonterminal: %s" % ", ".join(layouts))
    defined = {p.lhs for p in prods}

    def check(sym, where):
        if isinstance(sym, NT):
            if sym.name not in defined:
                raise UnknownSymbol("undefined nonterminal %s in %s" % (sym.name, where))
        elif isinstance(sym, (Star, Plus, Opt)):
            check(sym.sym, where)

    for p in prods:
        for sym in p.body:
            check(sym, p)
    for name in list(layouts) + sorted(starts):
        if name not in defined:
            raise UnknownSymbol("undefined nonterminal %s" % name)
    return Grammar(prods, layouts[0] if layouts else None, starts)


# --- parse trees -------------------------------------------------------------

@dataclass(frozen=True)
class Leaf:
    text: str
    kind: str                                   # "lit" | "char" | "layout"
    loc: tuple = field(default=(0, 0), compare=False)

    def yield_(self):
        return self.text


@dataclass(frozen=True)
class Appl:
    prod: object                                # Production | Regular | StartProd
    children: tuple
    loc: tuple = field(default=(0, 0), compare=False)

    def yield_(self):
        return "".join(c.yield_() for c in self.children)

    @property
    def sort(self):
        if isinstance(self.prod, Production):
            return self.prod.lhs
        if isinstance(self.prod, StartProd):
            return self.prod.name
        return None


def tree_value(t):
    """Expose a ParseTree to programs as a node of ADT Tree."""
    if isinstance(t, Leaf):
        return V.TreeNode("leaf", (V.Str(t.text),), t, None)
    kids = V.List(tree_value(c) for c in t.children)
    return V.TreeNode("appl", (V.Str(str(t.prod)), kids), t, t.sort)


# --- the Earley recognizer and forest walker ------------------------------------

class _Gap:
    def __repr__(self):
        return "GAP"


GAP = _Gap()


class _Compiled:
    """Grammar flattened into rules over hashable symbol keys.

    Keys are nonterminal names (str) or tuples for generated list/optional
    symbols; terminals are Lit, CharClass or GAP.
    """

    def __init__(self, g):
        self.grammar = g
        self.rules = []          # (lhs key, body tuple, origin)
        self.by_lhs = {}
        self._expanded = set()
        for p in g.productions:
            ctx = p.lexical
            body = [self.sym_key(s, ctx) for s in p.body]
            self.add_rule(p.lhs, self.gapped(body, ctx), p)

    def gapped(self, body, lexical):
        if lexical or self.grammar.layout is None or len(body) < 2:
            return tuple(body)
        out = [body[0]]
        for s in body[1:]:
            out.append(GAP)
            out.append(s)
        return tuple(out)

    def add_rule(self, lhs, body, origin):
        self.by_lhs.setdefault(lhs, []).append(len(self.rules))
        self.rules.append((lhs, body, origin))

    def sym_key(self, sym, lexical):
        if isinstance(sym, NT):
            return sym.name
        if isinstance(sym, (Lit, CharClass)):
            return sym
        ctx = lexical or self.grammar.layout is None
        inner = self.sym_key(sym.sym, lexical)
        if isinstance(sym, Star):
            key = ("*", sym, ctx)
            plus = self.sym_key(Plus(sym.sym), lexical)
            if key not in self._expanded:
                self._expanded.add(key)
                self.add_rule(key, (), Regular(sym))
                self.add_rule(key, (plus,), Regular(sym))
            return key
        if isinstance(sym, Plus):
            key = ("+", sym, ctx)
            if key not in self._expanded:
                self._expanded.add(key)
                self.add_rule(key, (inner,), Regular(sym))
                self.add_rule(key, (key, inner) if ctx else (key, GAP, inner), Regular(sym))
            return key
        key = ("?", sym, ctx)
        if key not in self._expanded:
            self._expanded.add(key)
            self.add_rule(key, (), Regular(sym))
            self.add_rule(key, (inner,), Regular(sym))
        return key

    def start_rule(self, name):
        key = ("start", name)
        if key not in self.by_lhs:
            body = (GAP, name, GAP) if self.grammar.layout is not None else (name,)
            self.add_rule(key, body, StartProd(name))
        return key


class _Run:
    """State of one parse over one input."""

    def __init__(self, compiled, text):
        self.c = compiled
        self.text = text
        self.n = len(text)
        self._gaps = {}
        self.sets = None
        self.done = {}
        self.spans = set()

    # recognition

    def gap_end(self, i):
        e = self._gaps.get(i)
        if e is None:
            layout = self.c.grammar.layout
            if layout is None:
                e = i
            else:
                sub = _Run(self.c, self.text)
                sub.recognize(layout, i)
                e = max(sub.done.get((layout, i), {i}))
            self._gaps[i] = e
        return e

    def term_end(self, sym, i):
        if sym is GAP:
            return self.gap_end(i)
        if isinstance(sym, Lit):
            return i + len(sym.text) if self.text.startswith(sym.text, i) else None
        if i < self.n and sym.matches(self.text[i]):
            return i + 1
        return None

    def recognize(self, start, begin=0):
        rules, by_lhs = self.c.rules, self.c.by_lhs
        n = self.n
        sets = {}
        waiting = {}
        done = self.done
        spans = self.spans

        def add(item, pos):
            s = sets.get(pos)
            if s is None:
                s = sets[pos] = {}
            if item in s:
                return
            s[item] = None
            if pos == cur:
                work.append(item)
            r, d, o = item
            body = rules[r][1]
            if d < len(body):
                nxt = body[d]
                if isinstance(nxt, (str, tuple)):
                    waiting.setdefault((pos, nxt), []).append(item)
                    if pos in done.get((nxt, pos), ()):
                        add((r, d + 1, o), pos)

        cur = begin
        work = []
        for r in by_lhs.get(start, ()):
            add((r, 0, begin), begin)
        for cur in range(begin, n + 1):
            s = sets.get(cur)
            if not s:
                if cur > max(sets):
                    break
                continue
            work = list(s)
            k = 0
            while k < len(work):
                item = work[k]
                k += 1
                r, d, o = item
                lhs, body, _ = rules[r]
                if d == len(body):
                    ends = done.setdefault((lhs, o), set())
                    spans.add((r, o, cur))
                    if cur in ends:
                        continue
                    ends.add(cur)
                    for (r2, d2, o2) in list(waiting.get((o, lhs), ())):
                        add((r2, d2 + 1, o2), cur)
                    continue
                nxt = body[d]
                if isinstance(nxt, (str, tuple)):
                    for r2 in by_lhs.get(nxt, ()):
                        add((r2, 0, cur), cur)
                else:
                    e = self.term_end(nxt, cur)
                    if e is not None:
                        add((r, d + 1, o), e)
        self.sets = sets

    def expected(self):
        far = max(self.sets) if self.sets else 0
        out = set()
        for (r, d, o) in self.sets.get(far, ()):
            body = self.c.rules[r][1]
            if d < len(body) and not isinstance(body[d], (str, tuple)) and body[d] is not GAP:
                out.add(str(body[d]))
        return far, out

    # forest walking

    def ends(self, key, i):
        return self.done.get((key, i), ())

    def count(self, key, i, j, memo, active):
        """Number of cycle-free derivations of key over [i, j].

        Returns (count, hits) where hits are active states the result relied
        on; only results with no outside hits are memoized.
        """
        state = (key, i, j)
        if state in memo:
            return memo[state], frozenset()
        if state in active:
            return 0, frozenset((state,))
        active.add(state)
        total = 0
        hits = frozenset()
        for r in self.c.by_lhs.get(key, ()):
            if (r, i, j) in self.spans:
                c, h = self.ways(r, 0, i, j, memo, active)
                total += c
                hits |= h
        active.discard(state)
        hits = hits - {state}
        if not hits:
            memo[state] = total
        return total, hits

    def ways(self, r, k, i, j, memo, active):
        body = self.c.rules[r][1]
        if k == len(body):
            return (1 if i == j else 0), frozenset()
        mkey = (r, k, i, j)
        if mkey in memo:
            return memo[mkey], frozenset()
        sym = body[k]
        total = 0
        hits = frozenset()
        if isinstance(sym, (str, tuple)):
            for m in self.ends(sym, i):
                if m > j:
                    continue
                rest, h2 = self.ways(r, k + 1, m, j, memo, active)
                if rest == 0 and not h2:
                    continue
                c, h1 = self.count(sym, i, m, memo, active)
                total += c * rest
                hits |= h1 | h2
        else:
            e = self.term_end(sym, i)
            if e is not None and e <= j:
                total, hits = self.ways(r, k + 1, e, j, memo, active)
        if not hits:
            memo[mkey] = total
        return total, hits

    def trees(self, key, i, j, active, memo):
        """Derivations of key over [i, j] in the deterministic order:
        earlier rules first, then shorter first-child spans."""
        state = (key, i, j)
        if state in active:
            return
        active = active | {state}
        for r in self.c.by_lhs.get(key, ()):
            if (r, i, j) not in self.spans:
                continue
            for kids in self.body_trees(r, 0, i, j, active, memo):
                yield self.build(r, kids, i, j)

    def body_trees(self, r, k, i, j, active, memo):
        body = self.c.rules[r][1]
        if k == len(body):
            if i == j:
                yield []
            return
        sym = body[k]
        if isinstance(sym, (str, tuple)):
            for m in sorted(self.ends(sym, i)):
                if m > j or self.ways(r, k + 1, m, j, memo, set())[0] == 0:
                    continue
                for t in self.trees(sym, i, m, active, memo):
                    for rest in self.body_trees(r, k + 1, m, j, active, memo):
                        yield [t] + rest
        else:
            e = self.term_end(sym, i)
            if e is None or e > j:
                return
            kind = "layout" if sym is GAP else ("lit" if isinstance(sym, Lit) else "char")
            leaf = Leaf(self.text[i:e], kind, (i, e - i))
            for rest in self.body_trees(r, k + 1, e, j, active, memo):
                yield [leaf] + rest

    def build(self, r, kids, i, j):
        lhs, body, origin = self.c.rules[r]
        loc = (i, j - i)
        if isinstance(origin, Regular):
            # splice the left-recursive list chain into one flat node
            if isinstance(origin.sym, Star):
                kids = list(kids[0].children) if kids else []
            elif isinstance(origin.sym, Plus) and len(kids) > 1:
                kids = list(kids[0].children) + kids[1:]
        return Appl(origin, tuple(kids), loc)


def parse(g, start, text, policy="error", source="unknown"):
    """Parse ``text`` from nonterminal ``start``.

    ``policy`` is ``"error"`` (raise AmbiguityError on more than one
    derivation) or ``"first"`` (return the first derivation in the
    deterministic order).
    """
    if start not in g.nonterminals:
        raise UnknownSymbol("no such nonterminal %s" % start)
    if policy not in ("error", "first"):
        raise ValueError("ambiguity policy must be 'error' or 'first'")
    c = g.parser()
    key = c.start_rule(start)
    run = _Run(c, text)
    run.recognize(key, 0)
    n = len(text)
    if n not in run.ends(key, 0):
        far, expected = run.expected()
        raise ParseError(far, expected, source)
    memo = {}
    if policy == "error":
        total, _ = run.count(key, 0, n, memo, set())
        if total > 1:
            samples = []
            for t in run.trees(key, 0, n, frozenset(), memo):
                samples.append(t)
                if len(samples) == 2:
                    break
            raise AmbiguityError(total, samples, source)
    for t in run.trees(key, 0, n, frozenset(), memo):
        return t
    raise ParseError(n, set(), source)


def count_derivations(g, start, text):
    """Number of cycle-free derivations (0 when the text is rejected)."""
    c = g.parser()
    key = c.start_rule(start)
    run = _Run(c, text)
    run.recognize(key, 0)
    if len(text) not in run.ends(key, 0):
        return 0
    return run.count(key, 0, len(text), {}, set())[0]


def unparse(t):
    return t.yield_()


# --- implode -------------------------------------------------------------------

def _significant(children):
    return [c for c in children if not (isinstance(c, Leaf) and c.kind in ("lit", "layout"))]


def implode(t, decls, expected=None):
    """Convert a parse tree to an ADT value.

    Labeled productions become constructors of the same name and arity
    (literals and layout dropped); lists become lists; lexical subtrees become
    strings, or integers when the target slot is ``int`` and the text is all
    digits.  Unlabeled single-child productions are transparent.
    """
    if isinstance(t, Leaf):
        return _lexeme(t.text, expected, t)
    prod = t.prod
    if isinstance(prod, Regular):
        elem = expected.elem if isinstance(expected, ListT) else None
        return V.List(implode(c, decls, elem) for c in _significant(t.children))
    if isinstance(prod, StartProd):
        (inner,) = _significant(t.children)
        return implode(inner, decls, expected)
    if prod.lexical:
        return _lexeme(t.yield_(), expected, t)
    sig = _significant(t.children)
    if prod.label is None:
        if len(sig) == 1:
            return implode(sig[0], decls, expected)
        raise ImplodeError("unlabeled production %s has %d significant children" % (prod, len(sig)))
    cands = decls.constructors(prod.label, len(sig))
    cands.sort(key=lambda c: c.adt != prod.lhs)
    problems = []
    for c in cands:
        try:
            args = [implode(ch, decls, ft) for ch, ft in zip(sig, c.field_types)]
        except ImplodeError as e:
            problems.append(str(e))
            continue
        if all(instance_of(a, ft, decls) for a, ft in zip(args, c.field_types)):
            return V.Node(c.adt, c.name, args)
        problems.append("argument types do not fit %r" % c)
    if not cands:
        raise ImplodeError("production %s: no constructor %s/%d declared"
                           % (prod, prod.label, len(sig)))
    raise ImplodeError("production %s: no constructor %s/%d fits (%s)"
                       % (prod, prod.label, len(sig), "; ".join(problems)))


def _lexeme(text, expected, t):
    if isinstance(expected, IntT):
        if text.isdigit() and text.isascii():
            return V.Int(int(text))
        raise ImplodeError("lexeme %r cannot fill an int slot" % text)
    return V.Str(text)

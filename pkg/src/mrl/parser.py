"""Recursive-descent parser for mrl modules, statements and expressions."""

from . import ast as A
from . import patterns as P
from . import types as T
from . import values as V
from .errors import MrlSyntaxError, UnbalancedTemplate, ValueSyntaxError
from .grammar import CharClass, Lit, NT, Opt, Plus, Star, SyntaxDef
from .lexer import Lexer
from .valueparse import unescape

_ATOM_TYPES = {"bool": T.BOOL, "int": T.INT, "str": T.STR, "loc": T.LOC,
               "value": T.VALUE, "node": T.NODE, "void": T.VOID}
_TYPE_KWS = frozenset(_ATOM_TYPES) | {"list", "set", "map", "tuple", "rel"}
_STRATEGIES = {"visit": "bottom-up", "bottom-up": "bottom-up", "top-down": "top-down",
               "innermost": "innermost", "outermost": "outermost"}
_ASSIGN_OPS = ("=", "+=", "-=", "*=", "/=", "&=")
_DECL_KWS = ("data", "syntax", "lexical", "layout", "start", "import",
             "public", "private", "default")


def parse_module(src, source="<input>"):
    return Parser(src, source).module()


def parse_expression(src, source="<input>"):
    p = Parser(src, source)
    e = p.expr()
    p.expect_eof()
    return e


def parse_pattern(src, source="<input>"):
    p = Parser(src, source)
    pat = to_pattern(p.expr(), p.error)
    p.expect_eof()
    return pat


def parse_repl(src, source="<repl>"):
    """Declarations and statements as typed at the prompt; a trailing
    semicolon may be omitted."""
    return Parser(src, source).repl_items()


def to_pattern(e, err=None):
    """Reinterpret an expression tree as a pattern."""
    if isinstance(e, A.Const):
        return P.Literal(e.value)
    if isinstance(e, A.Name):
        return P.Wildcard() if e.name == "_" else P.Var(e.name)
    if isinstance(e, A.TypedName):
        return P.Var(e.name, e.type)
    if isinstance(e, A.Call) and isinstance(e.callee, A.Name):
        return P.Ctor(e.callee.name, tuple(to_pattern(a, err) for a in e.args))
    if isinstance(e, A.TupleExpr):
        return P.TuplePat(tuple(to_pattern(a, err) for a in e.elems))
    if isinstance(e, (A.ListExpr, A.SetExpr)):
        items = []
        for el in e.elems:
            if isinstance(el, A.Splice):
                inner = el.inner
                if isinstance(inner, A.Name):
                    items.append(P.Multi(inner.name))
                elif isinstance(inner, A.TypedName):
                    items.append(P.Multi(inner.name, inner.type))
                else:
                    _bad_pattern(el, err)
            else:
                items.append(P.Single(to_pattern(el, err)))
        if isinstance(e, A.ListExpr):
            return P.ListPat(tuple(items))
        if sum(isinstance(i, P.Multi) for i in items) > 1:
            _bad_pattern(e, err, "a set pattern takes at most one rest variable")
        return P.SetPat(tuple(items))
    if isinstance(e, A.DeepExpr):
        return P.Deep(to_pattern(e.inner, err))
    if isinstance(e, A.Unary) and e.op == "!":
        return P.Neg(to_pattern(e.operand, err))
    if isinstance(e, A.Template) and all(isinstance(p, str) for p in e.parts):
        return P.Literal(V.Str("".join(e.parts)))
    _bad_pattern(e, err)


def _bad_pattern(e, err, msg="not a valid pattern"):
    if err is not None:
        err(msg, getattr(e, "pos", -1))
    raise MrlSyntaxError(msg)


class Parser:
    def __init__(self, src, source="<input>"):
        self.src = src
        self.source = source
        self.lex = Lexer(src)
        self.tok = self.lex.next()
        self.no_gt = False

    # --- token plumbing

    def error(self, msg, pos=None, length=None):
        if pos is None or pos < 0:
            pos = self.tok.pos
            length = self.tok.end - self.tok.pos if length is None else length
        e = MrlSyntaxError(msg, (self.source, pos, length or 0))
        e.incomplete = self.tok.kind == "eof" or msg.startswith("unterminated")
        raise e

    def advance(self):
        t = self.tok
        self.tok = self.lex.next()
        return t

    def reset_to(self, pos):
        self.lex.pos = pos
        self.tok = self.lex.next()

    def save(self):
        return (self.lex.pos, self.tok, self.no_gt)

    def restore(self, state):
        self.lex.pos, self.tok, self.no_gt = state

    def peek2(self):
        """The token after the current one, without consuming anything."""
        pos = self.lex.pos
        t = self.lex.next()
        self.lex.pos = pos
        return t

    def at_op(self, *texts):
        return self.tok.is_op(*texts)

    def at_kw(self, *texts):
        return self.tok.is_kw(*texts)

    def accept_op(self, text):
        if self.tok.is_op(text):
            self.advance()
            return True
        return False

    def expect_op(self, text):
        if not self.tok.is_op(text):
            self.error("expected '%s' but found %s" % (text, self.tok))
        return self.advance()

    def expect_kw(self, text):
        if not self.tok.is_kw(text):
            self.error("expected '%s' but found %s" % (text, self.tok))
        return self.advance()

    def ident(self):
        if self.tok.kind != "id":
            self.error("expected identifier but found %s" % self.tok)
        return self.advance().text

    def expect_eof(self):
        if self.tok.kind != "eof":
            self.error("unexpected %s" % self.tok)

    def qualified_name(self):
        # module path segments may coincide with keywords (lang::x::syntax)
        parts = [self.name_segment()]
        while self.accept_op("::"):
            parts.append(self.name_segment())
        return "::".join(parts)

    def name_segment(self):
        if self.tok.kind == "kw":
            return self.advance().text
        return self.ident()

    # --- modules

    def module(self):
        name = None
        if self.at_kw("module"):
            self.advance()
            name = self.qualified_name()
            self.expect_op(";")
        imports, decls = [], []
        while self.tok.kind != "eof":
            d = self.declaration()
            (imports if isinstance(d, A.Import) else decls).append(d)
        return A.Module(name, imports, decls, self.source)

    def declaration(self):
        pos = self.tok.pos
        if self.at_kw("import"):
            self.advance()
            name = self.qualified_name()
            self.expect_op(";")
            return A.Import(name, pos)
        if self.at_kw("data"):
            return self.data_decl()
        if self.at_kw("syntax", "lexical", "layout", "start"):
            return self.syntax_decl()
        public, default = True, False
        while self.at_kw("public", "private", "default"):
            kw = self.advance().text
            if kw == "private":
                public = False
            elif kw == "default":
                default = True
        ret = self.type_expr()
        name_tok = self.tok
        name = self.ident()
        if self.at_op("("):
            return self.function_rest(ret, name, default, public, pos)
        if default:
            self.error("'default' applies to functions only", name_tok.pos)
        self.expect_op("=")
        init = self.expr()
        self.expect_op(";")
        return A.VarDecl(ret, name, init, pos)

    def function_rest(self, ret, name, default, public, pos):
        self.expect_op("(")
        params = []
        if not self.at_op(")"):
            while True:
                e = self.expr()
                params.append(to_pattern(e, self.error))
                if not self.accept_op(","):
                    break
        self.expect_op(")")
        if self.accept_op("="):
            body = self.expr()
            self.expect_op(";")
        elif self.at_op("{"):
            body = self.block()
        else:
            self.error("expected function body")
        end = self.tok.pos
        return A.FunDecl(name, ret, params, body, default, public, pos,
                         source=self.src[pos:end].strip())

    def data_decl(self):
        pos = self.advance().pos
        name = self.ident()
        self.expect_op("=")
        variants = []
        while True:
            cname = self.ident()
            self.expect_op("(")
            fields = []
            if not self.at_op(")"):
                while True:
                    t = self.type_expr()
                    fname = self.ident() if self.tok.kind == "id" else "arg%d" % len(fields)
                    fields.append((t, fname))
                    if not self.accept_op(","):
                        break
            self.expect_op(")")
            variants.append((cname, fields))
            if not self.accept_op("|"):
                break
        self.expect_op(";")
        return A.DataDecl(name, variants, pos)

    def type_expr(self):
        t = self.tok
        if t.kind == "kw" and t.text in _ATOM_TYPES:
            self.advance()
            return _ATOM_TYPES[t.text]
        if t.kind == "kw" and t.text in ("list", "set", "map", "tuple", "rel"):
            self.advance()
            self.expect_op("[")
            args = [self.type_expr()]
            while self.accept_op(","):
                args.append(self.type_expr())
            self.expect_op("]")
            want = {"list": 1, "set": 1, "map": 2}.get(t.text)
            if want is not None and len(args) != want:
                self.error("%s takes %d type argument(s)" % (t.text, want), t.pos)
            if t.text == "list":
                return T.ListT(args[0])
            if t.text == "set":
                return T.SetT(args[0])
            if t.text == "map":
                return T.MapT(args[0], args[1])
            if t.text == "tuple":
                return T.TupleT(tuple(args))
            return T.rel(*args)
        if t.kind == "id":
            self.advance()
            return T.Adt(t.text)
        self.error("expected a type but found %s" % t)

    # --- syntax definitions

    def syntax_decl(self):
        pos = self.tok.pos
        kind = self.advance().text
        if kind == "start":
            self.expect_kw("syntax")
        name = self.ident()
        self.expect_op("=")
        alts = []
        while True:
            label = None
            if self.tok.kind == "id" and self.peek2().is_op(":"):
                label = self.advance().text
                self.advance()
            syms = []
            while not self.at_op("|", ";"):
                syms.append(self.grammar_symbol())
            alts.append((label, tuple(syms)))
            if not self.accept_op("|"):
                break
        self.expect_op(";")
        return A.SyntaxDecl(SyntaxDef(kind, name, tuple(alts)), pos)

    def grammar_symbol(self):
        t = self.tok
        if t.kind == "str":
            text, end = self.raw_plain_string(t.end)
            self.reset_to(end)
            sym = Lit(text)
        elif t.is_op("[") or (t.is_op("!") and self.peek2().is_op("[")):
            negated = t.is_op("!")
            if negated:
                self.advance()
            sym, end = self.raw_char_class(self.tok.end, negated)
            self.reset_to(end)
        elif t.kind == "id" and t.text[:1].isupper():
            self.advance()
            sym = NT(t.text)
        else:
            self.error("expected a grammar symbol but found %s" % t)
        while self.at_op("*", "+", "?") and not self.tok.ws_before:
            op = self.advance().text
            sym = {"*": Star, "+": Plus, "?": Opt}[op](sym)
        # optional field label
        if self.tok.kind == "id" and self.tok.text[:1].islower() and not self.peek2().is_op(":"):
            self.advance()
        return sym

    def raw_plain_string(self, i):
        src = self.src
        j = i
        while j < len(src) and src[j] != '"':
            j += 2 if src[j] == "\\" else 1
        if j >= len(src):
            self.error("unterminated literal", i - 1)
        try:
            return unescape(src[i:j], i), j + 1
        except ValueSyntaxError as e:
            self.error(e.message, e.offset)

    def raw_char_class(self, i, negated):
        src = self.src
        ranges = []
        escapes = {"n": "\n", "t": "\t", "r": "\r", " ": " "}

        def char_at(k):
            if k >= len(src):
                self.error("unterminated character class", i - 1)
            if src[k] == "\\":
                if k + 1 >= len(src):
                    self.error("unterminated character class", i - 1)
                c = src[k + 1]
                return escapes.get(c, c), k + 2
            return src[k], k + 1

        k = i
        while True:
            if k >= len(src):
                self.error("unterminated character class", i - 1)
            if src[k] == "]":
                k += 1
                break
            lo, k = char_at(k)
            hi = lo
            if k < len(src) and src[k] == "-" and k + 1 < len(src) and src[k + 1] != "]":
                hi, k = char_at(k + 1)
            if ord(hi) < ord(lo):
                self.error("empty character range %s-%s" % (lo, hi), k)
            ranges.append((ord(lo), ord(hi)))
        return CharClass(tuple(ranges), negated), k

    # --- statements

    def block(self):
        pos = self.expect_op("{").pos
        stmts = []
        while not self.at_op("}"):
            if self.tok.kind == "eof":
                self.error("unterminated block", pos)
            stmts.append(self.stmt())
        self.advance()
        return A.Block(stmts, pos)

    def paren_conds(self):
        self.expect_op("(")
        conds = [self.expr()]
        while self.accept_op(","):
            conds.append(self.expr())
        self.expect_op(")")
        return conds

    def stmt(self):
        t = self.tok
        pos = t.pos
        if t.is_op("{"):
            return self.block()
        if t.is_op(";"):
            self.advance()
            return A.Block([], pos)
        if t.kind == "kw":
            kw = t.text
            if kw == "if":
                self.advance()
                cond = _conj(self.paren_conds())
                then = self.stmt()
                orelse = None
                if self.at_kw("else"):
                    self.advance()
                    orelse = self.stmt()
                return A.If(cond, then, orelse, pos)
            if kw == "while":
                self.advance()
                cond = _conj(self.paren_conds())
                return A.While(cond, self.stmt(), pos)
            if kw == "for":
                self.advance()
                conds = self.paren_conds()
                return A.For(conds, self.stmt(), pos)
            if kw == "switch":
                self.advance()
                self.expect_op("(")
                subject = self.expr()
                self.expect_op(")")
                return A.Switch(subject, self.cases(allow_replace=False), pos)
            if kw == "solve":
                self.advance()
                self.expect_op("(")
                names = [self.ident()]
                while self.accept_op(","):
                    names.append(self.ident())
                bound = None
                if self.accept_op(";"):
                    bound = self.expr()
                self.expect_op(")")
                return A.Solve(names, bound, self.stmt(), pos)
            if kw == "return":
                self.advance()
                e = None
                if not self.at_op(";"):
                    e = self.expr()
                self.end_stmt()
                return A.Return(e, pos)
            if kw in ("fail", "break", "continue"):
                self.advance()
                self.expect_op(";")
                return {"fail": A.Fail, "break": A.Break, "continue": A.Continue}[kw](pos)
            if kw == "insert":
                self.advance()
                e = self.expr()
                self.expect_op(";")
                return A.Insert(e, pos)
            if kw == "throw":
                self.advance()
                e = self.expr()
                self.expect_op(";")
                return A.Throw(e, pos)
            if kw == "try":
                return self.try_stmt()
            if kw in _STRATEGIES:
                e = self.expr()
                self.accept_op(";")
                return A.ExprStmt(e, pos)
        e = self.expr()
        if self.tok.kind == "op" and self.tok.text in _ASSIGN_OPS:
            op = self.advance().text
            value = self.expr()
            self.end_stmt()
            if isinstance(e, A.TypedName):
                if op != "=":
                    self.error("compound assignment in a declaration", pos)
                return A.Decl(e.type, e.name, value, pos)
            self.check_target(e)
            return A.Assign(e, op, value, pos)
        self.end_stmt()
        if isinstance(e, A.TypedName):
            return A.Decl(e.type, e.name, None, pos)
        return A.ExprStmt(e, pos)

    def end_stmt(self):
        if self.at_op(";"):
            self.advance()
        elif not (self.repl_mode and self.tok.kind == "eof"):
            self.error("expected ';' but found %s" % self.tok)

    repl_mode = False

    def check_target(self, e):
        if isinstance(e, A.Name):
            return
        if isinstance(e, (A.Subscript, A.FieldAccess)):
            return self.check_target(e.target)
        if isinstance(e, A.IfDefined) and isinstance(e.expr, A.Subscript):
            return self.check_target(e.expr)
        if isinstance(e, A.TupleExpr):
            for el in e.elems:
                self.check_target(el)
            return
        self.error("cannot assign to this expression", e.pos)

    def try_stmt(self):
        pos = self.advance().pos
        body = self.stmt()
        catches = []
        while self.at_kw("catch"):
            self.advance()
            pat = None
            if not self.at_op(":"):
                pat = to_pattern(self.expr(), self.error)
            self.expect_op(":")
            catches.append(A.Catch(pat, self.stmt()))
        fin = None
        if self.at_kw("finally"):
            self.advance()
            fin = self.stmt()
        if not catches and fin is None:
            self.error("try needs a catch or finally clause", pos)
        return A.Try(body, catches, fin, pos)

    def cases(self, allow_replace=True):
        self.expect_op("{")
        out = []
        while not self.at_op("}"):
            pos = self.tok.pos
            if self.at_kw("default"):
                self.advance()
                self.expect_op(":")
                out.append(A.Case(None, self.stmt(), None, pos))
                continue
            self.expect_kw("case")
            pat = to_pattern(self.expr(), self.error)
            if self.at_op("=>"):
                if not allow_replace:
                    self.error("'=>' is only allowed in visit cases")
                self.advance()
                repl = self.expr()
                self.accept_op(";")
                out.append(A.Case(pat, None, repl, pos))
            else:
                self.expect_op(":")
                out.append(A.Case(pat, self.stmt(), None, pos))
        self.advance()
        return out

    # --- expressions

    def expr(self):
        return self.or_expr()

    def or_expr(self):
        left = self.and_expr()
        while self.at_op("||"):
            pos = self.advance().pos
            left = A.Binary("||", left, self.and_expr(), pos)
        return left

    def and_expr(self):
        left = self.match_expr()
        while self.at_op("&&"):
            pos = self.advance().pos
            left = A.Binary("&&", left, self.match_expr(), pos)
        return left

    def match_expr(self):
        left = self.cmp_expr()
        if self.at_op(":=", "!:=", "<-"):
            op = self.advance()
            right = self.cmp_expr()
            pat = to_pattern(left, self.error)
            if op.text == "<-":
                return A.Generator(pat, right, op.pos)
            return A.Match(pat, right, op.text == "!:=", op.pos)
        return left

    def cmp_expr(self):
        left = self.add_expr()
        while True:
            t = self.tok
            if t.kind == "op" and t.text in ("==", "!=", "<", "<=", ">", ">="):
                if self.no_gt and t.text in (">", ">="):
                    break
                op = t.text
            elif t.is_kw("in", "notin"):
                op = t.text
            else:
                break
            self.advance()
            left = A.Binary(op, left, self.add_expr(), t.pos)
        return left

    def add_expr(self):
        left = self.inter_expr()
        while self.at_op("+", "-"):
            t = self.advance()
            left = A.Binary(t.text, left, self.inter_expr(), t.pos)
        return left

    def inter_expr(self):
        left = self.mul_expr()
        while self.at_op("&"):
            t = self.advance()
            left = A.Binary("&", left, self.mul_expr(), t.pos)
        return left

    def mul_expr(self):
        left = self.compose_expr()
        while self.at_op("*", "/", "%"):
            t = self.advance()
            left = A.Binary(t.text, left, self.compose_expr(), t.pos)
        return left

    def compose_expr(self):
        left = self.unary_expr()
        while self.at_kw("o"):
            t = self.advance()
            left = A.Binary("o", left, self.unary_expr(), t.pos)
        return left

    def unary_expr(self):
        t = self.tok
        if t.is_op("-"):
            self.advance()
            operand = self.unary_expr()
            if isinstance(operand, A.Const) and isinstance(operand.value, V.Int):
                return A.Const(V.Int(-operand.value.value), t.pos)
            return A.Unary("-", operand, t.pos)
        if t.is_op("!"):
            self.advance()
            return A.Unary("!", self.unary_expr(), t.pos)
        if t.is_op("/"):
            self.advance()
            return A.DeepExpr(self.unary_expr(), t.pos)
        if t.is_op("*"):
            self.advance()
            return A.Splice(self.unary_expr(), t.pos)
        return self.ifdef_expr()

    def ifdef_expr(self):
        e = self.postfix_expr()
        if self.at_op("?"):
            t = self.advance()
            return A.IfDefined(e, self.postfix_expr(), t.pos)
        return e

    def starts_expr(self, t):
        if t.kind in ("int", "str", "id"):
            return True
        if t.kind == "kw":
            return t.text in ("true", "false") or t.text in _TYPE_KWS or t.text in _STRATEGIES
        return t.kind == "op" and t.text in ("(", "[", "{", "<", "|", "-", "!", "/", "#", "*")

    def postfix_closure(self):
        t = self.tok
        if t.ws_before or not t.is_op("+", "*"):
            return False
        nxt = self.peek2()
        if nxt.is_op("[") and not nxt.ws_before:
            return True
        return not self.starts_expr(nxt)

    def postfix_expr(self):
        e = self.primary()
        while True:
            t = self.tok
            if t.is_op("("):
                self.advance()
                args = self.expr_list(")")
                e = A.Call(e, args, t.pos)
            elif t.is_op("."):
                self.advance()
                e = A.FieldAccess(e, self.ident(), t.pos)
            elif t.is_op("["):
                self.advance()
                saved, self.no_gt = self.no_gt, False
                idx = self.expr()
                self.no_gt = saved
                self.expect_op("]")
                e = A.Subscript(e, idx, t.pos)
            elif t.is_op("+", "*") and self.postfix_closure():
                self.advance()
                e = A.Closure(e, t.text == "*", t.pos)
            else:
                return e

    def expr_list(self, close):
        saved, self.no_gt = self.no_gt, False
        out = []
        if not self.at_op(close):
            while True:
                out.append(self.expr())
                if not self.accept_op(","):
                    break
        self.expect_op(close)
        self.no_gt = saved
        return out

    def primary(self):
        t = self.tok
        pos = t.pos
        if t.kind == "int":
            self.advance()
            return A.Const(V.Int(int(t.text)), pos)
        if t.kind == "str":
            return self.template()
        if t.kind == "kw":
            if t.text in ("true", "false"):
                self.advance()
                return A.Const(V.boolean(t.text == "true"), pos)
            if t.text in _TYPE_KWS:
                ty = self.type_expr()
                if self.tok.kind != "id":
                    self.error("expected a variable name after type %s" % T.type_str(ty))
                return A.TypedName(ty, self.advance().text, pos)
            if t.text in _STRATEGIES:
                return self.visit_expr()
        if t.kind == "id":
            self.advance()
            if self.tok.kind == "id":
                return A.TypedName(T.Adt(t.text), self.advance().text, pos)
            return A.Name(t.text, pos)
        if t.kind == "op":
            op = t.text
            if op == "(":
                return self.paren_or_map()
            if op == "[":
                return self.collection("[", "]", pos)
            if op == "{":
                return self.collection("{", "}", pos)
            if op == "<":
                self.advance()
                saved, self.no_gt = self.no_gt, True
                elems = [self.expr()]
                while self.accept_op(","):
                    elems.append(self.expr())
                self.no_gt = saved
                if not self.tok.text.startswith(">") or self.tok.kind != "op":
                    self.error("expected '>' to close tuple but found %s" % self.tok)
                self.reset_to(self.tok.pos + 1)
                return A.TupleExpr(elems, pos)
            if op == "|":
                return self.location()
            if op == "#":
                self.advance()
                return A.ReifiedType(self.type_expr(), pos)
        self.error("unexpected %s" % t)

    def paren_or_map(self):
        pos = self.advance().pos
        if self.accept_op(")"):
            return A.MapExpr([], pos)
        saved, self.no_gt = self.no_gt, False
        first = self.expr()
        if self.accept_op(":"):
            val = self.expr()
            if self.accept_op("|"):
                conds = self.cond_list()
                self.expect_op(")")
                self.no_gt = saved
                return A.Comprehension("map", [first, val], conds, pos)
            pairs = [(first, val)]
            while self.accept_op(","):
                k = self.expr()
                self.expect_op(":")
                pairs.append((k, self.expr()))
            self.expect_op(")")
            self.no_gt = saved
            return A.MapExpr(pairs, pos)
        self.expect_op(")")
        self.no_gt = saved
        return first

    def cond_list(self):
        conds = [self.expr()]
        while self.accept_op(","):
            conds.append(self.expr())
        return conds

    def collection(self, open_, close, pos):
        self.advance()
        saved, self.no_gt = self.no_gt, False
        kind = "list" if open_ == "[" else "set"
        elems = []
        if not self.at_op(close):
            elems.append(self.expr())
            if self.accept_op("|"):
                conds = self.cond_list()
                self.expect_op(close)
                self.no_gt = saved
                return A.Comprehension(kind, elems, conds, pos)
            while self.accept_op(","):
                elems.append(self.expr())
        self.expect_op(close)
        self.no_gt = saved
        return A.ListExpr(elems, pos) if kind == "list" else A.SetExpr(elems, pos)

    def location(self):
        t = self.tok
        end = self.src.find("|", t.end)
        nl = self.src.find("\n", t.end)
        if end < 0 or (0 <= nl < end):
            self.error("unterminated location literal", t.pos)
        uri = self.src[t.end:end]
        self.reset_to(end + 1)
        self.expect_op("(")
        off = self.tok
        if off.kind != "int":
            self.error("expected offset")
        self.advance()
        self.expect_op(",")
        length = self.tok
        if length.kind != "int":
            self.error("expected length")
        self.advance()
        self.expect_op(")")
        return A.Const(V.Loc(uri, int(off.text), int(length.text)), t.pos)

    def visit_expr(self):
        t = self.advance()
        pos = t.pos
        strategy = _STRATEGIES[t.text]
        if t.text != "visit":
            self.expect_kw("visit")
        self.expect_op("(")
        subject = self.expr()
        self.expect_op(")")
        return A.Visit(strategy, subject, self.cases(), pos)

    # --- string templates

    def template(self):
        start_tok = self.tok
        parts, end, closer = self.template_parts(start_tok.end, 0)
        self.reset_to(end)
        return A.Template(parts, start_tok.pos)

    def template_parts(self, i, depth):
        """Scan template text from ``i``; returns (parts, next index, closer)
        where closer is '"', '}' or 'else'."""
        src, n = self.src, len(self.src)
        parts, buf = [], []

        def flush():
            if buf:
                parts.append("".join(buf))
                buf.clear()

        while True:
            if i >= n:
                self.error("unterminated string", self.tok.pos)
            ch = src[i]
            if ch == '"':
                if depth:
                    raise UnbalancedTemplate("string ends inside a template block",
                                             (self.source, i, 1))
                flush()
                return parts, i + 1, '"'
            if ch == "\\":
                k = i + 6 if src.startswith("u", i + 1) else i + 2
                try:
                    buf.append(unescape(src[i:k], i))
                except ValueSyntaxError as e:
                    self.error(e.message, e.offset)
                i = k
            elif ch == "\n":
                buf.append("\n")
                i += 1
                j = i
                while j < n and src[j] in " \t":
                    j += 1
                if j < n and src[j] == "'":
                    i = j + 1
            elif ch == "<":
                j = i + 1
                while j < n and src[j] in " \t\r\n":
                    j += 1
                if j < n and src[j] == "}":
                    flush()
                    k, closer = self.template_close(i, j + 1, depth)
                    return parts, k, closer
                flush()
                i = self.template_hole(i, depth, parts)
            elif ch == ">":
                buf.append(">")
                i += 1
            else:
                buf.append(ch)
                i += 1

    def template_close(self, at, i, depth):
        if depth == 0:
            raise UnbalancedTemplate("'<}>' without an open template block", (self.source, at, 1))
        self.reset_to(i)
        if self.at_kw("else"):
            self.advance()
            if not self.at_op("{"):
                self.error("expected '{' after else in template")
            gt = self.peek2()
            if not (gt.kind == "op" and gt.text.startswith(">")):
                raise UnbalancedTemplate("expected '>' after '} else {'", (self.source, at, 1))
            return gt.pos + 1, "else"
        if not (self.tok.kind == "op" and self.tok.text.startswith(">")):
            raise UnbalancedTemplate("expected '>' after '<}'", (self.source, at, 1))
        return self.tok.pos + 1, "}"

    def template_hole(self, i, depth, parts):
        self.reset_to(i + 1)
        saved, self.no_gt = self.no_gt, True
        if self.at_kw("for", "if"):
            kw = self.advance().text
            self.no_gt = False
            conds = self.paren_conds()
            if not self.at_op("{"):
                self.error("expected '{' in template %s" % kw)
            gt = self.peek2()
            if not (gt.kind == "op" and gt.text.startswith(">")):
                raise UnbalancedTemplate("expected '>' after '{'", (self.source, i, 1))
            body, k, closer = self.template_parts(gt.pos + 1, depth + 1)
            if kw == "for":
                if closer != "}":
                    raise UnbalancedTemplate("'else' in a template for", (self.source, i, 1))
                parts.append(A.TFor(conds, body))
            else:
                orelse = []
                if closer == "else":
                    orelse, k, closer = self.template_parts(k, depth + 1)
                    if closer != "}":
                        raise UnbalancedTemplate("unclosed template if", (self.source, i, 1))
                parts.append(A.TIf(_conj(conds), body, orelse))
            self.no_gt = saved
            return k
        e = self.expr()
        self.no_gt = saved
        if not (self.tok.kind == "op" and self.tok.text.startswith(">")):
            raise UnbalancedTemplate("expected '>' to close interpolation, found %s" % self.tok,
                                     (self.source, self.tok.pos, 1))
        parts.append(A.TInterp(e))
        return self.tok.pos + 1

    # --- interactive input

    def repl_items(self):
        self.repl_mode = True
        items = []
        while self.tok.kind != "eof":
            if self.at_kw(*_DECL_KWS):
                items.append(self.declaration())
                continue
            fun = self.try_function()
            if fun is not None:
                items.append(fun)
                continue
            items.append(self.stmt())
        return items

    def try_function(self):
        state = self.save()
        try:
            pos = self.tok.pos
            ret = self.type_expr()
            name = self.ident()
            if not self.at_op("("):
                raise MrlSyntaxError("not a function")
        except MrlSyntaxError:
            self.restore(state)
            return None
        try:
            return self.function_rest(ret, name, False, True, pos)
        except MrlSyntaxError as e:
            if getattr(e, "incomplete", False):
                raise
            self.restore(state)
            return None


def _conj(conds):
    out = conds[0]
    for c in conds[1:]:
        out = A.Binary("&&", out, c, getattr(c, "pos", -1))
    return out

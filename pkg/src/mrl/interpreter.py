"""Tree-walking evaluator for mrl programs.

Non-local control flow (return, fail, insert, break, continue) travels as
Python exceptions.  Conditions that contain matches are evaluated as
generators: each resumption installs the next set of bindings in the
current frame, so ``fail`` can restore a snapshot and ask for another.
"""

import os
import sys
import warnings
from dataclasses import dataclass, fields, is_dataclass

from . import ast as A
from . import patterns as P
from . import types as T
from . import values as V
from .errors import (ConditionTypeError, CyclicImport, DuplicateDeclaration,
                     FailOutsideBacktrackingScope, FixpointBudgetExceeded,
                     InsertOutsideVisit, KeyTypeError, LoadError, MrlError,
                     MrlTypeError, NoApplicableAlternative, ReplacementTypeError,
                     ReturnTypeError, Thrown, UndefinedName, UnknownSymbol)
from .grammar import compile_grammar
from .parser import parse_module, parse_repl

DEFAULT_BUDGET = 10000
_MISSING = object()


class _Signal(Exception):
    pass


class ReturnSignal(_Signal):
    def __init__(self, value):
        self.value = value


class FailSignal(_Signal):
    pass


class InsertSignal(_Signal):
    def __init__(self, value):
        self.value = value


class BreakSignal(_Signal):
    pass


class ContinueSignal(_Signal):
    pass


class OverlapWarning(UserWarning):
    """Two non-default alternatives of one function may match the same call."""


class ShadowWarning(UserWarning):
    """A bare pattern variable was already bound, so it tests equality."""


class Env:
    """Chain of frames, innermost last.  Declared types live in the same
    dicts under ``("type", name)`` keys."""
    __slots__ = ("frames",)

    def __init__(self, frames):
        self.frames = frames

    def get(self, name, default=None):
        for f in reversed(self.frames):
            if name in f:
                return f[name]
        return default

    def frame_of(self, name):
        for f in reversed(self.frames):
            if name in f or ("type", name) in f:
                return f
        return None

    def declared_type(self, name):
        f = self.frame_of(name)
        return None if f is None else f.get(("type", name))

    def push(self, frame=None):
        self.frames.append({} if frame is None else frame)

    def pop(self):
        self.frames.pop()

    def snapshot(self):
        return [(f, dict(f)) for f in self.frames]

    def restore(self, snap):
        del self.frames[len(snap):]
        for f, saved in snap:
            f.clear()
            f.update(saved)


@dataclass
class Alternative:
    decl: A.FunDecl
    source: str
    params: object          # TuplePat over the parameters, or None when nullary
    ret: object = None      # resolved return type

    @property
    def default(self):
        return self.decl.default


def _walk(node):
    """Every AST dataclass reachable from ``node`` (patterns included)."""
    stack = [node]
    while stack:
        n = stack.pop()
        if isinstance(n, (list, tuple)):
            stack.extend(n)
        elif is_dataclass(n) and not isinstance(n, type):
            yield n
            for f in fields(n):
                x = getattr(n, f.name)
                if isinstance(x, (list, tuple)) or (is_dataclass(x) and not isinstance(x, T.TypeExpr)):
                    stack.append(x)


def _has_match(e):
    """True when evaluating ``e`` as a condition may bind names."""
    if isinstance(e, (A.Match, A.Generator)):
        return True
    if isinstance(e, A.Binary) and e.op in ("&&", "||"):
        return _has_match(e.left) or _has_match(e.right)
    if isinstance(e, A.Unary) and e.op == "!":
        return _has_match(e.operand)
    return False


def _conj(conds):
    out = conds[0]
    for c in conds[1:]:
        out = A.Binary("&&", out, c)
    return out


_COMPOUND = {"+=": "+", "-=": "-", "*=": "*", "/=": "/", "&=": "&"}


class Interpreter:
    def __init__(self, search_paths=(), ambiguity="error", solve_budget=DEFAULT_BUDGET,
                 visit_budget=DEFAULT_BUDGET, out=None):
        if ambiguity not in ("error", "first"):
            raise ValueError("ambiguity policy must be 'error' or 'first'")
        if solve_budget < 1 or visit_budget < 1:
            raise ValueError("budgets must be at least 1")
        self.search_paths = [os.fspath(p) for p in search_paths]
        self.ambiguity = ambiguity
        self.solve_budget = solve_budget
        self.visit_budget = visit_budget
        self._out = out
        self.decls = T.Declarations()
        self.functions = {}             # (name, arity) -> [Alternative]
        self.globals = {}
        self.syntax_defs = []
        self.modules = {}
        self.warnings = []
        self._loading = []
        self._pending = []
        self._grammar = None
        self._fail_cache = {}
        self._type_cache = {}
        self._order_cache = {}
        self.reified = {}
        self._shadowed = set()
        self.source = "<input>"
        from .builtins import BUILTINS
        self.builtins = BUILTINS

    @property
    def out(self):
        return self._out if self._out is not None else sys.stdout

    # --- loading

    def load_file(self, path):
        """Load a module file; its directory joins the import search path."""
        path = os.fspath(path)
        try:
            with open(path, encoding="utf-8") as fh:
                src = fh.read()
        except OSError as e:
            raise LoadError("cannot read %s: %s" % (path, e.strerror)) from None
        module = parse_module(src, os.path.basename(path))
        root = os.path.dirname(os.path.abspath(path))
        if module.name:
            for _ in range(module.name.count("::")):
                root = os.path.dirname(root)
        if root not in self.search_paths:
            self.search_paths.append(root)
        return self._load(module, os.path.basename(path))

    def load_source(self, src, source="<input>"):
        return self._load(parse_module(src, source), source)

    def _load(self, module, source, expect=None):
        name = module.name or expect or source
        if expect is not None and module.name is not None and module.name != expect:
            raise LoadError("file for module %s declares module %s" % (expect, module.name),
                            (source, 0, 0))
        if name in self.modules:
            return name
        if name in self._loading:
            raise CyclicImport("import cycle: %s" % " -> ".join(self._loading + [name]),
                               (source, 0, 0))
        self._loading.append(name)
        try:
            for imp in module.imports:
                self._import(imp, source)
            self._register(module, source)
        finally:
            self._loading.pop()
        self.modules[name] = module
        if not self._loading:
            self._finish()
        return name

    def _import(self, imp, source):
        name = imp.module
        loc = (source, imp.pos, len("import ") + len(name))
        if name in self._loading:
            raise CyclicImport("import cycle: %s" % " -> ".join(self._loading + [name]), loc)
        if name in self.modules:
            return
        rel = name.replace("::", "/") + ".mrl"
        for root in self.search_paths:
            path = os.path.join(root, rel)
            if os.path.isfile(path):
                with open(path, encoding="utf-8") as fh:
                    src = fh.read()
                self._load(parse_module(src, rel), rel, expect=name)
                return
        raise LoadError("module %s not found on the search path" % name, loc)

    def _register(self, module, source):
        for d in module.decls:
            if isinstance(d, A.DataDecl):
                self.decls.declare_adt(d.name)
                for cname, flds in d.variants:
                    try:
                        self.decls.declare_ctor(d.name, cname, list(flds))
                    except DuplicateDeclaration as e:
                        e.loc = (source, d.pos, 4)
                        raise
                self._pending.append(("data", d, source))
            elif isinstance(d, A.SyntaxDecl):
                self.syntax_defs.append(d.definition)
                self.decls.declare_nonterminal(d.definition.name)
                self._grammar = None
            elif isinstance(d, A.FunDecl):
                self._add_function(d, source)
            elif isinstance(d, A.VarDecl):
                self._pending.append(("var", d, source))

    def _add_function(self, d, source):
        params = P.TuplePat(tuple(d.params)) if d.params else None
        alts = self.functions.setdefault((d.name, len(d.params)), [])
        for a in alts:
            if a.params == params and a.default == d.default and a.decl.body == d.body:
                raise DuplicateDeclaration("function %s/%d declared twice" % (d.name, len(d.params)),
                                           (source, d.pos, len(d.name)))
        alt = Alternative(d, source, params)
        alts.append(alt)
        self._order_cache.pop((d.name, len(d.params)), None)
        self._pending.append(("fun", alt, source))

    def _finish(self):
        pending, self._pending = self._pending, []
        if self.syntax_defs:
            self.grammar()
        for kind, d, source in pending:
            try:
                if kind == "data":
                    for _, flds in d.variants:
                        for t, _ in flds:
                            self.decls.check(t)
                elif kind == "fun":
                    self._check_function(d)
            except MrlError as e:
                if e.loc is None:
                    pos = d.decl.pos if kind == "fun" else d.pos
                    e.loc = (source, pos, 1)
                raise
        for kind, d, source in pending:
            if kind == "var":
                self.source = source
                env = Env([self.globals])
                t = self.resolve(d.type)
                v = self.eval(d.init, env)
                if not T.instance_of(v, t, self.decls):
                    raise MrlTypeError("global %s: %s is not a %s" % (d.name, V.render(v), T.type_str(t)),
                                       (source, d.pos, len(d.name)))
                self.globals[d.name] = v
                self.globals[("type", d.name)] = t

    def _check_function(self, alt):
        d = alt.decl
        alt.ret = self.resolve(d.ret)
        for p in d.params:
            P.check_pattern(p, self.decls)
        for n in _walk(d.body):
            if isinstance(n, (A.Match, A.Generator)):
                P.check_pattern(n.pattern, self.decls)
            elif isinstance(n, (A.Case, A.Catch)) and n.pattern is not None:
                P.check_pattern(n.pattern, self.decls)
            elif isinstance(n, (A.Decl, A.TypedName, A.ReifiedType)):
                self.resolve(n.type)
        if not alt.default:
            key = (d.name, len(d.params))
            for other in self.functions[key]:
                if other is alt or other.default:
                    continue
                if alt.params is None or not P.matches_non_overlapping(alt.params, other.params):
                    msg = "alternatives of %s/%d may overlap (%s, line offsets %d and %d)" % (
                        d.name, len(d.params), alt.source, other.decl.pos, d.pos)
                    self.warnings.append(msg)
                    warnings.warn(msg, OverlapWarning, stacklevel=2)
                    break

    def outer_hit(self, name):
        key = (self.source, name)
        if key not in self._shadowed:
            self._shadowed.add(key)
            msg = "%s: pattern variable %s is already bound and matches by equality" % (self.source, name)
            self.warnings.append(msg)
            warnings.warn(msg, ShadowWarning, stacklevel=2)

    def grammar(self):
        if self._grammar is None:
            if not self.syntax_defs:
                raise UnknownSymbol("no syntax definitions are loaded")
            self._grammar = compile_grammar(self.syntax_defs)
        return self._grammar

    def resolve(self, t):
        r = self._type_cache.get(t)
        if r is None:
            r = self._type_cache[t] = self.decls.resolve(t)
        return r

    # --- calling

    def call(self, name, *args):
        """Call function ``name`` with already-built values."""
        try:
            return self.call_function(name, list(args))
        except FailSignal:
            raise FailOutsideBacktrackingScope("fail outside a backtracking scope") from None

    def alternatives(self, name, arity):
        order = self._order_cache.get((name, arity))
        if order is None:
            alts = self.functions.get((name, arity), [])
            order = [a for a in alts if not a.default] + [a for a in alts if a.default]
            self._order_cache[(name, arity)] = order
        return order

    def call_function(self, name, args):
        alts = self.alternatives(name, len(args))
        if not alts:
            if any(n == name for n, _ in self.functions):
                raise NoApplicableAlternative("%s has no alternative taking %d argument(s)" % (name, len(args)))
            raise UndefinedName("undefined function %s" % name)
        argv = V.Tuple(args) if args else None
        saved_source = self.source
        try:
            for alt in alts:
                binds = P.match_all(alt.params, argv) if argv is not None else ({},)
                for b in binds:
                    env = Env([self.globals, dict(b)])
                    self.source = alt.source
                    try:
                        result = self._run_body(alt, env)
                    except FailSignal:
                        continue
                    return self._check_return(alt, result)
        finally:
            self.source = saved_source
        raise NoApplicableAlternative("no alternative of %s matches (%s)" % (
            name, ", ".join(V.render(a) for a in args)))

    def _run_body(self, alt, env):
        body = alt.decl.body
        if isinstance(body, A.Stmt):
            try:
                self.exec(body, env)
            except ReturnSignal as r:
                return r.value
            except InsertSignal:
                raise InsertOutsideVisit("insert outside a visit", (alt.source, alt.decl.pos, 1)) from None
            except (BreakSignal, ContinueSignal):
                raise MrlError("break/continue outside a loop", (alt.source, alt.decl.pos, 1)) from None
            return None
        try:
            return self.eval(body, env)
        except MrlError as e:
            if e.loc is None:
                e.loc = (alt.source, max(getattr(body, "pos", alt.decl.pos), 0), 1)
            raise

    def _check_return(self, alt, v):
        ret = alt.ret if alt.ret is not None else self.resolve(alt.decl.ret)
        d = alt.decl
        if isinstance(ret, T.VoidT):
            if v is not None:
                raise ReturnTypeError("void function %s returned %s" % (d.name, V.render(v)),
                                      (alt.source, d.pos, len(d.name)))
            return None
        if v is None:
            raise ReturnTypeError("%s ended without returning a %s" % (d.name, T.type_str(ret)),
                                  (alt.source, d.pos, len(d.name)))
        if not T.instance_of(v, ret, self.decls):
            raise ReturnTypeError("%s returned %s, which is not a %s" % (d.name, V.render(v), T.type_str(ret)),
                                  (alt.source, d.pos, len(d.name)))
        return v

    # --- statements

    def can_fail(self, node):
        r = self._fail_cache.get(id(node))
        if r is None:
            r = any(isinstance(n, A.Fail) for n in _walk(node))
            self._fail_cache[id(node)] = (node, r)
            return r
        return r[1]

    def exec(self, s, env):
        try:
            _EXEC[type(s)](self, s, env)
        except MrlError as e:
            if e.loc is None:
                e.loc = (self.source, max(s.pos, 0), 1)
            raise

    def exec_expr(self, s, env):
        self.eval(s.expr, env)

    def exec_decl(self, s, env):
        t = self.resolve(s.type)
        frame = env.frames[-1]
        if s.init is not None:
            v = self.eval(s.init, env)
            if not T.instance_of(v, t, self.decls):
                raise MrlTypeError("cannot initialize %s %s with %s" % (T.type_str(t), s.name, V.render(v)))
            frame[s.name] = v
        else:
            frame.pop(s.name, None)
        frame[("type", s.name)] = t

    def exec_assign(self, s, env):
        if s.op == "=":
            if isinstance(s.target, A.IfDefined):
                self.assign_to(s.target.expr, self.eval(s.value, env), env)
            else:
                self.assign_to(s.target, self.eval(s.value, env), env)
            return
        op = _COMPOUND[s.op]
        target = s.target
        if isinstance(target, A.IfDefined):
            current = self.eval_ifdefined(target, env)
            target = target.expr
        else:
            current = self.eval(target, env)
        rhs = self.eval(s.value, env)
        self.assign_to(target, self.binop(op, current, rhs), env)

    def assign_to(self, target, value, env):
        if isinstance(target, A.Name):
            f = env.frame_of(target.name)
            if f is None:
                f = env.frames[-1]
            t = f.get(("type", target.name))
            if t is not None and not T.instance_of(value, t, self.decls):
                raise MrlTypeError("cannot assign %s to %s %s" % (V.render(value), T.type_str(t), target.name))
            f[target.name] = value
        elif isinstance(target, A.Subscript):
            container = self.eval(target.target, env)
            key = self.eval(target.index, env)
            self.assign_to(target.target, self.updated(container, key, value, target.target, env), env)
        elif isinstance(target, A.FieldAccess):
            node = self.eval(target.target, env)
            i, ft = self.field_slot(node, target.name)
            if ft is not None and not T.instance_of(value, ft, self.decls):
                raise MrlTypeError("field %s expects %s, got %s" % (target.name, T.type_str(ft), V.render(value)))
            args = list(node.args)
            args[i] = value
            self.assign_to(target.target, node.with_args(args), env)
        elif isinstance(target, A.TupleExpr):
            if value.kind != V.TUPLE or len(value.elems) != len(target.elems):
                raise MrlTypeError("cannot destructure %s into %d names" % (V.render(value), len(target.elems)))
            for t, v in zip(target.elems, value.elems):
                self.assign_to(t, v, env)
        else:
            raise MrlTypeError("cannot assign to this expression")

    def updated(self, container, key, value, target, env):
        kind = container.kind
        if kind == V.MAP:
            self.check_key(container, key, target, env)
            return container.updated(key, value)
        if kind == V.LIST:
            i = self.index_of(container.elems, key)
            elems = list(container.elems)
            elems[i] = value
            return V.List(elems)
        if kind == V.NODE:
            i = self.index_of(container.args, key)
            args = list(container.args)
            args[i] = value
            return container.with_args(args)
        raise MrlTypeError("cannot update %s by subscript" % V.render(container))

    def check_key(self, m, key, target, env):
        t = env.declared_type(target.name) if isinstance(target, A.Name) else None
        if isinstance(t, T.MapT):
            if not T.instance_of(key, t.key, self.decls):
                raise KeyTypeError("key %s is not a %s" % (V.render(key), T.type_str(t.key)))
        elif m.entries:
            kt = T.lub_all(T.type_of(k) for k in m.entries)
            if not isinstance(kt, T.ValueT) and isinstance(T.lub(kt, T.type_of(key)), T.ValueT):
                raise KeyTypeError("key %s does not fit keys of type %s" % (V.render(key), T.type_str(kt)))

    def exec_block(self, s, env):
        env.push()
        try:
            for st in s.stmts:
                self.exec(st, env)
        finally:
            env.pop()

    def exec_if(self, s, env):
        if not _has_match(s.cond):
            if self.truth(self.eval(s.cond, env)):
                self.exec(s.then, env)
            elif s.orelse is not None:
                self.exec(s.orelse, env)
            return
        may_fail = self.can_fail(s.then)
        env.push()
        try:
            for _ in self.cond_gen(s.cond, env):
                snap = env.snapshot() if may_fail else None
                try:
                    self.exec(s.then, env)
                    return
                except FailSignal:
                    if snap is None:
                        raise
                    env.restore(snap)
        finally:
            env.pop()
        if s.orelse is not None:
            self.exec(s.orelse, env)

    def exec_while(self, s, env):
        simple = not _has_match(s.cond)
        while True:
            if simple:
                if not self.truth(self.eval(s.cond, env)):
                    return
                try:
                    self.exec(s.body, env)
                except BreakSignal:
                    return
                except ContinueSignal:
                    pass
                continue
            env.push()
            try:
                gen = self.cond_gen(s.cond, env)
                if next(gen, _MISSING) is _MISSING:
                    return
                try:
                    self.exec(s.body, env)
                except BreakSignal:
                    return
                except ContinueSignal:
                    pass
                finally:
                    gen.close()
            finally:
                env.pop()

    def exec_for(self, s, env):
        may_fail = self.can_fail(s.body)
        env.push()
        try:
            for _ in self.cond_gen(_conj(s.conds), env):
                snap = env.snapshot() if may_fail else None
                try:
                    self.exec(s.body, env)
                except ContinueSignal:
                    pass
                except BreakSignal:
                    return
                except FailSignal:
                    if snap is None:
                        raise
                    env.restore(snap)
        finally:
            env.pop()

    def exec_switch(self, s, env):
        subject = self.eval(s.subject, env)
        for case in s.cases:
            if case.pattern is None:
                self.exec(case.body, env)
                return
            may_fail = self.can_fail(case.body)
            for b in P.match_all(case.pattern, subject, env, on_outer=self.outer_hit):
                env.push(dict(b))
                try:
                    snap = env.snapshot() if may_fail else None
                    try:
                        self.exec(case.body, env)
                        return
                    except FailSignal:
                        if snap is None:
                            raise
                        env.restore(snap)
                finally:
                    env.pop()

    def exec_solve(self, s, env):
        for n in s.names:
            if env.frame_of(n) is None or env.get(n, _MISSING) is _MISSING:
                raise UndefinedName("solve variable %s is not bound" % n)
        bound = self.solve_budget
        if s.bound is not None:
            b = self.eval(s.bound, env)
            if b.kind != V.INT or b.value < 1:
                raise MrlTypeError("solve bound must be a positive int")
            bound = b.value
        iterations = 0
        while True:
            before = [env.get(n) for n in s.names]
            self.exec(s.body, env)
            iterations += 1
            after = [env.get(n) for n in s.names]
            if after == before:
                return
            if iterations >= bound:
                raise FixpointBudgetExceeded(
                    "solve did not converge within %d iterations" % bound, iterations)

    def exec_return(self, s, env):
        raise ReturnSignal(None if s.expr is None else self.eval(s.expr, env))

    def exec_fail(self, s, env):
        raise FailSignal()

    def exec_break(self, s, env):
        raise BreakSignal()

    def exec_continue(self, s, env):
        raise ContinueSignal()

    def exec_insert(self, s, env):
        raise InsertSignal(self.eval(s.expr, env))

    def exec_throw(self, s, env):
        raise Thrown(self.eval(s.expr, env), (self.source, max(s.pos, 0), 5))

    def exec_try(self, s, env):
        try:
            try:
                self.exec(s.body, env)
            except Thrown as t:
                for c in s.catches:
                    if c.pattern is None:
                        self.exec(c.body, env)
                        return
                    for b in P.match_all(c.pattern, t.value, env, on_outer=self.outer_hit):
                        env.push(dict(b))
                        try:
                            self.exec(c.body, env)
                        finally:
                            env.pop()
                        return
                raise
        finally:
            if s.finally_ is not None:
                self.exec(s.finally_, env)

    # --- conditions

    def truth(self, v):
        if v is None or v.kind != V.BOOL:
            raise ConditionTypeError("condition is not a bool: %s" % ("void" if v is None else V.render(v)))
        return v.value

    def cond_gen(self, e, env):
        """Yield once per way ``e`` holds, with its bindings installed."""
        t = type(e)
        if t is A.Match:
            subject = self.eval(e.subject, env)
            if e.negated:
                for _ in P.match_all(e.pattern, subject, env, on_outer=self.outer_hit):
                    return
                yield
                return
            yield from self.bind(e.pattern, subject, env)
        elif t is A.Generator:
            subject = self.eval(e.subject, env)
            if isinstance(e.pattern, P.Deep):
                yield from self.bind(e.pattern, subject, env)
                return
            for elem in self.enumerate(subject):
                yield from self.bind(e.pattern, elem, env)
        elif t is A.Binary and e.op == "&&":
            for _ in self.cond_gen(e.left, env):
                yield from self.cond_gen(e.right, env)
        elif t is A.Binary and e.op == "||":
            yield from self.cond_gen(e.left, env)
            yield from self.cond_gen(e.right, env)
        elif t is A.Unary and e.op == "!" and _has_match(e.operand):
            env.push()
            try:
                for _ in self.cond_gen(e.operand, env):
                    return
            finally:
                env.pop()
            yield
        else:
            if self.truth(self.eval(e, env)):
                yield

    def bind(self, pattern, value, env):
        frame = env.frames[-1]
        for b in P.match_all(pattern, value, env, on_outer=self.outer_hit):
            saved = {k: frame.get(k, _MISSING) for k in b}
            frame.update(b)
            try:
                yield
            finally:
                for k, old in saved.items():
                    if old is _MISSING:
                        frame.pop(k, None)
                    else:
                        frame[k] = old

    def enumerate(self, v):
        kind = v.kind
        if kind == V.LIST:
            return v.elems
        if kind == V.SET:
            return v.ordered()
        if kind == V.MAP:
            return v.ordered_keys()
        if kind == V.TUPLE:
            return v.elems
        return P.subterms(v)

    def holds(self, e, env):
        env.push()
        try:
            for _ in self.cond_gen(e, env):
                return True
            return False
        finally:
            env.pop()

    # --- expressions

    def eval(self, e, env):
        return _EVAL[type(e)](self, e, env)

    def eval_const(self, e, env):
        return e.value

    def eval_name(self, e, env):
        v = env.get(e.name, _MISSING)
        if v is not _MISSING:
            return v
        if any(n == e.name for n, _ in self.functions) or e.name in self.builtins:
            return V.Closure(e.name, self)
        raise UndefinedName("undefined name %s" % e.name, (self.source, max(e.pos, 0), len(e.name)))

    def eval_typed_name(self, e, env):
        raise MrlTypeError("declaration %s %s used as an expression" % (T.type_str(e.type), e.name))

    def eval_list(self, e, env):
        return V.List(self.elements(e.elems, env))

    def eval_set(self, e, env):
        return V.Set(self.elements(e.elems, env))

    def elements(self, elems, env):
        out = []
        for el in elems:
            if isinstance(el, A.Splice):
                v = self.eval(el.inner, env)
                if v.kind in (V.LIST, V.SET):
                    out.extend(v.elems if v.kind == V.LIST else v.ordered())
                else:
                    out.append(v)
            else:
                out.append(self.eval(el, env))
        return out

    def eval_map(self, e, env):
        d = {}
        for k, x in e.pairs:
            d[self.eval(k, env)] = self.eval(x, env)
        return V.Map(d)

    def eval_tuple(self, e, env):
        return V.Tuple(self.eval(x, env) for x in e.elems)

    def eval_splice(self, e, env):
        raise MrlTypeError("splice outside a list or set")

    def eval_call(self, e, env):
        args = [self.eval(a, env) for a in e.args]
        callee = e.callee
        if isinstance(callee, A.Name):
            name = callee.name
            v = env.get(name, _MISSING)
            if v is not _MISSING:
                if v.kind != V.CLOSURE:
                    raise MrlTypeError("%s is not a function" % name)
                return self.call_named(v.name, args, e)
            return self.call_named(name, args, e)
        f = self.eval(callee, env)
        if f.kind != V.CLOSURE:
            raise MrlTypeError("%s is not a function" % V.render(f))
        return self.call_named(f.name, args, e)

    def call_named(self, name, args, e):
        if (name, len(args)) in self.functions:
            return self.call_function(name, args)
        if self.decls.constructors(name, len(args)):
            node = self.decls.construct(name, args)
            if node is None:
                raise MrlTypeError("arguments (%s) do not fit constructor %s" % (
                    ", ".join(V.render(a) for a in args),
                    " or ".join(repr(c) for c in self.decls.constructors(name, len(args)))))
            return node
        b = self.builtins.get(name)
        if b is not None:
            return b(self, args)
        if any(n == name for n, _ in self.functions):
            raise NoApplicableAlternative("%s has no alternative taking %d argument(s)" % (name, len(args)))
        if self.decls.constructors(name):
            raise MrlTypeError("constructor %s does not take %d argument(s)" % (name, len(args)))
        raise UndefinedName("undefined function or constructor %s" % name,
                            (self.source, max(e.pos, 0), len(name)))

    def eval_field(self, e, env):
        v = self.eval(e.target, env)
        if v.kind == V.LOC and e.name in ("uri", "offset", "length"):
            x = getattr(v, e.name)
            return V.Str(x) if e.name == "uri" else V.Int(x)
        i, _ = self.field_slot(v, e.name)
        return v.args[i]

    def field_slot(self, v, name):
        if v.kind == V.NODE:
            c = self.decls.lookup(v.adt, v.name, len(v.args))
            if c is not None and name in c.field_names:
                i = c.field_names.index(name)
                return i, c.field_types[i]
        raise MrlTypeError("%s has no field %s" % (V.render(v), name))

    def eval_subscript(self, e, env):
        c = self.eval(e.target, env)
        k = self.eval(e.index, env)
        kind = c.kind
        if kind == V.MAP:
            self.check_key(c, k, e.target, env)
            v = c.entries.get(k)
            if v is None:
                raise Thrown(V.Node("RuntimeException", "noSuchKey", (k,)))
            return v
        if kind in (V.LIST, V.TUPLE):
            return c.elems[self.index_of(c.elems, k)]
        if kind == V.NODE:
            return c.args[self.index_of(c.args, k)]
        if kind == V.STR:
            return V.Str(c.value[self.index_of(c.value, k)])
        if kind == V.SET:
            return V.rel_image(c, k)
        raise MrlTypeError("cannot subscript %s" % V.render(c))

    def index_of(self, seq, k):
        if k.kind != V.INT:
            raise MrlTypeError("index must be an int, got %s" % V.render(k))
        i = k.value
        n = len(seq)
        if not -n <= i < n:
            raise Thrown(V.Node("RuntimeException", "indexOutOfBounds", (k,)))
        return i % n

    def eval_closure(self, e, env):
        r = self.eval(e.target, env)
        try:
            if e.reflexive:
                return V.reflexive_transitive_closure(r)
            return V.transitive_closure(r)
        except MrlError as err:
            raise MrlTypeError(err.message) from None

    def eval_binary(self, e, env):
        op = e.op
        if op == "&&" or op == "||":
            if _has_match(e):
                return V.boolean(self.holds(e, env))
            left = self.truth(self.eval(e.left, env))
            if op == "&&" and not left:
                return V.FALSE
            if op == "||" and left:
                return V.TRUE
            return V.boolean(self.truth(self.eval(e.right, env)))
        return self.binop(op, self.eval(e.left, env), self.eval(e.right, env))

    def binop(self, op, a, b):
        f = _BINOPS.get(op)
        r = f(a, b) if f is not None else None
        if r is None:
            raise MrlTypeError("operator %s is not defined on %s and %s" % (
                op, T.type_str(T.type_of(a)), T.type_str(T.type_of(b))))
        return r

    def eval_unary(self, e, env):
        if e.op == "!":
            if _has_match(e.operand):
                return V.boolean(not self.holds(e.operand, env))
            return V.boolean(not self.truth(self.eval(e.operand, env)))
        v = self.eval(e.operand, env)
        if e.op == "-" and v.kind == V.INT:
            return V.Int(-v.value)
        raise MrlTypeError("operator %s is not defined on %s" % (e.op, T.type_str(T.type_of(v))))

    def eval_deep(self, e, env):
        raise MrlTypeError("deep pattern outside a match")

    def eval_match(self, e, env):
        return V.boolean(self.holds(e, env))

    def eval_ifdefined(self, e, env):
        try:
            return self.eval(e.expr, env)
        except Thrown as t:
            v = t.value
            if v.kind == V.NODE and v.adt == "RuntimeException" and v.name in ("noSuchKey", "indexOutOfBounds"):
                return self.eval(e.default, env)
            raise

    def eval_comprehension(self, e, env):
        env.push()
        try:
            if e.kind == "map":
                d = {}
                for _ in self.cond_gen(_conj(e.conds), env):
                    d[self.eval(e.results[0], env)] = self.eval(e.results[1], env)
                return V.Map(d)
            out = []
            for _ in self.cond_gen(_conj(e.conds), env):
                out.extend(self.elements(e.results, env))
        finally:
            env.pop()
        return V.List(out) if e.kind == "list" else V.Set(out)

    def eval_template(self, e, env):
        out = _TemplateOut()
        self.render_parts(e.parts, env, out)
        return V.Str("".join(out.chunks))

    def render_parts(self, parts, env, out):
        for p in parts:
            if isinstance(p, str):
                out.write(p)
            elif isinstance(p, A.TInterp):
                text = V.to_text(self.eval(p.expr, env))
                if "\n" in text:
                    text = text.replace("\n", "\n" + " " * out.col)
                out.write(text)
            elif isinstance(p, A.TFor):
                env.push()
                try:
                    for _ in self.cond_gen(_conj(p.conds), env):
                        self.render_parts(p.body, env, out)
                finally:
                    env.pop()
            else:
                env.push()
                try:
                    for _ in self.cond_gen(p.cond, env):
                        self.render_parts(p.then, env, out)
                        break
                    else:
                        self.render_parts(p.orelse, env, out)
                finally:
                    env.pop()

    def eval_reified(self, e, env):
        t = e.type
        try:
            t = self.resolve(t)
        except MrlError:
            pass
        text = T.type_str(t)
        self.reified[text] = t
        return V.Node("#Type", "type", (V.Str(text),))

    # --- visit

    def eval_visit(self, e, env):
        subject = self.eval(e.subject, env)
        if e.strategy in ("bottom-up", "top-down"):
            return self.traverse(subject, e.cases, env, e.strategy == "top-down")[0]
        top = e.strategy == "outermost"
        v = subject
        passes = 0
        while True:
            if passes >= self.visit_budget:
                raise FixpointBudgetExceeded(
                    "%s visit did not stabilize within %d passes" % (e.strategy, self.visit_budget), passes)
            v, changed = self.traverse(v, e.cases, env, top)
            passes += 1
            if not changed:
                return v

    def traverse(self, v, cases, env, top_down):
        if top_down:
            r = self.apply_cases(v, cases, env)
            if r is not None and r != v:
                return r, True
            return self.traverse_children(v, cases, env, top_down)
        nv, changed = self.traverse_children(v, cases, env, top_down)
        r = self.apply_cases(nv, cases, env)
        if r is not None and r != nv:
            return r, True
        return nv, changed

    def traverse_children(self, v, cases, env, top_down):
        kind = v.kind
        if kind == V.NODE:
            kids = v.args
        elif kind in (V.LIST, V.TUPLE):
            kids = v.elems
        elif kind == V.SET:
            kids = v.ordered()
        elif kind == V.MAP:
            kids = [x for kv in v.items() for x in kv]
        else:
            return v, False
        new = []
        changed = False
        for k in kids:
            nk, c = self.traverse(k, cases, env, top_down)
            new.append(nk)
            changed = changed or c
        if not changed:
            return v, False
        if kind == V.NODE:
            c = self.decls.lookup(v.adt, v.name, len(new))
            if c is not None:
                for old, x, ft in zip(v.args, new, c.field_types):
                    if x is not old and not T.instance_of(x, ft, self.decls):
                        raise ReplacementTypeError("replacement %s does not fit field of type %s in %s" % (
                            V.render(x), T.type_str(ft), v.name))
            return V.Node(v.adt, v.name, new), True
        if kind == V.LIST:
            return V.List(new), True
        if kind == V.TUPLE:
            return V.Tuple(new), True
        if kind == V.SET:
            return V.Set(new), True
        return V.Map(zip(new[0::2], new[1::2])), True

    def apply_cases(self, v, cases, env):
        """Run the first matching case; return its replacement or None."""
        for case in cases:
            if case.pattern is None:
                binds = ({},)
            else:
                binds = P.match_all(case.pattern, v, env, on_outer=self.outer_hit)
            for b in binds:
                env.push(dict(b))
                try:
                    if case.replacement is not None:
                        return self.eval(case.replacement, env)
                    snap = env.snapshot() if self.can_fail(case.body) else None
                    try:
                        self.exec(case.body, env)
                    except InsertSignal as ins:
                        return ins.value
                    except FailSignal:
                        if snap is None:
                            raise
                        env.restore(snap)
                        continue
                    return None
                finally:
                    env.pop()
        return None

    # --- interactive use

    def eval_source(self, src, source="<repl>", env=None):
        """Run REPL-style input; returns the value of the last expression
        statement (or None)."""
        items = parse_repl(src, source)
        env = env or Env([self.globals])
        result = None
        decl_module = A.Module(None, [], [], source)
        for item in items:
            result = None
            if isinstance(item, A.Import):
                self._import(item, source)
                self._finish()
            elif isinstance(item, (A.DataDecl, A.SyntaxDecl, A.FunDecl, A.VarDecl)):
                decl_module.decls = [item]
                self._register(decl_module, source)
                self._finish()
            else:
                self.source = source
                try:
                    if isinstance(item, A.ExprStmt):
                        result = self.eval(item.expr, env)
                    else:
                        self.exec(item, env)
                except FailSignal:
                    raise FailOutsideBacktrackingScope("fail outside a backtracking scope") from None
                except InsertSignal:
                    raise InsertOutsideVisit("insert outside a visit") from None
                except ReturnSignal as r:
                    result = r.value
        return result


class _TemplateOut:
    __slots__ = ("chunks", "col")

    def __init__(self):
        self.chunks = []
        self.col = 0

    def write(self, s):
        if not s:
            return
        self.chunks.append(s)
        i = s.rfind("\n")
        self.col = self.col + len(s) if i < 0 else len(s) - i - 1


# --- operators ----------------------------------------------------------------

def _trunc_div(a, b):
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def _div_zero():
    raise Thrown(V.Node("RuntimeException", "divByZero", ()))


def _add(a, b):
    ka, kb = a.kind, b.kind
    if ka == V.INT and kb == V.INT:
        return V.Int(a.value + b.value)
    if ka == V.STR and kb == V.STR:
        return V.Str(a.value + b.value)
    if ka == V.LIST:
        return V.List(a.elems + (b.elems if kb == V.LIST else (b,)))
    if ka == V.SET:
        return V.set_union(a, b) if kb == V.SET else V.Set(a.elems | {b})
    if ka == V.MAP and kb == V.MAP:
        d = dict(a.entries)
        d.update(b.entries)
        return V.Map(d)
    if ka == V.TUPLE and kb == V.TUPLE:
        return V.Tuple(a.elems + b.elems)
    if kb == V.LIST:
        return V.List((a,) + b.elems)
    return None


def _sub(a, b):
    ka, kb = a.kind, b.kind
    if ka == V.INT and kb == V.INT:
        return V.Int(a.value - b.value)
    if ka == V.SET:
        return V.set_diff(a, b) if kb == V.SET else V.Set(a.elems - {b})
    if ka == V.LIST:
        drop = set(b.elems) if kb == V.LIST else {b}
        return V.List(x for x in a.elems if x not in drop)
    if ka == V.MAP and kb == V.MAP:
        return V.Map((k, x) for k, x in a.entries.items() if k not in b.entries)
    return None


def _mul(a, b):
    if a.kind == V.INT and b.kind == V.INT:
        return V.Int(a.value * b.value)
    if a.kind == V.SET and b.kind == V.SET:
        return V.Set(V.Tuple((x, y)) for x in a.elems for y in b.elems)
    return None


def _div(a, b):
    if a.kind == V.INT and b.kind == V.INT:
        if b.value == 0:
            _div_zero()
        return V.Int(_trunc_div(a.value, b.value))
    return None


def _mod(a, b):
    if a.kind == V.INT and b.kind == V.INT:
        if b.value == 0:
            _div_zero()
        return V.Int(a.value - b.value * _trunc_div(a.value, b.value))
    return None


def _inter(a, b):
    if a.kind == V.SET and b.kind == V.SET:
        return V.set_intersect(a, b)
    if a.kind == V.MAP and b.kind == V.MAP:
        return V.Map((k, x) for k, x in a.entries.items() if b.entries.get(k) == x)
    return None


def _compose(a, b):
    if a.kind == V.SET and b.kind == V.SET:
        try:
            return V.compose(a, b)
        except MrlError:
            return None
    if a.kind == V.MAP and b.kind == V.MAP:
        return V.Map((k, b.entries[x]) for k, x in a.entries.items() if x in b.entries)
    return None


def _less(a, b, strict):
    ka = a.kind
    if ka != b.kind:
        return None
    if ka == V.SET:
        return V.boolean(a.elems < b.elems if strict else a.elems <= b.elems)
    if ka == V.MAP:
        sub = all(b.entries.get(k) == x for k, x in a.entries.items())
        return V.boolean(sub and (not strict or len(a) < len(b)))
    if ka == V.BOOL or ka == V.INT or ka == V.STR:
        return V.boolean(a.value < b.value if strict else a.value <= b.value)
    ak, bk = V.order_key(a), V.order_key(b)
    return V.boolean(ak < bk if strict else ak <= bk)


def _member(a, b):
    if b.kind == V.LIST:
        return V.boolean(a in b.elems)
    if b.kind == V.SET:
        return V.boolean(a in b.elems)
    if b.kind == V.MAP:
        return V.boolean(a in b.entries)
    return None


def _flip(r):
    return None if r is None else V.boolean(not r.value)


_BINOPS = {
    "+": _add, "-": _sub, "*": _mul, "/": _div, "%": _mod, "&": _inter, "o": _compose,
    "==": lambda a, b: V.boolean(a == b),
    "!=": lambda a, b: V.boolean(a != b),
    "<": lambda a, b: _less(a, b, True),
    "<=": lambda a, b: _less(a, b, False),
    ">": lambda a, b: _less(b, a, True),
    ">=": lambda a, b: _less(b, a, False),
    "in": _member,
    "notin": lambda a, b: _flip(_member(a, b)),
}

_EXEC = {
    A.ExprStmt: Interpreter.exec_expr,
    A.Decl: Interpreter.exec_decl,
    A.Assign: Interpreter.exec_assign,
    A.Block: Interpreter.exec_block,
    A.If: Interpreter.exec_if,
    A.While: Interpreter.exec_while,
    A.For: Interpreter.exec_for,
    A.Switch: Interpreter.exec_switch,
    A.Solve: Interpreter.exec_solve,
    A.Return: Interpreter.exec_return,
    A.Fail: Interpreter.exec_fail,
    A.Break: Interpreter.exec_break,
    A.Continue: Interpreter.exec_continue,
    A.Insert: Interpreter.exec_insert,
    A.Throw: Interpreter.exec_throw,
    A.Try: Interpreter.exec_try,
}

_EVAL = {
    A.Const: Interpreter.eval_const,
    A.Name: Interpreter.eval_name,
    A.TypedName: Interpreter.eval_typed_name,
    A.ListExpr: Interpreter.eval_list,
    A.SetExpr: Interpreter.eval_set,
    A.MapExpr: Interpreter.eval_map,
    A.TupleExpr: Interpreter.eval_tuple,
    A.Splice: Interpreter.eval_splice,
    A.Call: Interpreter.eval_call,
    A.FieldAccess: Interpreter.eval_field,
    A.Subscript: Interpreter.eval_subscript,
    A.Closure: Interpreter.eval_closure,
    A.Binary: Interpreter.eval_binary,
    A.Unary: Interpreter.eval_unary,
    A.DeepExpr: Interpreter.eval_deep,
    A.Match: Interpreter.eval_match,
    A.Generator: Interpreter.eval_match,
    A.IfDefined: Interpreter.eval_ifdefined,
    A.Comprehension: Interpreter.eval_comprehension,
    A.Template: Interpreter.eval_template,
    A.Visit: Interpreter.eval_visit,
    A.ReifiedType: Interpreter.eval_reified,
}

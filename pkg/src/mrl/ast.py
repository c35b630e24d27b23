"""Abstract syntax of mrl modules, statements and expressions."""

from dataclasses import dataclass, field
from typing import Optional

from .types import TypeExpr


def _pos():
    return field(default=-1, compare=False, repr=False)


# --- expressions ----------------------------------------------------------------

class Expr:
    pass


@dataclass
class Const(Expr):
    value: object
    pos: int = _pos()


@dataclass
class Name(Expr):
    name: str
    pos: int = _pos()


@dataclass
class TypedName(Expr):
    """``T x``: a declaration in statements, a typed variable in patterns."""
    type: TypeExpr
    name: str
    pos: int = _pos()


@dataclass
class ListExpr(Expr):
    elems: list
    pos: int = _pos()


@dataclass
class SetExpr(Expr):
    elems: list
    pos: int = _pos()


@dataclass
class MapExpr(Expr):
    pairs: list
    pos: int = _pos()


@dataclass
class TupleExpr(Expr):
    elems: list
    pos: int = _pos()


@dataclass
class Splice(Expr):
    """``*x`` or ``*T x`` inside list and set patterns."""
    inner: Expr
    pos: int = _pos()


@dataclass
class Call(Expr):
    callee: Expr
    args: list
    pos: int = _pos()


@dataclass
class FieldAccess(Expr):
    target: Expr
    name: str
    pos: int = _pos()


@dataclass
class Subscript(Expr):
    target: Expr
    index: Expr
    pos: int = _pos()


@dataclass
class Closure(Expr):
    """Postfix ``r+`` / ``r*``."""
    target: Expr
    reflexive: bool
    pos: int = _pos()


@dataclass
class Binary(Expr):
    op: str
    left: Expr
    right: Expr
    pos: int = _pos()


@dataclass
class Unary(Expr):
    op: str
    operand: Expr
    pos: int = _pos()


@dataclass
class DeepExpr(Expr):
    inner: Expr
    pos: int = _pos()


@dataclass
class Match(Expr):
    """``p := e`` (negated for ``!:=``)."""
    pattern: object
    subject: Expr
    negated: bool = False
    pos: int = _pos()


@dataclass
class Generator(Expr):
    pattern: object
    subject: Expr
    pos: int = _pos()


@dataclass
class IfDefined(Expr):
    expr: Expr
    default: Expr
    pos: int = _pos()


@dataclass
class Comprehension(Expr):
    kind: str                # list | set | map
    results: list            # one expr, or [key, value] for maps
    conds: list
    pos: int = _pos()


@dataclass
class Template(Expr):
    parts: list              # str | TInterp | TFor | TIf
    pos: int = _pos()


@dataclass
class TInterp:
    expr: Expr


@dataclass
class TFor:
    conds: list
    body: list


@dataclass
class TIf:
    cond: Expr
    then: list
    orelse: list


@dataclass
class Visit(Expr):
    strategy: str
    subject: Expr
    cases: list
    pos: int = _pos()


@dataclass
class ReifiedType(Expr):
    type: TypeExpr
    pos: int = _pos()


# --- statements -------------------------------------------------------------------

class Stmt:
    pass


@dataclass
class ExprStmt(Stmt):
    expr: Expr
    pos: int = _pos()


@dataclass
class Assign(Stmt):
    target: Expr
    op: str
    value: Expr
    pos: int = _pos()


@dataclass
class Decl(Stmt):
    type: TypeExpr
    name: str
    init: Optional[Expr]
    pos: int = _pos()


@dataclass
class Block(Stmt):
    stmts: list
    pos: int = _pos()


@dataclass
class If(Stmt):
    cond: Expr
    then: Stmt
    orelse: Optional[Stmt]
    pos: int = _pos()


@dataclass
class While(Stmt):
    cond: Expr
    body: Stmt
    pos: int = _pos()


@dataclass
class For(Stmt):
    conds: list
    body: Stmt
    pos: int = _pos()


@dataclass
class Case:
    pattern: object          # Pattern, or None for default
    body: Optional[Stmt] = None
    replacement: Optional[Expr] = None
    pos: int = _pos()


@dataclass
class Switch(Stmt):
    subject: Expr
    cases: list
    pos: int = _pos()


@dataclass
class Solve(Stmt):
    names: list
    bound: Optional[Expr]
    body: Stmt
    pos: int = _pos()


@dataclass
class Return(Stmt):
    expr: Optional[Expr]
    pos: int = _pos()


@dataclass
class Fail(Stmt):
    pos: int = _pos()


@dataclass
class Break(Stmt):
    pos: int = _pos()


@dataclass
class Continue(Stmt):
    pos: int = _pos()


@dataclass
class Insert(Stmt):
    expr: Expr
    pos: int = _pos()


@dataclass
class Throw(Stmt):
    expr: Expr
    pos: int = _pos()


@dataclass
class Catch:
    pattern: object          # Pattern or None (catch-all)
    body: Stmt


@dataclass
class Try(Stmt):
    body: Stmt
    catches: list
    finally_: Optional[Stmt]
    pos: int = _pos()


# --- declarations -------------------------------------------------------------------

@dataclass
class DataDecl:
    name: str
    variants: list           # [(ctor name, [(TypeExpr, field name)])]
    pos: int = _pos()


@dataclass
class SyntaxDecl:
    definition: object       # grammar.SyntaxDef
    pos: int = _pos()


@dataclass
class FunDecl:
    name: str
    ret: TypeExpr
    params: list             # patterns
    body: object             # Stmt, or Expr for the ``= e;`` form
    default: bool = False
    public: bool = True
    pos: int = _pos()
    source: str = field(default="", compare=False, repr=False)


@dataclass
class VarDecl:
    type: TypeExpr
    name: str
    init: Expr
    pos: int = _pos()


@dataclass
class Import:
    module: str
    pos: int = _pos()


@dataclass
class Module:
    name: Optional[str]
    imports: list
    decls: list
    source: str = ""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Union


@dataclass(frozen=True)
class Span:
    path: str
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.path}:{self.line}:{self.col}"


@dataclass(frozen=True)
class Diagnostic:
    span: Span
    severity: str  # "error" | "warning"
    message: str

    def __str__(self) -> str:
        return f"{self.span}: {self.severity}: {self.message}"

    @property
    def is_error(self) -> bool:
        return self.severity == "error"


# -- boolean expressions over opaque atoms -----------------------------------

@dataclass(frozen=True)
class Atom:
    text: str


@dataclass(frozen=True)
class Not:
    operand: Expr


@dataclass(frozen=True)
class BinOp:
    op: str  # "and" | "or" | "implies"
    left: Expr
    right: Expr


Expr = Union[Atom, Not, BinOp]

_PREC = {"implies": 1, "or": 2, "and": 3}


def render(expr: Expr) -> str:
    """Canonical text of ``expr`` with only the parentheses precedence needs."""
    if isinstance(expr, Atom):
        return expr.text
    if isinstance(expr, Not):
        inner = render(expr.operand)
        if isinstance(expr.operand, BinOp):
            inner = f"({inner})"
        return f"not {inner}"
    p = _PREC[expr.op]
    left, right = render(expr.left), render(expr.right)
    if isinstance(expr.left, BinOp) and (_PREC[expr.left.op] < p or (p == 1 and _PREC[expr.left.op] == 1)):
        left = f"({left})"
    if isinstance(expr.right, BinOp) and _PREC[expr.right.op] < p:
        right = f"({right})"
    return f"{left} {expr.op} {right}"


def disjuncts(expr: Expr) -> list[Expr]:
    """Top-level operands of an ``or`` chain (the expression itself otherwise)."""
    if isinstance(expr, BinOp) and expr.op == "or":
        return disjuncts(expr.left) + disjuncts(expr.right)
    return [expr]


def collapse_ws(text: str) -> str:
    return re.sub(r"\s+", " ", text).strip()


@dataclass(frozen=True)
class ContractClause:
    tag: str | None
    expr: Expr
    span: Span | None = field(default=None, compare=False)

    @property
    def text(self) -> str:
        return render(self.expr)

    @property
    def normalized(self) -> str:
        """Comparison key: tag stripped, whitespace collapsed."""
        return collapse_ws(render(self.expr))

    def __str__(self) -> str:
        return f"{self.tag}: {self.text}" if self.tag else self.text


# -- declarations ------------------------------------------------------------

@dataclass(frozen=True)
class TypeRef:
    name: str
    args: tuple[TypeRef, ...] = ()

    def names(self) -> list[str]:
        out = [self.name]
        for a in self.args:
            out.extend(a.names())
        return out

    def __str__(self) -> str:
        if not self.args:
            return self.name
        return f"{self.name} [{', '.join(map(str, self.args))}]"


@dataclass
class Annotation:
    relation: str
    target: str
    kind: str | None = None
    span: Span | None = None


@dataclass
class FeatureDecl:
    name: str
    parameters: list[tuple[str, TypeRef | None]] = field(default_factory=list)
    result_type: TypeRef | None = None
    is_attribute: bool = False
    deferred: bool = False
    require_clauses: list[ContractClause] = field(default_factory=list)
    ensure_clauses: list[ContractClause] = field(default_factory=list)
    require_else: bool = False
    ensure_then: bool = False
    body_loop_exit: ContractClause | None = None
    annotations: list[Annotation] = field(default_factory=list)
    kind_note: str | None = None
    span: Span | None = None

    def type_refs(self) -> list[TypeRef]:
        out = [t for _, t in self.parameters if t is not None]
        if self.result_type is not None:
            out.append(self.result_type)
        return out


@dataclass
class ClassDecl:
    name: str
    deferred: bool = False
    parents: list[str] = field(default_factory=list)
    features: list[FeatureDecl] = field(default_factory=list)
    invariant_clauses: list[ContractClause] = field(default_factory=list)
    annotations: list[Annotation] = field(default_factory=list)
    kind_note: str | None = None
    span: Span | None = None

    @property
    def path(self) -> str:
        return self.span.path if self.span else ""

    def feature(self, name: str) -> FeatureDecl | None:
        for f in self.features:
            if f.name == name:
                return f
        return None

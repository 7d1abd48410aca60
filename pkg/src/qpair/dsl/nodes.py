"""Syntax tree for scenario files.  Spans are excluded from equality."""

from __future__ import annotations

from dataclasses import dataclass, field

from .lexer import Span

NO_SPAN = Span(0, 0, 0, 0)


def _span():
    return field(default=NO_SPAN, compare=False, repr=False)


# -- expressions -----------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: int
    span: Span = _span()


@dataclass(frozen=True)
class Ref:
    name: str
    indices: tuple = ()  # ints or index-variable names
    derivs: tuple = ()
    span: Span = _span()


@dataclass(frozen=True)
class Neg:
    operand: object
    span: Span = _span()


@dataclass(frozen=True)
class BinOp:
    op: str  # + - * /
    left: object
    right: object
    span: Span = _span()


@dataclass(frozen=True)
class Pow:
    base: object
    exponent: int
    span: Span = _span()


@dataclass(frozen=True)
class Binder:
    var: str
    lo: int | None = None
    hi: int | None = None


@dataclass(frozen=True)
class Sum:
    binders: tuple[Binder, ...]
    body: object
    span: Span = _span()


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple
    span: Span = _span()


CALLS = ("bracket", "derived", "twist", "transport", "restrict")


# -- statements ------------------------------------------------------------------

@dataclass(frozen=True)
class CoordDecl:
    name: str
    lo: int | None
    hi: int | None
    degree: int
    span: Span = _span()


@dataclass(frozen=True)
class SymbolDecl:
    name: str
    arity: int
    symmetry: str | None = None  # "sym" or "antisym"
    const: bool = False
    inverse: str | None = None
    span: Span = _span()


@dataclass(frozen=True)
class IndexDecl:
    names: tuple[str, ...]
    lo: int
    hi: int
    span: Span = _span()


@dataclass(frozen=True)
class SymplecticDecl:
    degree: int
    span: Span = _span()


@dataclass(frozen=True)
class PairDecl:
    first: str
    second: str
    sign: int = 1
    span: Span = _span()


@dataclass(frozen=True)
class FunctionDecl:
    kind: str  # "theta" or "alpha"
    expr: object
    span: Span = _span()


@dataclass(frozen=True)
class LagrangianDecl:
    names: tuple[str, ...]
    span: Span = _span()


@dataclass(frozen=True)
class RelationDecl:
    name: str
    params: tuple[Binder, ...] = ()
    expr: object = None
    closed: str | None = None
    span: Span = _span()


@dataclass(frozen=True)
class Definition:
    kind: str  # "let" or "current"
    name: str
    params: tuple[Binder, ...]
    expr: object
    span: Span = _span()


@dataclass(frozen=True)
class BasisItem:
    name: str
    params: tuple[Binder, ...]
    expr: object


@dataclass(frozen=True)
class BasisDecl:
    items: tuple[BasisItem, ...]
    span: Span = _span()


COMMANDS = ("master", "canonical", "preserve", "bracket", "derived", "twist", "commutator", "table", "render",
            "show")
EXPECTATIONS = ("zero", "nonzero", "anomaly-free")


@dataclass(frozen=True)
class Command:
    kind: str
    args: tuple = ()
    names: tuple[str, ...] = ()
    expect: str | None = None
    span: Span = _span()


@dataclass(frozen=True)
class SessionAst:
    statements: tuple = ()

    @property
    def declarations(self) -> tuple:
        return tuple(s for s in self.statements if not isinstance(s, Command))

    @property
    def commands(self) -> tuple:
        return tuple(s for s in self.statements if isinstance(s, Command))

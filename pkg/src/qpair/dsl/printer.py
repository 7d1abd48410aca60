"""Canonical pretty-printer; ``parse(render(ast))`` reproduces ``ast``."""

from __future__ import annotations

from . import nodes as n

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _idx(items) -> str:
    return "[" + ",".join(str(i) for i in items) + "]"


def _binder(b: n.Binder) -> str:
    return b.var if b.lo is None else f"{b.var}={b.lo}..{b.hi}"


def _binders(bs) -> str:
    return "[" + ", ".join(_binder(b) for b in bs) + "]" if bs else ""


def render_expr(e, prec: int = 0) -> str:
    if isinstance(e, n.Num):
        return str(e.value)
    if isinstance(e, n.Ref):
        text = ("d" + _idx(e.derivs) if e.derivs else "") + e.name
        return text + (_idx(e.indices) if e.indices else "")
    if isinstance(e, n.Neg):
        text = "-" + render_expr(e.operand, 3)
        return f"({text})" if prec > 3 else text
    if isinstance(e, n.Pow):
        return f"{render_expr(e.base, 5)}^{e.exponent}"
    if isinstance(e, n.BinOp):
        p = _PREC[e.op]
        text = f"{render_expr(e.left, p)} {e.op} {render_expr(e.right, p + 1)}"
        if e.op in "*/":
            text = f"{render_expr(e.left, p)}{e.op}{render_expr(e.right, p + 1)}"
        return f"({text})" if prec > p else text
    if isinstance(e, n.Sum):
        return f"sum{_binders(e.binders)}({render_expr(e.body)})"
    if isinstance(e, n.Call):
        return f"{e.func}(" + ", ".join(render_expr(a) for a in e.args) + ")"
    raise TypeError(f"not an expression node: {e!r}")


def render_statement(s) -> str:
    if isinstance(s, n.CoordDecl):
        rng = f"[{s.lo}..{s.hi}]" if s.lo is not None else ""
        return f"coord {s.name}{rng} deg {s.degree};"
    if isinstance(s, n.SymbolDecl):
        parts = [f"symbol {s.name}" + (f"[{s.arity}]" if s.arity else "")]
        if s.symmetry:
            parts.append(s.symmetry)
        if s.const:
            parts.append("const")
        if s.inverse:
            parts.append(f"inverse {s.inverse}")
        return " ".join(parts) + ";"
    if isinstance(s, n.IndexDecl):
        return f"index {', '.join(s.names)} = {s.lo}..{s.hi};"
    if isinstance(s, n.SymplecticDecl):
        return f"symplectic {s.degree};"
    if isinstance(s, n.PairDecl):
        return f"pair {s.first} {s.second}" + (" sign -1" if s.sign == -1 else "") + ";"
    if isinstance(s, n.FunctionDecl):
        return f"{s.kind} = {render_expr(s.expr)};"
    if isinstance(s, n.LagrangianDecl):
        return "lagrangian " + ", ".join(s.names) + ";"
    if isinstance(s, n.RelationDecl):
        if s.closed:
            return f"relation {s.name} closed {s.closed};"
        return f"relation {s.name}{_binders(s.params)} = {render_expr(s.expr)};"
    if isinstance(s, n.Definition):
        return f"{s.kind} {s.name}{_binders(s.params)} = {render_expr(s.expr)};"
    if isinstance(s, n.BasisDecl):
        items = ", ".join(f"{it.name}{_binders(it.params)} = {render_expr(it.expr)}" for it in s.items)
        return f"basis {items};"
    if isinstance(s, n.Command):
        text = s.kind
        if s.args:
            text += " " + ", ".join(render_expr(a) for a in s.args)
        if s.names:
            text += " " + ", ".join(s.names)
        if s.expect:
            text += f" expect {s.expect}"
        return text + ";"
    raise TypeError(f"not a statement node: {s!r}")


def render(ast: n.SessionAst) -> str:
    return "".join(render_statement(s) + "\n" for s in ast.statements)

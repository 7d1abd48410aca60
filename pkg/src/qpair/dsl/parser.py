"""Recursive-descent parser for ``.qp`` files.

Errors never abort the parse: a syntax error skips to the end of the current
statement (the next ``;``) and parsing resumes there.  The grammar is written
out in ``docs/grammar.ebnf``.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import nodes as n
from .lexer import Diagnostic, Span, Token, tokenize

STATEMENT_KEYWORDS = ("coord", "symbol", "index", "symplectic", "pair", "theta", "alpha", "lagrangian",
                      "relation", "let", "current", "basis") + n.COMMANDS


class _Abort(Exception):
    pass


@dataclass
class ParseResult:
    ast: n.SessionAst
    diagnostics: list[Diagnostic]

    @property
    def ok(self) -> bool:
        return not self.diagnostics


def _join(a: Span, b: Span) -> Span:
    return Span(a.start, b.end, a.line, a.col)


class Parser:
    def __init__(self, text: str):
        self.tokens, self.diagnostics = tokenize(text)
        self.i = 0
        self.declared: dict[str, Span] = {}

    # -- token helpers -----------------------------------------------------------
    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("PUNCT", "IDENT") and t.text == text

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "EOF":
            self.i += 1
        return t

    def error(self, message: str, span: Span | None = None, expected: tuple[str, ...] = ()) -> _Abort:
        self.diagnostics.append(Diagnostic(message, span or self.tok.span, expected))
        return _Abort()

    def describe(self, t: Token) -> str:
        return "end of input" if t.kind == "EOF" else repr(t.text)

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.error(f"unexpected {self.describe(self.tok)}", expected=(repr(text),))
        return self.advance()

    def ident(self, what: str = "identifier") -> Token:
        if self.tok.kind != "IDENT":
            raise self.error(f"unexpected {self.describe(self.tok)}", expected=(what,))
        return self.advance()

    def integer(self, what: str = "integer") -> int:
        if self.tok.kind != "INT":
            raise self.error(f"unexpected {self.describe(self.tok)}", expected=(what,))
        return int(self.advance().text)

    def declare(self, name: str, span: Span) -> None:
        if name in self.declared:
            prev = self.declared[name]
            self.diagnostics.append(
                Diagnostic(f"duplicate declaration of {name} (first declared at {prev.line}:{prev.col})", span)
            )
        else:
            self.declared[name] = span

    def recover(self) -> None:
        while self.tok.kind != "EOF" and not self.at(";"):
            self.advance()
        if self.at(";"):
            self.advance()

    # -- statements --------------------------------------------------------------
    def parse(self) -> ParseResult:
        out = []
        while self.tok.kind != "EOF":
            start = self.tok.span
            try:
                st = self.statement()
            except _Abort:
                self.recover()
                continue
            end = self.tokens[self.i - 1].span
            out.append(_with_span(st, _join(start, end)))
        return ParseResult(n.SessionAst(tuple(out)), self.diagnostics)

    def end(self) -> None:
        if self.tok.kind == "EOF":
            return  # a missing final semicolon is tolerated
        self.expect(";")

    def statement(self):
        t = self.tok
        if t.kind != "IDENT" or t.text not in STATEMENT_KEYWORDS:
            raise self.error(f"unexpected {self.describe(t)}", expected=("statement keyword",))
        kw = self.advance().text
        if kw in n.COMMANDS:
            return self.command(kw)
        return getattr(self, "st_" + kw)()

    def st_coord(self):
        name = self.ident("coordinate name")
        lo = hi = None
        if self.at("["):
            self.advance()
            lo = self.integer()
            self.expect("..")
            hi = self.integer()
            self.expect("]")
            if hi < lo:
                raise self.error(f"empty index range {lo}..{hi}", name.span)
        self.expect("deg")
        if self.at("-"):
            minus = self.advance()
            val = self.tok
            if val.kind == "INT":
                self.advance()
            raise self.error("degree must be non-negative", _join(minus.span, val.span))
        degree = self.integer("degree")
        self.end()
        self.declare(name.text, name.span)
        return n.CoordDecl(name.text, lo, hi, degree)

    def st_symbol(self):
        name = self.ident("symbol name")
        arity = 0
        if self.at("["):
            self.advance()
            arity = self.integer("arity")
            self.expect("]")
        symmetry = None
        if self.at("sym") or self.at("antisym"):
            symmetry = self.advance().text
        const = False
        if self.at("const"):
            self.advance()
            const = True
        inverse = None
        if self.at("inverse"):
            self.advance()
            inverse = self.ident("symbol name").text
        self.end()
        self.declare(name.text, name.span)
        return n.SymbolDecl(name.text, arity, symmetry, const, inverse)

    def st_index(self):
        names = [self.ident("index name")]
        while self.at(","):
            self.advance()
            names.append(self.ident("index name"))
        self.expect("=")
        lo = self.integer()
        self.expect("..")
        hi = self.integer()
        self.end()
        for t in names:
            self.declare(t.text, t.span)
        return n.IndexDecl(tuple(t.text for t in names), lo, hi)

    def st_symplectic(self):
        d = self.integer("symplectic degree")
        self.end()
        return n.SymplecticDecl(d)

    def st_pair(self):
        a = self.ident("coordinate name").text
        b = self.ident("coordinate name").text
        sign = 1
        if self.at("sign"):
            self.advance()
            neg = False
            if self.at("-"):
                self.advance()
                neg = True
            v = self.integer("1")
            if v != 1:
                raise self.error("pairing sign must be 1 or -1", self.tokens[self.i - 1].span)
            sign = -1 if neg else 1
        self.end()
        return n.PairDecl(a, b, sign)

    def st_theta(self):
        self.expect("=")
        e = self.expr()
        self.end()
        return n.FunctionDecl("theta", e)

    def st_alpha(self):
        self.expect("=")
        e = self.expr()
        self.end()
        return n.FunctionDecl("alpha", e)

    def st_lagrangian(self):
        names = [self.ident("coordinate name").text]
        while self.at(","):
            self.advance()
            names.append(self.ident("coordinate name").text)
        self.end()
        return n.LagrangianDecl(tuple(names))

    def binders(self) -> tuple[n.Binder, ...]:
        if not self.at("["):
            return ()
        self.advance()
        out = [self.binder()]
        while self.at(","):
            self.advance()
            out.append(self.binder())
        self.expect("]")
        return tuple(out)

    def binder(self) -> n.Binder:
        var = self.ident("index variable").text
        if self.at("="):
            self.advance()
            lo = self.integer()
            self.expect("..")
            hi = self.integer()
            return n.Binder(var, lo, hi)
        return n.Binder(var)

    def st_relation(self):
        name = self.ident("relation name")
        if self.at("closed"):
            self.advance()
            fam = self.ident("symbol name").text
            self.end()
            self.declare(name.text, name.span)
            return n.RelationDecl(name.text, (), None, fam)
        params = self.binders()
        self.expect("=")
        e = self.expr()
        self.end()
        self.declare(name.text, name.span)
        return n.RelationDecl(name.text, params, e)

    def _definition(self, kind: str):
        name = self.ident("name")
        params = self.binders()
        self.expect("=")
        e = self.expr()
        self.end()
        self.declare(name.text, name.span)
        return n.Definition(kind, name.text, params, e)

    def st_let(self):
        return self._definition("let")

    def st_current(self):
        return self._definition("current")

    def st_basis(self):
        items = []
        while True:
            name = self.ident("current name")
            params = self.binders()
            self.expect("=")
            e = self.expr()
            self.declare(name.text, name.span)
            items.append(n.BasisItem(name.text, params, e))
            if not self.at(","):
                break
            self.advance()
        self.end()
        return n.BasisDecl(tuple(items))

    def command(self, kind: str):
        args: tuple = ()
        names: tuple = ()
        if kind in ("bracket", "derived", "twist", "commutator"):
            a = self.expr()
            self.expect(",")
            b = self.expr()
            args = (a, b)
        elif kind in ("render", "show"):
            args = (self.expr(),)
        elif kind == "table":
            lst = [self.ident("current name").text]
            while self.at(","):
                self.advance()
                lst.append(self.ident("current name").text)
            names = tuple(lst)
        expect = None
        if self.at("expect"):
            self.advance()
            t = self.ident("expectation")
            if t.text == "anomaly":
                self.expect("-")
                self.expect("free")
                expect = "anomaly-free"
            elif t.text in ("zero", "nonzero"):
                expect = t.text
            else:
                raise self.error(f"unknown expectation {t.text!r}", t.span, ("zero", "nonzero", "anomaly-free"))
        self.end()
        return n.Command(kind, args, names, expect)

    # -- expressions -------------------------------------------------------------
    def expr(self):
        left = self.term()
        while self.at("+") or self.at("-"):
            op = self.advance().text
            right = self.term()
            left = n.BinOp(op, left, right, _join(left.span, right.span))
        return left

    def term(self):
        left = self.unary()
        while self.at("*") or self.at("/"):
            op = self.advance().text
            right = self.unary()
            left = n.BinOp(op, left, right, _join(left.span, right.span))
        return left

    def unary(self):
        if self.at("-"):
            t = self.advance()
            operand = self.unary()
            return n.Neg(operand, _join(t.span, operand.span))
        return self.power()

    def power(self):
        base = self.atom()
        if self.at("^"):
            self.advance()
            e = self.integer("exponent")
            return n.Pow(base, e, _join(base.span, self.tokens[self.i - 1].span))
        return base

    def index_list(self) -> tuple:
        self.expect("[")
        out = [self.index()]
        while self.at(","):
            self.advance()
            out.append(self.index())
        self.expect("]")
        return tuple(out)

    def index(self):
        t = self.tok
        if t.kind == "INT":
            self.advance()
            return int(t.text)
        if t.kind == "IDENT":
            self.advance()
            return t.text
        raise self.error(f"unexpected {self.describe(t)}", expected=("index",))

    def atom(self):
        t = self.tok
        if t.kind == "INT":
            self.advance()
            return n.Num(int(t.text), t.span)
        if self.at("("):
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        if t.kind != "IDENT":
            raise self.error(f"unexpected {self.describe(t)}", expected=("expression",))
        if t.text == "sum":
            self.advance()
            if not self.at("["):
                raise self.error("sum needs index binders", expected=("'['",))
            binders = self.binders()
            self.expect("(")
            body = self.expr()
            close = self.expect(")")
            return n.Sum(binders, body, _join(t.span, close.span))
        if t.text == "d" and self.peek().text == "[":
            self.advance()
            derivs = self.index_list()
            name = self.ident("symbol name")
            idx = self.index_list() if self.at("[") else ()
            return n.Ref(name.text, idx, derivs, _join(t.span, self.tokens[self.i - 1].span))
        if self.peek().kind == "PUNCT" and self.peek().text == "(":
            if t.text not in n.CALLS:
                raise self.error(f"unknown function {t.text!r}", t.span, tuple(n.CALLS))
            self.advance()
            self.advance()
            args = [self.expr()]
            while self.at(","):
                self.advance()
                args.append(self.expr())
            close = self.expect(")")
            return n.Call(t.text, tuple(args), _join(t.span, close.span))
        self.advance()
        idx = self.index_list() if self.at("[") else ()
        return n.Ref(t.text, idx, (), _join(t.span, self.tokens[self.i - 1].span))


def _with_span(node, span: Span):
    return type(node)(**{**{k: getattr(node, k) for k in node.__dataclass_fields__ if k != "span"}, "span": span})


def parse(text: str) -> ParseResult:
    return Parser(text).parse()

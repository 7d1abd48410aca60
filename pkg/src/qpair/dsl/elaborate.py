"""Turn a parsed session into engine objects and a command plan.

Elaboration runs in three passes over the statements:

1. coordinates, symbols, index ranges, the symplectic degree and pairs build
   the coordinate universe and the Darboux structure;
2. theta, alpha, lagrangian, relations, ``let``/``current`` definitions and
   bases are evaluated in source order;
3. command arguments are evaluated, in source order.

Every error is reported as a diagnostic carrying the span of the offending
statement or expression.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from ..currents import CurrentFunction, twist_current_basis
from ..errors import QPError
from ..graded_poly import (
    GradedAlgebra,
    GradedCoordinate,
    Polynomial,
    RelationSet,
    SymbolFamily,
    closedness_relations,
    restrict_to_zero,
)
from ..qp import DEFAULT_MAX_ORDER, QPManifold, QPPair, derived_bracket, make_qp_pair, twist
from ..symplectic import SymplecticStructure, make_darboux
from . import nodes as n
from .lexer import Diagnostic, Span
from .parser import parse
from .printer import render_statement


class ElaborationError(Exception):
    def __init__(self, message: str, span: Span):
        super().__init__(message)
        self.diagnostic = Diagnostic(message, span)


@dataclass
class PlannedCommand:
    kind: str
    text: str
    args: tuple[Polynomial, ...]
    names: tuple[str, ...]
    expect: str | None
    span: Span


@dataclass
class Plan:
    algebra: GradedAlgebra | None = None
    structure: SymplecticStructure | None = None
    theta: Polynomial | None = None
    alpha: Polynomial | None = None
    lagrangian: tuple[str, ...] = ()
    relations: RelationSet | None = None
    relation_sources: list = field(default_factory=list)
    lets: dict = field(default_factory=dict)
    currents: dict = field(default_factory=dict)  # name -> CurrentFunction, insertion ordered
    families: dict = field(default_factory=dict)  # current family name -> member names
    commands: list[PlannedCommand] = field(default_factory=list)
    pair: QPPair | None = None

    @property
    def manifold(self) -> QPManifold | None:
        if self.structure is None or self.theta is None:
            return None
        return QPManifold(self.structure, self.theta, self.relations)

    @property
    def empty(self) -> bool:
        return self.algebra is None and not self.commands


@dataclass
class ElaborationResult:
    plan: Plan | None
    diagnostics: list[Diagnostic]

    @property
    def ok(self) -> bool:
        return not self.diagnostics


_PASS1 = (n.CoordDecl, n.SymbolDecl, n.IndexDecl, n.SymplecticDecl, n.PairDecl)


class Elaborator:
    def __init__(self, ast: n.SessionAst, max_order: int = DEFAULT_MAX_ORDER, validate: bool = True,
                 method: str = "closed"):
        self.ast = ast
        self.method = method
        self.max_order = max_order
        self.validate = validate
        self.plan = Plan()
        self.diagnostics: list[Diagnostic] = []
        self.index_ranges: dict[str, tuple[int, int]] = {}
        self.decl_at: dict[str, int] = {}
        self.position = 0
        self.coord_families: dict[str, list[int]] = {}

    def fail(self, message: str, span: Span) -> ElaborationError:
        return ElaborationError(message, span)

    # -- driver ------------------------------------------------------------------
    def run(self) -> ElaborationResult:
        sts = self.ast.statements
        self.pass1([(i, s) for i, s in enumerate(sts) if isinstance(s, _PASS1)])
        if self.diagnostics:
            return ElaborationResult(None, self.diagnostics)
        for i, s in enumerate(sts):
            if isinstance(s, _PASS1) or isinstance(s, n.Command):
                continue
            self.position = i
            self.guard(self.pass2, s)
        if not self.diagnostics:
            self.guard(self.finish, None)
        for i, s in enumerate(sts):
            if isinstance(s, n.Command):
                self.position = i
                self.guard(self.command, s)
        if self.diagnostics:
            return ElaborationResult(None, self.diagnostics)
        return ElaborationResult(self.plan, [])

    def guard(self, fn, s):
        try:
            fn(s)
        except ElaborationError as e:
            self.diagnostics.append(e.diagnostic)
        except QPError as e:
            span = getattr(s, "span", None) or Span(0, 0, 1, 1)
            self.diagnostics.append(Diagnostic(str(e), span))

    # -- pass 1 ------------------------------------------------------------------
    def pass1(self, items):
        coords: list[GradedCoordinate] = []
        fams: list[SymbolFamily] = []
        N = None
        pairs = []
        pair_span = None
        for i, s in items:
            try:
                if isinstance(s, n.CoordDecl):
                    if s.lo is None:
                        coords.append(GradedCoordinate(s.name, s.degree))
                    else:
                        for k in range(s.lo, s.hi + 1):
                            coords.append(GradedCoordinate(f"{s.name}[{k}]", s.degree, s.name, k))
                        self.coord_families[s.name] = list(range(s.lo, s.hi + 1))
                    self.decl_at[s.name] = i
                elif isinstance(s, n.SymbolDecl):
                    blocks = ((tuple(range(s.arity)), s.symmetry),) if s.symmetry and s.arity > 1 else ()
                    fams.append(SymbolFamily(s.name, s.arity, blocks, s.const, s.inverse))
                    self.decl_at[s.name] = i
                elif isinstance(s, n.IndexDecl):
                    if s.hi < s.lo:
                        raise self.fail(f"empty index range {s.lo}..{s.hi}", s.span)
                    for name in s.names:
                        self.index_ranges[name] = (s.lo, s.hi)
                elif isinstance(s, n.SymplecticDecl):
                    if N is not None:
                        raise self.fail("symplectic degree declared twice", s.span)
                    N = s.degree
                elif isinstance(s, n.PairDecl):
                    pairs.extend((a, b, s.sign, s.span) for a, b in self._expand_pair(s))
                    pair_span = pair_span or s.span
            except ElaborationError as e:
                self.diagnostics.append(e.diagnostic)
            except QPError as e:
                self.diagnostics.append(Diagnostic(str(e), s.span))
        if self.diagnostics or not items:
            return
        try:
            self.plan.algebra = GradedAlgebra(tuple(coords), tuple(fams))
        except QPError as e:
            self.diagnostics.append(Diagnostic(str(e), items[0][1].span))
            return
        if N is None and not pairs:
            return
        span = pair_span or items[0][1].span
        if N is None:
            self.diagnostics.append(Diagnostic("pairs declared without a symplectic degree", span))
            return
        for a, b, _, sp in pairs:
            for name in (a, b):
                if not self.plan.algebra.has_coordinate(name):
                    self.diagnostics.append(Diagnostic(f"unknown coordinate {name}", sp))
        if self.diagnostics:
            return
        try:
            S = make_darboux(self.plan.algebra, [(a, b, s) for a, b, s, _ in pairs], N)
            self.plan.structure = S if self.method == "closed" else S.with_method(self.method)
        except QPError as e:
            self.diagnostics.append(Diagnostic(str(e), span))

    def _expand_pair(self, s: n.PairDecl):
        fa, fb = self.coord_families.get(s.first), self.coord_families.get(s.second)
        if fa is None and fb is None:
            return [(s.first, s.second)]
        if fa is None or fb is None or fa != fb:
            raise self.fail(f"cannot pair {s.first} with {s.second}: index ranges differ", s.span)
        return [(f"{s.first}[{k}]", f"{s.second}[{k}]") for k in fa]

    # -- pass 2 ------------------------------------------------------------------
    def need_algebra(self, span) -> GradedAlgebra:
        if self.plan.algebra is None:
            raise self.fail("no coordinates declared", span)
        return self.plan.algebra

    def need_structure(self, span) -> SymplecticStructure:
        if self.plan.structure is None:
            raise self.fail("no symplectic structure declared", span)
        return self.plan.structure

    def pass2(self, s):
        alg = self.need_algebra(s.span)
        if isinstance(s, n.FunctionDecl):
            if getattr(self.plan, s.kind) is not None:
                raise self.fail(f"{s.kind} declared twice", s.span)
            setattr(self.plan, s.kind, self.eval(s.expr, {}))
        elif isinstance(s, n.LagrangianDecl):
            names = []
            for name in s.names:
                if name in self.coord_families:
                    names.extend(f"{name}[{k}]" for k in self.coord_families[name])
                elif alg.has_coordinate(name):
                    names.append(name)
                else:
                    raise self.fail(f"unknown coordinate {name}", s.span)
            self.plan.lagrangian = tuple(names)
        elif isinstance(s, n.RelationDecl):
            if s.closed:
                if not alg.has_family(s.closed):
                    raise self.fail(f"unknown coefficient symbol {s.closed}", s.span)
                self.check_prior(s.closed, s.span)
                rels = closedness_relations(alg, s.closed)
            else:
                rels = [v for _, v in self.expand(s.params, s.expr, s.span)]
            for r in rels:
                if not r.is_scalar_function():
                    raise self.fail(f"relation {s.name} involves coordinates", s.span)
            self.plan.relation_sources.append((s.name, rels))
        elif isinstance(s, n.Definition):
            members = []
            for key, v in self.expand(s.params, s.expr, s.span):
                name = s.name + (_idx(key) if s.params else "")
                if s.kind == "let":
                    self.plan.lets[name] = v
                else:
                    self.plan.currents[name] = self.as_current(v, name, s.span)
                members.append(name)
            if s.params and s.kind == "current":
                self.plan.families[s.name] = members
            self.decl_at[s.name] = self.position
        elif isinstance(s, n.BasisDecl):
            self.basis(s)

    def as_current(self, v: Polynomial, name: str, span) -> CurrentFunction:
        S = self.need_structure(span)
        try:
            return CurrentFunction(v, S.N - 1, name)
        except QPError as e:
            raise self.fail(str(e), span) from None

    def provisional_pair(self, span) -> QPPair:
        S = self.need_structure(span)
        if self.plan.theta is None:
            raise self.fail("theta must be declared before this statement", span)
        if not self.plan.lagrangian:
            raise self.fail("lagrangian must be declared before this statement", span)
        alpha = self.plan.alpha if self.plan.alpha is not None else self.plan.algebra.zero()
        try:
            return QPPair(QPManifold(S, self.plan.theta), self.plan.lagrangian, alpha)
        except QPError as e:
            raise self.fail(str(e), span) from None

    def basis(self, s: n.BasisDecl):
        P = self.provisional_pair(s.span)
        names, polys = [], []
        for item in s.items:
            members = []
            for key, v in self.expand(item.params, item.expr, s.span):
                name = item.name + (_idx(key) if item.params else "")
                names.append(name)
                polys.append(self.as_current(v, name, s.span))
                members.append(name)
            if item.params:
                self.plan.families[item.name] = members
            self.decl_at[item.name] = self.position
        try:
            twisted = twist_current_basis(P, polys, self.max_order)
        except QPError as e:
            raise self.fail(str(e), s.span) from None
        for name, c in zip(names, twisted):
            self.plan.currents[name] = c

    def finish(self, _):
        plan = self.plan
        if plan.algebra is None:
            return
        rels = [r for _, rs in plan.relation_sources for r in rs]
        names = [name for name, rs in plan.relation_sources for _ in rs]
        plan.relations = RelationSet(plan.algebra, rels, names) if rels else None
        if plan.theta is not None and plan.structure is not None:
            th = plan.theta
            if th and (not th.is_homogeneous() or th.degree() != plan.structure.N + 1):
                raise self.fail(f"theta must have degree {plan.structure.N + 1}", self._span_of(n.FunctionDecl))
        if plan.lagrangian:
            M = plan.manifold
            if M is None:
                raise self.fail("a Lagrangian needs theta and a symplectic structure", self._span_of(n.LagrangianDecl))
            alpha = plan.alpha if plan.alpha is not None else plan.algebra.zero()
            try:
                plan.pair = make_qp_pair(M, plan.lagrangian, alpha, validate=self.validate)
            except QPError as e:
                raise self.fail(str(e), self._span_of(n.LagrangianDecl)) from None

    def _span_of(self, kind) -> Span:
        for s in self.ast.statements:
            if isinstance(s, kind):
                return s.span
        return Span(0, 0, 1, 1)

    # -- pass 3 ------------------------------------------------------------------
    def command(self, s: n.Command):
        args = tuple(self.eval(a, {}) for a in s.args)
        names: list[str] = []
        for name in s.names:
            if name in self.plan.families:
                names.extend(self.plan.families[name])
            elif name in self.plan.currents:
                names.append(name)
            else:
                raise self.fail(f"unknown current {name}", s.span)
        needs_pair = s.kind in ("canonical", "commutator", "table", "render")
        if needs_pair and self.plan.pair is None:
            raise self.fail(f"{s.kind} needs a QP pair (declare theta and lagrangian)", s.span)
        if s.kind in ("master", "preserve", "derived") and self.plan.manifold is None:
            raise self.fail(f"{s.kind} needs theta and a symplectic structure", s.span)
        if s.kind in ("bracket", "twist"):
            self.need_structure(s.span)
        if s.kind == "preserve" and self.plan.alpha is None:
            raise self.fail("preserve needs alpha", s.span)
        if s.kind == "commutator":
            args = tuple(self.as_current(a, "", s.span).poly for a in args)
        if s.expect == "anomaly-free" and s.kind not in ("commutator", "table"):
            raise self.fail("anomaly-free applies to commutator and table commands", s.span)
        self.plan.commands.append(PlannedCommand(s.kind, render_statement(s), args, tuple(names), s.expect, s.span))

    # -- expressions ---------------------------------------------------------------
    def binder_range(self, b: n.Binder, span) -> range:
        if b.lo is not None:
            return range(b.lo, b.hi + 1)
        if b.var not in self.index_ranges:
            raise self.fail(f"index {b.var} has no declared range", span)
        lo, hi = self.index_ranges[b.var]
        return range(lo, hi + 1)

    def expand(self, params, expr, span):
        if not params:
            return [((), self.eval(expr, {}))]
        ranges = [self.binder_range(b, span) for b in params]
        out = []
        for key in itertools.product(*ranges):
            env = {b.var: k for b, k in zip(params, key)}
            out.append((key, self.eval(expr, env)))
        return out

    def check_prior(self, name: str, span):
        at = self.decl_at.get(name)
        if at is not None and at > self.position:
            raise self.fail(f"{name} is used before its declaration", span)

    def resolve_index(self, i, env, span) -> int:
        if isinstance(i, int):
            return i
        if i in env:
            return env[i]
        raise self.fail(f"unbound index {i}", span)

    def eval(self, e, env) -> Polynomial:
        alg = self.need_algebra(getattr(e, "span", None))
        if isinstance(e, n.Num):
            return alg.const(e.value)
        if isinstance(e, n.Neg):
            return -self.eval(e.operand, env)
        if isinstance(e, n.Pow):
            return self.eval(e.base, env) ** e.exponent
        if isinstance(e, n.BinOp):
            a = self.eval(e.left, env)
            b = self.eval(e.right, env)
            if e.op == "+":
                return a + b
            if e.op == "-":
                return a - b
            if e.op == "*":
                return a * b
            c = _scalar_value(b)
            if c is None or c == 0:
                raise self.fail("division is only allowed by a nonzero number", e.right.span)
            return a.scale(Fraction(1) / c)
        if isinstance(e, n.Sum):
            ranges = [self.binder_range(b, e.span) for b in e.binders]
            out = alg.zero()
            for key in itertools.product(*ranges):
                inner = dict(env)
                inner.update({b.var: k for b, k in zip(e.binders, key)})
                out = out + self.eval(e.body, inner)
            return out
        if isinstance(e, n.Call):
            return self.call(e, env)
        if isinstance(e, n.Ref):
            return self.ref(e, env)
        raise TypeError(e)

    def call(self, e: n.Call, env) -> Polynomial:
        arity = {"bracket": 2, "derived": 2, "twist": 2, "transport": 1, "restrict": 1}[e.func]
        if len(e.args) != arity:
            raise self.fail(f"{e.func} takes {arity} argument(s)", e.span)
        args = [self.eval(a, env) for a in e.args]
        try:
            if e.func == "bracket":
                return self.need_structure(e.span).bracket(*args)
            if e.func == "derived":
                M = self.plan.manifold
                if M is None:
                    raise self.fail("derived needs theta declared earlier", e.span)
                return derived_bracket(M, *args)
            if e.func == "twist":
                return twist(self.need_structure(e.span), args[0], args[1], self.max_order)
            if e.func == "transport":
                if self.plan.alpha is None:
                    raise self.fail("transport needs alpha declared earlier", e.span)
                return twist(self.need_structure(e.span), args[0], -self.plan.alpha, self.max_order)
            if not self.plan.lagrangian:
                raise self.fail("restrict needs a lagrangian declared earlier", e.span)
            return restrict_to_zero(args[0], self.plan.lagrangian)
        except ElaborationError:
            raise
        except QPError as err:
            raise self.fail(str(err), e.span) from None

    def ref(self, e: n.Ref, env) -> Polynomial:
        alg = self.plan.algebra
        idx = tuple(self.resolve_index(i, env, e.span) for i in e.indices)
        derivs = tuple(self.resolve_index(i, env, e.span) for i in e.derivs)
        name = e.name
        self.check_prior(name, e.span)
        try:
            if alg.has_family(name):
                return alg.sym(name, *idx, derivs=derivs)
            if derivs:
                raise self.fail(f"only coefficient symbols can be differentiated, not {name}", e.span)
            full = name + (_idx(idx) if idx else "")
            if alg.has_coordinate(full):
                return alg.var(full)
            if full in self.plan.lets:
                return self.plan.lets[full]
            if full in self.plan.currents:
                return self.plan.currents[full].poly
        except ElaborationError:
            raise
        except QPError as err:
            raise self.fail(str(err), e.span) from None
        if name in self.plan.families or name in self.coord_families:
            raise self.fail(f"bad indices for {name}", e.span)
        raise self.fail(f"unknown name {full}", e.span)


def _idx(key) -> str:
    return "[" + ",".join(str(k) for k in key) + "]"


def _scalar_value(p: Polynomial):
    if not p.terms:
        return 0
    if set(p.terms) == {((), ())}:
        return p.terms[((), ())]
    return None


def elaborate(ast: n.SessionAst, max_order: int = DEFAULT_MAX_ORDER, validate: bool = True,
              method: str = "closed") -> ElaborationResult:
    """``method`` selects the bracket implementation ("closed" or the "leibniz" oracle)."""
    return Elaborator(ast, max_order, validate, method).run()


def load(text: str, max_order: int = DEFAULT_MAX_ORDER, validate: bool = True,
         method: str = "closed") -> ElaborationResult:
    """Parse and elaborate; parse diagnostics stop before elaboration."""
    parsed = parse(text)
    if not parsed.ok:
        return ElaborationResult(None, parsed.diagnostics)
    return elaborate(parsed.ast, max_order, validate, method)

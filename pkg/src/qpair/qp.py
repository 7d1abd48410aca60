"""QP manifolds, derived brackets, twisting and canonical functions.

Conventions used throughout:

* ``derived_bracket(M, f, g) = {{f, Theta}, g}`` (unrestricted).
* ``twist(S, f, alpha) = f + {f, alpha} + 1/2 {{f, alpha}, alpha} + ...``
* a QP pair stores the canonical function ``alpha``: ``exp(ad alpha) Theta``
  vanishes on the Lagrangian.  Commuting bases are transported by the inverse
  twist ``exp(-ad alpha)``, see :func:`qpair.currents.twist_current_basis`.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from .errors import DeclarationError, DegenerateBracketError, DegreeError, MasterEquationError, TwistDivergence
from .graded_poly import (
    GradedAlgebra,
    GradedCoordinate,
    Polynomial,
    RelationSet,
    mul,
    reduce,
    restrict_to_zero,
)
from .symplectic import SymplecticStructure, make_darboux, poisson_bracket

DEFAULT_MAX_ORDER = 16


@dataclass(frozen=True)
class QPManifold:
    """A symplectic structure of degree N with a degree N+1 function Theta.

    The master equation is not enforced here so that broken data can still be
    inspected; :func:`check_master` computes the obstruction.
    """

    structure: SymplecticStructure
    theta: Polynomial
    relations: RelationSet | None = None

    def __post_init__(self):
        if self.theta.algebra != self.structure.algebra:
            raise DeclarationError("theta must live on the structure's coordinates")
        if self.relations is not None and self.relations.algebra != self.structure.algebra:
            raise DeclarationError("relations must live on the structure's coordinates")

    @property
    def algebra(self) -> GradedAlgebra:
        return self.structure.algebra

    @property
    def N(self) -> int:
        return self.structure.N

    def bracket(self, f: Polynomial, g: Polynomial) -> Polynomial:
        return poisson_bracket(self.structure, f, g)

    def reduce(self, f: Polynomial) -> Polynomial:
        return reduce(f, self.relations)


def _check_theta(M: QPManifold) -> None:
    th = M.theta
    if th and (not th.is_homogeneous() or th.degree() != M.N + 1):
        raise DegreeError(f"theta must be homogeneous of degree {M.N + 1}, got degrees {sorted(th.degrees())}")


def check_master(M: QPManifold, raw: bool = False) -> Polynomial:
    """The master-equation obstruction ``{Theta, Theta}``, reduced unless ``raw``."""
    _check_theta(M)
    obs = M.bracket(M.theta, M.theta)
    return obs if raw else M.reduce(obs)


def derived_bracket(M: QPManifold, f: Polynomial, g: Polynomial) -> Polynomial:
    """``{{f, Theta}, g}`` without restriction."""
    return M.bracket(M.bracket(f, M.theta), g)


def _step_factor(k: int) -> Fraction:
    # the k-th series term is {term_(k-1), alpha} / k, which accumulates 1/k!
    return Fraction(1, k)


def _structure_of(M) -> SymplecticStructure:
    return M.structure if isinstance(M, QPManifold) else M


def twist(M, f: Polynomial, alpha: Polynomial, max_order: int = DEFAULT_MAX_ORDER) -> Polynomial:
    """``exp(ad alpha) f``, summed until a term vanishes.

    ``M`` may be a :class:`QPManifold` or a bare structure.  The series must
    reach a zero term at some order ``<= max_order``; otherwise
    :class:`TwistDivergence` is raised carrying that order.
    """
    if max_order < 1:
        raise ValueError("max_order must be at least 1")
    S = _structure_of(M)
    if alpha and (not alpha.is_homogeneous() or alpha.degree() != S.N):
        warnings.warn(
            f"twisting by a function of degree {sorted(alpha.degrees())} on a degree-{S.N} structure "
            "does not preserve degree",
            stacklevel=2,
        )
    if not alpha or not f:
        return f
    out = f
    term = f
    for k in range(1, max_order + 1):
        term = poisson_bracket(S, term, alpha).scale(_step_factor(k))
        if not term:
            return out
        if k == max_order:
            break
        out = out + term
    raise TwistDivergence(max_order)


def twist_terms(M, f: Polynomial, alpha: Polynomial, order: int) -> list[Polynomial]:
    """The first ``order + 1`` series terms of ``exp(ad alpha) f`` (no termination check)."""
    S = _structure_of(M)
    terms = [f]
    for k in range(1, order + 1):
        terms.append(poisson_bracket(S, terms[-1], alpha).scale(_step_factor(k)))
    return terms


def twist_preserves_qp(M: QPManifold, alpha: Polynomial, max_order: int = DEFAULT_MAX_ORDER,
                       raw: bool = False) -> Polynomial:
    """``{e^alpha Theta, e^alpha Theta}``, reduced unless ``raw``."""
    _check_theta(M)
    t = twist(M, M.theta, alpha, max_order)
    obs = M.bracket(t, t)
    return obs if raw else M.reduce(obs)


# -- QP pairs ------------------------------------------------------------------

@dataclass(frozen=True)
class SmallStructure:
    """Generator table of the derived bracket on the small manifold.

    ``table`` maps ordered name pairs to generator-free polynomials on the big
    algebra (entries may be coefficient symbols, e.g. an inverse metric).
    """

    coordinates: tuple[str, ...]
    n: int
    table: Mapping[tuple[str, str], Polynomial]

    def entry(self, a: str, b: str) -> Polynomial | None:
        return self.table.get((a, b))

    def as_darboux(self, algebra: GradedAlgebra) -> SymplecticStructure | None:
        """The equivalent Darboux structure if every entry is a constant +-1."""
        pairs = []
        seen = set()
        for (a, b), v in sorted(self.table.items()):
            if a in seen or b in seen:
                continue
            if len(v.terms) != 1 or not v.is_scalar_function() or ((), ()) not in v.terms:
                return None
            s = v.terms[((), ())]
            if s not in (1, -1):
                return None
            pairs.append((a, b, s))
            seen.update((a, b))
        if seen != set(self.coordinates):
            return None
        for a, _, _ in pairs:
            if sum(1 for (x, _) in self.table if x == a) != 1:
                return None
        try:
            return make_darboux(algebra.restrict(self.coordinates), pairs, self.n)
        except (DeclarationError, DegreeError):
            return None


def _determinant(matrix: list[list[Polynomial]], one: Polynomial) -> Polynomial:
    """Laplace expansion along rows with memoised column subsets."""
    k = len(matrix)
    memo: dict[int, Polynomial] = {}

    def minor(row: int, used: int) -> Polynomial:
        if row == k:
            return one
        if used in memo:
            return memo[used]
        out = one.algebra.zero()
        sign = 1
        for col in range(k):
            if used >> col & 1:
                continue
            e = matrix[row][col]
            if e:
                sub = minor(row + 1, used | (1 << col))
                if sub:
                    out = out + mul(e, sub).scale(sign)
            sign = -sign
        memo[used] = out
        return out

    return minor(0, 0)


def derive_small_structure(M: QPManifold, lagrangian: Iterable[str]) -> SmallStructure:
    """Restricted derived-bracket table on the surviving coordinates.

    Raises :class:`DegenerateBracketError` unless the table only pairs
    coordinates of total degree ``n = N - 1`` with generator-free entries and is
    nondegenerate (nonzero determinant on every degree block, after reduction).
    """
    alg = M.algebra
    lag = [alg.coordinate(n).name for n in lagrangian]
    keep = [c for c in alg.coordinates if c.name not in set(lag)]
    n = M.N - 1
    table: dict[tuple[str, str], Polynomial] = {}
    for a in keep:
        for b in keep:
            v = M.reduce(restrict_to_zero(derived_bracket(M, alg.var(a), alg.var(b)), lag))
            if not v:
                continue
            if a.degree + b.degree != n or not v.is_scalar_function():
                raise DegenerateBracketError(
                    f"restricted derived bracket {{{a.name}, {b.name}}} = {v.render()} is not a Darboux entry"
                )
            table[(a.name, b.name)] = v
    by_degree: dict[int, list[GradedCoordinate]] = {}
    for c in keep:
        by_degree.setdefault(c.degree, []).append(c)
    for d, rows in sorted(by_degree.items()):
        cols = by_degree.get(n - d, [])
        if len(cols) != len(rows):
            raise DegenerateBracketError(f"degree {d} and degree {n - d} coordinates do not pair up")
        matrix = [[table.get((r.name, c.name), alg.zero()) for c in cols] for r in rows]
        det = M.reduce(_determinant(matrix, alg.const(1)))
        if not det:
            raise DegenerateBracketError(f"restricted derived bracket is degenerate on degree-{d} coordinates")
    return SmallStructure(tuple(c.name for c in keep), n, table)


@dataclass(frozen=True)
class QPPair:
    big: QPManifold
    lagrangian: tuple[str, ...]
    alpha: Polynomial
    small_structure: SmallStructure | None = None

    def __post_init__(self):
        alg = self.big.algebra
        object.__setattr__(self, "lagrangian", tuple(alg.coordinate(n).name for n in self.lagrangian))
        lag = set(self.lagrangian)
        S = self.big.structure
        for a, b, _ in S.pairs:
            if (a.name in lag) == (b.name in lag):
                raise DeclarationError(
                    f"the Lagrangian must contain exactly one of {a.name}, {b.name}"
                )
        if self.alpha.algebra != alg:
            raise DeclarationError("alpha must live on the big coordinates")
        bad = sorted(alg.coordinates[i].name for i in self.alpha.coordinates_used() if alg.coordinates[i].name in lag)
        if bad:
            raise DeclarationError("alpha must not depend on Lagrangian coordinates: " + ", ".join(bad))

    @property
    def n(self) -> int:
        return self.big.N - 1

    @property
    def surviving(self) -> tuple[str, ...]:
        lag = set(self.lagrangian)
        return tuple(c.name for c in self.big.algebra.coordinates if c.name not in lag)

    def restrict(self, f: Polynomial) -> Polynomial:
        return restrict_to_zero(f, self.lagrangian)


def make_qp_pair(big: QPManifold, lagrangian: Iterable[str], alpha: Polynomial | None = None,
                 validate: bool = True) -> QPPair:
    """Build a QP pair; with ``validate`` the master equation and the small table are checked."""
    lagrangian = tuple(lagrangian)
    if alpha is None:
        alpha = big.algebra.zero()
    small = None
    if validate:
        obs = check_master(big)
        if obs:
            raise MasterEquationError("{Theta, Theta} does not vanish: " + obs.render())
        small = derive_small_structure(big, lagrangian)
    return QPPair(big, lagrangian, alpha, small)


def check_canonical(P: QPPair, max_order: int = DEFAULT_MAX_ORDER, raw: bool = False) -> Polynomial:
    """``exp(ad alpha) Theta`` restricted to the Lagrangian; zero certifies canonicity."""
    t = twist(P.big, P.big.theta, P.alpha, max_order)
    obs = P.restrict(t)
    return obs if raw else P.big.reduce(obs)


# -- cotangent lift ------------------------------------------------------------

def _conjugate_name(c: GradedCoordinate, conjugates: Mapping[str, str]) -> tuple[str, str | None]:
    if c.name in conjugates:
        return conjugates[c.name], None
    fam = c.family or c.name
    base = conjugates.get(fam, fam + "_c")
    if c.family is not None and c.index is not None:
        return f"{base}[{c.index}]", base
    return base, None


def lift_algebra(small: Sequence[GradedCoordinate], n: int, conjugates: Mapping[str, str] | None = None,
                 families=()) -> tuple[GradedAlgebra, list[tuple[str, str]]]:
    """Big coordinate universe: the small coordinates then their conjugates.

    A small coordinate of degree ``d`` gets a conjugate of degree ``n + 1 - d``.
    ``conjugates`` maps a coordinate name or family name to the conjugate name.
    """
    conjugates = dict(conjugates or {})
    big: list[GradedCoordinate] = list(small)
    pairs = []
    for c in small:
        if c.degree > n:
            raise DegreeError(f"{c.name} has degree {c.degree} > n = {n}")
        name, fam = _conjugate_name(c, conjugates)
        big.append(GradedCoordinate(name, n + 1 - c.degree, fam, c.index if fam else None))
        pairs.append((c.name, name))
    return GradedAlgebra(tuple(big), tuple(families)), pairs


def cotangent_lift(small: Sequence[GradedCoordinate], n: int,
                   theta: Polynomial | Callable[[GradedAlgebra], Polynomial],
                   conjugates: Mapping[str, str] | None = None, families=(),
                   relations: Callable[[GradedAlgebra], Iterable[Polynomial]] | Iterable[Polynomial] = (),
                   alpha: Polynomial | Callable[[GradedAlgebra], Polynomial] | None = None) -> QPPair:
    """Shifted cotangent bundle ``T*[n+1]`` of a small graded manifold.

    ``theta`` (and optionally ``relations`` and ``alpha``) may be callables
    receiving the constructed big algebra.  Each pair is oriented (small,
    conjugate) with sign +1, the conjugates form the Lagrangian, the master
    equation is validated and the small table is derived.
    """
    alg, pairs = lift_algebra(small, n, conjugates, families)
    S = make_darboux(alg, pairs, n + 1)
    th = theta(alg) if callable(theta) else theta
    if th.algebra != alg:
        raise DeclarationError("theta does not live on the lifted coordinates")
    rels = relations(alg) if callable(relations) else relations
    rels = list(rels)
    R = RelationSet(alg, rels) if rels else None
    a = alpha(alg) if callable(alpha) else alpha
    return make_qp_pair(QPManifold(S, th, R), [b for _, b in pairs], a)


def jacobiator(M: QPManifold, f: Polynomial, g: Polynomial, h: Polynomial) -> Polynomial:
    """Graded Jacobi defect of the derived bracket (bracket degree 1 - N).

    ``[f,[g,h]] - [[f,g],h] - (-1)^((|f|+m)(|g|+m)) [g,[f,h]]`` with
    ``[a,b] = {{a,Theta},b}`` and ``m = 1 - N``.
    """
    m = 1 - M.N
    db = lambda a, b: derived_bracket(M, a, b)
    s = -1 if ((f.degree() + m) * (g.degree() + m)) % 2 else 1
    return db(f, db(g, h)) - db(db(f, g), h) - db(g, db(f, h)).scale(s)


__all__ = [
    "QPManifold", "QPPair", "SmallStructure", "check_master", "derived_bracket", "twist", "twist_terms",
    "twist_preserves_qp", "check_canonical", "cotangent_lift", "lift_algebra", "make_qp_pair",
    "derive_small_structure", "jacobiator", "DEFAULT_MAX_ORDER",
]

"""Darboux symplectic structures of degree N and their graded Poisson bracket.

A pair ``(a, b, s)`` declares ``{a, b} = s`` with ``|a| + |b| = N``.  The mirror
entry follows from graded antisymmetry with bracket degree ``m = -N``::

    {b, a} = -(-1)^((|a|+m)(|b|+m)) {a, b} = -(-1)^(|a||b|) {a, b}

The bracket of arbitrary polynomials is the closed form

    {f, g} = sum_(z,w) (f d^R/dz) {z, w} (d^L/dw g)

over all ordered generator pairs with a nonzero table entry.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import DeclarationError, DegreeError
from .graded_poly import GradedAlgebra, GradedCoordinate, Polynomial, mul, partial

# Overall sign of every generator bracket.  Kept as a module constant so the
# mutation tests can flip it.
BRACKET_SIGN = 1


def mirror_sign(deg_a: int, deg_b: int) -> int:
    """Sign relating ``{b, a}`` to ``{a, b}`` for a Darboux pair."""
    return -1 if (deg_a * deg_b) % 2 == 0 else 1


@dataclass(frozen=True, eq=False)
class SymplecticStructure:
    algebra: GradedAlgebra
    N: int
    pairs: tuple[tuple[GradedCoordinate, GradedCoordinate, int], ...]
    method: str = "closed"
    _table: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.method not in ("closed", "leibniz"):
            raise ValueError(f"unknown bracket method {self.method!r}")
        for a, b, s in self.pairs:
            ia, ib = self.algebra.position(a), self.algebra.position(b)
            self._table[(ia, ib)] = s
            self._table[(ib, ia)] = mirror_sign(a.degree, b.degree) * s

    def __eq__(self, other):
        if not isinstance(other, SymplecticStructure):
            return NotImplemented
        return (self.algebra == other.algebra and self.N == other.N
                and self.pairs == other.pairs and self.method == other.method)

    def __hash__(self):
        return hash((self.algebra, self.N, self.pairs))

    @property
    def bracket_degree(self) -> int:
        return -self.N

    def with_method(self, method: str) -> "SymplecticStructure":
        return SymplecticStructure(self.algebra, self.N, self.pairs, method)

    def table(self, i: int, j: int) -> int:
        """Generator bracket ``{c_i, c_j}`` by coordinate position."""
        return BRACKET_SIGN * self._table.get((i, j), 0)

    def partner(self, coord: GradedCoordinate | str) -> GradedCoordinate:
        i = self.algebra.position(coord)
        for (a, b) in self._table:
            if a == i:
                return self.algebra.coordinates[b]
        raise DeclarationError(f"{coord} is not paired")

    def bracket(self, f: Polynomial, g: Polynomial) -> Polynomial:
        return poisson_bracket(self, f, g)


def make_darboux(algebra: GradedAlgebra, pairs: Iterable[Sequence], N: int) -> SymplecticStructure:
    """Validate and build a Darboux structure.

    ``pairs`` holds ``(a, b)`` or ``(a, b, sign)`` with coordinates or names.
    """
    if N <= 0:
        raise DegreeError("symplectic degree N must be positive")
    norm = []
    seen: dict[str, str] = {}
    for p in pairs:
        a, b = p[0], p[1]
        s = p[2] if len(p) > 2 else 1
        if s not in (1, -1):
            raise DeclarationError(f"pairing sign must be +1 or -1, got {s}")
        a = algebra.coordinate(a if isinstance(a, str) else a.name)
        b = algebra.coordinate(b if isinstance(b, str) else b.name)
        if a.degree + b.degree != N:
            raise DegreeError(f"pair ({a.name}, {b.name}) has degree sum {a.degree + b.degree}, expected {N}")
        for c in (a, b):
            if c.name in seen:
                raise DeclarationError(f"coordinate {c.name} appears in two pairs")
            seen[c.name] = c.name
        if a == b:
            raise DeclarationError(f"coordinate {a.name} paired with itself")
        norm.append((a, b, s))
    missing = [c.name for c in algebra.coordinates if c.name not in seen]
    if missing:
        raise DeclarationError("unpaired coordinates: " + ", ".join(missing))
    return SymplecticStructure(algebra, N, tuple(norm))


def poisson_bracket(S: SymplecticStructure, f: Polynomial, g: Polynomial) -> Polynomial:
    """Graded Poisson bracket of degree ``-S.N``."""
    alg = S.algebra
    if f.algebra != alg or g.algebra != alg:
        raise DeclarationError("bracket arguments must live on the structure's coordinates")
    if S.method == "leibniz":
        from .oracle import leibniz_bracket
        return leibniz_bracket(S, f, g)
    out = alg.zero()
    if not f or not g:
        return out
    used_f = f.coordinates_used()
    has_sym_f = bool(f.symbols_used())
    used_g = g.coordinates_used()
    has_sym_g = bool(g.symbols_used())
    for (i, j) in S._table:
        if i not in used_f and not (has_sym_f and alg.degrees[i] == 0):
            continue
        if j not in used_g and not (has_sym_g and alg.degrees[j] == 0):
            continue
        t = S.table(i, j)
        df = partial(f, alg.coordinates[i], "right")
        if not df:
            continue
        dg = partial(g, alg.coordinates[j], "left")
        if not dg:
            continue
        out = out + mul(df, dg).scale(t)
    return out

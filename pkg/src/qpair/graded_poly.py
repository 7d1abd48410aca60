"""Graded-commutative polynomials with formal smooth-function coefficients.

A :class:`GradedAlgebra` fixes a universe: an ordered list of graded coordinates
and a list of coefficient-symbol families.  Polynomials over it are finite sums
of monomials

    scalar * (product of coefficient symbols) * (sorted product of coordinates)

Coefficient symbols have degree 0 and stand for smooth functions of the
degree-0 coordinates; their partial derivatives are new symbols carrying a
derivative multi-index.  Coordinates of odd degree anticommute; the scalar of a
monomial absorbs the Koszul sign of sorting its coordinates into declaration
order.

Internal term key: ``(funcs, gens)`` where ``funcs`` is an ascending tuple of
symbol keys ``(family_position, indices, derivs)`` and ``gens`` an ascending
tuple of coordinate positions (even coordinates may repeat).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import DeclarationError, DegreeError

Scalar = int | Fraction
SymbolKey = tuple  # (family_position, indices, derivs)
TermKey = tuple  # (funcs, gens)

RESERVED_NAMES = frozenset({"d", "sum"})


def _norm(c: Scalar) -> Scalar:
    if type(c) is Fraction and c.denominator == 1:
        return c.numerator
    return c


def as_scalar(value) -> Scalar:
    if isinstance(value, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(value, int):
        return value
    if isinstance(value, Fraction):
        return _norm(value)
    if isinstance(value, str):
        return _norm(Fraction(value))
    raise TypeError(f"exact rational scalar expected, got {type(value).__name__}")


@dataclass(frozen=True)
class GradedCoordinate:
    name: str
    degree: int
    family: str | None = None
    index: int | None = None

    def __post_init__(self):
        if self.degree < 0:
            raise DegreeError(f"degree must be non-negative ({self.name}: {self.degree})")

    @property
    def parity(self) -> int:
        return self.degree % 2

    @property
    def label(self) -> str:
        """Name used inside derivative multi-indices."""
        return str(self.index) if self.index is not None else self.name


def coordinate_family(family: str, indices: Iterable[int], degree: int) -> list[GradedCoordinate]:
    return [GradedCoordinate(f"{family}[{i}]", degree, family, i) for i in indices]


@dataclass(frozen=True)
class SymbolFamily:
    """A family of coefficient functions ``name[i1,...,ik]``.

    ``blocks`` lists index-slot groups together with their symmetry,
    ``"sym"`` or ``"antisym"``.  Constant families do not depend on the
    degree-0 coordinates (their derivatives vanish).
    """

    name: str
    arity: int = 0
    blocks: tuple[tuple[tuple[int, ...], str], ...] = ()
    constant: bool = False
    inverse: str | None = None

    def __post_init__(self):
        seen: set[int] = set()
        for slots, kind in self.blocks:
            if kind not in ("sym", "antisym"):
                raise DeclarationError(f"unknown symmetry {kind!r} for {self.name}")
            for s in slots:
                if not 0 <= s < self.arity or s in seen:
                    raise DeclarationError(f"bad symmetry slot {s} for {self.name}")
                seen.add(s)

    @classmethod
    def antisymmetric(cls, name: str, arity: int, **kw) -> "SymbolFamily":
        return cls(name, arity, ((tuple(range(arity)), "antisym"),), **kw)

    @classmethod
    def symmetric(cls, name: str, arity: int, **kw) -> "SymbolFamily":
        return cls(name, arity, ((tuple(range(arity)), "sym"),), **kw)

    def canonical(self, indices: Sequence[int]) -> tuple[int, tuple[int, ...]]:
        """Return ``(sign, canonical indices)``; sign 0 means the symbol vanishes."""
        if len(indices) != self.arity:
            raise DeclarationError(f"{self.name} takes {self.arity} indices, got {len(indices)}")
        idx = list(indices)
        sign = 1
        for slots, kind in self.blocks:
            vals = [idx[s] for s in slots]
            if kind == "antisym":
                if len(set(vals)) < len(vals):
                    return 0, tuple(idx)
                sign *= _perm_sign(vals)
            for s, v in zip(slots, sorted(vals)):
                idx[s] = v
        return sign, tuple(idx)


def _perm_sign(vals: Sequence) -> int:
    """Sign of the permutation sorting distinct ``vals``."""
    sign = 1
    v = list(vals)
    for i in range(len(v)):
        for j in range(i + 1, len(v)):
            if v[i] > v[j]:
                sign = -sign
    return sign


@dataclass(frozen=True, eq=False)
class GradedAlgebra:
    """The coordinate/symbol universe.  Declaration order is the global order."""

    coordinates: tuple[GradedCoordinate, ...]
    families: tuple[SymbolFamily, ...] = ()
    _pos: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "coordinates", tuple(self.coordinates))
        object.__setattr__(self, "families", tuple(self.families))
        pos: dict[str, int] = {}
        for i, c in enumerate(self.coordinates):
            if c.name in pos:
                raise DeclarationError(f"duplicate coordinate {c.name}")
            pos[c.name] = i
        fam: dict[str, int] = {}
        for i, f in enumerate(self.families):
            if f.name in fam or f.name in pos:
                raise DeclarationError(f"duplicate name {f.name}")
            fam[f.name] = i
        for name in itertools.chain(pos, fam):
            if name in RESERVED_NAMES:
                raise DeclarationError(f"{name!r} is reserved")
        labels: dict[str, int | None] = {}
        for i, c in enumerate(self.coordinates):
            if c.degree == 0:
                labels[c.label] = None if c.label in labels else i
        self._pos.update(
            coord=pos,
            family=fam,
            labels=labels,
            parity=tuple(c.parity for c in self.coordinates),
            degrees=tuple(c.degree for c in self.coordinates),
        )

    # equality is structural so that re-elaborated universes compare equal
    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, GradedAlgebra):
            return NotImplemented
        return self.coordinates == other.coordinates and self.families == other.families

    def __hash__(self):
        return hash((self.coordinates, self.families))

    # -- lookups -----------------------------------------------------------
    @property
    def parities(self) -> tuple[int, ...]:
        return self._pos["parity"]

    @property
    def degrees(self) -> tuple[int, ...]:
        return self._pos["degrees"]

    def position(self, coord: GradedCoordinate | str) -> int:
        name = coord if isinstance(coord, str) else coord.name
        try:
            i = self._pos["coord"][name]
        except KeyError:
            raise DeclarationError(f"unknown coordinate {name}") from None
        if not isinstance(coord, str) and self.coordinates[i] != coord:
            raise DeclarationError(f"coordinate {name} belongs to a different universe")
        return i

    def coordinate(self, name: str) -> GradedCoordinate:
        return self.coordinates[self.position(name)]

    def has_coordinate(self, name: str) -> bool:
        return name in self._pos["coord"]

    def family_coordinates(self, family: str) -> list[GradedCoordinate]:
        return [c for c in self.coordinates if c.family == family]

    def family_position(self, name: str) -> int:
        try:
            return self._pos["family"][name]
        except KeyError:
            raise DeclarationError(f"unknown coefficient symbol {name}") from None

    def has_family(self, name: str) -> bool:
        return name in self._pos["family"]

    def derivative_position(self, label: str | int) -> int:
        label = str(label)
        labels = self._pos["labels"]
        if label not in labels:
            raise DeclarationError(f"no degree-0 coordinate with label {label}")
        if labels[label] is None:
            raise DeclarationError(f"derivative label {label} is ambiguous")
        return labels[label]

    def restrict(self, names: Iterable[str]) -> "GradedAlgebra":
        keep = set(names)
        return GradedAlgebra(tuple(c for c in self.coordinates if c.name in keep), self.families)

    # -- constructors ------------------------------------------------------
    def zero(self) -> "Polynomial":
        return Polynomial(self, {})

    def const(self, value) -> "Polynomial":
        c = as_scalar(value)
        return Polynomial(self, {((), ()): c} if c else {})

    def var(self, name: str | GradedCoordinate) -> "Polynomial":
        return Polynomial(self, {((), (self.position(name),)): 1})

    def sym(self, family: str, *indices: int, derivs: Sequence[str | int] = ()) -> "Polynomial":
        """The coefficient symbol ``family[indices]`` differentiated along ``derivs``."""
        fpos = self.family_position(family)
        fam = self.families[fpos]
        dpos = tuple(sorted(self.derivative_position(d) for d in derivs))
        sign, idx = fam.canonical(indices)
        if sign == 0 or (fam.constant and dpos):
            return self.zero()
        return Polynomial(self, {(((fpos, idx, dpos),), ()): sign})

    # -- rendering helpers ---------------------------------------------------
    def symbol_text(self, key: SymbolKey) -> str:
        fpos, idx, dpos = key
        fam = self.families[fpos]
        text = fam.name
        if fam.arity:
            text += "[" + ",".join(str(i) for i in idx) + "]"
        if dpos:
            text = "d[" + ",".join(self.coordinates[p].label for p in dpos) + "]" + text
        return text


def _scalar_text(c: Scalar) -> str:
    return str(c) if type(c) is int else f"{c.numerator}/{c.denominator}"


def merge_sign(a: tuple[int, ...], b: tuple[int, ...], parity: Sequence[int]) -> tuple[int, tuple[int, ...]]:
    """Sorted concatenation of generator words with its Koszul sign.

    Returns ``(0, ())`` when an odd generator would appear twice.
    """
    if not a:
        return 1, b
    if not b:
        return 1, a
    inversions = 0
    for y in b:
        if parity[y]:
            for x in a:
                if parity[x]:
                    if x == y:
                        return 0, ()
                    if x > y:
                        inversions += 1
    return (-1 if inversions & 1 else 1), tuple(sorted(a + b))


def _merge_funcs(a: tuple, b: tuple) -> tuple:
    if not a:
        return b
    if not b:
        return a
    return tuple(sorted(a + b))


class Polynomial:
    """Immutable normalized graded polynomial."""

    __slots__ = ("algebra", "terms", "_hash")

    def __init__(self, algebra: GradedAlgebra, terms: Mapping[TermKey, Scalar]):
        self.algebra = algebra
        self.terms = {k: v for k, v in terms.items() if v}
        self._hash = None

    # -- basic protocol ----------------------------------------------------
    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __len__(self) -> int:
        return len(self.terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, int) and other == 0:
            return not self.terms
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.algebra == other.algebra and self.terms == other.terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __repr__(self) -> str:
        return f"Polynomial({self.render()})"

    def __str__(self) -> str:
        return self.render()

    def _check(self, other: "Polynomial") -> None:
        if other.algebra is not self.algebra and other.algebra != self.algebra:
            raise DeclarationError("polynomials belong to different coordinate universes")

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            self._check(other)
            return other
        return self.algebra.const(other)

    # -- arithmetic ----------------------------------------------------------
    def __add__(self, other) -> "Polynomial":
        other = self._coerce(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = _norm(out.get(k, 0) + v)
        return Polynomial(self.algebra, out)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial(self.algebra, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other) -> "Polynomial":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Polynomial":
        return self._coerce(other) - self

    def scale(self, c) -> "Polynomial":
        c = as_scalar(c)
        if not c:
            return self.algebra.zero()
        return Polynomial(self.algebra, {k: _norm(v * c) for k, v in self.terms.items()})

    def __mul__(self, other) -> "Polynomial":
        if not isinstance(other, Polynomial):
            return self.scale(other)
        return mul(self, other)

    def __rmul__(self, other) -> "Polynomial":
        return self.scale(other)

    def __pow__(self, n: int) -> "Polynomial":
        if n < 0:
            raise ValueError("negative power")
        out = self.algebra.const(1)
        for _ in range(n):
            out = out * self
        return out

    # -- grading -------------------------------------------------------------
    def degrees(self) -> set[int]:
        deg = self.algebra.degrees
        return {sum(deg[g] for g in gens) for (_, gens) in self.terms}

    def is_homogeneous(self) -> bool:
        return len(self.degrees()) <= 1

    def degree(self) -> int | None:
        """Degree of a homogeneous polynomial; ``None`` for zero or mixed."""
        ds = self.degrees()
        return next(iter(ds)) if len(ds) == 1 else None

    def coordinates_used(self) -> set[int]:
        return {g for (_, gens) in self.terms for g in gens}

    def symbols_used(self) -> set[SymbolKey]:
        return {s for (funcs, _) in self.terms for s in funcs}

    def is_scalar_function(self) -> bool:
        """True if the polynomial contains no coordinates (pure coefficient data)."""
        return all(not gens for (_, gens) in self.terms)

    def coefficient(self, word: Sequence[str] | tuple[int, ...]) -> "Polynomial":
        """Coefficient (a generator-free polynomial) of a sorted generator word."""
        gens = tuple(sorted(self.algebra.position(w) if isinstance(w, str) else w for w in word))
        return Polynomial(self.algebra, {(f, ()): c for (f, g), c in self.terms.items() if g == gens})

    def words(self) -> list[tuple[int, ...]]:
        return sorted({g for (_, g) in self.terms})

    # -- rendering -----------------------------------------------------------
    def render(self, coordinate_text=None, symbol_text=None) -> str:
        if not self.terms:
            return "0"
        alg = self.algebra
        coordinate_text = coordinate_text or (lambda i: alg.coordinates[i].name)
        symbol_text = symbol_text or alg.symbol_text
        pieces: list[str] = []
        for (funcs, gens) in sorted(self.terms, key=lambda k: (k[1], k[0])):
            c = self.terms[(funcs, gens)]
            factors = [symbol_text(s) for s in funcs]
            for g, grp in itertools.groupby(gens):
                n = len(list(grp))
                factors.append(coordinate_text(g) + (f"^{n}" if n > 1 else ""))
            mag = abs(c)
            if factors:
                body = "*".join(factors)
                if mag != 1:
                    body = _scalar_text(mag) + "*" + body
            else:
                body = _scalar_text(mag)
            if not pieces:
                pieces.append(("-" if c < 0 else "") + body)
            else:
                pieces.append((" - " if c < 0 else " + ") + body)
        return "".join(pieces)


def mul(f: Polynomial, g: Polynomial) -> Polynomial:
    """Normalized graded-commutative product."""
    f._check(g)
    parity = f.algebra.parities
    out: dict[TermKey, Scalar] = {}
    for (fa, ga), ca in f.terms.items():
        for (fb, gb), cb in g.terms.items():
            s, gens = merge_sign(ga, gb, parity)
            if not s:
                continue
            key = (_merge_funcs(fa, fb), gens)
            out[key] = _norm(out.get(key, 0) + (ca * cb if s > 0 else -(ca * cb)))
    return Polynomial(f.algebra, out)


def _derive_symbol(alg: GradedAlgebra, key: SymbolKey, pos: int) -> SymbolKey | None:
    fpos, idx, dpos = key
    if alg.families[fpos].constant:
        return None
    return (fpos, idx, tuple(sorted(dpos + (pos,))))


def partial(f: Polynomial, z: GradedCoordinate | str, side: str = "left") -> Polynomial:
    """Graded derivation along coordinate ``z`` acting from the left or right.

    For a degree-0 coordinate the coefficient symbols are differentiated too,
    by extending their derivative multi-index.
    """
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    alg = f.algebra
    pos = alg.position(z)
    parity = alg.parities
    odd = parity[pos]
    out: dict[TermKey, Scalar] = {}

    def add(key, c):
        out[key] = _norm(out.get(key, 0) + c)

    for (funcs, gens), c in f.terms.items():
        n = gens.count(pos)
        if n:
            i = gens.index(pos)
            rest = gens[:i] + gens[i + 1:]
            if odd:
                passed = gens[:i] if side == "left" else gens[i + 1:]
                if sum(parity[g] for g in passed) & 1:
                    add((funcs, rest), -c)
                else:
                    add((funcs, rest), c)
            else:
                add((funcs, rest), c * n)
        if alg.degrees[pos] == 0 and funcs:
            for j, s in enumerate(funcs):
                ds = _derive_symbol(alg, s, pos)
                if ds is not None:
                    add((tuple(sorted(funcs[:j] + (ds,) + funcs[j + 1:])), gens), c)
    return Polynomial(alg, out)


def substitute(f: Polynomial, assignment: Mapping[str | GradedCoordinate, Polynomial | int]) -> Polynomial:
    """Simultaneous substitution of coordinates, then normalization.

    Assigned values must be homogeneous of the coordinate's degree, or zero.
    Degree-0 coordinates can only be substituted in polynomials whose
    coefficient symbols are all constant.
    """
    alg = f.algebra
    table: dict[int, Polynomial] = {}
    for k, v in assignment.items():
        pos = alg.position(k)
        if not isinstance(v, Polynomial):
            v = alg.const(v)
        f._check(v)
        if v and (not v.is_homogeneous() or v.degree() != alg.degrees[pos]):
            raise DegreeError(
                f"value for {alg.coordinates[pos].name} must have degree {alg.degrees[pos]}, got {sorted(v.degrees())}"
            )
        table[pos] = v
    if not table:
        return f
    moving_x = [p for p in table if alg.degrees[p] == 0]
    if moving_x and any(not alg.families[s[0]].constant for s in f.symbols_used()):
        raise DeclarationError("cannot substitute degree-0 coordinates inside coefficient functions")
    out = alg.zero()
    for (funcs, gens), c in f.terms.items():
        if not any(g in table for g in gens):
            out = out + Polynomial(alg, {(funcs, gens): c})
            continue
        piece = Polynomial(alg, {(funcs, ()): c})
        for g in gens:
            piece = mul(piece, table[g] if g in table else Polynomial(alg, {((), (g,)): 1}))
            if not piece:
                break
        out = out + piece
    return out


def restrict_to_zero(f: Polynomial, names: Iterable[str | GradedCoordinate]) -> Polynomial:
    """Set the given coordinates to zero (restriction to a coordinate subspace)."""
    alg = f.algebra
    kill = {alg.position(n) for n in names}
    return Polynomial(alg, {k: c for k, c in f.terms.items() if not kill.intersection(k[1])})


# -- relations ---------------------------------------------------------------

def _lex_key(funcs: tuple) -> tuple:
    # lexicographic monomial order, later-declared symbols dominate
    return funcs[::-1]


def _divides(small: tuple, big: tuple) -> tuple | None:
    """Multiset difference ``big - small`` if ``small`` divides ``big``."""
    rest = list(big)
    for s in small:
        try:
            rest.remove(s)
        except ValueError:
            return None
    return tuple(rest)


@dataclass(frozen=True)
class Rule:
    lead: tuple
    replacement: tuple  # ((funcs, scalar), ...), every funcs < lead


class RelationSet:
    """Linear-algebra normalized rewriting rules among coefficient symbols.

    Each relation is a generator-free polynomial asserted to vanish.  The set is
    brought to reduced row-echelon form over the rationals with respect to the
    lexicographic monomial order on symbol products; every rule rewrites its
    leading product into strictly smaller products, so rewriting terminates.
    """

    def __init__(self, algebra: GradedAlgebra, relations: Iterable[Polynomial] = (), names: Iterable[str] = ()):
        self.algebra = algebra
        rows: list[dict[tuple, Scalar]] = []
        for r in relations:
            if r.algebra != algebra:
                raise DeclarationError("relation belongs to a different coordinate universe")
            if not r.is_scalar_function():
                raise DeclarationError("relations may only involve coefficient symbols")
            rows.append({funcs: c for (funcs, _), c in r.terms.items()})
        self.names = tuple(names)
        self.rules: tuple[Rule, ...] = tuple(_row_echelon(rows))

    def __len__(self) -> int:
        return len(self.rules)

    def __bool__(self) -> bool:
        return bool(self.rules)

    def reduce(self, f: Polynomial) -> Polynomial:
        if not self.rules or not f.terms:
            return f
        if f.algebra != self.algebra:
            raise DeclarationError("polynomial and relations belong to different universes")
        groups: dict[tuple, dict[tuple, Scalar]] = {}
        for (funcs, gens), c in f.terms.items():
            groups.setdefault(gens, {})[funcs] = c
        out: dict[TermKey, Scalar] = {}
        for gens, poly in groups.items():
            for funcs, c in self._reduce_group(poly).items():
                out[(funcs, gens)] = c
        return Polynomial(f.algebra, out)

    def _reduce_group(self, poly: dict) -> dict:
        work = {k: v for k, v in poly.items() if v}
        done: dict[tuple, Scalar] = {}
        while work:
            m = max(work, key=_lex_key)
            c = work.pop(m)
            best = None
            for rule in self.rules:
                q = _divides(rule.lead, m)
                if q is not None and (best is None or _lex_key(rule.lead) > _lex_key(best[0].lead)):
                    best = (rule, q)
            if best is None:
                done[m] = c
                continue
            rule, q = best
            for funcs, rc in rule.replacement:
                nm = _merge_funcs(q, funcs)
                v = _norm(work.get(nm, 0) + c * rc)
                if v:
                    work[nm] = v
                else:
                    work.pop(nm, None)
        return done


def _row_echelon(rows: list[dict]) -> list[Rule]:
    basis: list[tuple[tuple, dict]] = []  # (lead, row normalized with lead coefficient 1)
    for row in rows:
        row = {k: v for k, v in row.items() if v}
        for lead, b in basis:
            c = row.get(lead)
            if c:
                for k, v in b.items():
                    nv = _norm(row.get(k, 0) - c * v)
                    if nv:
                        row[k] = nv
                    else:
                        row.pop(k, None)
        if not row:
            continue
        lead = max(row, key=_lex_key)
        lc = row[lead]
        row = {k: _norm(Fraction(v) / lc) for k, v in row.items()}
        new_basis = []
        for l2, b in basis:
            c = b.get(lead)
            if c:
                b = dict(b)
                for k, v in row.items():
                    nv = _norm(b.get(k, 0) - c * v)
                    if nv:
                        b[k] = nv
                    else:
                        b.pop(k, None)
            new_basis.append((l2, b))
        new_basis.append((lead, row))
        basis = new_basis
    rules = []
    for lead, b in sorted(basis, key=lambda t: _lex_key(t[0])):
        repl = tuple(sorted(((k, _norm(-v)) for k, v in b.items() if k != lead), key=lambda t: _lex_key(t[0])))
        rules.append(Rule(lead, repl))
    return rules


def reduce(f: Polynomial, relations: RelationSet | None) -> Polynomial:
    return relations.reduce(f) if relations else f


def exterior_derivative(algebra: GradedAlgebra, family: str, indices: Sequence[int]) -> Polynomial:
    """Component ``(dH)_{i0..ip}`` of the exterior derivative of a form family."""
    out = algebra.zero()
    for k, i in enumerate(indices):
        rest = tuple(indices[:k]) + tuple(indices[k + 1:])
        term = algebra.sym(family, *rest, derivs=(i,))
        out = out + (term if k % 2 == 0 else -term)
    return out


def closedness_relations(algebra: GradedAlgebra, family: str) -> list[Polynomial]:
    """All components of ``dH = 0`` for a totally antisymmetric family ``H``."""
    fam = algebra.families[algebra.family_position(family)]
    labels = sorted(int(c.label) for c in algebra.coordinates if c.degree == 0 and c.index is not None)
    rels = []
    for subset in itertools.combinations(labels, fam.arity + 1):
        r = exterior_derivative(algebra, family, subset)
        if r:
            rels.append(r)
    return rels

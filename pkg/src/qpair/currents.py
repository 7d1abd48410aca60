"""Current functions and the two-part decomposition of their commutators.

For currents built from functions ``J1, J2`` of degree at most ``n`` on a QP
pair, the commutator has exactly two pieces of target-space data:

* the algebraic part ``{{J1, Theta}, J2}``, the coefficient of the delta
  function, and
* the anomaly ``{J1, J2}``, the coefficient of the derivative of the delta.

Both are restricted to the small manifold (Lagrangian coordinates set to zero)
and reduced by the pair's relations.  Unrestricted copies are kept because the
mapping-space twist turns Lagrangian coordinates into derivatives of fields
rather than killing them; :func:`render_classical` shows that substitution.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .errors import DeclarationError, DegreeError
from .graded_poly import Polynomial, reduce
from .qp import DEFAULT_MAX_ORDER, QPPair, derived_bracket, twist


@dataclass(frozen=True)
class CurrentFunction:
    poly: Polynomial
    n: int
    name: str = ""

    def __post_init__(self):
        if self.poly and max(self.poly.degrees()) > self.n:
            raise DegreeError(
                f"current function {self.name or self.poly.render()} has degree {max(self.poly.degrees())} > n = {self.n}"
            )

    @property
    def degree(self) -> int | None:
        return self.poly.degree()


@dataclass(frozen=True)
class CurrentCommutator:
    algebraic: Polynomial
    anomaly: Polynomial
    algebraic_full: Polynomial
    anomaly_full: Polynomial

    @property
    def anomaly_free(self) -> bool:
        return not self.anomaly_full


def _as_current(P: QPPair, J) -> CurrentFunction:
    if isinstance(J, CurrentFunction):
        if J.n != P.n:
            raise DegreeError(f"current declared for n = {J.n} used on a pair with n = {P.n}")
        return J
    return CurrentFunction(J, P.n)


def current_commutator(P: QPPair, J1, J2, reduced: bool = True) -> CurrentCommutator:
    J1, J2 = _as_current(P, J1), _as_current(P, J2)
    M = P.big
    rel = M.relations if reduced else None
    alg_full = reduce(derived_bracket(M, J1.poly, J2.poly), rel)
    anom_full = reduce(M.bracket(J1.poly, J2.poly), rel)
    return CurrentCommutator(
        algebraic=reduce(P.restrict(alg_full), rel),
        anomaly=reduce(P.restrict(anom_full), rel),
        algebraic_full=alg_full,
        anomaly_full=anom_full,
    )


def twist_current_basis(P: QPPair, basis, max_order: int = DEFAULT_MAX_ORDER) -> list[CurrentFunction]:
    """Transport a commuting basis along the canonical function.

    Each element is mapped to ``exp(-ad alpha) f``: with ``alpha`` canonical,
    ``exp(ad alpha) Theta`` vanishes on the Lagrangian, and the inverse twist is
    the one under which the derived bracket of the currents closes.  The input
    must be pairwise commuting under the big bracket; twisting preserves that.
    """
    items = [_as_current(P, b) for b in basis]
    M = P.big
    for a, b in itertools.combinations_with_replacement(items, 2):
        if M.bracket(a.poly, b.poly):
            raise DeclarationError(
                f"basis elements {a.name or a.poly.render()} and {b.name or b.poly.render()} do not commute"
            )
    minus = P.alpha.scale(-1)
    return [CurrentFunction(twist(M, c.poly, minus, max_order), c.n, c.name) for c in items]


def _entry(args):
    P, a, b, reduced = args
    return current_commutator(P, a, b, reduced)


def commutator_table(P: QPPair, currents, reduced: bool = True, jobs: int = 1) -> list[list[CurrentCommutator]]:
    """All ordered pairs; with ``jobs > 1`` entries are computed in worker processes."""
    items = [_as_current(P, J) for J in currents]
    tasks = [(P, a, b, reduced) for a in items for b in items]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            flat = list(pool.map(_entry, tasks))
    else:
        flat = [_entry(t) for t in tasks]
    k = len(items)
    return [flat[i * k:(i + 1) * k] for i in range(k)]


def render_classical(J, P: QPPair) -> str:
    """Presentational form of a current with each Lagrangian coordinate shown as ``d`` of a field.

    A Lagrangian coordinate ``c`` is big-paired with a small coordinate ``s``;
    it is printed as ``d`` applied to the small partner of ``s``.  When the
    small table entry of ``s`` is not a unit (a metric, say), the fiber
    coordinate is written through the declared inverse symbol, e.g.
    ``(k[1,1]*dq[1] + k[1,2]*dq[2])``.  Non-constant coefficient symbols get
    an ``(x)`` suffix.  No algebra is done on the result.
    """
    J = _as_current(P, J)
    M = P.big
    alg = M.algebra
    lag = set(P.lagrangian)
    big_partner = {}
    for a, b, _ in M.structure.pairs:
        big_partner[a.name] = b.name
        big_partner[b.name] = a.name
    small = P.small_structure
    text_of: dict[int, str] = {}
    for i, c in enumerate(alg.coordinates):
        if c.name not in lag:
            text_of[i] = c.name
            continue
        s = big_partner[c.name]
        entries = [(b, v) for (a, b), v in small.table.items() if a == s] if small else []
        unit = [b for b, v in entries if v.terms == {((), ()): 1} or v.terms == {((), ()): -1}]
        if len(entries) == 1 and unit:
            text_of[i] = "d" + unit[0]
            continue
        text_of[i] = _inverse_text(alg, alg.coordinate(s), entries) or "d" + s

    def sym_text(key):
        t = alg.symbol_text(key)
        return t if alg.families[key[0]].constant else t + "(x)"

    return J.poly.render(coordinate_text=lambda i: text_of[i], symbol_text=sym_text)


def _inverse_text(alg, s, entries) -> str | None:
    """``k[A,B]*dq[B]`` summed over B when every table entry is an inverse-metric symbol."""
    inv = None
    parts = []
    for b, v in sorted(entries, key=lambda e: alg.position(e[0])):
        if len(v.terms) != 1:
            return None
        (funcs, gens), = v.terms
        if len(funcs) != 1 or gens:
            return None
        fam = alg.families[funcs[0][0]]
        if fam.inverse is None or (inv is not None and fam.inverse != inv):
            return None
        inv = fam.inverse
        parts.append(f"{inv}[{s.label},{alg.coordinate(b).label}]*d{b}")
    if not parts:
        return None
    return parts[0] if len(parts) == 1 else "(" + " + ".join(parts) + ")"

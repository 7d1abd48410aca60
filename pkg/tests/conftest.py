"""Shared builders for the test suite: small Darboux structures and random polynomials."""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

import pytest

from qpair.graded_poly import GradedAlgebra, GradedCoordinate, Polynomial, SymbolFamily, coordinate_family
from qpair.symplectic import make_darboux

# (small family, degree) pairs per bracket degree N; each pairs with a conjugate of degree N - d
LAYOUTS = {
    1: [("x", 0)],
    2: [("x", 0), ("p", 1)],
    3: [("x", 0), ("q", 1)],
    4: [("x", 0), ("p", 1), ("q", 2)],
}

FAMILIES = (
    SymbolFamily("f", 1),
    SymbolFamily.antisymmetric("w", 2),
    SymbolFamily("c", 1, constant=True),
)


def darboux(N: int, dim: int = 2, families=FAMILIES):
    """Darboux structure of degree N: each small family gets a conjugate family ``<name>c``."""
    coords, pairs = [], []
    conj = []
    for fam, d in LAYOUTS[N]:
        coords += coordinate_family(fam, range(1, dim + 1), d)
        conj += coordinate_family(fam + "c", range(1, dim + 1), N - d)
    coords += conj
    alg = GradedAlgebra(tuple(coords), tuple(families))
    for fam, _ in LAYOUTS[N]:
        for i in range(1, dim + 1):
            pairs.append((f"{fam}[{i}]", f"{fam}c[{i}]"))
    return make_darboux(alg, pairs, N)


def words_of_degree(alg: GradedAlgebra, degree: int, max_len: int = 3):
    """All normalized generator words (position tuples) of the given degree."""
    deg = alg.degrees
    par = alg.parities
    out = []
    for k in range(0, max_len + 1):
        for w in itertools.combinations_with_replacement(range(len(deg)), k):
            if sum(deg[g] for g in w) != degree:
                continue
            if any(par[g] and w.count(g) > 1 for g in set(w)):
                continue
            out.append(w)
    return out


def random_coefficient(alg: GradedAlgebra, rng: random.Random) -> Polynomial:
    """Random rational times at most two coefficient symbols (possibly differentiated)."""
    dim = sum(1 for c in alg.coordinates if c.degree == 0 and c.index is not None)
    c = Fraction(rng.choice([1, -1, 2, -3]), rng.choice([1, 1, 2, 3]))
    out = alg.const(c)
    if not alg.families or not dim:
        return out
    for _ in range(rng.choice([0, 1, 1, 2])):
        fam = rng.choice(alg.families)
        idx = [rng.randint(1, dim) for _ in range(fam.arity)]
        derivs = () if fam.constant or rng.random() < 0.6 else (rng.randint(1, dim),)
        out = out * alg.sym(fam.name, *idx, derivs=derivs)
    return out


def random_poly(alg: GradedAlgebra, degree: int, rng: random.Random, max_terms: int = 3,
                max_len: int = 3) -> Polynomial:
    """A random homogeneous polynomial of the given degree (possibly zero if no word fits)."""
    words = words_of_degree(alg, degree, max_len)
    out = alg.zero()
    if not words:
        return out
    for _ in range(rng.randint(1, max_terms)):
        w = rng.choice(words)
        out = out + random_coefficient(alg, rng) * Polynomial(alg, {((), w): 1})
    return out


def max_degree(N: int) -> int:
    return N + 1


@pytest.fixture
def rng():
    return random.Random(20240601)


def pytest_terminal_summary(terminalreporter):
    lines = []
    for key in ("passed", "failed"):
        for rep in terminalreporter.stats.get(key, []):
            if getattr(rep, "when", "call") != "call":
                continue
            lines += [value for name, value in getattr(rep, "user_properties", []) if name == "criterion"]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)

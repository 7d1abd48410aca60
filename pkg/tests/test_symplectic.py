import random
import time

import pytest

import identities as ids
from conftest import darboux, random_poly
from qpair.errors import DeclarationError, DegreeError
from qpair.graded_poly import GradedAlgebra, SymbolFamily, coordinate_family
from qpair.oracle import leibniz_bracket
from qpair.symplectic import make_darboux, mirror_sign, poisson_bracket


def example_structure(dim=2, families=()):
    coords = (coordinate_family("x", range(1, dim + 1), 0) + coordinate_family("p", range(1, dim + 1), 1)
              + coordinate_family("xi", range(1, dim + 1), 2) + coordinate_family("q", range(1, dim + 1), 1))
    alg = GradedAlgebra(tuple(coords), tuple(families))
    pairs = [(f"x[{i}]", f"xi[{i}]") for i in range(1, dim + 1)] + [(f"p[{i}]", f"q[{i}]") for i in range(1, dim + 1)]
    return make_darboux(alg, pairs, 2)


def test_generator_table():
    S = example_structure()
    alg = S.algebra
    names = [c.name for c in alg.coordinates]
    for a in names:
        for b in names:
            v = S.bracket(alg.var(a), alg.var(b))
            ia, ib = a.split("[")[1], b.split("[")[1]
            if (a.startswith("x[") and b.startswith("xi[")) or (a.startswith("p[") and b.startswith("q[")):
                assert v == (alg.const(1) if ia == ib else 0), (a, b)
            elif (a.startswith("xi[") and b.startswith("x[")):
                assert v == (alg.const(-1) if ia == ib else 0)
            elif (a.startswith("q[") and b.startswith("p[")):
                # degree-1/degree-1 mirror: -(-1)^(1*1) = +1
                assert v == (alg.const(1) if ia == ib else 0)
            else:
                assert v == 0, (a, b)


def test_mirror_sign():
    assert mirror_sign(0, 2) == -1
    assert mirror_sign(1, 1) == 1
    assert mirror_sign(1, 3) == 1
    assert mirror_sign(2, 2) == -1


def test_make_darboux_valid_and_invalid():
    S = example_structure()
    assert S.bracket_degree == -2
    alg = GradedAlgebra(tuple(coordinate_family("x", [1], 0) + coordinate_family("xi", [1], 1)))
    with pytest.raises(DegreeError):
        make_darboux(alg, [("x[1]", "xi[1]")], 3)
    with pytest.raises(DeclarationError):
        make_darboux(example_structure().algebra, [("x[1]", "xi[1]")], 2)
    alg2 = GradedAlgebra(tuple(coordinate_family("x", [1], 0) + coordinate_family("xi", [1], 2)
                               + coordinate_family("y", [1], 0)))
    with pytest.raises(DeclarationError):
        make_darboux(alg2, [("x[1]", "xi[1]"), ("y[1]", "xi[1]")], 2)
    with pytest.raises(DegreeError):
        make_darboux(alg, [("x[1]", "xi[1]")], 0)


def test_n_brane_structure():
    n = 3
    coords = (coordinate_family("x", [1, 2], 0) + coordinate_family("p", [1, 2], n)
              + coordinate_family("xi", [1, 2], n + 1) + coordinate_family("chi", [1, 2], 1))
    alg = GradedAlgebra(tuple(coords))
    S = make_darboux(alg, [(f"x[{i}]", f"xi[{i}]") for i in (1, 2)] + [(f"p[{i}]", f"chi[{i}]") for i in (1, 2)], n + 1)
    assert S.bracket(alg.var("x[1]"), alg.var("xi[1]")) == alg.const(1)
    assert S.bracket(alg.var("p[2]"), alg.var("chi[2]")) == alg.const(1)


def test_inner_product_of_degree_one_currents():
    fams = tuple(SymbolFamily(n, 1) for n in ("a", "u", "b", "v"))
    S = example_structure(2, fams)
    alg = S.algebra
    J1 = sum((alg.sym("a", i) * alg.var(f"q[{i}]") + alg.sym("u", i) * alg.var(f"p[{i}]") for i in (1, 2)), alg.zero())
    J2 = sum((alg.sym("b", i) * alg.var(f"q[{i}]") + alg.sym("v", i) * alg.var(f"p[{i}]") for i in (1, 2)), alg.zero())
    expected = sum((alg.sym("a", i) * alg.sym("v", i) + alg.sym("u", i) * alg.sym("b", i) for i in (1, 2)), alg.zero())
    assert S.bracket(J1, J2) == expected


def test_functions_of_x_commute():
    S = example_structure(2, (SymbolFamily("f", 0), SymbolFamily("g", 0)))
    alg = S.algebra
    assert S.bracket(alg.sym("f"), alg.sym("g")) == 0


def test_foreign_polynomials_rejected():
    S = example_structure()
    other = example_structure(3).algebra
    with pytest.raises(DeclarationError):
        S.bracket(other.var("x[1]"), other.var("xi[1]"))


def test_coefficient_derivatives_enter_bracket():
    S = example_structure(2, (SymbolFamily("f", 0),))
    alg = S.algebra
    assert S.bracket(alg.sym("f"), alg.var("xi[1]")) == alg.sym("f", derivs=(1,))
    assert S.bracket(alg.var("xi[2]"), alg.sym("f")) == -alg.sym("f", derivs=(2,))


@pytest.mark.parametrize("N", [1, 2, 3, 4])
def test_poisson_identities(N):
    """All four identities on 500 random homogeneous triples."""
    S = darboux(N)
    rng = random.Random(1000 + N)
    t0 = time.perf_counter()
    for _ in range(500):
        f, g, h = ids.random_triple(S, rng)
        assert ids.antisymmetry(S, f, g) == 0
        assert ids.leibniz_right(S, f, g, h) == 0
        assert ids.leibniz_left(S, f, g, h) == 0
        assert ids.jacobi(S, f, g, h) == 0
        assert not ids.degree_defect(S, f, g)
    assert time.perf_counter() - t0 < 30


@pytest.mark.parametrize("N", [1, 2, 3, 4])
def test_oracle_equivalence(N):
    S = darboux(N)
    L = S.with_method("leibniz")
    rng = random.Random(2000 + N)
    for _ in range(150):
        f = random_poly(S.algebra, rng.randint(0, N + 1), rng)
        g = random_poly(S.algebra, rng.randint(0, N + 1), rng)
        assert poisson_bracket(S, f, g) == L.bracket(f, g) == leibniz_bracket(S, f, g)


def test_with_method_rejects_unknown():
    with pytest.raises(ValueError):
        example_structure().with_method("magic")

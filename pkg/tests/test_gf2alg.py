import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ratmak.gf2alg import (
    D8,
    GRASSMANN2,
    W3,
    Algebra,
    AlgebraMismatchError,
    DegreeCapError,
    DivisibilityError,
    PresentationError,
    Variable,
    count_free_monomials,
    format_poly,
    monomial_basis,
    parse_poly,
    polynomial_ring,
)

P2 = polynomial_ring(2)
P3 = polynomial_ring(3)


def polys(alg, max_exp=4, max_terms=6):
    mono = st.tuples(*[st.integers(0, max_exp) for _ in range(alg.nvars)])
    return st.lists(mono, max_size=max_terms).map(alg.poly)


# --- construction and printing -------------------------------------------


def test_repeated_terms_cancel():
    # [TRIVIAL] characteristic 2
    assert not P2.poly([(1, 0), (1, 0)])
    assert P2.poly([(1, 0), (0, 1), (1, 0)]) == P2.var("t2")


def test_format_order_and_unit():
    # [DERIVED] ascending degree, descending lex inside a degree
    t1, t2 = P2.gens()
    assert format_poly((t1 + t2) ** 2 + 1) == "1+t1^2+t2^2"
    assert format_poly(P2.zero()) == "0"
    assert format_poly(P2.one()) == "1"


def test_frobenius_square():
    # [DERIVED] (a+b)^2 = a^2+b^2 over GF(2)
    t1, t2 = P2.gens()
    assert format_poly((t1 + t2) ** 6) == "t1^6+t1^4*t2^2+t1^2*t2^4+t2^6"


def test_parse_round_trip_examples():
    text = "x^2*w+y*w^3+t"
    assert format_poly(parse_poly(W3, text)) == format_poly(W3.parse("t+y*w^3+x^2*w"))
    with pytest.raises(PresentationError):
        parse_poly(P2, "t3")
    with pytest.raises(PresentationError):
        parse_poly(P2, "t1^")


def test_d8_relation_filters_xy():
    x, y, w = D8.gens()
    assert not (x * y)
    assert (x + y) ** 2 == x**2 + y**2
    assert (x + w) * (y + w) == x * w + y * w + w**2


def test_algebra_mismatch():
    with pytest.raises(AlgebraMismatchError):
        P2.var("t1") + P3.var("t1")


def test_degree_cap():
    small = Algebra((Variable("a"),), max_exponent=10, max_degree=10)
    a = small.var("a")
    assert (a**10).degree == 10
    with pytest.raises(DegreeCapError):
        a**11


def test_presentation_errors():
    with pytest.raises(PresentationError):
        Algebra((Variable("a"), Variable("a")))
    with pytest.raises(PresentationError):
        Algebra((Variable("a"),), zero_monomials=((0,),))
    with pytest.raises(PresentationError):
        P2.monomial((1, 2, 3))


def test_divide_by_monomial():
    t1, t2 = P2.gens()
    p = t1**3 * t2 + t1 * t2**2
    assert p.divide_by_monomial((1, 1)) == t1**2 + t2
    with pytest.raises(DivisibilityError):
        (p + t2).divide_by_monomial((1, 1))


def test_weighted_degree():
    y, w = GRASSMANN2.gens()
    assert (y * w).degree == 3
    assert (y**2 + w).is_homogeneous()


# --- monomial bases -----------------------------------------------------


@pytest.mark.parametrize("k,d", [(1, 5), (2, 6), (3, 4), (4, 7), (5, 3)])
def test_polynomial_ring_slice_is_stars_and_bars(k, d):
    # [DERIVED] C(d+k-1, k-1)
    alg = polynomial_ring(k)
    assert len(monomial_basis(alg, d)) == math.comb(d + k - 1, k - 1)
    assert count_free_monomials((1,) * k, d) == math.comb(d + k - 1, k - 1)


@pytest.mark.parametrize("d", range(0, 12))
def test_d8_slice_count(d):
    # [DERIVED] x^a w^c and y^b w^c with a or b > 0, plus w^(d/2): d+1 monomials
    assert len(monomial_basis(D8, d)) == d + 1


def test_gr2_slice_count():
    # [DERIVED] y^a w^b with a+2b = d: floor(d/2)+1
    for d in range(10):
        assert len(monomial_basis(GRASSMANN2, d)) == d // 2 + 1


def test_basis_monomials_have_degree():
    for d in range(6):
        for mono in monomial_basis(W3, d):
            assert W3.degree(mono) == d
            assert not W3.is_zero(mono)


# --- ring laws -----------------------------------------------------------


@settings(max_examples=60, deadline=None)
@given(polys(P3), polys(P3), polys(P3))
def test_ring_laws_poly3(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a + a == P3.zero()


@settings(max_examples=60, deadline=None)
@given(polys(W3, 3), polys(W3, 3), polys(W3, 3))
def test_ring_laws_w3(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c


@settings(max_examples=60, deadline=None)
@given(polys(D8, 5))
def test_frobenius_is_ring_map(a):
    assert a**2 == a * a
    assert (a**2) ** 2 == a**4


@settings(max_examples=60, deadline=None)
@given(polys(P3, 5, 8))
def test_format_parse_round_trip(a):
    assert parse_poly(P3, format_poly(a)) == a


@settings(max_examples=40, deadline=None)
@given(polys(P2, 4))
def test_homogeneous_components_sum(a):
    total = P2.zero()
    for d in a.degrees():
        comp = a.homogeneous_component(d)
        assert comp.degrees() == {d}
        total = total + comp
    assert total == a

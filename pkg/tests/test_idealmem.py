import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ratmak.gf2alg import D8, AlgebraMismatchError, GRASSMANN2, W3, monomial_basis, polynomial_ring
from ratmak.idealmem import (
    ContractError,
    IdealBasis,
    contains,
    height,
    slice_span,
)

P2 = polynomial_ring(2)
P3 = polynomial_ring(3)


def span_closure(vectors):
    """Every GF(2) combination of ``vectors``, as a set of frozensets of monomials."""
    span = {frozenset()}
    for v in vectors:
        span |= {s ^ v for s in span}
    return span


def brute_member(p, basis):
    d = p.degree
    products = []
    for g in basis.generators:
        e = d - g.degree
        if e < 0:
            continue
        for mu in monomial_basis(p.algebra, e):
            prod = g * p.algebra.monomial(mu)
            if prod:
                products.append(prod.terms)
    return p.terms in span_closure(products)


def random_homogeneous(alg, d, rng, density=0.5):
    basis = monomial_basis(alg, d)
    return alg.poly(m for m in basis if rng.random() < density)


def random_instance(rng, alg=P2, max_d=12):
    d = rng.randint(1, max_d)
    gens = []
    for _ in range(rng.randint(1, 3)):
        g = random_homogeneous(alg, rng.randint(1, d), rng)
        if g:
            gens.append(g)
    if not gens:
        gens = [alg.gens()[0]]
    basis = IdealBasis(tuple(gens))
    if rng.random() < 0.5:
        span = slice_span(basis, d)
        p = alg.zero()
        for q in span:
            if rng.random() < 0.5:
                p = p + q
    else:
        p = random_homogeneous(alg, d, rng)
    return p, basis


def test_brute_force_agreement_poly2():
    # [DERIVED] exhaustive span enumeration
    rng = random.Random(1234)
    for _ in range(120):
        p, basis = random_instance(rng)
        cert = contains(p, basis)
        assert cert.member == brute_member(p, basis)
        if cert.member:
            assert cert.verify(p, basis)


def test_brute_force_agreement_d8():
    rng = random.Random(99)
    for _ in range(60):
        p, basis = random_instance(rng, D8, max_d=9)
        assert contains(p, basis).member == brute_member(p, basis)


def test_wbar_slice_at_degree_six():
    # [DERIVED] <wbar4, wbar5> at degree 6 spans 5 of 7 monomials; (t1+t2)^6 is outside
    t1, t2 = P2.gens()
    w4 = P2.parse("t1^4+t1^3*t2+t1^2*t2^2+t1*t2^3+t2^4")
    w5 = P2.parse("t1^5+t1^4*t2+t1^3*t2^2+t1^2*t2^3+t1*t2^4+t2^5")
    cert = contains((t1 + t2) ** 6, IdealBasis((w4, w5)))
    assert not cert.member
    assert (cert.slice_degree, cert.slice_dimension, cert.ideal_rank) == (6, 7, 5)


def test_slice_span_degree_five():
    # [DERIVED] degree-5 slice of <wbar4, wbar5> is {t1*wbar4, t2*wbar4, wbar5}
    w4 = P2.parse("t1^4+t1^3*t2+t1^2*t2^2+t1*t2^3+t2^4")
    w5 = P2.parse("t1^5+t1^4*t2+t1^3*t2^2+t1^2*t2^3+t1*t2^4+t2^5")
    t1, t2 = P2.gens()
    assert set(slice_span(IdealBasis((w4, w5)), 5)) == {t1 * w4, t2 * w4, w5}


def test_certificate_reconstructs_member():
    t1, t2, t3 = P3.gens()
    basis = IdealBasis((t1 + t2, t2 * t3 + t3**2))
    p = (t1 + t2) * t3**2 + t3 * (t2 * t3 + t3**2)
    cert = contains(p, basis)
    assert cert.member
    assert cert.recompute(basis) == p
    d = cert.to_dict(P3)
    assert set(d["combination"]) <= {"0", "1"}


def test_zero_is_member_with_empty_certificate():
    cert = contains(P2.zero(), IdealBasis((P2.var("t1"),)))
    assert cert.member and cert.combination == {}


def test_contract_errors():
    t1, t2 = P2.gens()
    with pytest.raises(ContractError):
        contains(t1 + t2**2, IdealBasis((t1,)))
    with pytest.raises(ContractError):
        IdealBasis((t1 + t2**2,))
    with pytest.raises(ContractError):
        IdealBasis((P2.zero(),))
    with pytest.raises(AlgebraMismatchError):
        IdealBasis((t1, P3.var("t1")))
    assert IdealBasis.of(P2.zero(), t1).generators == (t1,)


def test_monomial_fast_path_against_support_union():
    # [DERIVED] a monomial ideal's slice is spanned by the monomials it contains
    rng = random.Random(5)
    t1, t2, t3 = P3.gens()
    mono = IdealBasis((t1**3, t2**3, t3**3, t1 * t2**2))
    assert mono.is_monomial
    for _ in range(40):
        d = rng.randint(1, 9)
        p = random_homogeneous(P3, d, rng)
        if not p:
            continue
        support = set().union(*[q.terms for q in slice_span(mono, d)])
        fast = contains(p, mono)
        assert fast.member == (set(p.terms) <= support)
        assert fast.slice_dimension == len(monomial_basis(P3, d))
        assert fast.ideal_rank == len(support)
        if fast.member:
            assert fast.verify(p, mono)


def test_rank_by_inclusion_exclusion():
    # [DERIVED] <t1^2, t2^2> at degree 3 in Poly(2): all four monomials
    basis = IdealBasis((P2.var("t1") ** 2, P2.var("t2") ** 2))
    cert = contains(P2.var("t1") ** 3, basis)
    assert cert.ideal_rank == 4 and cert.member


# --- height ------------------------------------------------------------


def test_height_in_free_quotient():
    # [DERIVED] t1 has height n-1 modulo <t1^n>
    t1 = P2.var("t1")
    for n in range(1, 8):
        h = height(t1, IdealBasis((t1**n,)), d_max=20)
        assert h.value == n - 1 and not h.capped


def test_height_nilpotent_by_relation():
    # x*y = 0 in D8, so (x+y)^k = x^k + y^k never vanishes, but x has infinite height: capped
    x, _, _ = D8.gens()
    h = height(x, IdealBasis((D8.var("w"),)), d_max=6)
    assert h.capped and h.value == 6


def test_height_needs_cap():
    with pytest.raises(ContractError):
        height(P2.var("t1"), IdealBasis((P2.var("t2"),)))


@pytest.mark.parametrize("n,expected", [(2, 0), (3, 2), (4, 2), (5, 6), (8, 6), (9, 14)])
def test_grassmann_heights(n, expected):
    # [DERIVED] P(n) - 2 with P(n) the least power of two >= n
    from ratmak.charclass import grassmann2_duals

    gr = grassmann2_duals(n)
    h = height(GRASSMANN2.var("y"), IdealBasis.of(gr[n - 1], gr[n]), d_max=2 * (n - 2))
    assert (h.value, h.capped) == (expected, False)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_membership_closed_under_multiplication(seed):
    rng = random.Random(seed)
    p, basis = random_instance(rng, P2, max_d=8)
    if contains(p, basis).member:
        for v in P2.gens():
            assert contains(p * v, basis).member


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_member_sum_is_member(seed):
    rng = random.Random(seed)
    _, basis = random_instance(rng, W3, max_d=5)
    d = max(basis.degrees) + rng.randint(0, 2)
    span = slice_span(basis, d)
    a = W3.zero()
    b = W3.zero()
    for q in span:
        if rng.random() < 0.5:
            a = a + q
        if rng.random() < 0.5:
            b = b + q
    assert contains(a + b, basis).member
    assert contains(a, basis).member

"""Membership in homogeneous ideals, one degree slice at a time.

The degree-``d`` piece of an ideal ``<g_1, ..., g_r>`` is spanned by the
products ``mu * g_i`` with ``mu`` running over the degree ``d - deg g_i``
monomial basis.  Each product becomes a bit-packed row over the ordered
degree-``d`` monomial basis and the rows are reduced with first-set-bit
pivoting.  Every reduced row carries a second bitmask recording which
original products were XORed into it, so a member verdict comes with an
explicit combination.

Ideals generated by monomials in a polynomial ring skip elimination: a
polynomial lies in such an ideal iff every term is divisible by a generator.
"""

from __future__ import annotations

import functools
import threading
from dataclasses import dataclass, field
from itertools import combinations
from typing import NamedTuple

from .gf2alg import Algebra, AlgebraMismatchError, Monomial, Poly, count_free_monomials, monomial_basis


class ContractError(ValueError):
    """Raised when an input violates a homogeneity precondition."""


@dataclass(frozen=True)
class IdealBasis:
    generators: tuple[Poly, ...]

    def __post_init__(self) -> None:
        gens = tuple(self.generators)
        object.__setattr__(self, "generators", gens)
        if not gens:
            raise ContractError("an ideal basis needs at least one generator")
        alg = gens[0].algebra
        for g in gens:
            if g.algebra != alg:
                raise AlgebraMismatchError("generators live in different algebras")
            if not g:
                raise ContractError("generators must be nonzero")
            if not g.is_homogeneous():
                raise ContractError(f"generator {g} is not homogeneous")

    @classmethod
    def of(cls, *generators: Poly) -> IdealBasis:
        """Build a basis, silently dropping zero generators."""
        return cls(tuple(g for g in generators if g))

    @property
    def algebra(self) -> Algebra:
        return self.generators[0].algebra

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(g.degree for g in self.generators)

    @property
    def is_monomial(self) -> bool:
        return all(g.is_monomial() for g in self.generators) and not self.algebra.zero_monomials

    def __str__(self) -> str:
        return "<" + ", ".join(str(g) for g in self.generators) + ">"


@dataclass(frozen=True)
class MembershipCertificate:
    member: bool
    slice_degree: int
    slice_dimension: int
    ideal_rank: int
    combination: dict[int, tuple[Monomial, ...]] = field(default_factory=dict)

    def recompute(self, basis: IdealBasis) -> Poly:
        """Sum of ``mu * g_i`` over the recorded combination."""
        alg = basis.algebra
        total = alg.zero()
        for i, multipliers in self.combination.items():
            g = basis.generators[i]
            for mu in multipliers:
                total = total + alg.monomial(mu) * g
        return total

    def verify(self, p: Poly, basis: IdealBasis) -> bool:
        if not self.member:
            return True
        return self.recompute(basis) == p

    def to_dict(self, algebra: Algebra | None = None) -> dict:
        from .gf2alg import format_monomial

        def fmt(mu: Monomial) -> str | list[int]:
            return format_monomial(algebra, mu) if algebra is not None else list(mu)

        return {
            "member": self.member,
            "slice_degree": self.slice_degree,
            "slice_dimension": self.slice_dimension,
            "ideal_rank": self.ideal_rank,
            "combination": {str(i): [fmt(mu) for mu in mus] for i, mus in sorted(self.combination.items())},
        }


def slice_span(basis: IdealBasis, d: int) -> list[Poly]:
    """All nonzero products ``mu * g`` of degree ``d``."""
    return [prod for _, _, prod in _slice_products(basis, d)]


def _slice_products(basis: IdealBasis, d: int) -> list[tuple[int, Monomial, Poly]]:
    alg = basis.algebra
    out = []
    for i, g in enumerate(basis.generators):
        for mu in monomial_basis(alg, d - g.degree):
            prod = g.shift(mu)
            if prod:
                out.append((i, mu, prod))
    return out


class _Slice:
    """Row-reduced degree slice of an ideal."""

    def __init__(self, basis: IdealBasis, d: int):
        self.degree = d
        self.monomials = monomial_basis(basis.algebra, d)
        self.column = {m: j for j, m in enumerate(self.monomials)}
        self.products = _slice_products(basis, d)
        # pivot bit -> (row bits, history bits)
        self.pivots: dict[int, tuple[int, int]] = {}
        for idx, (_, _, prod) in enumerate(self.products):
            self._insert(self.encode(prod), 1 << idx)

    def encode(self, p: Poly) -> int:
        bits = 0
        for t in p.terms:
            bits |= 1 << self.column[t]
        return bits

    def reduce(self, row: int, hist: int = 0) -> tuple[int, int]:
        pivots = self.pivots
        while row:
            low = row & -row
            hit = pivots.get(low)
            if hit is None:
                break
            row ^= hit[0]
            hist ^= hit[1]
        return row, hist

    def _insert(self, row: int, hist: int) -> None:
        row, hist = self.reduce(row, hist)
        if row:
            self.pivots[row & -row] = (row, hist)

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def member(self, p: Poly) -> tuple[bool, int]:
        """Reduce ``p``; return (is member, history of the combination)."""
        row, hist = self.reduce(self.encode(p))
        return row == 0, hist


_slice_lock = threading.Lock()


@functools.lru_cache(maxsize=1024)
def _cached_slice(basis: IdealBasis, d: int) -> _Slice:
    return _Slice(basis, d)


def eliminated_slice(basis: IdealBasis, d: int) -> _Slice:
    with _slice_lock:
        return _cached_slice(basis, d)


def contains(p: Poly, basis: IdealBasis) -> MembershipCertificate:
    """Decide whether the homogeneous polynomial ``p`` lies in the ideal."""
    if p.algebra != basis.algebra:
        raise AlgebraMismatchError("polynomial and ideal live in different algebras")
    if not p:
        return MembershipCertificate(True, 0, 0, 0, {})
    if not p.is_homogeneous():
        raise ContractError(f"membership needs a homogeneous polynomial, got {p}")
    d = p.degree
    if basis.is_monomial:
        return _contains_monomial(p, basis, d)

    sl = eliminated_slice(basis, d)
    member, hist = sl.member(p)
    combination: dict[int, list[Monomial]] = {}
    if member:
        idx = 0
        while hist:
            if hist & 1:
                gi, mu, _ = sl.products[idx]
                combination.setdefault(gi, []).append(mu)
            hist >>= 1
            idx += 1
    return MembershipCertificate(
        member,
        d,
        len(sl.monomials),
        sl.rank,
        {i: tuple(mus) for i, mus in sorted(combination.items())},
    )


def _contains_monomial(p: Poly, basis: IdealBasis, d: int) -> MembershipCertificate:
    alg = basis.algebra
    gens = [next(iter(g.terms)) for g in basis.generators]
    combination: dict[int, list[Monomial]] = {}
    member = True
    for t in p.sorted_terms():
        for i, g in enumerate(gens):
            if all(a >= b for a, b in zip(t, g)):
                combination.setdefault(i, []).append(tuple(a - b for a, b in zip(t, g)))
                break
        else:
            member = False
            break
    degs = tuple(v.degree for v in alg.variables)
    dim = count_free_monomials(degs, d)
    rank = _monomial_ideal_rank(degs, gens, alg, d)
    return MembershipCertificate(
        member,
        d,
        dim,
        rank,
        {i: tuple(mus) for i, mus in sorted(combination.items())} if member else {},
    )


def _monomial_ideal_rank(degs: tuple[int, ...], gens: list[Monomial], alg: Algebra, d: int) -> int:
    # inclusion-exclusion over lcms of generator subsets
    total = 0
    for r in range(1, len(gens) + 1):
        sign = 1 if r % 2 else -1
        for subset in combinations(gens, r):
            lcm = tuple(max(col) for col in zip(*subset))
            total += sign * count_free_monomials(degs, d - alg.degree(lcm))
    return total


class Height(NamedTuple):
    value: int
    capped: bool


def height(p: Poly, basis: IdealBasis, d_max: int | None = None) -> Height:
    """Largest ``h`` with ``p**h`` outside the ideal.

    Powers are examined while their degree stays within ``d_max``.  The first
    power beyond the cap is still tested once; if it is a member the answer
    is exact, otherwise ``capped`` is set and the value is only a lower bound.
    """
    if not p or not p.is_homogeneous() or p.degree == 0:
        raise ContractError("height needs a nonzero homogeneous polynomial of positive degree")
    if d_max is None:
        raise ContractError("d_max must be supplied when the ambient dimension is unknown")
    deg = p.degree
    h, power = 0, p.algebra.one()
    while True:
        nxt = power * p
        if not nxt or contains(nxt, basis).member:
            return Height(h, False)
        h, power = h + 1, nxt
        if (h + 1) * deg > d_max:
            nxt = power * p
            if not nxt or contains(nxt, basis).member:
                return Height(h, False)
            return Height(h, True)

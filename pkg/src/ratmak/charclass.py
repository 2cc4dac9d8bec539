"""Stiefel-Whitney, dual and Euler classes used by the criteria.

Dual classes are computed from a total class ``1 + w_1 + w_2 + ...`` by the
convolution recursion ``wbar_l = sum_i w_i * wbar_{l-i}``.  For the diagonal
subgroup of O(k) there is also a closed multinomial expansion in the
elementary symmetric classes, kept here as an independent cross-check.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from itertools import combinations, product
from typing import Sequence

from .gf2alg import D8, GRASSMANN2, W3, Algebra, Poly, polynomial_ring


class ClassError(ValueError):
    """Raised for out-of-range class parameters or a non-unital total class."""


@dataclass(frozen=True)
class TotalClass:
    """Total class ``components[0] + components[1] + ...`` with component 0 = 1."""

    components: tuple[Poly, ...]

    def __post_init__(self) -> None:
        comps = tuple(self.components)
        object.__setattr__(self, "components", comps)
        if not comps or comps[0] != comps[0].algebra.one():
            raise ClassError("component 0 of a total class must be 1")
        for d, c in enumerate(comps):
            if c and c.degrees() != {d}:
                raise ClassError(f"component {d} is not homogeneous of degree {d}: {c}")

    @classmethod
    def from_poly(cls, total: Poly) -> TotalClass:
        top = max(total.degrees(), default=0)
        return cls(tuple(total.homogeneous_component(d) for d in range(top + 1)))

    @property
    def algebra(self) -> Algebra:
        return self.components[0].algebra

    def as_poly(self) -> Poly:
        acc = self.algebra.zero()
        for c in self.components:
            acc = acc + c
        return acc

    def __getitem__(self, d: int) -> Poly:
        if 0 <= d < len(self.components):
            return self.components[d]
        return self.algebra.zero()


def elementary_symmetric(k: int, i: int) -> Poly:
    if not 1 <= i <= k:
        raise ClassError(f"elementary symmetric class index {i} outside 1..{k}")
    alg = polynomial_ring(k)
    return alg.poly(tuple(1 if j in s else 0 for j in range(k)) for s in combinations(range(k), i))


def invert_total_class(total: TotalClass, L: int) -> tuple[Poly, ...]:
    """Dual classes up to degree ``L``.

    Returns a tuple indexed by degree: entry 0 is the unit and entry ``l``
    is the dual class of degree ``l``.
    """
    alg = total.algebra
    span = len(total.components) - 1
    bars = [alg.one()]
    for l in range(1, L + 1):
        acc = alg.zero()
        for i in range(1, min(l, span) + 1):
            if total.components[i]:
                acc = acc + total.components[i] * bars[l - i]
        bars.append(acc)
    return tuple(bars)


def multinomial_is_odd(parts: Sequence[int]) -> bool:
    """Parity of ``(sum parts)! / prod(part!)``: odd iff the binary digits never carry."""
    seen = 0
    for p in parts:
        if seen & p:
            return False
        seen |= p
    return True


def _weighted_partitions(k: int, l: int):
    # all (i_1..i_k) >= 0 with sum j * i_j = l
    def rec(j: int, remaining: int, prefix: tuple[int, ...]):
        if j > k:
            if remaining == 0:
                yield prefix
            return
        for i in range(remaining // j + 1):
            yield from rec(j + 1, remaining - i * j, prefix + (i,))

    yield from rec(1, l, ())


def dual_class_multinomial(k: int, l: int) -> Poly:
    """Dual class of the diagonal representation via the multinomial formula."""
    if l < 1:
        raise ClassError("dual class degree must be >= 1")
    alg = polynomial_ring(k)
    sym = [elementary_symmetric(k, i) for i in range(1, k + 1)]
    acc = alg.zero()
    for parts in _weighted_partitions(k, l):
        if not multinomial_is_odd(parts):
            continue
        term = alg.one()
        for w, e in zip(sym, parts):
            if e:
                term = term * w**e
        acc = acc + term
    return acc


def stiefel_total_class(k: int) -> TotalClass:
    """Total class prod(1 + t_i) of the diagonal representation R^k."""
    comps = (polynomial_ring(k).one(),) + tuple(elementary_symmetric(k, i) for i in range(1, k + 1))
    return TotalClass(comps)


@functools.lru_cache(maxsize=64)
def stiefel_dual_classes(k: int, L: int) -> tuple[Poly, ...]:
    return invert_total_class(stiefel_total_class(k), L)


def stiefel_dual_class(k: int, l: int) -> Poly:
    return stiefel_dual_classes(k, _round_up(l))[l]


def _round_up(l: int) -> int:
    # share memo entries across nearby requests
    return max(16, 1 << (l - 1).bit_length())


def euler_rattray(k: int, m: int, doubled: bool = False) -> Poly:
    """Euler class prod_{a<b} (t_a + t_b)^m of R_k^m, or of U_k^m when doubled."""
    if k < 2:
        raise ClassError("the Rattray Euler class needs k >= 2")
    if m < 1:
        raise ClassError("m must be >= 1")
    alg = polynomial_ring(k)
    base = alg.one()
    for a, b in combinations(range(1, k + 1), 2):
        base = base * (alg.var(f"t{a}") + alg.var(f"t{b}"))
    return base ** (m * (2 if doubled else 1))


def makeev_vectors(k: int, l: int) -> list[tuple[int, ...]]:
    """0/1 vectors of length ``k`` with Hamming weight in 1..l."""
    return [s for s in product((0, 1), repeat=k) if 1 <= sum(s) <= l]


def euler_makeev(k: int, l: int, m: int, orth: bool = False) -> Poly:
    """prod over weight-1..l indicator vectors s of (s . t)^m, divided by t_1..t_k if orth."""
    if not 1 <= l <= k:
        raise ClassError(f"l={l} must satisfy 1 <= l <= k={k}")
    if m < 0:
        raise ClassError("m must be non-negative")
    alg = polynomial_ring(k)
    gens = alg.gens()
    acc = alg.one()
    for s in makeev_vectors(k, l):
        form = alg.zero()
        for si, g in zip(s, gens):
            if si:
                form = form + g
        acc = acc * form**m
    if orth:
        acc = acc.divide_by_monomial((1,) * k)
    return acc


def makeev_degree(k: int, l: int, m: int, orth: bool = False) -> int:
    return m * len(makeev_vectors(k, l)) - (k if orth else 0)


# ---------------------------------------------------------------------------
# dihedral group and its product with Z2


@dataclass(frozen=True)
class D8Classes:
    total_r2: Poly
    total_plane: Poly
    euler_r2: Poly

    def euler_r2_power(self, m: int) -> Poly:
        return self.euler_r2**m

    def plane_duals(self, L: int) -> tuple[Poly, ...]:
        return d8_plane_duals(L)


def d8_classes() -> D8Classes:
    x, y, w = D8.gens()
    return D8Classes(total_r2=1 + y, total_plane=1 + (x + y) + w, euler_r2=y)


@functools.lru_cache(maxsize=32)
def d8_plane_duals(L: int) -> tuple[Poly, ...]:
    return invert_total_class(TotalClass.from_poly(d8_classes().total_plane), L)


@functools.lru_cache(maxsize=32)
def grassmann2_duals(L: int) -> tuple[Poly, ...]:
    """Dual classes of ``1 + y + w`` in F2[y, w]."""
    y, w = GRASSMANN2.gens()
    return invert_total_class(TotalClass((GRASSMANN2.one(), y, w)), L)


@dataclass(frozen=True)
class W3Classes:
    total: Poly
    euler_r3: Poly
    test_element: Poly
    m: int

    def duals(self, L: int) -> tuple[Poly, ...]:
        return w3_duals(L)


def w3_classes(m: int = 1) -> W3Classes:
    if m < 1:
        raise ClassError("m must be >= 1")
    x, y, w, t = W3.gens()
    euler = y * (t**2 + t * (x + y) + w)
    return W3Classes(total=(1 + x + y + w) * (1 + t), euler_r3=euler, test_element=euler**m, m=m)


@functools.lru_cache(maxsize=32)
def w3_duals(L: int) -> tuple[Poly, ...]:
    return invert_total_class(TotalClass.from_poly(w3_classes().total), L)

"""Graded commutative algebras over GF(2) with monomial relations.

An algebra is presented by weighted variables and a list of monomials that
are declared to be zero.  Because every relation is a monomial, the quotient
has a monomial basis and reducing to normal form is just dropping the terms
divisible by some zero monomial.

Polynomials are immutable sets of exponent tuples (every coefficient is 1).
Addition is symmetric difference, multiplication is the usual convolution
with cancellation in characteristic 2.

Built-in presentations:

    polynomial_ring(k)   F2[t1..tk], all variables of degree 1
    D8                   F2[x, y, w] / <xy>,  deg w = 2
    W3                   F2[x, y, w, t] / <xy>
    GRASSMANN2           F2[y, w],  deg w = 2
"""

from __future__ import annotations

import functools
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

Monomial = tuple[int, ...]

DEFAULT_MAX_EXPONENT = 255
DEFAULT_MAX_DEGREE = 512


class PresentationError(ValueError):
    """Raised for malformed algebra presentations or monomials."""


class AlgebraMismatchError(TypeError):
    """Raised when combining polynomials that live in different algebras."""


class DegreeCapError(OverflowError):
    """Raised when an exponent or total degree exceeds the configured cap."""


class DivisibilityError(ArithmeticError):
    """Raised when a term is not divisible by the requested monomial."""


@dataclass(frozen=True)
class Variable:
    name: str
    degree: int = 1

    def __post_init__(self) -> None:
        if self.degree < 1:
            raise PresentationError(f"variable {self.name!r} must have degree >= 1")
        if not re.fullmatch(r"[A-Za-z][A-Za-z0-9_]*", self.name):
            raise PresentationError(f"invalid variable name {self.name!r}")


@dataclass(frozen=True)
class Algebra:
    """A graded GF(2) algebra given by variables and zero monomials."""

    variables: tuple[Variable, ...]
    zero_monomials: tuple[Monomial, ...] = ()
    name: str = ""
    max_exponent: int = DEFAULT_MAX_EXPONENT
    max_degree: int = DEFAULT_MAX_DEGREE
    _index: dict = field(default=None, init=False, repr=False, compare=False, hash=False)
    _weighted: bool = field(default=False, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise PresentationError(f"duplicate variable names in {names}")
        for z in self.zero_monomials:
            if len(z) != len(self.variables):
                raise PresentationError(f"zero monomial {z} has wrong length")
            if any(e < 0 for e in z) or not any(z):
                raise PresentationError(f"zero monomial {z} must be a non-unit monomial")
        object.__setattr__(self, "_index", {n: i for i, n in enumerate(names)})
        object.__setattr__(self, "_weighted", any(v.degree != 1 for v in self.variables))

    @property
    def nvars(self) -> int:
        return len(self.variables)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    def degree(self, mono: Monomial) -> int:
        return sum(e * v.degree for e, v in zip(mono, self.variables)) if self._weighted else sum(mono)

    def is_zero(self, mono: Monomial) -> bool:
        return any(all(a >= b for a, b in zip(mono, z)) for z in self.zero_monomials)

    def check_monomial(self, mono: Monomial) -> None:
        if len(mono) != self.nvars:
            raise PresentationError(
                f"monomial {mono} has {len(mono)} exponents, algebra has {self.nvars} variables"
            )
        if any(e < 0 for e in mono):
            raise PresentationError(f"negative exponent in {mono}")
        if max(mono, default=0) > self.max_exponent:
            raise DegreeCapError(f"exponent in {mono} exceeds cap {self.max_exponent}")
        if self.degree(mono) > self.max_degree:
            raise DegreeCapError(f"degree of {mono} exceeds cap {self.max_degree}")

    def unit(self) -> Monomial:
        return (0,) * self.nvars

    def var_index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise PresentationError(f"unknown variable {name!r}") from None

    # constructors -------------------------------------------------------

    def zero(self) -> Poly:
        return Poly(self, ())

    def one(self) -> Poly:
        return Poly(self, (self.unit(),))

    def var(self, name: str) -> Poly:
        mono = [0] * self.nvars
        mono[self.var_index(name)] = 1
        return Poly(self, (tuple(mono),))

    def gens(self) -> tuple[Poly, ...]:
        return tuple(self.var(n) for n in self.names)

    def monomial(self, mono: Monomial) -> Poly:
        return Poly(self, (tuple(mono),))

    def poly(self, terms: Iterable[Sequence[int]]) -> Poly:
        """Build a polynomial from exponent vectors; repeated terms cancel."""
        acc: set[Monomial] = set()
        for t in terms:
            acc ^= {tuple(t)}
        return Poly(self, acc)

    def parse(self, text: str) -> Poly:
        return parse_poly(self, text)

    def monomial_basis(self, d: int) -> list[Monomial]:
        return monomial_basis(self, d)

    def __str__(self) -> str:
        return self.name or "F2[" + ",".join(self.names) + "]"


class Poly:
    """An element of an :class:`Algebra`: a set of normal-form monomials."""

    __slots__ = ("algebra", "terms", "_hash")

    def __init__(self, algebra: Algebra, terms: Iterable[Monomial] = (), *, check: bool = True):
        terms = frozenset(terms)
        if check:
            for t in terms:
                algebra.check_monomial(t)
            if algebra.zero_monomials:
                terms = frozenset(t for t in terms if not algebra.is_zero(t))
        self.algebra = algebra
        self.terms = terms
        self._hash = None

    # basic protocol -----------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Poly):
            return NotImplemented
        return self.algebra == other.algebra and self.terms == other.terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.algebra, self.terms))
        return self._hash

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self) -> Iterator[Monomial]:
        return iter(self.sorted_terms())

    def __str__(self) -> str:
        return format_poly(self)

    def __repr__(self) -> str:
        return f"Poly({self.algebra}, {format_poly(self)!r})"

    def sorted_terms(self) -> list[Monomial]:
        return sorted(self.terms, key=lambda m: _order_key(self.algebra, m))

    # grading ------------------------------------------------------------

    def degrees(self) -> set[int]:
        return {self.algebra.degree(t) for t in self.terms}

    def is_homogeneous(self) -> bool:
        return len(self.degrees()) <= 1

    @property
    def degree(self) -> int:
        """Top degree of the polynomial; -1 for zero."""
        return max(self.degrees(), default=-1)

    def homogeneous_component(self, d: int) -> Poly:
        return homogeneous_component(self, d)

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    # arithmetic ---------------------------------------------------------

    def _coerce(self, other: object) -> Poly:
        if isinstance(other, Poly):
            if other.algebra != self.algebra:
                raise AlgebraMismatchError(f"cannot combine {self.algebra} with {other.algebra}")
            return other
        if isinstance(other, int):
            return self.algebra.one() if other % 2 else self.algebra.zero()
        raise TypeError(f"cannot combine Poly with {type(other).__name__}")

    def __add__(self, other: object) -> Poly:
        other = self._coerce(other)
        return Poly(self.algebra, self.terms ^ other.terms, check=False)

    __radd__ = __add__
    __sub__ = __add__
    __rsub__ = __add__

    def __mul__(self, other: object) -> Poly:
        other = self._coerce(other)
        if len(other.terms) == 1:
            return self.shift(next(iter(other.terms)))
        acc: set[Monomial] = set()
        for a in self.terms:
            for b in other.terms:
                acc ^= {tuple(x + y for x, y in zip(a, b))}
        return _product(self.algebra, acc)

    __rmul__ = __mul__

    def __pow__(self, e: int) -> Poly:
        if not isinstance(e, int) or e < 0:
            raise ValueError(f"exponent must be a non-negative integer, got {e!r}")
        result = self.algebra.one()
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base.square()
        return result

    def square(self) -> Poly:
        # Frobenius: cross terms cancel in characteristic 2.
        return _product(self.algebra, {tuple(2 * x for x in t) for t in self.terms})

    def shift(self, mono: Monomial) -> Poly:
        """Multiply by a single monomial."""
        return _product(self.algebra, {tuple(x + y for x, y in zip(t, mono)) for t in self.terms})

    def divide_by_monomial(self, mono: Monomial) -> Poly:
        return divide_by_monomial(self, mono)


def _product(alg: Algebra, terms: set[Monomial]) -> Poly:
    # terms are sums of valid exponent vectors: only the caps need checking
    if terms:
        if max(max(t) for t in terms) > alg.max_exponent:
            raise DegreeCapError(f"exponent exceeds cap {alg.max_exponent}")
        if max(alg.degree(t) for t in terms) > alg.max_degree:
            raise DegreeCapError(f"degree exceeds cap {alg.max_degree}")
        if alg.zero_monomials:
            terms = {t for t in terms if not alg.is_zero(t)}
    return Poly(alg, terms, check=False)


def _order_key(algebra: Algebra, mono: Monomial) -> tuple:
    # ascending degree, then descending lexicographic exponents
    return (algebra.degree(mono), tuple(-e for e in mono))


# ---------------------------------------------------------------------------
# module-level operations as functions


def normal_form(p: Poly) -> Poly:
    """Drop every term divisible by a zero monomial of ``p.algebra``."""
    alg = p.algebra
    for t in p.terms:
        if len(t) != alg.nvars:
            raise PresentationError(f"term {t} does not match {alg.nvars} variables")
    return Poly(alg, (t for t in p.terms if not alg.is_zero(t)), check=False)


def homogeneous_component(p: Poly, d: int) -> Poly:
    alg = p.algebra
    return Poly(alg, (t for t in p.terms if alg.degree(t) == d), check=False)


def divide_by_monomial(p: Poly, mono: Sequence[int]) -> Poly:
    mono = tuple(mono)
    p.algebra.check_monomial(mono)
    out = []
    for t in p.terms:
        q = tuple(a - b for a, b in zip(t, mono))
        if min(q, default=0) < 0:
            raise DivisibilityError(f"term {t} is not divisible by {mono}")
        out.append(q)
    return Poly(p.algebra, out)


def monomial_basis(algebra: Algebra, d: int) -> list[Monomial]:
    """Normal-form monomials of weighted degree ``d`` in graded-lex order."""
    return list(_monomial_basis(algebra, d))


@functools.lru_cache(maxsize=4096)
def _monomial_basis(algebra: Algebra, d: int) -> tuple[Monomial, ...]:
    if d < 0:
        return ()
    degs = [v.degree for v in algebra.variables]
    out: list[Monomial] = []

    def rec(i: int, remaining: int, prefix: list[int]) -> None:
        if i == len(degs) - 1:
            if remaining % degs[i] == 0:
                out.append(tuple(prefix + [remaining // degs[i]]))
            return
        for e in range(remaining // degs[i], -1, -1):
            rec(i + 1, remaining - e * degs[i], prefix + [e])

    if not degs:
        return ((),) if d == 0 else ()
    rec(0, d, [])
    return tuple(m for m in out if not algebra.is_zero(m))


@functools.lru_cache(maxsize=4096)
def count_free_monomials(degrees: tuple[int, ...], d: int) -> int:
    """Number of monomials of weighted degree ``d`` ignoring relations."""
    if d < 0:
        return 0
    ways = [1] + [0] * d
    for g in degrees:
        for s in range(g, d + 1):
            ways[s] += ways[s - g]
    return ways[d]


# ---------------------------------------------------------------------------
# textual form


def format_monomial(algebra: Algebra, mono: Monomial) -> str:
    factors = []
    for name, e in zip(algebra.names, mono):
        if e == 1:
            factors.append(name)
        elif e > 1:
            factors.append(f"{name}^{e}")
    return "*".join(factors) or "1"


def format_poly(p: Poly) -> str:
    if not p.terms:
        return "0"
    return "+".join(format_monomial(p.algebra, t) for t in p.sorted_terms())


_FACTOR = re.compile(r"^([A-Za-z][A-Za-z0-9_]*)(?:\^(\d+))?$")


def parse_poly(algebra: Algebra, text: str) -> Poly:
    """Parse the ``t1^2*t2+t2^3`` grammar produced by :func:`format_poly`."""
    text = "".join(text.split())
    if not text:
        raise PresentationError("empty polynomial text")
    if text == "0":
        return algebra.zero()
    terms = []
    for chunk in text.split("+"):
        if not chunk:
            raise PresentationError(f"empty term in {text!r}")
        mono = [0] * algebra.nvars
        for factor in chunk.split("*"):
            if factor == "1":
                continue
            match = _FACTOR.match(factor)
            if match is None:
                raise PresentationError(f"cannot parse factor {factor!r}")
            mono[algebra.var_index(match.group(1))] += int(match.group(2) or 1)
        terms.append(mono)
    return algebra.poly(terms)


# ---------------------------------------------------------------------------
# built-in presentations


@functools.lru_cache(maxsize=None)
def polynomial_ring(k: int, prefix: str = "t") -> Algebra:
    if k < 1:
        raise PresentationError("polynomial ring needs at least one variable")
    return Algebra(tuple(Variable(f"{prefix}{i}") for i in range(1, k + 1)), name=f"Poly({k})")


D8 = Algebra(
    (Variable("x"), Variable("y"), Variable("w", 2)),
    zero_monomials=((1, 1, 0),),
    name="D8",
)

W3 = Algebra(
    (Variable("x"), Variable("y"), Variable("w", 2), Variable("t")),
    zero_monomials=((1, 1, 0, 0),),
    name="W3",
)

GRASSMANN2 = Algebra((Variable("y"), Variable("w", 2)), name="Gr2")

"""Sufficient algebraic criteria for the Rattray and Makeev problems.

Every decider returns a :class:`Verdict`.  ``admissible=True`` means the
test polynomial was shown to lie outside the index ideal, hence the
parameters are admissible.  ``admissible=False`` only means the criterion
did not decide; the geometric statement may still hold.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Any

from .charclass import (
    d8_classes,
    d8_plane_duals,
    euler_makeev,
    euler_rattray,
    grassmann2_duals,
    makeev_degree,
    stiefel_dual_classes,
    w3_classes,
    w3_duals,
)
from .gf2alg import D8, GRASSMANN2, Poly, polynomial_ring
from .idealmem import Height, IdealBasis, MembershipCertificate, contains, height

VARIANTS = ("odd", "odd_sym")

# default sweep caps on the test-polynomial degree, keyed by k
DEGREE_CAPS = {2: 200, 3: 96}
DEFAULT_DEGREE_CAP = 48
MAX_K = 6


class InvalidInstance(ValueError):
    pass


class CriterionError(RuntimeError):
    """Raised when two independent computation paths disagree."""


@dataclass
class Verdict:
    admissible: bool
    criterion: str
    certificate: MembershipCertificate | None = None
    witness: dict[str, Any] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    test_polynomial: Poly | None = None
    ideal: IdealBasis | None = None

    @property
    def label(self) -> str:
        return "decided_admissible" if self.admissible else "not_decided"

    def verify(self) -> bool:
        """Re-check a member certificate with plain ring arithmetic."""
        if self.certificate is None or self.test_polynomial is None or self.ideal is None:
            return True
        return self.certificate.verify(self.test_polynomial, self.ideal)

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "verdict": self.label,
            "criterion": self.criterion,
            "notes": list(self.notes),
        }
        if self.certificate is not None:
            alg = self.ideal.algebra if self.ideal is not None else None
            out["certificate"] = self.certificate.to_dict(alg)
        if self.witness:
            out["witness"] = dict(self.witness)
        return out


def degree_cap(k: int) -> int:
    return DEGREE_CAPS.get(k, DEFAULT_DEGREE_CAP)


def _check(n: int, m: int, k: int, l: int | None = None) -> None:
    if k < 1 or m < 1 or n < k:
        raise InvalidInstance(f"need n >= k >= 1 and m >= 1, got n={n} m={m} k={k}")
    if l is not None and not 1 <= l <= k:
        raise InvalidInstance(f"need 1 <= l <= k, got l={l} k={k}")


def free_index(k: int, exponent: int) -> IdealBasis:
    """<t_1^e, ..., t_k^e>: the index of a product of k spheres."""
    alg = polynomial_ring(k)
    return IdealBasis(tuple(alg.var(f"t{i}") ** exponent for i in range(1, k + 1)))


def stiefel_index(n: int, k: int) -> IdealBasis:
    """<wbar_{n-k+1}, ..., wbar_n>: the index of the Stiefel manifold V_n^k."""
    bars = stiefel_dual_classes(k, n)
    return IdealBasis.of(*bars[n - k + 1 : n + 1])


def rattray_degree(k: int, m: int, variant: str = "odd_sym") -> int:
    return (k * (k - 1) // 2) * m * (2 if variant == "odd" else 1)


def rattray(n: int, m: int, k: int, variant: str = "odd_sym", orth: bool = True) -> Verdict:
    """Rattray criteria (a)-(d): Euler class of R_k^m / U_k^m against the index of X or Y."""
    _check(n, m, k)
    if variant not in VARIANTS:
        raise InvalidInstance(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    name = f"rattray-{variant.replace('_', '-')}-{'orth' if orth else 'free'}"
    if k == 1:
        return Verdict(True, name, notes=["k=1: no pairs, empty product"])
    poly = euler_rattray(k, m, doubled=(variant == "odd"))
    ideal = stiefel_index(n, k) if orth else free_index(k, n)
    cert = contains(poly, ideal)
    return Verdict(not cert.member, name, cert, test_polynomial=poly, ideal=ideal)


def min_power_of_two(n: int) -> int:
    """Smallest power of two that is >= n."""
    if n < 1:
        raise ValueError("n must be positive")
    return 1 << (n - 1).bit_length()


def rattray2_closed_form(n: int, m: int) -> bool:
    return min_power_of_two(n) >= m + 2


def rattray2_grassmann(n: int, m: int) -> Verdict:
    """y^m against the dual-class ideal, in D8 (with x added) and in F2[y, w]."""
    if n < 2:
        raise InvalidInstance("need n >= 2")
    if m < 1:
        raise InvalidInstance("need m >= 1")
    d8 = d8_plane_duals(n)
    x, y, _ = D8.gens()
    ideal_d8 = IdealBasis.of(d8[n - 1], d8[n], x)
    cert_d8 = contains(d8_classes().euler_r2**m, ideal_d8)

    gr = grassmann2_duals(n)
    y2 = GRASSMANN2.var("y")
    ideal_gr = IdealBasis.of(gr[n - 1], gr[n])
    cert_gr = contains(y2**m, ideal_gr)
    if cert_d8.member != cert_gr.member:
        raise CriterionError(f"D8 and Grassmann paths disagree at n={n}, m={m}")

    h = grassmann_height(n)
    notes = [f"height(y)={h.value}" + (" (capped)" if h.capped else "")]
    return Verdict(
        not cert_gr.member,
        "rattray2-grassmann",
        cert_gr,
        witness={"height": h.value, "height_capped": h.capped, "d8_member": cert_d8.member},
        notes=notes,
        test_polynomial=y2**m,
        ideal=ideal_gr,
    )


@functools.lru_cache(maxsize=None)
def grassmann_height(n: int) -> Height:
    """Height of y modulo <wbar_{n-1}, wbar_n> in F2[y, w], capped at dim G_2(R^n)."""
    gr = grassmann2_duals(n)
    return height(GRASSMANN2.var("y"), IdealBasis.of(gr[n - 1], gr[n]), d_max=2 * (n - 2))


def rattray3(n: int, m: int) -> Verdict:
    """y^m (t^2 + t(x+y) + w)^m against <wbar_{n-2}, wbar_{n-1}, wbar_n> in W3."""
    _check(n, m, 3)
    bars = w3_duals(n)
    ideal = IdealBasis.of(*bars[n - 2 : n + 1])
    poly = w3_classes(m).test_element
    cert = contains(poly, ideal)
    return Verdict(not cert.member, "rattray3-w3", cert, test_polynomial=poly, ideal=ideal)


def makeev(n: int, m: int, k: int, l: int, orth: bool = False) -> Verdict:
    """Makeev criteria: weight-1..l product against <t_i^{n+1}> or the Stiefel index."""
    _check(n, m, k, l)
    poly = euler_makeev(k, l, m, orth=orth)
    ideal = stiefel_index(n, k) if orth else free_index(k, n + 1)
    cert = contains(poly, ideal)
    name = f"makeev-{'orth' if orth else 'free'}"
    return Verdict(not cert.member, name, cert, test_polynomial=poly, ideal=ideal)


def criterion_degree(kind: str, n: int, m: int, k: int, l: int | None = None, variant: str = "odd_sym", orth: bool = False) -> int:
    if kind == "rattray":
        return rattray_degree(k, m, variant)
    if kind == "rattray2":
        return m
    if kind == "rattray3":
        return 3 * m
    if kind == "makeev":
        return makeev_degree(k, l, m, orth)
    raise ValueError(f"unknown criterion kind {kind!r}")


@dataclass(frozen=True)
class Bounds:
    odd_sym_free: bool
    odd_free: bool
    makeev_rough: bool | None = None
    makeev_mlvz: bool | None = None
    rattray2_closed: bool | None = None

    def fired(self) -> list[str]:
        return [name for name, value in self.__dict__.items() if value]

    def to_dict(self) -> dict[str, bool | None]:
        return dict(self.__dict__)


def makeev_rough_threshold(m: int, k: int, l: int) -> int:
    return m * sum(math.comb(k - 1, i) for i in range(l + 1))


def mlvz_threshold(m: int, k: int) -> int:
    """2^(q+k-1) + r where m = 2^q + r, 0 <= r < 2^q."""
    q = m.bit_length() - 1
    r = m - (1 << q)
    return (1 << (q + k - 1)) + r


def bounds(n: int, m: int, k: int, l: int | None = None) -> Bounds:
    _check(n, m, k, l)
    return Bounds(
        odd_sym_free=(k - 1) * m < n,
        odd_free=2 * (k - 1) * m < n,
        makeev_rough=None if l is None else n >= makeev_rough_threshold(m, k, l),
        makeev_mlvz=None if l is None or l != k else n >= mlvz_threshold(m, k),
        rattray2_closed=rattray2_closed_form(n, m) if k == 2 else None,
    )

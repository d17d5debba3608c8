"""Exact rationals, constructive real numbers and fuel-bounded comparison.

A constructive real (``Crn``) is a pair of total maps: a fundamental sequence
``fund: int -> Fraction`` and a regulator ``reg: Fraction -> int`` such that for
every positive rational ``eps`` and all ``m, n > reg(eps)`` the terms differ by
at most ``eps``.  Nothing here ever looks at the limit itself; every decision is
made from finitely many approximants, which is why comparisons take a fuel
budget and may answer ``Unknown``.
"""

from __future__ import annotations

import enum
import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Union

__all__ = [
    "Fraction",
    "Crn",
    "Interval",
    "Ordering",
    "Unknown",
    "FuelExhausted",
    "rat_arith",
    "as_fraction",
    "crn_from_rational",
    "crn_approx",
    "crn_enclosure",
    "crn_arith",
    "crn_div_rational",
    "crn_compare_fuel",
    "crn_order_of_apart",
    "crn_refute_leq",
    "coarse_locate",
    "dyadic",
    "precision_index",
]

RationalLike = Union[Fraction, int, str]


def as_fraction(value: RationalLike) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings; floats are refused."""
    if isinstance(value, float):
        raise TypeError("floats are not exact; pass a Fraction or a 'p/q' string")
    return Fraction(value)


def rat_arith(op: str, a: RationalLike, b: RationalLike) -> Fraction:
    a, b = as_fraction(a), as_fraction(b)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        if b == 0:
            raise ZeroDivisionError(f"rational division of {a} by zero")
        return a / b
    raise ValueError(f"unknown rational operation {op!r}")


def dyadic(t: int) -> Fraction:
    """The working precision 2**-t attached to fuel t."""
    return Fraction(1, 1 << t)


def precision_index(eps: Fraction) -> int:
    """Smallest natural t with 2**-t <= eps."""
    if eps <= 0:
        raise ValueError("precision must be positive")
    # 2**t >= 1/eps  <=>  2**t >= ceil(1/eps) since 2**t is an integer
    c = -(-eps.denominator // eps.numerator)
    return (c - 1).bit_length()


@dataclass(frozen=True)
class Interval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, q: RationalLike) -> "Interval":
        q = as_fraction(q)
        return cls(q, q)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    def __contains__(self, q) -> bool:
        return self.lo <= q <= self.hi

    def intersect(self, other: "Interval") -> "Interval":
        return Interval(max(self.lo, other.lo), min(self.hi, other.hi))

    def __add__(self, other: "Interval") -> "Interval":
        return Interval(self.lo + other.lo, self.hi + other.hi)

    def __neg__(self) -> "Interval":
        return Interval(-self.hi, -self.lo)

    def scale(self, q: Fraction) -> "Interval":
        if q >= 0:
            return Interval(self.lo * q, self.hi * q)
        return Interval(self.hi * q, self.lo * q)


class Crn:
    """A constructive real number given by its two algorithms.

    ``fund`` values are memoised behind a lock; the cache only ever stores
    what ``fund`` would return anyway, so it is invisible to callers.
    """

    __slots__ = ("_fund", "_reg", "_cache", "_lock", "label")

    def __init__(self, fund: Callable[[int], Fraction], reg: Callable[[Fraction], int], label: str = ""):
        self._fund = fund
        self._reg = reg
        self._cache: dict[int, Fraction] = {}
        self._lock = threading.Lock()
        self.label = label

    def fund(self, n: int) -> Fraction:
        if n < 0:
            raise ValueError("sequence index must be natural")
        with self._lock:
            hit = self._cache.get(n)
        if hit is not None:
            return hit
        value = as_fraction(self._fund(n))
        with self._lock:
            return self._cache.setdefault(n, value)

    def reg(self, eps: RationalLike) -> int:
        eps = as_fraction(eps)
        if eps <= 0:
            raise ValueError("regulator argument must be a positive rational")
        return self._reg(eps)

    def __repr__(self) -> str:
        return f"Crn({self.label})" if self.label else "Crn(<anonymous>)"


def crn_from_rational(q: RationalLike) -> Crn:
    q = as_fraction(q)
    return Crn(lambda n: q, lambda eps: 1, label=str(q))


def crn_approx(x: Crn, eps: RationalLike) -> Fraction:
    """A rational within ``eps`` of ``x``: the term just past the regulator."""
    return x.fund(x.reg(eps) + 1)


def crn_enclosure(x: Crn, eps: RationalLike) -> Interval:
    eps = as_fraction(eps)
    q = crn_approx(x, eps)
    return Interval(q - eps, q + eps)


def _magnitude_bound(x: Crn) -> tuple[Fraction, int]:
    # every term past reg(1) is within 1 of approx(x, 1)
    return abs(crn_approx(x, 1)) + 1, x.reg(1)


def crn_arith(op: str, x: Crn, y: Crn | None = None) -> Crn:
    unary = op in ("neg", "abs")
    if unary != (y is None):
        raise ValueError(f"operation {op!r} takes {'one' if unary else 'two'} argument(s)")

    if op == "neg":
        return Crn(lambda n: -x.fund(n), lambda e: x.reg(e / 2), label=f"-{x.label}")
    if op == "abs":
        return Crn(lambda n: abs(x.fund(n)), lambda e: x.reg(e / 2), label=f"|{x.label}|")

    def half_reg(e: Fraction) -> int:
        return max(x.reg(e / 2), y.reg(e / 2))

    if op == "add":
        return Crn(lambda n: x.fund(n) + y.fund(n), half_reg, label=f"({x.label}+{y.label})")
    if op == "max":
        return Crn(lambda n: max(x.fund(n), y.fund(n)), half_reg, label=f"max({x.label},{y.label})")
    if op == "min":
        return Crn(lambda n: min(x.fund(n), y.fund(n)), half_reg, label=f"min({x.label},{y.label})")
    if op == "mul":
        bx, kx = _magnitude_bound(x)
        by, ky = _magnitude_bound(y)

        # the magnitude bounds only hold for indices past reg(1) of each factor
        def mul_reg(e: Fraction) -> int:
            return max(x.reg(e / (2 * by)), y.reg(e / (2 * bx)), kx, ky)

        return Crn(lambda n: x.fund(n) * y.fund(n), mul_reg, label=f"({x.label}*{y.label})")
    raise ValueError(f"unknown CRN operation {op!r}")


def crn_div_rational(x: Crn, q: RationalLike) -> Crn:
    q = as_fraction(q)
    if q == 0:
        raise ZeroDivisionError("CRN division by the rational 0")
    return Crn(lambda n: x.fund(n) / q, lambda e: x.reg(e * abs(q)), label=f"({x.label}/{q})")


class Ordering(enum.Enum):
    LESS = "less"
    GREATER = "greater"


@dataclass(frozen=True)
class Unknown:
    """No decision was reached within ``fuel``."""

    fuel: int


class FuelExhausted(RuntimeError):
    pass


def _separate(x: Crn, y: Crn, t: int) -> Ordering | None:
    eps = dyadic(t)
    ex, ey = crn_enclosure(x, eps), crn_enclosure(y, eps)
    if ex.hi < ey.lo:
        return Ordering.LESS
    if ey.hi < ex.lo:
        return Ordering.GREATER
    return None


def crn_compare_fuel(x: Crn, y: Crn, fuel: int) -> Ordering | Unknown:
    """Look for a positive rational gap between ``x`` and ``y`` at precisions 2**-t, t <= fuel."""
    for t in range(fuel + 1):
        verdict = _separate(x, y, t)
        if verdict is not None:
            return verdict
    return Unknown(fuel)


def crn_order_of_apart(x: Crn, y: Crn, max_fuel: int | None = None) -> Ordering:
    """Order of two CRNs promised to be apart.

    Diverges when ``x == y`` unless ``max_fuel`` is given, in which case
    ``FuelExhausted`` is raised once the cap is passed.
    """
    t = 0
    while max_fuel is None or t <= max_fuel:
        verdict = _separate(x, y, t)
        if verdict is not None:
            return verdict
        t += 1
    raise FuelExhausted(f"no separation up to fuel {max_fuel}")


def crn_refute_leq(x: Crn, y: Crn, fuel: int) -> bool:
    """True when ``x <= y`` is refuted (``y < x`` exhibited).

    False only means "not refuted within fuel"; it never affirms ``x <= y``.
    """
    return crn_compare_fuel(y, x, fuel) is Ordering.LESS


def coarse_locate(x: Crn, e: Interval) -> int:
    """Pick a bit b with x in E_b, the left or right two-thirds of ``e``.

    Deliberately not extensional: equal CRNs with different presentations can
    get different bits.  The caller must promise ``x`` lies in ``e``.
    """
    if not e.lo < e.hi:
        raise ValueError("locator interval must have positive length")
    length = e.hi - e.lo
    mid = (e.lo + e.hi) / 2
    q = crn_approx(x, length / 6)
    # |x - q| <= L/6, so q <= mid puts x below lo + 2L/3
    return 0 if q <= mid else 1


def locate_halves(e: Interval) -> tuple[Interval, Interval]:
    """The two overlapping sub-intervals E_0, E_1 of length 2/3 |e|."""
    two_thirds = (e.hi - e.lo) * 2 / 3
    return Interval(e.lo, e.lo + two_thirds), Interval(e.hi - two_thirds, e.hi)

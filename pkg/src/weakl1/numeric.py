"""Exact rationals, rational intervals and certified logarithms.

Every quantity the package certifies is either a :class:`fractions.Fraction`
or a :class:`RatInterval` with Fraction endpoints.  Floats never enter a
certified result; :meth:`RatInterval.decimal` exists for display only.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Union

from .errors import DomainError, ParameterError

Rational = Fraction
RationalLike = Union[Fraction, int, str]


def as_rational(x: RationalLike) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings; floats are rejected."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a rational")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"expected an exact rational, got {type(x).__name__}")


def rat_to_str(x: Fraction) -> str:
    """Canonical ``"p/q"`` serialization (always with a denominator)."""
    return f"{x.numerator}/{x.denominator}"


def rat_decimal(x: Fraction, digits: int = 12) -> str:
    """Decimal rendering rounded toward zero to ``digits`` significant digits."""
    if x == 0:
        return "0"
    sign = "-" if x < 0 else ""
    x = abs(x)
    exp10 = len(str(x.numerator)) - len(str(x.denominator))
    if Fraction(10) ** exp10 > x:
        exp10 -= 1
    shift = digits - 1 - exp10
    scaled = x * Fraction(10) ** shift
    mant = scaled.numerator // scaled.denominator
    text = str(mant)
    if -6 <= exp10 < digits:
        if shift <= 0:
            return sign + text + "0" * (-shift)
        text = text.rjust(shift + 1, "0")
        whole, frac = text[:-shift], text[-shift:].rstrip("0")
        return sign + whole + ("." + frac if frac else "")
    frac = text[1:].rstrip("0")
    return f"{sign}{text[0]}{'.' + frac if frac else ''}e{exp10:+d}"


@dataclass(frozen=True)
class RatInterval:
    """Closed interval ``[lo, hi]`` with exact rational endpoints."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        lo, hi = as_rational(self.lo), as_rational(self.hi)
        if lo > hi:
            raise ValueError(f"empty interval [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, x: RationalLike) -> "RatInterval":
        x = as_rational(x)
        return cls(x, x)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def contains(self, x) -> bool:
        if isinstance(x, RatInterval):
            return self.lo <= x.lo and x.hi <= self.hi
        x = as_rational(x)
        return self.lo <= x <= self.hi

    __contains__ = contains

    def intersects(self, other: "RatInterval") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def hull(self, other: "RatInterval") -> "RatInterval":
        return RatInterval(min(self.lo, other.lo), max(self.hi, other.hi))

    def widen(self, r: RationalLike) -> "RatInterval":
        r = as_rational(r)
        return RatInterval(self.lo - r, self.hi + r)

    def _coerce(self, other) -> "RatInterval":
        if isinstance(other, RatInterval):
            return other
        return RatInterval.point(other)

    def __add__(self, other):
        other = self._coerce(other)
        return RatInterval(self.lo + other.lo, self.hi + other.hi)

    __radd__ = __add__

    def __neg__(self):
        return RatInterval(-self.hi, -self.lo)

    def __sub__(self, other):
        other = self._coerce(other)
        return RatInterval(self.lo - other.hi, self.hi - other.lo)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        p = (self.lo * other.lo, self.lo * other.hi,
             self.hi * other.lo, self.hi * other.hi)
        return RatInterval(min(p), max(p))

    __rmul__ = __mul__

    def reciprocal(self) -> "RatInterval":
        if self.lo <= 0 <= self.hi:
            raise DomainError(f"reciprocal of an interval containing 0: {self}")
        return RatInterval(1 / self.hi, 1 / self.lo)

    def __truediv__(self, other):
        return self * self._coerce(other).reciprocal()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.reciprocal()

    def to_json(self) -> dict:
        return {"lo": rat_to_str(self.lo), "hi": rat_to_str(self.hi)}

    @classmethod
    def from_json(cls, obj: dict) -> "RatInterval":
        return cls(Fraction(obj["lo"]), Fraction(obj["hi"]))

    def decimal(self, digits: int = 12) -> str:
        return f"[{rat_decimal(self.lo, digits)}, {rat_decimal(self.hi, digits)}]"

    def __repr__(self):
        return f"RatInterval({self.decimal()})"


class Ordering(enum.Enum):
    LESS = "Less"
    GREATER = "Greater"
    OVERLAPPING = "Overlapping"


def cmp_certified(a: RatInterval, b: RatInterval) -> Ordering:
    """Compare two enclosures; OVERLAPPING means undecided at this precision."""
    if a.hi < b.lo:
        return Ordering.LESS
    if a.lo > b.hi:
        return Ordering.GREATER
    return Ordering.OVERLAPPING


def _atanh_log(m: Fraction, eps: Fraction) -> RatInterval:
    # ln m = 2 atanh(y), y = (m-1)/(m+1); tail after K terms is bounded by
    # 2|y|^(2K+1) / ((2K+1)(1-y^2)).
    y = (m - 1) / (m + 1)
    if y == 0:
        return RatInterval.point(0)
    y2 = y * y
    ay = abs(y)
    total = Fraction(0)
    power = y
    k = 0
    while True:
        total += power / (2 * k + 1)
        k += 1
        power *= y2
        tail = 2 * ay ** (2 * k + 1) / ((2 * k + 1) * (1 - y2))
        if 2 * tail <= eps / 2:
            break
    centre = 2 * total
    # Outward rounding to a dyadic grid keeps denominators small.
    bits = max(8, eps.denominator.bit_length() - eps.numerator.bit_length() + 4)
    scale = 1 << bits
    lo = Fraction(math.floor((centre - tail) * scale), scale)
    hi = Fraction(math.ceil((centre + tail) * scale), scale)
    return RatInterval(lo, hi)


@lru_cache(maxsize=256)
def _ln2(eps: Fraction) -> RatInterval:
    return _atanh_log(Fraction(2), eps)


@lru_cache(maxsize=4096)
def ln_enclosure(x: RationalLike, eps: RationalLike = Fraction(1, 10**6)) -> RatInterval:
    """Certified enclosure of the natural logarithm of a positive rational.

    Parameters
    ----------
    x : rational, x > 0
    eps : rational, eps > 0
        Maximum width of the returned interval.
    """
    x, eps = as_rational(x), as_rational(eps)
    if x <= 0:
        raise DomainError(f"ln of non-positive value {x}")
    if eps <= 0:
        raise ParameterError(f"eps must be positive, got {eps}")
    e = x.numerator.bit_length() - x.denominator.bit_length()
    m = x / Fraction(2) ** e
    while m >= 2:
        m /= 2
        e += 1
    while m < Fraction(1, 2):
        m *= 2
        e -= 1
    if e == 0:
        return _atanh_log(m, eps)
    head = _atanh_log(m, eps / 2)
    ln2 = _ln2(eps / (2 * abs(e)))
    return head + ln2 * e


def ln_value_enclosure(x: RationalLike, rel: RationalLike = Fraction(1, 10**6)) -> RatInterval:
    """ln enclosure whose width is ``rel`` relative to the magnitude of ln x."""
    x, rel = as_rational(x), as_rational(rel)
    coarse = ln_enclosure(x, Fraction(1, 8))
    mag = max(abs(coarse.lo), abs(coarse.hi), Fraction(1, 8))
    return ln_enclosure(x, rel * mag)

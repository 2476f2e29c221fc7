"""Exact arithmetic on the circle R/Z.

Angles are reduced rationals in [0, 1).  Everything here works with
Python integers, so denominators such as 3**500 are fine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

__all__ = [
    "Angle",
    "angle",
    "parse_angle",
    "frac",
    "CircleInterval",
    "mul_by",
    "orbit",
    "orbit_nums",
    "cyclic_order",
    "digits",
    "from_digits",
]


def frac(x) -> Fraction:
    """Fractional part of a rational, always in [0, 1)."""
    x = Fraction(x)
    return x - (x.numerator // x.denominator)


class Angle(Fraction):
    """A point of R/Z stored as its canonical residue in [0, 1).

    Subclasses :class:`fractions.Fraction`, so ordinary arithmetic works
    and yields plain fractions; wrap the result in ``Angle`` to reduce it
    mod 1 again.
    """

    __slots__ = ()

    def __new__(cls, num=0, den=None):
        if den is not None:
            if den == 0:
                raise ValueError("angle denominator must be nonzero")
            value = Fraction(num, den)
        elif isinstance(num, str):
            value = Fraction(num)
        else:
            value = Fraction(num)
        value = frac(value)
        return super().__new__(cls, value.numerator, value.denominator)

    @property
    def num(self) -> int:
        return self.numerator

    @property
    def den(self) -> int:
        return self.denominator

    def __repr__(self):
        return f"Angle({self.numerator}, {self.denominator})"

    def __str__(self):
        return f"{self.numerator}/{self.denominator}"

    def __hash__(self):
        return Fraction.__hash__(self)

    @classmethod
    def _raw(cls, num: int, den: int) -> "Angle":
        """Build from an already reduced residue, skipping normalisation."""
        obj = object.__new__(cls)
        obj._numerator = num
        obj._denominator = den
        return obj


def angle(num: int, den: int = 1) -> Angle:
    """Canonical residue of ``num/den`` mod 1.

    >>> angle(9, 7), angle(-1, 3)
    (Angle(2, 7), Angle(2, 3))
    """
    if den <= 0:
        raise ValueError("den must be a positive integer")
    return Angle(num, den)


def parse_angle(text: str) -> Angle:
    """Parse ``"num/den"`` (or an integer) into an Angle."""
    text = text.strip()
    if "/" in text:
        n, d = text.split("/", 1)
        return angle(int(n), int(d))
    return angle(int(text), 1)


def mul_by(x, d: int) -> Angle:
    """The circle map m_d : x -> d x."""
    return Angle(d * Fraction(x))


def orbit(x, d: int) -> tuple[list[Angle], list[Angle]]:
    """Exact forward orbit of ``x`` under m_d.

    Returns ``(preperiod, cycle)``.  Rational orbits are always
    eventually periodic because ``d*x`` never enlarges the denominator.
    """
    x = Angle(x)
    pre, cyc = orbit_nums(x.numerator, x.denominator, d)
    D = x.denominator
    mk = lambda n: Angle(n, D) if n == 0 or math.gcd(n, D) != 1 else Angle._raw(n, D)
    return [mk(n) for n in pre], [mk(n) for n in cyc]


def orbit_nums(num: int, den: int, d: int) -> tuple[list[int], list[int]]:
    """Orbit of num/den under m_d as numerators over the fixed denominator ``den``."""
    seen: dict[int, int] = {}
    pts: list[int] = []
    n = num % den
    while n not in seen:
        seen[n] = len(pts)
        pts.append(n)
        n = (n * d) % den
    k = seen[n]
    return pts[:k], pts[k:]


def cyclic_order(a, b, c) -> int:
    """Orientation of the triple (a, b, c) on the circle.

    Returns +1 if a, b, c occur counterclockwise, -1 if clockwise and
    0 if two of them coincide.
    """
    a, b, c = Angle(a), Angle(b), Angle(c)
    if a == b or b == c or a == c:
        return 0
    return 1 if frac(b - a) < frac(c - a) else -1


def digits(x, base: int) -> tuple[list[int], list[int]]:
    """Base-``base`` expansion of an angle as (preperiod, cycle) digits.

    The expansion never ends in repeated ``base-1`` digits; zero is
    ``([], [0])``.
    """
    x = Angle(x)
    D = x.denominator
    pre, cyc = orbit_nums(x.numerator, D, base)
    return [(n * base) // D for n in pre], [(n * base) // D for n in cyc]


def from_digits(pre: Sequence[int], cycle: Sequence[int], base: int) -> Fraction:
    """Value of 0.pre(cycle)... in base ``base``, as an exact Fraction.

    The result is not reduced mod 1, so an all-``base-1`` stream gives 1.
    """
    head = 0
    for dgt in pre:
        head = head * base + dgt
    value = Fraction(head, base ** len(pre))
    if cycle:
        rep = 0
        for dgt in cycle:
            rep = rep * base + dgt
        value += Fraction(rep, (base ** len(cycle) - 1) * base ** len(pre))
    return value


@dataclass(frozen=True)
class CircleInterval:
    """Arc of R/Z running counterclockwise from ``lo`` to ``hi``.

    ``lo == hi`` describes either a single point (both ends closed) or
    the whole circle minus that point (both ends open, length 1).
    """

    lo: Angle
    hi: Angle
    lo_closed: bool = False
    hi_closed: bool = False

    def __post_init__(self):
        object.__setattr__(self, "lo", Angle(self.lo))
        object.__setattr__(self, "hi", Angle(self.hi))
        if self.lo == self.hi and self.lo_closed != self.hi_closed:
            raise ValueError("zero-length interval must be a closed point or a punctured circle")

    @classmethod
    def open(cls, lo, hi) -> "CircleInterval":
        return cls(Angle(lo), Angle(hi), False, False)

    @classmethod
    def closed(cls, lo, hi) -> "CircleInterval":
        return cls(Angle(lo), Angle(hi), True, True)

    @classmethod
    def from_length(cls, lo, length, lo_closed=False, hi_closed=False) -> "CircleInterval":
        return cls(Angle(lo), Angle(Fraction(lo) + Fraction(length)), lo_closed, hi_closed)

    @property
    def length(self) -> Fraction:
        if self.lo == self.hi:
            return Fraction(0) if self.lo_closed else Fraction(1)
        return frac(self.hi - self.lo)

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi and self.lo_closed

    def __contains__(self, x) -> bool:
        rel = frac(Fraction(x) - self.lo)
        if rel == 0:
            return self.lo_closed
        L = self.length
        if rel == L:
            return self.hi_closed
        return rel < L

    def shifted(self, s) -> "CircleInterval":
        return CircleInterval(Angle(self.lo + Fraction(s)), Angle(self.hi + Fraction(s)),
                              self.lo_closed, self.hi_closed)

    def closure(self) -> "CircleInterval":
        return CircleInterval(self.lo, self.hi, True, True) if self.lo != self.hi else self

    def interior(self) -> "CircleInterval":
        return CircleInterval(self.lo, self.hi, False, False)

    def __str__(self):
        left = "[" if self.lo_closed else "("
        right = "]" if self.hi_closed else ")"
        return f"{left}{self.lo}, {self.hi}{right}"


def in_any(x, intervals: Iterable[CircleInterval]) -> bool:
    return any(x in I for I in intervals)

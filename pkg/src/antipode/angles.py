"""Combinatorics of visible angles for maps on a parameter ray of angle Θ.

``phi`` turns an internal angle θ (for doubling) into a Julia-set
coordinate (for tripling); ``psi`` goes back.  Everything is exact for
rational input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .circle import Angle, CircleInterval, frac, from_digits, mul_by, orbit, orbit_nums
from .rotation import (
    RotationSet,
    goldberg_orbit,
    monotone_extension,
    rotation_number,
    x_d_of,
)

__all__ = [
    "DigitStream",
    "CriticalGap",
    "phi",
    "phi_pm",
    "phi_jump",
    "critical_gap",
    "psi",
    "visible",
    "collapse_intervals",
    "doubly_visible_set",
    "dynamic_rotation_number",
    "balanced_angle",
    "balanced_pair",
    "rho_inverse_plus",
    "rho_inverse_minus",
    "rho_discontinuity",
    "doubling_period",
]

HALF = Fraction(1, 2)


@dataclass(frozen=True)
class DigitStream:
    """Eventually periodic digit expansion 0.pre(cycle)... in a given base."""

    preperiod: tuple
    cycle: tuple
    base: int = 3

    @property
    def value(self) -> Fraction:
        return from_digits(self.preperiod, self.cycle, self.base)

    def __str__(self):
        pre = "".join(map(str, self.preperiod))
        return f"0.{pre}({''.join(map(str, self.cycle))})_{self.base}"


@dataclass(frozen=True)
class CriticalGap:
    theta: Angle
    a: Angle
    b: Angle

    @property
    def length(self) -> Fraction:
        return frac(self.b - self.a)

    @property
    def interval(self) -> CircleInterval:
        return CircleInterval.open(self.a, self.b)

    def to_json(self) -> dict:
        return {"theta": str(self.theta), "a": str(self.a), "b": str(self.b),
                "length": str(Angle(self.length)) if self.length < 1 else "1/1"}


def doubling_period(theta) -> int | None:
    """Period of Θ under doubling, or None when Θ is strictly preperiodic."""
    pre, cyc = orbit(Angle(theta), 2)
    return None if pre else len(cyc)


def _digit_stream(Theta: Angle, theta: Angle, minus: bool, nums=None) -> DigitStream:
    tmin, tmax = min(Theta, HALF), max(Theta, HALF)
    D = theta.denominator
    pre, cyc = nums if nums is not None else orbit_nums(theta.numerator, D, 2)
    # compare n/D against tmin, tmax with integer cross-multiplication
    lo_n, lo_d = tmin.numerator, tmin.denominator
    hi_n, hi_d = tmax.numerator, tmax.denominator

    if minus:
        # intervals (0, tmin], (tmin, tmax], (tmax, 1]; 0 counts as 1
        def dig(n):
            n = n or D
            return 0 if n * lo_d <= lo_n * D else (1 if n * hi_d <= hi_n * D else 2)
    else:
        def dig(n):
            return 0 if n * lo_d < lo_n * D else (1 if n * hi_d < hi_n * D else 2)

    return DigitStream(tuple(map(dig, pre)), tuple(map(dig, cyc)), 3)


def _in_lambda(Theta: Angle, theta: Angle, nums=None) -> bool:
    pre, cyc = nums if nums is not None else orbit_nums(theta.numerator, theta.denominator, 2)
    D = theta.denominator
    if D % Theta.denominator:
        return True
    target = Theta.numerator * (D // Theta.denominator)
    return target not in pre and target not in cyc


def phi(theta_c, theta, with_digits: bool = False):
    """Julia coordinate of the landing point of the internal θ-ray.

    Digit x_(m+1) of the ternary expansion is 0, 1 or 2 according as
    2^m θ lies in [0, θmin), [θmin, θmax) or [θmax, 1), where
    θmin = min(Θ, 1/2) and θmax = max(Θ, 1/2).  For Θ = 1/2 the middle
    interval is empty and only digits 0 and 2 occur.

    Raises ValueError when some 2^m θ equals Θ; use :func:`phi_pm`.
    """
    Theta, theta = Angle(theta_c), Angle(theta)
    nums = orbit_nums(theta.numerator, theta.denominator, 2)
    if not _in_lambda(Theta, theta, nums):
        raise ValueError(f"{theta} eventually doubles onto {Theta}; use phi_pm")
    ds = _digit_stream(Theta, theta, False, nums)
    val = Angle(ds.value)
    return (val, ds) if with_digits else val


def phi_pm(theta_c, theta) -> tuple[Angle, Angle]:
    """Left and right landing limits (minus, plus) for a bifurcating angle."""
    Theta, theta = Angle(theta_c), Angle(theta)
    nums = orbit_nums(theta.numerator, theta.denominator, 2)
    if _in_lambda(Theta, theta, nums):
        raise ValueError(f"{theta} never doubles onto {Theta}; use phi")
    plus = _digit_stream(Theta, theta, False, nums).value
    minus = _digit_stream(Theta, theta, True, nums).value
    return Angle(minus), Angle(plus)


def phi_jump(theta_c, theta) -> Fraction:
    """Exact plus-minus difference, the sum of 3^-(m+1) over m with 2^m θ = Θ."""
    Theta, theta = Angle(theta_c), Angle(theta)
    pre, cyc = orbit(theta, 2)
    hits = [m for m, y in enumerate(pre) if y == Theta]
    total = sum((Fraction(1, 3 ** (m + 1)) for m in hits), Fraction(0))
    k = len(pre)
    if Theta in cyc:
        p = len(cyc)
        m0 = k + cyc.index(Theta)
        total += Fraction(1, 3 ** (m0 + 1)) / (1 - Fraction(1, 3 ** p))
    return total


def critical_gap(theta_c) -> CriticalGap:
    """The gap (phi^-(Θ), phi^+(Θ)) invisible from the origin."""
    Theta = Angle(theta_c)
    a, b = phi_pm(Theta, Theta)
    return CriticalGap(Theta, a, b)


def _bit(Theta: Angle, tern: int) -> int:
    if Theta <= HALF:
        return 1 if tern == 2 else 0
    return 1 if tern >= 1 else 0


def psi(theta_c, x) -> Angle:
    """Monotone degree-one inverse of phi; constant on the closure of each gap.

    Walks the tripling orbit of x.  If the orbit enters the closed
    critical gap at step k the value is the binary prefix plus Θ/2^k;
    otherwise the prefix bits come from the ternary digits and repeat.
    """
    Theta = Angle(theta_c)
    gap = critical_gap(Theta)
    closed = gap.interval.closure()
    y = Angle(x)
    bits: list[int] = []
    seen: dict[Angle, int] = {}
    while y not in seen:
        if y in closed:
            head = from_digits(bits, [], 2)
            return Angle(head + Theta / 2 ** len(bits))
        seen[y] = len(bits)
        bits.append(_bit(Theta, (y.numerator * 3) // y.denominator))
        y = mul_by(y, 3)
    k = seen[y]
    return Angle(from_digits(bits[:k], bits[k:], 2))


def visible(theta_c, x) -> bool:
    """True iff the tripling orbit of x never enters the open critical gap."""
    gap = critical_gap(theta_c).interval
    pre, cyc = orbit(Angle(x), 3)
    return not any(y in gap for y in pre + cyc)


def collapse_intervals(theta_c) -> tuple[CircleInterval, CircleInterval]:
    """I1 of length 1/3 inside the critical gap (centred when longer) and I2 = I1 + 1/2."""
    gap = critical_gap(theta_c)
    lo = gap.a + (gap.length - Fraction(1, 3)) / 2
    I1 = CircleInterval.from_length(lo, Fraction(1, 3))
    return I1, I1.shifted(HALF)


def doubly_visible_set(theta_c) -> RotationSet:
    """Angles visible from both 0 and infinity, as the rotation set X_3(I1 u I2)."""
    return x_d_of(list(collapse_intervals(theta_c)), 3)


def dynamic_rotation_number(theta_c) -> Angle:
    """Rotation number of the doubly visible set, computed exactly."""
    g = monotone_extension(list(collapse_intervals(theta_c)), 3)
    return rotation_number(g)


def balanced_angle(t, bits: int = 64):
    """The balanced angle of rotation number t.

    Rational t must have odd denominator; the answer is the middle point
    of the sorted Goldberg orbit.  A float or mpmath real is treated as
    irrational and answered through :func:`rho_inverse_plus`.
    """
    if isinstance(t, (int, Fraction)):
        t = Angle(t)
        if t.denominator % 2 == 0:
            raise ValueError("even denominator: use balanced_pair")
        pts = goldberg_orbit(t).periodic_points
        return pts[len(pts) // 2]
    return rho_inverse_plus(t, bits=bits)


def balanced_pair(t) -> tuple[Angle, Angle]:
    """Middle pair of the sorted Goldberg orbit for even-denominator t."""
    t = Angle(t)
    n = t.denominator
    if n % 2:
        raise ValueError("odd denominator: use balanced_angle")
    pts = goldberg_orbit(t).periodic_points
    return pts[n // 2 - 1], pts[n // 2]


def rho_inverse_plus(t, bits: int = 64):
    """Right-continuous inverse of the dynamic rotation number.

    Bit b_l is 1 iff frac(1/2 + l t) lies in [1 - t, 1); the angle is
    sum b_l / 2^(l+1).  Rational t gives an exact Angle (the bits have
    period equal to the denominator).  For irrational t pass an mpmath
    or float value; the result is ``(prefix, error_bound)`` with
    ``bits`` bits and bound 2^-bits.
    """
    if isinstance(t, (int, Fraction)):
        t = Angle(t)
        n = t.denominator
        cyc = [1 if frac(HALF + l * t) >= 1 - t else 0 for l in range(n)]
        if t == 0:
            return Angle(0)
        return Angle(from_digits([], cyc, 2))
    import mpmath

    with mpmath.workdps(max(30, bits // 3 + 20)):
        tm = mpmath.mpf(t)
        tm = tm - mpmath.floor(tm)
        acc = 0
        for l in range(bits):
            v = mpmath.mpf(0.5) + l * tm
            v = v - mpmath.floor(v)
            acc = 2 * acc + (1 if v >= 1 - tm else 0)
    return Fraction(acc, 2 ** bits), Fraction(1, 2 ** bits)


def rho_discontinuity(t) -> Fraction:
    """Jump of the inverse at t: 2^(k-1)/(2^(2k)-1) when den(t) = 2k, else 0."""
    t = Angle(t)
    n = t.denominator
    if n % 2:
        return Fraction(0)
    k = n // 2
    return Fraction(2 ** (k - 1), 2 ** (2 * k) - 1)


def rho_inverse_minus(t) -> Angle:
    """Left limit of the inverse: the plus value minus the jump."""
    return Angle(rho_inverse_plus(t) - rho_discontinuity(t))

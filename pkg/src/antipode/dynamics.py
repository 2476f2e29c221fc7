"""Numerics of the family f_q(z) = z^2 (q - z) / (1 + conj(q) z).

Every map in the family commutes with the antipode z -> -1/conj(z),
fixes 0 and infinity as superattracting points, and has two free
critical points c0 (near 0) and cinf = antipode(c0).

The per-orbit loops are numba kernels so that the renderer can call
them per pixel without the GIL.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

import numba as nb
import numpy as np

from .circle import Angle

__all__ = [
    "MapParam",
    "OrbitKind",
    "OrbitClass",
    "ParamType",
    "f_eval",
    "df_eval",
    "antipode",
    "chordal",
    "critical_points",
    "fixed_points",
    "trap_radius",
    "classify_orbit",
    "classify_parameter",
    "cycle_rotation_number",
    "large_q_rotation_check",
]

INF = complex(math.inf, 0.0)

# kernel codes
ZERO, INFTY, CYCLE, UNDECIDED = 0, 1, 2, 3
CENTRAL, CAPTURE_ZERO, CAPTURE_INF, MANDELBROT, TRICORN, HERMAN = 0, 1, 2, 3, 4, 5


def _is_inf(z) -> bool:
    return not cmath.isfinite(z)


def f_eval(q: complex, z: complex) -> complex:
    """Evaluate f_q on the Riemann sphere; infinity is ``complex(inf, 0)``."""
    q = complex(q)
    if _is_inf(z):
        return INF
    z = complex(z)
    if abs(z) > 2.0 * max(1.0, abs(q)):
        # chart w = 1/z: f = (q w - 1) / (w^2 (w + conj q))
        w = 1.0 / z
        den = w * w * (w + q.conjugate())
        if den == 0:
            return INF
        return (q * w - 1.0) / den
    den = 1.0 + q.conjugate() * z
    if den == 0:
        return INF
    return z * z * (q - z) / den


def df_eval(q: complex, z: complex) -> complex:
    """Derivative f_q'(z) at a finite point."""
    qb = complex(q).conjugate()
    den = 1.0 + qb * z
    return ((2.0 * z * q - 3.0 * z * z) * den - z * z * (q - z) * qb) / (den * den)


def antipode(z: complex) -> complex:
    """z -> -1/conj(z), swapping 0 and infinity."""
    if _is_inf(z):
        return 0j
    if z == 0:
        return INF
    return -1.0 / complex(z).conjugate()


def chordal(a: complex, b: complex) -> float:
    """Chordal distance on the unit-diameter-2 sphere (values in [0, 2])."""
    ia, ib = _is_inf(a), _is_inf(b)
    if ia and ib:
        return 0.0
    if ia:
        return 2.0 / math.sqrt(1.0 + abs(b) ** 2)
    if ib:
        return 2.0 / math.sqrt(1.0 + abs(a) ** 2)
    return 2.0 * abs(a - b) / math.sqrt((1.0 + abs(a) ** 2) * (1.0 + abs(b) ** 2))


def kappa(a: float) -> float:
    """c0 = kappa(|q|^2) * q."""
    return (a - 3.0 + math.sqrt(9.0 + 10.0 * a + a * a)) / (4.0 * a)


def critical_points(q: complex) -> tuple[complex, complex]:
    """Free critical points (c0, cinf), with cinf = antipode(c0)."""
    q = complex(q)
    if q == 0:
        raise ValueError("q = 0 has no free critical points")
    a = abs(q) ** 2
    c0 = kappa(a) * q
    return c0, antipode(c0)


def fixed_points(q: complex) -> tuple[complex, complex, tuple[complex, complex]]:
    """Free fixed points i(y +- sqrt(y^2 + 1)), y = Im q, and their multipliers."""
    y = complex(q).imag
    s = math.sqrt(y * y + 1.0)
    fp, fm = 1j * (y + s), 1j * (y - s)
    return fp, fm, (df_eval(q, fp), df_eval(q, fm))


@dataclass(frozen=True)
class MapParam:
    """A parameter q together with its critical and fixed points."""

    q: complex
    a: float = field(init=False)
    c0: complex = field(init=False)
    cinf: complex = field(init=False)
    fix_plus: complex = field(init=False)
    fix_minus: complex = field(init=False)

    def __post_init__(self):
        q = complex(self.q)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "a", abs(q) ** 2)
        c0, ci = critical_points(q)
        object.__setattr__(self, "c0", c0)
        object.__setattr__(self, "cinf", ci)
        fp, fm, _ = fixed_points(q)
        object.__setattr__(self, "fix_plus", fp)
        object.__setattr__(self, "fix_minus", fm)

    def __call__(self, z):
        return f_eval(self.q, z)


def trap_radius(q: complex, eps: float = 1e-3) -> float:
    """Radius of a disk about 0 that f_q maps strictly into itself (ratio <= 1/3)."""
    return min(eps, 0.25 / (1.0 + abs(q)))


# ---------------------------------------------------------------- kernels


@nb.njit(cache=True, nogil=True)
def _f(q, z):
    return z * z * (q - z) / (1.0 + q.conjugate() * z)


@nb.njit(cache=True, nogil=True)
def _chordal(a, b):
    return 2.0 * abs(a - b) / math.sqrt((1.0 + abs(a) ** 2) * (1.0 + abs(b) ** 2))


@nb.njit(cache=True, nogil=True)
def _fate(q, z, budget, trap, tol):
    """Follow an orbit until it is trapped near 0 or infinity or cycles.

    Returns (kind, iterations, last point, period guess).  Cycles are
    found with Brent's method in the chordal metric.
    """
    big = 1.0 / trap
    tort = z
    power = 1
    lam = 0
    for i in range(budget):
        az = abs(z)
        if az < trap:
            return 0, i, z, 0
        if not (az <= big):
            return 1, i, z, 0
        z = _f(q, z)
        lam += 1
        if abs(z) <= big and _chordal(z, tort) < tol:
            return 2, i + 1, z, lam
        if lam == power:
            tort = z
            power *= 2
            lam = 0
    return 3, budget, z, 0


@nb.njit(cache=True, nogil=True)
def _self_antipodal(q, z, p, tol):
    w = -1.0 / z.conjugate()
    y = z
    for _ in range(p):
        if _chordal(y, w) < tol:
            return True
        y = _f(q, y)
    return False


@nb.njit(cache=True, nogil=True)
def _kappa(a):
    return (a - 3.0 + math.sqrt(9.0 + 10.0 * a + a * a)) / (4.0 * a)


@nb.njit(cache=True, nogil=True)
def _param_code(q, budget, eps, tol, nseg):
    """Component type of a parameter q (codes CENTRAL..HERMAN) and cycle period."""
    a = abs(q) ** 2
    if a == 0.0:
        return 0, 0
    trap = min(eps, 0.25 / (1.0 + abs(q)))
    c0 = _kappa(a) * q
    kind, it, zc, p = _fate(q, c0, budget, trap, tol)
    if kind == 1:
        return 2, 0
    if kind == 3:
        return 5, 0
    if kind == 2:
        # settle onto the cycle before the antipodal test
        for _ in range(64 * p):
            zc = _f(q, zc)
        if _self_antipodal(q, zc, p, 1e3 * tol):
            return 4, p
        return 3, p
    # c0 -> 0: immediate basin iff the segment [0, c0] stays in the basin
    for k in range(1, nseg + 1):
        z = c0 * (k / (nseg + 1.0))
        kk, _, _, _ = _fate(q, z, budget, trap, tol)
        if kk != 0:
            return 1, 0
    return 0, 0


@nb.njit(cache=True, nogil=True)
def _mean_rotation(q, z, n):
    s = 0.0
    for _ in range(n):
        w = _f(q, z)
        # the orbit fell into a basin after all: no rotation number
        if z == 0 or w == 0 or not (abs(w) < 1e300):
            return -1.0
        s += math.atan2((w / z).imag, (w / z).real)
        z = w
    r = s / (2.0 * math.pi * n)
    return r - math.floor(r)


# ---------------------------------------------------------- classifiers


class OrbitKind(Enum):
    TO_ZERO = "ToZero"
    TO_INFINITY = "ToInfinity"
    ATTRACTING_CYCLE = "AttractingCycle"
    UNDECIDED = "Undecided"


class ParamType(Enum):
    CENTRAL = "Central"
    CAPTURE_ZERO = "CaptureZero"
    CAPTURE_INFINITY = "CaptureInfinity"
    MANDELBROT = "MandelbrotType"
    TRICORN = "TricornType"
    HERMAN = "HermanCandidate"


_PARAM_CODES = [ParamType.CENTRAL, ParamType.CAPTURE_ZERO, ParamType.CAPTURE_INFINITY,
                ParamType.MANDELBROT, ParamType.TRICORN, ParamType.HERMAN]


@dataclass
class OrbitClass:
    kind: OrbitKind
    iterations_used: int
    period: int = 0
    self_antipodal: bool = False
    cycle: list = field(default_factory=list)
    multiplier: complex = 0j

    def to_json(self) -> dict:
        out = {"kind": self.kind.value, "iterations_used": self.iterations_used}
        if self.kind is OrbitKind.ATTRACTING_CYCLE:
            out.update(period=self.period, self_antipodal=self.self_antipodal,
                       multiplier_abs=abs(self.multiplier),
                       cycle=[[z.real, z.imag] for z in self.cycle])
        return out


def iterate(q: complex, z: complex, n: int) -> complex:
    for _ in range(n):
        z = f_eval(q, z)
    return z


def _cycle_newton(q: complex, z: complex, p: int, steps: int = 50, tol: float = 1e-13):
    """Newton on f^p(z) - z; returns (z, converged)."""
    for _ in range(steps):
        w, dw = z, 1.0 + 0j
        for _ in range(p):
            dw *= df_eval(q, w)
            w = f_eval(q, w)
        if _is_inf(w):
            return z, False
        step = (w - z) / (dw - 1.0)
        z = z - step
        if abs(step) < tol * max(1.0, abs(z)):
            return z, True
    return z, False


def _refine_cycle(q, z, p, tol):
    z, ok = _cycle_newton(q, z, p)
    if not ok:
        return None
    cyc = [z]
    for _ in range(p - 1):
        cyc.append(f_eval(q, cyc[-1]))
    # minimal period
    for d in range(1, p):
        if p % d == 0 and chordal(cyc[d], cyc[0]) < tol:
            cyc = cyc[:d]
            break
    mult = 1.0 + 0j
    for w in cyc:
        mult *= df_eval(q, w)
    return cyc, mult


def classify_orbit(q: complex, z0: complex, budget: int = 5000, eps: float = 1e-3,
                   tol: float = 1e-9) -> OrbitClass:
    """Fate of the orbit of z0 under f_q.

    Parameters
    ----------
    q : complex
        Parameter.
    z0 : complex
        Starting point; infinity is accepted.
    budget : int
        Maximum number of iterations.
    eps : float
        Capture radius around 0 (and 1/eps around infinity), further
        shrunk to a disk where f_q is a contraction.
    tol : float
        Chordal tolerance for cycle detection.
    """
    q = complex(q)
    if _is_inf(z0):
        return OrbitClass(OrbitKind.TO_INFINITY, 0)
    if z0 == 0:
        return OrbitClass(OrbitKind.TO_ZERO, 0)
    trap = trap_radius(q, eps)
    kind, it, zc, p = _fate(q, complex(z0), budget, trap, tol)
    if kind == ZERO:
        return OrbitClass(OrbitKind.TO_ZERO, it)
    if kind == INFTY:
        return OrbitClass(OrbitKind.TO_INFINITY, it)
    if kind == CYCLE:
        ref = _refine_cycle(q, zc, p, 1e3 * tol)
        if ref is not None:
            cyc, mult = ref
            if abs(mult) < 1.0:
                selfa = any(chordal(antipode(cyc[0]), w) < 1e-7 for w in cyc)
                return OrbitClass(OrbitKind.ATTRACTING_CYCLE, it, len(cyc), selfa, cyc, mult)
    return OrbitClass(OrbitKind.UNDECIDED, it)


def classify_parameter(q: complex, budget: int = 2000, eps: float = 1e-3, tol: float = 1e-9,
                       nseg: int = 8) -> ParamType:
    """Hyperbolic-component type of q from the fate of the free critical point c0.

    Central versus capture uses a heuristic: c0 counts as being in the
    immediate basin of 0 when ``nseg`` sample points of the segment
    [0, c0] all converge to 0.
    """
    q = complex(q)
    if q == 0:
        raise ValueError("q = 0 is the degenerate map -z^3")
    code, _ = _param_code(q, budget, eps, tol, nseg)
    return _PARAM_CODES[code]


def cycle_rotation_number(q: complex, cycle) -> Fraction:
    """Combinatorial rotation number of a cycle as seen from 0.

    The cycle points are sorted by argument; f_q moves each one k
    places forward and the result is k / period.
    """
    cyc = list(cycle)
    p = len(cyc)
    if p == 1:
        return Angle(0)
    args = [cmath.phase(z) % (2 * math.pi) for z in cyc]
    order = sorted(range(p), key=lambda i: args[i])
    pos = {i: r for r, i in enumerate(order)}
    shifts = {(pos[(i + 1) % p] - pos[i]) % p for i in range(p)}
    if len(shifts) != 1:
        raise ValueError("cycle does not rotate around 0")
    return Angle(shifts.pop(), p)


def mean_rotation(q: complex, z0: complex, n: int = 20000) -> float | None:
    """Average argument advance per step along an orbit, in turns.

    None when the orbit reaches 0 or infinity within n steps.
    """
    r = float(_mean_rotation(complex(q), complex(z0), n))
    return None if r < 0 else r


def large_q_rotation_check(q: complex, eps: float = 0.1, samples: int = 64) -> float:
    """Sup over eps <= |z| <= 1/eps of the chordal distance between f_q(z) and e^{2 pi i t} z.

    Here t = arg(q^2) / 2 pi.  The sphere metric is used because in the
    Euclidean metric the error near |z| = 1/eps is of size |z|^2/|q|.
    """
    q = complex(q)
    rot = (q / q.conjugate())
    radii = np.geomspace(eps, 1.0 / eps, samples)
    angs = np.linspace(0.0, 2 * np.pi, samples, endpoint=False)
    z = (radii[:, None] * np.exp(1j * angs)[None, :]).ravel()
    fz = z * z * (q - z) / (1.0 + q.conjugate() * z)
    rz = rot * z
    d = 2.0 * np.abs(fz - rz) / np.sqrt((1 + np.abs(fz) ** 2) * (1 + np.abs(rz) ** 2))
    return float(d.max())

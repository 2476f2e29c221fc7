"""Rotation sets under m_d and the piecewise-linear circle maps behind them.

The central objects are degree-one monotone maps that agree with m_d
off a union of collapsed intervals.  All breakpoints are rational, so
orbits of rational points are eventually periodic and rotation numbers
come out exactly.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .circle import Angle, CircleInterval, frac, mul_by, orbit

__all__ = [
    "PLCircleMap",
    "RotationSet",
    "RotationEnclosure",
    "DeploymentSequence",
    "gap_extension",
    "monotone_extension",
    "rigid_rotation",
    "translation_number",
    "rotation_number",
    "x_d_of",
    "reduce",
    "orbit_rotation_number",
    "goldberg_orbit",
    "gap_length_extremes",
    "plateau_length",
    "deployment_sequence",
    "compatible",
    "semiconjugacy_to_md",
    "periodic_orbits",
    "fits_collapsing_intervals",
]


@dataclass(frozen=True)
class PLCircleMap:
    """Monotone piecewise-linear circle map given by the lift's graph.

    ``breakpoints`` are the vertices ``(x, g(x))`` of the lift over one
    period ``[x0, x0 + 1]``; the first and last abscissae differ by 1
    and the last ordinate exceeds the first by ``degree``.
    """

    breakpoints: tuple
    degree: int

    def __post_init__(self):
        bps = tuple((Fraction(x), Fraction(y)) for x, y in self.breakpoints)
        object.__setattr__(self, "breakpoints", bps)
        xs = [x for x, _ in bps]
        ys = [y for _, y in bps]
        if len(bps) < 2 or xs[-1] - xs[0] != 1:
            raise ValueError("breakpoints must span exactly one period")
        if any(b < a for a, b in zip(xs, xs[1:])) or any(b < a for a, b in zip(ys, ys[1:])):
            raise ValueError("lift must be monotone")
        if ys[-1] - ys[0] != self.degree:
            raise ValueError("lift increment over a period must equal the degree")
        object.__setattr__(self, "_xs", xs)

    @property
    def x0(self) -> Fraction:
        return self.breakpoints[0][0]

    def _locate(self, y: Fraction) -> tuple[int, int]:
        """Return (k, i): y - k lies in piece i of the base period."""
        k = math.floor(y - self.x0)
        i = bisect_right(self._xs, y - k) - 1
        return k, min(i, len(self._xs) - 2)

    def lift(self, y) -> Fraction:
        y = Fraction(y)
        k, i = self._locate(y)
        (xa, ya), (xb, yb) = self.breakpoints[i], self.breakpoints[i + 1]
        u = y - k
        if xb == xa:
            val = yb
        else:
            val = ya + (yb - ya) * (u - xa) / (xb - xa)
        return val + k * self.degree

    def __call__(self, x) -> Angle:
        return Angle(self.lift(x))

    def pieces(self) -> list[tuple[Fraction, Fraction, Fraction, Fraction]]:
        """Affine pieces ``(xlo, xhi, slope, intercept)`` of the lift."""
        out = []
        for (xa, ya), (xb, yb) in zip(self.breakpoints, self.breakpoints[1:]):
            if xb == xa:
                continue
            a = (yb - ya) / (xb - xa)
            out.append((xa, xb, a, ya - a * xa))
        return out

    def _affine_at(self, y: Fraction) -> tuple[Fraction, Fraction]:
        """Slope and intercept of the lift on the piece containing y (interior point)."""
        k, i = self._locate(y)
        (xa, ya), (xb, yb) = self.breakpoints[i], self.breakpoints[i + 1]
        a = (yb - ya) / (xb - xa)
        b = ya - a * xa
        # lift(y) = a*(y - k) + b + k*deg
        return a, b + k * self.degree - a * k

    def _breaks_between(self, u: Fraction, v: Fraction) -> list[Fraction]:
        out = []
        for k in range(math.floor(u - self.x0) - 1, math.floor(v - self.x0) + 2):
            for x in self._xs[:-1]:
                p = x + k
                if u < p < v:
                    out.append(p)
        return sorted(out)

    def iterate_pieces(self, n: int):
        """Affine pieces of the n-th iterate of the lift over the base period."""
        cur = self.pieces()
        for _ in range(n - 1):
            nxt = []
            for xlo, xhi, a, b in cur:
                if a == 0:
                    nxt.append((xlo, xhi, Fraction(0), self.lift(b)))
                    continue
                u, v = a * xlo + b, a * xhi + b
                cuts = [xlo] + [(p - b) / a for p in self._breaks_between(u, v)] + [xhi]
                for s, e in zip(cuts, cuts[1:]):
                    if e <= s:
                        continue
                    a2, b2 = self._affine_at(a * (s + e) / 2 + b)
                    nxt.append((s, e, a2 * a, a2 * b + b2))
            cur = nxt
        return cur

    def max_deviation(self, factor: int) -> Fraction:
        """sup |g(y) - factor*y| over the lift; attained at a vertex."""
        return max(abs(y - factor * x) for x, y in self.breakpoints)


def gap_extension(intervals: Sequence[CircleInterval], d: int) -> PLCircleMap:
    """Monotone map equal to m_d off ``intervals`` and affine across each.

    An interval of length l with m = floor(d*l) is mapped with total rise
    d*l - m, so it wraps m fewer times than m_d.  For length exactly
    1/d the map is constant there.  The degree is d - sum(m).
    """
    if not intervals:
        return PLCircleMap(((0, 0), (1, d)), d)
    ivs = sorted(intervals, key=lambda I: I.lo)
    s = ivs[0].lo
    pts = []
    for I in ivs:
        lo = s + frac(I.lo - s)
        pts.append((lo, lo + I.length))
    for (a0, b0), (a1, _) in zip(pts, pts[1:]):
        if a1 < b0:
            raise ValueError("intervals overlap")
    if pts[-1][1] > s + 1:
        raise ValueError("intervals overlap")
    verts = []
    v = d * s
    drop = 0
    prev = s
    for lo, hi in pts:
        v += d * (lo - prev)
        verts.append((lo, v))
        ell = hi - lo
        m = math.floor(d * ell)
        drop += m
        v += d * ell - m
        verts.append((hi, v))
        prev = hi
    v += d * (s + 1 - prev)
    if verts[-1][0] != s + 1:
        verts.append((s + 1, v))
    deg = d - drop
    if deg < 1:
        raise ValueError("collapsed intervals leave no positive degree")
    cleaned = [verts[0]]
    for pt in verts[1:]:
        if pt != cleaned[-1]:
            cleaned.append(pt)
    return PLCircleMap(tuple(cleaned), deg)


def monotone_extension(intervals: Sequence[CircleInterval], d: int) -> PLCircleMap:
    """The map g_I: equal to m_d off I and constant on each interval of I.

    Parameters
    ----------
    intervals : list of CircleInterval
        Pairwise disjoint arcs, each of length exactly 1/d.
    d : int
        Multiplier, at least 2.

    Returns
    -------
    PLCircleMap
        Degree ``d - len(intervals)``; degree one when there are d-1 arcs.
    """
    if d < 2:
        raise ValueError("d must be at least 2")
    for I in intervals:
        if I.length != Fraction(1, d):
            raise ValueError(f"interval {I} does not have length 1/{d}")
    return gap_extension(intervals, d)


def rigid_rotation(t) -> PLCircleMap:
    t = Fraction(t)
    return PLCircleMap(((0, t), (1, 1 + t)), 1)


@dataclass(frozen=True)
class RotationEnclosure:
    """Interval [lo, hi] known to contain a translation number."""

    lo: float
    hi: float

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)


def _orbit_start(g: PLCircleMap) -> Fraction:
    for (xa, ya), (xb, yb) in zip(g.breakpoints, g.breakpoints[1:]):
        if ya == yb and xb > xa:
            return ya  # a plateau value: its orbit closes fastest
    return g.breakpoints[0][0]


def translation_number(g: PLCircleMap, max_steps: int = 200_000, float_steps: int = 100_000):
    """Translation number of the lift of a degree-one map.

    Exact (a Fraction) when the orbit of a breakpoint closes up within
    ``max_steps``, which always happens for rational data; otherwise a
    :class:`RotationEnclosure` from float iteration.
    """
    if g.degree != 1:
        raise ValueError("rotation number needs a degree-one map")
    y = _orbit_start(g)
    seen: dict[Fraction, tuple[int, Fraction]] = {}
    for k in range(max_steps):
        key = frac(y)
        if key in seen:
            j, yj = seen[key]
            return (y - yj) / (k - j)
        seen[key] = (k, y)
        y = g.lift(y)
    # fallback: float lift iteration, |g^n(x) - x - n*tau| < 1
    pcs = [(float(a), float(b), float(s), float(c)) for a, b, s, c in g.pieces()]
    xs = [p[0] for p in pcs]
    x0 = float(g.x0)
    yf = start = float(y)
    for _ in range(float_steps):
        k = math.floor(yf - x0)
        u = yf - k
        i = max(0, min(bisect_right(xs, u) - 1, len(pcs) - 1))
        yf = pcs[i][2] * u + pcs[i][3] + k
    n = float_steps
    v = yf - start
    return RotationEnclosure((v - 1) / n, (v + 1) / n)


def rotation_number(g: PLCircleMap, **kw):
    """Rotation number in [0, 1) of a degree-one PL circle map.

    Returns an :class:`Angle` in the exact case, otherwise the
    translation-number enclosure.
    """
    tau = translation_number(g, **kw)
    if isinstance(tau, Fraction):
        return Angle(tau)
    return tau


def orbit_rotation_number(points: Sequence, d: int):
    """Combinatorial rotation number of a finite m_d-invariant set.

    Returns k/n when m_d shifts the cyclically sorted points by k places,
    or None if it does not act as a rotation.
    """
    pts = sorted(set(Angle(p) for p in points))
    n = len(pts)
    idx = {p: i for i, p in enumerate(pts)}
    shift = None
    for i, p in enumerate(pts):
        j = idx.get(mul_by(p, d))
        if j is None:
            return None
        s = (j - i) % n
        if shift is None:
            shift = s
        elif s != shift:
            return None
    return Angle(shift, n)


def _gaps(points: Sequence[Angle], d: int) -> list[tuple[CircleInterval, int]]:
    pts = sorted(set(points))
    if not pts:
        return []
    if len(pts) == 1:
        # whole circle minus one point; it wraps d-1 extra times
        return [(CircleInterval.open(pts[0], pts[0]), d - 1)]
    out = []
    for a, b in zip(pts, pts[1:] + pts[:1]):
        I = CircleInterval.open(a, b)
        out.append((I, math.floor(d * I.length)))
    return out


@dataclass
class RotationSet:
    """Finite periodic skeleton of a rotation set, with its gap structure.

    ``avoid`` (if given) is the open set I whose complement orbit defines
    X_d(I); it serves as the membership predicate for the full set.
    ``extra`` holds any explicitly stored wandering points.
    """

    d: int
    orbits: list
    avoid: tuple = ()
    extra: tuple = ()

    def __post_init__(self):
        self.orbits = [list(map(Angle, o)) for o in self.orbits]
        self.orbits.sort(key=min)

    @property
    def points(self) -> list[Angle]:
        return sorted({p for o in self.orbits for p in o} | set(self.extra))

    @property
    def periodic_points(self) -> list[Angle]:
        return sorted({p for o in self.orbits for p in o})

    @property
    def gaps(self) -> list[tuple[CircleInterval, int]]:
        return _gaps(self.periodic_points, self.d)

    @property
    def rotation_number(self):
        return orbit_rotation_number(self.periodic_points, self.d)

    def contains(self, x, max_steps: int | None = None) -> bool:
        """Exact orbit-avoidance test against ``avoid``.

        Without an avoid set, membership means being a stored point.
        """
        x = Angle(x)
        if not self.avoid:
            return x in set(self.points)
        pre, cyc = orbit(x, self.d)
        return not any(y in I for y in pre + cyc for I in self.avoid)

    def wandering(self, levels: int) -> list[Angle]:
        """Points of the set that reach the periodic skeleton in at most ``levels`` steps."""
        if not self.avoid:
            return []
        base = set(self.periodic_points)
        front = set(base)
        found = set()
        for _ in range(levels):
            nxt = set()
            for y in front:
                for j in range(self.d):
                    z = Angle((y + j) / self.d)
                    if z not in base and z not in found and self.contains(z):
                        nxt.add(z)
            found |= nxt
            front = nxt
        return sorted(found)

    def is_antipodal(self) -> bool:
        pts = set(self.points)
        return all(Angle(p + Fraction(1, 2)) in pts for p in pts)

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "rotation_number": None if self.rotation_number is None else str(self.rotation_number),
            "orbits": [[str(p) for p in o] for o in self.orbits],
            "gaps": [{"lo": str(I.lo), "hi": str(I.hi), "length": str(I.length), "multiplicity": m}
                     for I, m in self.gaps],
        }


def _cycle_from(x: Angle, d: int) -> list[Angle]:
    pre, cyc = orbit(x, d)
    if pre:
        raise ValueError(f"{x} is not periodic under m_{d}")
    return cyc


def x_d_of(intervals: Sequence[CircleInterval], d: int) -> RotationSet:
    """The set X_d(I) of angles whose m_d-orbit avoids the open set I.

    Only the exact case (d-1 arcs of length 1/d) is supported.  The
    periodic orbits are found as fixed points of the n-th iterate of the
    monotone extension, n being the period of its rotation number.
    """
    if len(intervals) != d - 1:
        raise ValueError("exact path needs d-1 intervals")
    avoid = tuple(I.interior() for I in intervals)
    g = monotone_extension(avoid, d)
    tau = translation_number(g)
    if not isinstance(tau, Fraction):
        raise RuntimeError("no exact cycle found for rational data")
    n = tau.denominator
    P = tau.numerator
    found: set[Angle] = set()
    for xlo, xhi, a, b in g.iterate_pieces(n):
        if a == 1:
            continue
        y = (P - b) / (a - 1)
        if xlo <= y <= xhi:
            found.add(Angle(y))
    orbits = []
    done: set[Angle] = set()
    for y in sorted(found):
        if y in done:
            continue
        pre, cyc = orbit(y, d)
        if pre or any(z in I for z in cyc for I in avoid):
            continue
        done |= set(cyc)
        orbits.append(cyc)
    if not orbits:
        raise RuntimeError("rotation set skeleton not found")
    return RotationSet(d, orbits, avoid=avoid)


def reduce(X: RotationSet) -> RotationSet:
    """Non-wandering part: drop everything but the periodic orbits."""
    keep = [o for o in X.orbits if not orbit(o[0], X.d)[0]]
    return RotationSet(X.d, keep)


def goldberg_orbit(t) -> RotationSet:
    """The unique doubling orbit with rotation number t = p/n.

    Gap lengths 2^(k-1)/(2^n - 1) are laid out along the rotation order,
    the longest gap straddling 0; each point is the total length of the
    p gaps that separate it from its double.
    """
    t = Angle(t)
    p, n = t.numerator, t.denominator
    M = 2 ** n - 1
    ell = [Fraction(0)] * n
    for k in range(1, n + 1):
        ell[(n - 1 + k * p) % n] = Fraction(2 ** (k - 1), M)
    pts = [Angle(sum(ell[(i + j) % n] for j in range(p))) for i in range(n)]
    return RotationSet(2, [_cycle_from(pts[0], 2)])


def gap_length_extremes(t) -> tuple[Fraction, Fraction]:
    n = Angle(t).denominator
    M = 2 ** n - 1
    return Fraction(1, M), Fraction(2 ** (n - 1), M)


def plateau_length(t) -> Fraction:
    """Width of the plateau of c -> rot(g_(c, c+1/2)) at rational t."""
    n = Angle(t).denominator
    return Fraction(1, 2 * (2 ** n - 1))


@dataclass(frozen=True)
class DeploymentSequence:
    counts: tuple

    @property
    def total(self):
        return sum(self.counts)


def deployment_sequence(X) -> DeploymentSequence:
    """Points of X in each arc [j/(d-1), (j+1)/(d-1)) between fixed points of m_d."""
    if isinstance(X, RotationSet):
        d, pts = X.d, X.periodic_points
    else:
        d, pts = X
        pts = [Angle(p) for p in pts]
    if d < 2:
        raise ValueError("deployment needs d >= 2")
    counts = [0] * (d - 1)
    for p in pts:
        counts[math.floor(p * (d - 1))] += 1
    return DeploymentSequence(tuple(counts))


def compatible(o1: Sequence, o2: Sequence, d: int) -> bool:
    """Each gap of either orbit holds exactly one point of the other.

    Identical orbits count as compatible.
    """
    r1, r2 = orbit_rotation_number(o1, d), orbit_rotation_number(o2, d)
    if r1 is None or r2 is None or r1 != r2:
        raise ValueError("orbits must be rotation orbits with equal rotation numbers")
    s1, s2 = sorted(set(map(Angle, o1))), sorted(set(map(Angle, o2)))
    if s1 == s2:
        return True

    def interleaves(a, b):
        for I, _ in _gaps(a, d):
            if sum(1 for p in b if p in I) != 1:
                return False
        return True

    return interleaves(s1, s2) and interleaves(s2, s1)


def semiconjugacy_to_md(g: PLCircleMap, x0, x, n: int = 30) -> tuple[Fraction, Fraction]:
    """Value of the semiconjugacy h with h o g = m_D o h and h(x0) = 0.

    Uses h_n = g^n / D^n on the lift normalised by g(x0) = x0.  When the
    g-orbit of x closes up within ``n`` steps the value is exact and the
    returned error bound is 0; otherwise the bound is C / D^n with
    C = sup |g(y) - D*y|.
    """
    D = g.degree
    if D < 2:
        raise ValueError("semiconjugacy to m_D needs degree D > 1")
    x0 = Fraction(x0)
    shift = g.lift(x0) - x0
    if shift.denominator != 1:
        raise ValueError("x0 is not a fixed point of g")
    # G(u) = g(u + x0) - x0 - shift is a lift with G(0) = 0
    G = lambda u: g.lift(u + x0) - x0 - shift
    C = max(abs(y - shift - x0 - D * (bx - x0)) for bx, y in g.breakpoints)
    u = frac(Fraction(x) - x0)
    seen: dict[Fraction, tuple[int, Fraction]] = {}
    for k in range(n + 1):
        key = frac(u)
        if key in seen:
            # u_k = u_j + m, so D^k H = D^j H + m
            j, uj = seen[key]
            return Angle((u - uj) / (D ** k - D ** j)), Fraction(0)
        seen[key] = (k, u)
        if k < n:
            u = G(u)
    return Angle(u / D ** n), C / Fraction(D) ** n


def periodic_orbits(d: int, n: int) -> list[list[Angle]]:
    """All m_d-cycles of exact period n, each listed in orbit order."""
    M = d ** n - 1
    seen = bytearray(M)
    out = []
    for k in range(M):
        if seen[k]:
            continue
        cyc = [k]
        j = (k * d) % M
        while j != k:
            cyc.append(j)
            j = (j * d) % M
        for c in cyc:
            seen[c] = 1
        if len(cyc) == n:
            out.append([Angle(c, M) for c in cyc])
    return out


def fits_collapsing_intervals(points: Iterable, d: int) -> bool:
    """Whether the complement of a finite set holds d-1 disjoint open arcs of length 1/d."""
    pts = sorted(set(map(Angle, points)))
    if len(pts) == 1:
        return True
    return sum(m for _, m in _gaps(pts, d)) >= d - 1

"""Böttcher coordinates, dynamic rays and parameter rays.

Near 0 the map behaves like z -> q z^2.  With u = q z the Böttcher
coordinate is the convergent product

    beta(z) = u * prod_n (1 + eps_n)^(1 / 2^(n+1)),
    1 + eps_n = (q - z_n) / (q (1 + conj(q) z_n)),

valid while |q z| and |z / q| are both small.  Everything farther out
is reached by pulling back with Newton's method on f^k(z) = target.

Parameter rays are followed in the level L = -log2(g), where g is the
potential -log|Phi|, so that points very close to the boundary of the
central component (g far below the smallest double) stay representable.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numba as nb
import numpy as np

from .circle import Angle, orbit
from .dynamics import (
    antipode,
    critical_points,
    df_eval,
    f_eval,
    kappa,
)

__all__ = [
    "REGIME",
    "in_regime",
    "boettcher",
    "boettcher_log",
    "boettcher_inverse",
    "regime_radius",
    "RayTrace",
    "internal_ray",
    "external_ray",
    "landing_limits",
    "doubly_visible_check",
    "param_map",
    "ParamRay",
    "parameter_ray",
    "JuliaCoordinates",
    "measure_doubly_visible",
]

REGIME = 0.25
TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------- kernels


@nb.njit(cache=True, nogil=True)
def _logbeta(z, q):
    lb = cmath.log(q * z)
    w = 1.0
    qb = q.conjugate()
    for _ in range(100):
        e = (q - z) / (q * (1.0 + qb * z))
        w *= 0.5
        lb += w * cmath.log(e)
        z = z * z * (q - z) / (1.0 + qb * z)
        if abs(e - 1.0) * w < 1e-18:
            break
    return lb


@nb.njit(cache=True, nogil=True)
def _pull_newton(q, z, k, tgt, c0):
    """Newton for f^k(z) = tgt.  Returns (z, ok, closest approach to c0)."""
    qb = q.conjugate()
    dmin = 1e300
    for _ in range(60):
        w = z
        dw = 1.0 + 0j
        dmin = 1e300
        for _j in range(k):
            dc = abs(w - c0)
            if dc < dmin:
                dmin = dc
            den = 1.0 + qb * w
            dw *= ((2.0 * w * q - 3.0 * w * w) * den - w * w * (q - w) * qb) / (den * den)
            w = w * w * (q - w) / den
        if not (abs(w) < 1e300):
            return z, False, dmin
        # near a precritical point the root is double and only the residual converges
        if abs(w - tgt) <= 1e-14 * abs(tgt):
            return z, True, dmin
        if not (abs(dw) > 0.0):
            return z, False, dmin
        st = (w - tgt) / dw
        z = z - st
        if abs(st) < 1e-15 * max(1.0, abs(z)):
            return z, True, dmin
    return z, False, dmin


@nb.njit(cache=True, nogil=True)
def _step_is_local(q, z, zn, k, c0, frac):
    """Whether no iterate moves by more than frac of its distance to c0."""
    qb = q.conjugate()
    for _j in range(k):
        if abs(zn - z) > frac * abs(z - c0):
            return False
        z = z * z * (q - z) / (1.0 + qb * z)
        zn = zn * zn * (q - zn) / (1.0 + qb * zn)
    return True


@nb.njit(cache=True, nogil=True)
def _kappa_d(a):
    P = 9.0 + 10.0 * a + a * a
    s = math.sqrt(P)
    k = (a - 3.0 + s) / (4.0 * a)
    dk = ((1.0 + (2.0 * a + 10.0) / (2.0 * s)) * 4.0 * a - 4.0 * (a - 3.0 + s)) / (16.0 * a * a)
    return k, dk


@nb.njit(cache=True, nogil=True)
def _critical_orbit(q, N):
    """z_N = f^N(c0(q)) with its partial derivatives in Re q and Im q."""
    x, y = q.real, q.imag
    a = x * x + y * y
    k, dk = _kappa_d(a)
    z = k * q
    dzx = dk * 2.0 * x * q + k
    dzy = dk * 2.0 * y * q + 1j * k
    qb = q.conjugate()
    for _ in range(N):
        den = 1.0 + qb * z
        fz = ((2.0 * z * q - 3.0 * z * z) * den - z * z * (q - z) * qb) / (den * den)
        fq = z * z / den
        fqb = -z ** 3 * (q - z) / (den * den)
        dzx, dzy = fz * dzx + fq + fqb, fz * dzy + 1j * (fq - fqb)
        z = z * z * (q - z) / den
    return z, dzx, dzy


@nb.njit(cache=True, nogil=True)
def _param_newton(q, L, ang, N):
    """Solve log beta(z_N(q)) = -2^(N-L) + 2 pi i ang (mod 2 pi i) for q."""
    for _ in range(40):
        z, dzx, dzy = _critical_orbit(q, N)
        if z == 0 or not (abs(z) < 1e300):
            return q, False
        F = _logbeta(z, q) - complex(-(2.0 ** (N - L)), 2.0 * math.pi * ang)
        im = (F.imag + math.pi) % (2.0 * math.pi) - math.pi
        F = complex(F.real, im)
        # log beta(z) ~ log q + log z up to a slowly varying correction
        jx = dzx / z + 1.0 / q
        jy = dzy / z + 1j / q
        A, B, C, D = jx.real, jy.real, jx.imag, jy.imag
        det = A * D - B * C
        if det == 0.0:
            return q, False
        d = complex((-F.real * D + F.imag * B) / det, (-A * F.imag + C * F.real) / det)
        if abs(d) > 0.1 * abs(q):
            return q, False
        q = q + d
        if abs(d) < 1e-13 * abs(q):
            return q, True
    return q, False


# ------------------------------------------------------------- Böttcher


def in_regime(q: complex, z: complex, margin: float = REGIME) -> bool:
    """Whether the Böttcher product may be used directly at z."""
    q = complex(q)
    return q != 0 and abs(q * z) <= margin and abs(z) <= margin * abs(q)


def boettcher_log(q: complex, z: complex) -> complex:
    """Principal-branch log of the Böttcher coordinate (regime only)."""
    q, z = complex(q), complex(z)
    if not in_regime(q, z):
        raise ValueError("z is outside the Böttcher regime; pull back first")
    if z == 0:
        return complex(-math.inf, 0.0)
    return _logbeta(z, q)


def boettcher(q: complex, z: complex) -> complex:
    """Böttcher coordinate beta_q(z), normalised by beta(z) / (q z) -> 1.

    Satisfies beta(f(z)) = beta(z)^2.  Raises ValueError outside the
    regime |q z| <= 1/4, |z| <= |q|/4.
    """
    if complex(z) == 0:
        return 0j
    return cmath.exp(boettcher_log(q, z))


def boettcher_inverse(q: complex, w: complex, tol: float = 1e-15) -> complex:
    """Point z in the regime with beta_q(z) = w (fixed-point iteration)."""
    q, w = complex(q), complex(w)
    if w == 0:
        return 0j
    z = w / q
    for _ in range(200):
        b = cmath.exp(_logbeta(z, q))
        nz = z * (w / b)
        if abs(nz - z) <= tol * abs(nz):
            z = nz
            break
        z = nz
    if not in_regime(q, z):
        raise ValueError("target lies outside the Böttcher regime")
    return z


def regime_radius(q: complex) -> float:
    """A Böttcher radius whose circle (and its square) lies inside the regime."""
    return 0.1 * min(1.0, abs(complex(q)) ** 2)


# ----------------------------------------------------------- dynamic rays


@dataclass
class RayTrace:
    """Samples of a dynamic ray at Böttcher radii rho^(2^-k), k = 0..depth."""

    theta: Fraction
    q: complex
    points: list
    potentials: list
    landed: bool = False
    landing_point: complex | None = None
    bifurcated: bool = False
    external: bool = False
    closest_to_critical: float = math.inf

    def rows(self):
        for k, (z, r) in enumerate(zip(self.points, self.potentials)):
            yield k, z.real, z.imag, r

    def antipodal(self) -> "RayTrace":
        """The same ray seen from infinity (pointwise antipode)."""
        lp = None if self.landing_point is None else antipode(self.landing_point)
        return RayTrace(self.theta, self.q, [antipode(z) for z in self.points], list(self.potentials),
                        self.landed, lp, self.bifurcated, not self.external, self.closest_to_critical)


def _angle_times(theta: Fraction, k: int) -> float:
    """frac(2^k theta) as a float, computed exactly first."""
    v = (theta * 2 ** k) % 1
    return float(v)


def _cycle_newton(q, z, p, steps=100, tol=1e-14):
    for _ in range(steps):
        w, dw = z, 1.0 + 0j
        for _ in range(p):
            dw *= df_eval(q, w)
            w = f_eval(q, w)
        if not cmath.isfinite(w) or dw == 1.0:
            return z, False
        st = (w - z) / (dw - 1.0)
        z = z - st
        if abs(st) < tol * max(1.0, abs(z)):
            return z, True
    return z, False


def internal_ray(q: complex, theta, depth: int = 40, substeps: int = 8,
                 period: int | None = None, bif_tol: float = 1e-6) -> RayTrace:
    """Trace the internal ray of angle theta in the basin of 0.

    Parameters
    ----------
    q : complex
        Parameter with q^2 in the central component.
    theta : Fraction or Angle
        Internal angle.  May be any rational, e.g. 2/7 + 2^-12.
    depth : int
        Number of dyadic potential levels to pull back.
    substeps : int
        Newton steps per level (halved adaptively on failure).
    period : int, optional
        Doubling period of theta.  When given, the landing point is
        refined by Newton on f^period(z) = z from the deepest samples.

    Returns
    -------
    RayTrace
        ``points[k]`` has Böttcher coordinate rho^(2^-k) e^(2 pi i theta).
    """
    q = complex(q)
    theta = Fraction(theta) % 1
    c0, _ = critical_points(q)
    rho = regime_radius(q)
    z = boettcher_inverse(q, rho * cmath.exp(1j * TWO_PI * float(theta)))
    pts, pots = [z], [rho]
    dmin = math.inf
    truncated = False
    # sub-level offset at which some iterate has the potential of c0
    try:
        lb, N = _phi_candidates(q)
        crit = (-math.log2((lb.real / 2.0 ** N) / math.log(rho))) % 1.0
    except ValueError:
        crit = None
    for k in range(1, depth + 1):
        s, ds = float(k - 1), 1.0 / substeps
        sc = None if crit is None else k - 1 + crit
        ang = _angle_times(theta, k)
        while s < k:
            sn = min(float(k), s + ds)
            if sc is not None and s < sc < sn:
                sn = sc
            tgt = boettcher_inverse(q, rho ** (2.0 ** (k - sn)) * cmath.exp(1j * TWO_PI * ang))
            zn, ok, dc = _pull_newton(q, z, k, tgt, c0)
            if ok and sn != sc:
                ok = _step_is_local(q, z, zn, k, c0, 0.5)
            if ok:
                # the same step in two halves must agree, or Newton hopped branches
                sm = 0.5 * (s + sn)
                tm = boettcher_inverse(q, rho ** (2.0 ** (k - sm)) * cmath.exp(1j * TWO_PI * ang))
                zm, okm, dcm = _pull_newton(q, z, k, tm, c0)
                ok = okm and abs(zm - zn) <= abs(zn - z) + 1e-12 and \
                    abs(_pull_newton(q, zm, k, tgt, c0)[0] - zn) <= 1e-9 * max(1.0, abs(zn))
                dc = min(dc, dcm)
            if not ok or abs(zn - z) > 0.5 * max(abs(z), 1e-3):
                ds *= 0.5
                if ds < 1e-6:
                    truncated = True
                    break
                continue
            dmin = min(dmin, dc)
            z, s = zn, sn
            ds = min(2 * ds, 1.0 / substeps)
        if truncated:
            break
        pts.append(z)
        pots.append(rho ** (2.0 ** -k))
    tr = RayTrace(theta, q, pts, pots, closest_to_critical=dmin)
    tr.bifurcated = dmin < bif_tol * max(1.0, abs(c0))
    if truncated and len(pts) >= 2 and abs(pts[-1] - pts[-2]) < 1e-8:
        truncated = False  # converged before Newton lost precision
    if period:
        for z0 in reversed(pts[-4:]):
            zl, ok = _cycle_newton(q, z0, period)
            if ok and abs(zl - pts[-1]) < 1e-2:
                tr.landed, tr.landing_point = True, zl
                break
    elif not truncated and len(pts) >= 2 and abs(pts[-1] - pts[-2]) < 1e-8:
        tr.landed, tr.landing_point = True, pts[-1]
    if truncated and tr.closest_to_critical < 1e-3 * max(1.0, abs(c0)):
        tr.bifurcated = True
    return tr


def external_ray(q: complex, theta, depth: int = 40, **kw) -> RayTrace:
    """Ray of angle theta in the basin of infinity: the antipode of the internal one."""
    return internal_ray(q, theta, depth, **kw).antipodal()


def landing_limits(q: complex, theta, period: int, depth: int = 40,
                   eps_exp: int = 12) -> tuple[complex, complex]:
    """Landing points of the rays theta - eps and theta + eps, eps = 2^-eps_exp / p.

    These approximate the one-sided limits of a ray that bounces off
    the critical point.  The odd prime p does not divide the
    denominator of theta, so the offset rays never double onto the
    critical angle and do not bounce themselves (a dyadic offset would
    be a preimage of theta).  The result is refined to a point of
    period ``period`` and cross-checked with 4 eps.
    """
    theta = Fraction(theta)
    p = next(p for p in (3, 5, 7, 11, 13, 17, 19, 23) if theta.denominator % p)
    out = []
    for sign in (-1, 1):
        pts = []
        for e in (eps_exp, eps_exp - 2):
            th = theta + sign * Fraction(1, p * 2 ** e)
            tr = internal_ray(q, th, depth)
            cand = None
            for z0 in reversed(tr.points[-6:]):
                zl, ok = _cycle_newton(q, z0, period)
                if ok:
                    cand = zl
                    break
            pts.append(cand)
        if pts[0] is None or pts[1] is None or abs(pts[0] - pts[1]) > 1e-8:
            raise RuntimeError(f"one-sided landing of {theta} is not stable")
        out.append(pts[0])
    return out[0], out[1]


def doubly_visible_check(q: complex, theta_pair, depth: int = 40, period: int | None = None,
                         tol: float = 1e-6) -> tuple[bool, complex | None]:
    """Whether internal ray theta_i and external ray theta_e land together.

    Together with the common landing point they form a meridian.
    """
    ti, te = (Fraction(t) for t in theta_pair)
    if period is None:
        pre, cyc = orbit(Angle(ti), 2)
        period = len(cyc) if not pre else None
    ri = internal_ray(q, ti, depth, period=period)
    re = external_ray(q, te, depth, period=period)
    if not (ri.landed and re.landed):
        return False, None
    ok = abs(ri.landing_point - re.landing_point) < tol
    return ok, ri.landing_point if ok else None


# -------------------------------------------------------- parameter map


def _depth_for(q: complex, L: float) -> int:
    """Smallest N putting f^N(c0) deep inside the Böttcher regime at level L."""
    need = -math.log(1e-5 * min(1.0, abs(q) ** 2))
    N = max(0, math.ceil(L + math.log2(need)))
    while 2.0 ** (N - L) < need:
        N += 1
    while N > 0 and 2.0 ** (N - 1 - L) >= need:
        N -= 1
    return N


def _phi_candidates(q: complex, budget: int = 100_000):
    """(log beta(z_N), N) for the first N with z_N well inside the regime."""
    c0, _ = critical_points(q)
    z = c0
    target = 1e-5 * min(1.0, abs(q) ** 2)
    for N in range(budget):
        if in_regime(q, z) and abs(q * z) < target:
            return _logbeta(z, q), N
        z = f_eval(q, z)
        if not cmath.isfinite(z):
            break
    raise ValueError("critical orbit does not reach the basin of 0; q^2 is not central")


def param_map(q: complex, steps: int = 64) -> complex:
    """Phi(q^2) = beta_q(c0(q)), the Böttcher coordinate of the critical point.

    The 2^N-th root is taken by continuation along the segment from a
    small multiple of q (where Phi ~ 2 q^2 / (3 sqrt 3)) out to q, with
    the step halved whenever the branch choice becomes ambiguous.
    """
    q = complex(q)
    if q == 0:
        return 0j
    s0 = min(1.0, 0.05 / abs(q))
    s = s0
    phi = 2.0 * (s * q) ** 2 / (3.0 * math.sqrt(3.0))
    ds = (1.0 - s0) / steps
    while True:
        qs = s * q
        lb, N = _phi_candidates(qs)
        M = 2 ** N
        arg_prev = cmath.phase(phi)
        k = round((M * arg_prev - lb.imag) / TWO_PI)
        cand = cmath.exp((lb + 1j * TWO_PI * k) / M)
        spacing = TWO_PI / M
        jump = abs(cmath.phase(cand / phi)) if phi != 0 else 0.0
        if jump > 0.25 * spacing and s > s0 and ds > 1e-9:
            s -= ds
            ds *= 0.5
            s += ds
            continue
        phi = cand
        if s >= 1.0:
            return phi
        ds = min(ds * 1.5, (1.0 - s0) / steps)
        s = min(1.0, s + ds)


@dataclass
class ParamRay:
    """Samples q_k of a parameter ray, indexed by level L = -log2(-log|Phi|)."""

    theta: Angle
    levels: list = field(default_factory=list)
    q: list = field(default_factory=list)
    truncated: bool = False
    message: str = ""

    @property
    def q2(self) -> list:
        return [z * z for z in self.q]

    @property
    def radii(self) -> list:
        return [math.exp(-(2.0 ** -L)) for L in self.levels]

    def rows(self):
        for L, z in zip(self.levels, self.q):
            w = z * z
            yield L, math.exp(-(2.0 ** -L)), w.real, w.imag, z.real, z.imag


def level_of_radius(r: float) -> float:
    return -math.log2(-math.log(r))


def parameter_ray(theta_c, r_schedule: Sequence[float] | None = None, *,
                  levels: Sequence[float] | None = None, until_abs_q2: float | None = None,
                  max_level: float | None = None, max_step: float = 1.0, start_radius: float = 0.05,
                  keep_path: bool = False) -> ParamRay:
    """Follow the parameter ray Phi^-1({r e^(2 pi i Theta)}) outward from q = 0.

    Parameters
    ----------
    theta_c : Angle
        Ray angle Theta.
    r_schedule : sequence of float, optional
        Radii |Phi| at which to report q^2.
    levels : sequence of float, optional
        The same in level units L = -log2(-log r), for radii too close
        to 1 to represent in floating point.
    until_abs_q2 : float, optional
        Stop once |q^2| exceeds this value.
    max_level : float, optional
        Hard stop for the level.  Defaults to 60, or 10^5 when
        ``until_abs_q2`` is given (escape along a fjord is slow in L).
    max_step : float
        Largest level increment per Newton solve.  Steps much above 1
        can hop onto a neighbouring ray of angle Theta + k/2^N.
    keep_path : bool
        Record every accepted step, not only the requested levels.

    Returns
    -------
    ParamRay
        ``truncated`` is set (with a message) when the corrector fails.
    """
    Theta = Angle(theta_c)
    num, den = Theta.numerator, Theta.denominator
    wanted = sorted(set(levels or []) | {level_of_radius(r) for r in (r_schedule or [])})
    r0 = start_radius
    if wanted:
        r0 = min(r0, math.exp(-(2.0 ** -wanted[0])) * 0.999)
    L = level_of_radius(r0)
    q = cmath.sqrt(r0 * cmath.exp(1j * TWO_PI * float(Theta)) * 3.0 * math.sqrt(3.0) / 2.0)
    ray = ParamRay(Theta)
    if max_level is None:
        max_level = 1e5 if until_abs_q2 is not None else 60.0
    stop = max(wanted[-1] if wanted else -math.inf, max_level if (until_abs_q2 or not wanted) else -math.inf)
    N = _depth_for(q, L)
    q, ok = _param_newton(q, L, (pow(2, N, den) * num % den) / den, N)
    if not ok:
        ray.truncated, ray.message = True, "initial corrector failed"
        return ray
    if keep_path:
        ray.levels.append(L)
        ray.q.append(q)
    wi = 0
    while wi < len(wanted) and wanted[wi] <= L:
        wi += 1
    dL = 0.25
    while L < stop:
        nxt = L + min(dL, max_step)
        if wi < len(wanted) and nxt >= wanted[wi]:
            nxt = wanted[wi]
        nxt = min(nxt, stop)
        N = _depth_for(q, nxt)
        ang = (pow(2, N, den) * num % den) / den
        qn, ok = _param_newton(q, nxt, ang, N)
        if not ok:
            dL *= 0.5
            if dL < 1e-6:
                ray.truncated = True
                ray.message = f"corrector failed at level {L:.6g} (N={N})"
                break
            continue
        q, L = qn, nxt
        dL = min(2.0 * dL, max_step)
        hit = wi < len(wanted) and L == wanted[wi]
        if hit:
            wi += 1
        if keep_path or hit:
            ray.levels.append(L)
            ray.q.append(q)
        if until_abs_q2 is not None and abs(q * q) > until_abs_q2:
            if not (keep_path or hit):
                ray.levels.append(L)
                ray.q.append(q)
            return ray
    if until_abs_q2 is not None and not ray.truncated:
        if not ray.q or ray.levels[-1] != L:
            ray.levels.append(L)
            ray.q.append(q)
        ray.truncated = True
        ray.message = f"level cap {max_level:g} reached with |q^2| = {abs(q * q):.6g}"
    return ray


# ------------------------------------------------------ Julia coordinates


@nb.njit(cache=True, nogil=True)
def _cycle_newton_nb(q, z, p):
    qb = q.conjugate()
    for _ in range(60):
        w = z
        dw = 1.0 + 0j
        for _j in range(p):
            den = 1.0 + qb * w
            dw *= ((2.0 * w * q - 3.0 * w * w) * den - w * w * (q - w) * qb) / (den * den)
            w = w * w * (q - w) / den
        if not (abs(w) < 1e300) or dw == 1.0:
            return z, False
        st = (w - z) / (dw - 1.0)
        z = z - st
        if abs(st) < 1e-14 * max(1.0, abs(z)):
            return z, True
    return z, False


@nb.njit(cache=True, nogil=True)
def _continue_step(pts, q, p):
    """Newton-correct every point at parameter q; ok only if each moved a
    small fraction of its distance to the nearest other point."""
    n = pts.shape[0]
    out = np.empty_like(pts)
    for i in range(n):
        z, ok = _cycle_newton_nb(q, pts[i], p)
        if not ok:
            return out, False
        out[i] = z
    for i in range(n):
        dmin = 1e300
        for j in range(n):
            if j != i:
                d = abs(pts[i] - pts[j])
                if d < dmin:
                    dmin = d
        if abs(out[i] - pts[i]) > dmin / 3.0:
            return out, False
    return out, True


def _continue_cycles(pts, qa, qb, p):
    out, ok = _continue_step(np.asarray(pts, dtype=np.complex128), complex(qb), p)
    return out if ok else None


def _continue_segment(pts, qa, qb, p, min_frac=1e-7):
    """Follow the periodic points from parameter qa to qb by bisection."""
    t, dt = 0.0, 1.0
    while t < 1.0:
        dt = min(dt, 1.0 - t)
        qq = qa + (t + dt) * (qb - qa)
        out, ok = _continue_step(pts, complex(qq), p)
        if ok:
            pts, t = out, t + dt
            dt *= 2.0
        else:
            dt *= 0.5
            if dt < min_frac:
                raise RuntimeError("periodic point continuation stalled")
    return pts


class JuliaCoordinates:
    """The conjugacy eta_q from tripling on R/Z to f_q on the Julia curve.

    Only the points x = k / (3^p - 1) are materialised.  They are the
    period-p points of -z^3, x -> +-i e^(2 pi i x), continued along a
    path of parameters ending at q.  The sign is fixed so that
    eta_q(0) is a given anchor point (the landing point of the
    internal 0-ray, or its left limit when that ray bounces).
    """

    def __init__(self, q_path: Sequence[complex], period: int, anchor: complex | None = None):
        self.period = p = period
        self.M = M = 3 ** p - 1
        path = list(q_path)
        path = [path[0] * 0.02] + path
        pts = 1j * np.exp(1j * TWO_PI * np.arange(M) / M)
        pts = _continue_cycles(pts, path[0], path[0], p)
        if pts is None:
            raise RuntimeError("periodic points did not converge at the start of the path")
        for qa, qb in zip(path[:-1], path[1:]):
            pts = _continue_segment(pts, qa, qb, p)
        # -i e^(2 pi i x) = i e^(2 pi i (x + 1/2)): the other sign is a half-turn relabelling
        shift = 0
        if anchor is not None and abs(pts[M // 2] - anchor) < abs(pts[0] - anchor):
            shift = M // 2
        self.sign = 1j if shift == 0 else -1j
        self.points = [complex(z) for z in np.roll(pts, -shift)]
        self.anchor_error = 0.0 if anchor is None else abs(self.points[0] - anchor)
        self.q = path[-1]

    def conjugacy_error(self) -> float:
        """max |f(eta(k/M)) - eta(3k/M)|, a check that continuation kept the labels."""
        M = self.M
        return max(abs(f_eval(self.q, self.points[k]) - self.points[(3 * k) % M]) for k in range(M))

    def separation(self) -> float:
        P = np.array(self.points)
        d = np.abs(P[:, None] - P[None, :])
        d[np.diag_indices_from(d)] = np.inf
        return float(d.min())

    def coordinate_of(self, z: complex) -> tuple[Angle, float]:
        """Nearest grid coordinate k/M and the distance to it."""
        d = [abs(z - w) for w in self.points]
        k = int(np.argmin(d))
        return Angle(k, self.M), d[k]


def _f_period(q: complex, z: complex, max_period: int, tol: float = 1e-8) -> int | None:
    w = z
    for n in range(1, max_period + 1):
        w = f_eval(q, w)
        if abs(w - z) < tol:
            return n
    return None


def measure_doubly_visible(theta_c, radius: float = 0.5, depth: int = 40,
                           max_period: int | None = None) -> dict:
    """Measure the doubly visible set on the Julia curve for q^2 on R_Theta.

    Internal rays at every angle of doubling period at most
    ``max_period`` (default: the larger of 4 and the period of Theta)
    are traced.  Rays that bounce off the critical point are replaced by
    their two one-sided limits.  A landing point whose antipode is also
    a landing point is visible from both 0 and infinity.  Coordinates
    are read off through eta_q on the grid matching each point's period,
    and the rotation number is the cyclic advance of f_q on the set.

    Only periodic doubly visible points are found this way; for rational
    rotation numbers that is the whole set.
    """
    Theta = Angle(theta_c)
    pre, cyc = orbit(Theta, 2)
    if pre:
        raise ValueError("Theta must be periodic under doubling")
    if max_period is None:
        max_period = max(4, len(cyc))
    path_ray = parameter_ray(Theta, [radius], keep_path=True)
    if path_ray.truncated:
        raise RuntimeError(path_ray.message)
    q = path_ray.q[-1]
    theta_orbit = set(cyc)
    landing: list[complex] = []
    anchor = None
    seen: set = set()
    for P in range(1, max_period + 1):
        M2 = 2 ** P - 1
        for k in range(M2):
            th = Angle(k, M2)
            if th in seen:
                continue
            seen.add(th)
            per = len(orbit(th, 2)[1])
            if th in theta_orbit or any(y in theta_orbit for y in orbit(th, 2)[1]):
                pts = list(landing_limits(q, th, per, depth))
            else:
                tr = internal_ray(q, th, depth, period=per)
                if not tr.landed:
                    raise RuntimeError(f"internal ray {th} did not land")
                pts = [tr.landing_point]
            if th == 0:
                anchor = pts[0]
            for z in pts:
                if all(abs(z - w) > 1e-7 for w in landing):
                    landing.append(z)
    both = [z for z in landing if any(abs(antipode(z) - w) < 1e-6 for w in landing)]
    grids: dict[int, JuliaCoordinates] = {}
    measured = []
    for z in both:
        n = _f_period(q, z, max_period)
        if n is None:
            raise RuntimeError("doubly visible point is not periodic")
        if n not in grids:
            grids[n] = JuliaCoordinates(path_ray.q, n, anchor)
        x, dist = grids[n].coordinate_of(z)
        measured.append((x, dist, z))
    measured.sort(key=lambda t: t[0])
    n = len(measured)
    shift = None
    for i, (_, _, z) in enumerate(measured):
        fz = f_eval(q, z)
        j = int(np.argmin([abs(fz - w[2]) for w in measured]))
        s = (j - i) % n
        if shift is None:
            shift = s
        elif shift != s:
            shift = None
            break
    rot = None if shift is None or n == 0 else Angle(shift, n)
    return {
        "q": q,
        "q2": q * q,
        "coordinates": [m[0] for m in measured],
        "distances": [m[1] for m in measured],
        "points": [m[2] for m in measured],
        "rotation_number": rot,
        "eta_anchor_error": max((g.anchor_error for g in grids.values()), default=0.0),
        "eta_conjugacy_error": max((g.conjugacy_error() for g in grids.values()), default=0.0),
        "eta_separation": min((g.separation() for g in grids.values()), default=math.inf),
    }

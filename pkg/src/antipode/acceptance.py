"""End-to-end acceptance checks, shared by the test suite and ``antipode selftest``.

Each check returns a :class:`CheckResult`.  A check passes only when
its numbers are right and it finishes inside its time limit.
"""

from __future__ import annotations

import cmath
import math
import random
import tempfile
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable

import numpy as np

from .angles import (
    balanced_angle,
    balanced_pair,
    critical_gap,
    doubling_period,
    dynamic_rotation_number,
    phi_pm,
    rho_discontinuity,
    rho_inverse_minus,
    rho_inverse_plus,
)
from .circle import Angle
from .dynamics import antipode, critical_points, df_eval, f_eval, fixed_points
from .rays import boettcher, measure_doubly_visible, parameter_ray
from .render import Viewport, classify_points, render_julia, render_param
from .rotation import (
    deployment_sequence,
    goldberg_orbit,
    orbit_rotation_number,
    periodic_orbits,
    plateau_length,
)


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    seconds: float
    limit: float
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return f"{verdict} [{self.number}] {self.name} ({self.seconds:.2f}s / {self.limit:g}s)"


def _timed(number: int, name: str, limit: float, fn: Callable[[], tuple[bool, dict]]) -> CheckResult:
    t0 = time.perf_counter()
    ok, details = fn()
    dt = time.perf_counter() - t0
    return CheckResult(number, name, bool(ok) and dt < limit, dt, limit, details)


A = Angle


# ---------------------------------------------------------------- 1


def _exact_values():
    got = {}
    times = []

    def rec(key, fn):
        t0 = time.perf_counter()
        got[key] = fn()
        times.append(time.perf_counter() - t0)

    rec("gap", lambda: critical_gap(A(2, 7)))
    rec("phi_4_7", lambda: phi_pm(A(2, 7), A(4, 7)))
    rec("phi_1_7", lambda: phi_pm(A(2, 7), A(1, 7)))
    rec("pair_1_4", lambda: balanced_pair(A(1, 4)))
    rec("pair_1_2", lambda: balanced_pair(A(1, 2)))
    rec("bal_1_3", lambda: balanced_angle(A(1, 3)))
    rec("rinv_1_3", lambda: rho_inverse_plus(A(1, 3)))
    rec("jump_1_2", lambda: rho_discontinuity(A(1, 2)))
    rec("jump_1_4", lambda: rho_discontinuity(A(1, 4)))
    g = got["gap"]
    ok = (
        (g.a, g.b, g.length) == (A(6, 26), A(15, 26), Fraction(9, 26))
        and got["phi_4_7"] == (A(18, 26), A(19, 26))
        and got["phi_1_7"] == (A(2, 26), A(5, 26))
        and got["pair_1_4"] == (A(2, 15), A(4, 15))
        and got["pair_1_2"] == (A(1, 3), A(2, 3))
        and got["bal_1_3"] == A(2, 7) == got["rinv_1_3"]
        and got["jump_1_2"] == Fraction(1, 3)
        and got["jump_1_4"] == Fraction(2, 15)
        and max(times) < 1.0
    )
    return ok, {"max_seconds": max(times), "gap": g.to_json()}


def check_exact_values() -> CheckResult:
    return _timed(1, "exact combinatorial values", 9.0, _exact_values)


# ---------------------------------------------------------------- 2


def _gap_law(seed=1):
    bad = []
    n_periodic = 0
    for p in range(1, 11):
        M = 2 ** p - 1
        for k in range(M):
            T = A(k, M)
            if doubling_period(T) != p:
                continue
            n_periodic += 1
            if critical_gap(T).length != Fraction(3 ** (p - 1), 3 ** p - 1):
                bad.append(str(T))
    rng = random.Random(seed)
    n_pre = 0
    while n_pre < 100:
        den = 2 * rng.randint(1, 1000)
        T = A(rng.randrange(den), den)
        if T.denominator % 2:
            continue
        n_pre += 1
        if critical_gap(T).length != Fraction(1, 3):
            bad.append(str(T))
    return not bad, {"periodic": n_periodic, "preperiodic": n_pre, "failures": bad[:10]}


def check_gap_law() -> CheckResult:
    return _timed(2, "critical gap length law", 10.0, _gap_law)


# ---------------------------------------------------------------- 3


def _rho_checks(grid=10_000):
    bad = []
    for n in range(1, 32, 2):
        for p in range(n):
            t = A(p, n)
            if t.denominator != n:
                continue
            if dynamic_rotation_number(rho_inverse_plus(t)) != t:
                bad.append(("roundtrip", str(t)))
    vals = [dynamic_rotation_number(A(k, grid)) for k in range(grid)]
    mono = all(a <= b for a, b in zip(vals, vals[1:]))
    # degree one: starts at 0 and the lift gains exactly one turn
    degree_one = vals[0] == 0 and vals[-1] < 1 and vals[-1] > Fraction(1, 2)
    for twok in (2, 4, 6, 8):
        k = twok // 2
        for p in range(1, twok, 2):
            t = A(p, twok)
            if t.denominator != twok:
                continue
            lo, hi = rho_inverse_minus(t), rho_inverse_plus(t)
            w = Fraction(2 ** (k - 1), 2 ** twok - 1)
            eps = Fraction(1, 2 ** 40)
            ok = (
                hi - lo == w
                and dynamic_rotation_number(lo) == t
                and dynamic_rotation_number(hi) == t
                and dynamic_rotation_number(lo - eps) < t
                and dynamic_rotation_number(hi + eps) > t
            )
            if not ok:
                bad.append(("plateau", str(t)))
    return (not bad) and mono and degree_one, {"monotone": mono, "degree_one": degree_one,
                                               "failures": bad[:10]}


def check_rho() -> CheckResult:
    return _timed(3, "rho round trip, monotonicity, plateaus", 60.0, _rho_checks)


# ---------------------------------------------------------------- 4


def _goldberg_bruteforce():
    bad = []
    for n in range(1, 13):
        by_rot: dict = {}
        for o in periodic_orbits(2, n):
            r = orbit_rotation_number(o, 2)
            if r is not None:
                by_rot.setdefault(r, []).append(sorted(o))
        for p in range(n):
            t = A(p, n)
            if t.denominator != n:
                continue
            found = by_rot.get(t, [])
            if len(found) != 1 or found[0] != goldberg_orbit(t).periodic_points:
                bad.append(("d2", str(t), len(found)))
    for n in range(1, 9):
        by_key: dict = {}
        for o in periodic_orbits(3, n):
            r = orbit_rotation_number(o, 3)
            if r is not None:
                key = (r, deployment_sequence((3, o)).counts)
                by_key.setdefault(key, []).append(o)
        if any(len(v) != 1 for v in by_key.values()):
            bad.append(("d3 duplicate", n))
        for p in range(n):
            t = A(p, n)
            if t.denominator != n:
                continue
            deps = [k for k in by_key if k[0] == t]
            if len(deps) != n + 1:
                bad.append(("d3 count", str(t), len(deps)))
    return not bad, {"failures": bad[:10]}


def check_goldberg() -> CheckResult:
    return _timed(4, "brute-force rotation orbits", 120.0, _goldberg_bruteforce)


# ---------------------------------------------------------------- 5


def _plateau_sum():
    total = Fraction(0)
    for n in range(1, 15):
        for p in range(n):
            if math.gcd(p, n) == 1:
                total += plateau_length(A(p, n))
    target = 1 - Fraction(1, 2 ** 12)
    return total >= target, {"sum": float(total), "deficit": float(1 - total), "needed": float(1 - target)}


def check_plateau_sum() -> CheckResult:
    return _timed(5, "plateau lengths sum", 5.0, _plateau_sum)


# ---------------------------------------------------------------- 6


def _dynamics_numerics(n=1000, seed=6):
    rng = np.random.default_rng(seed)
    r = 10.0 * np.sqrt(rng.random(n))
    qs = r * np.exp(2j * np.pi * rng.random(n))
    zs = np.exp(rng.normal(0, 1.5, n)) * np.exp(2j * np.pi * rng.random(n))
    worst = dict(antipodal=0.0, critical=0.0, collinear=0.0, fixed=0.0, antipode_c=0.0)
    min_mult = math.inf
    for q, z in zip(qs, zs):
        q, z = complex(q), complex(z)
        lhs, rhs = f_eval(q, antipode(z)), antipode(f_eval(q, z))
        worst["antipodal"] = max(worst["antipodal"], abs(lhs - rhs) / max(1.0, abs(rhs)))
        c0, ci = critical_points(q)
        worst["critical"] = max(worst["critical"], abs(df_eval(q, c0)))
        u = q / abs(q)
        for w in (c0, ci, -1 / q.conjugate()):
            worst["collinear"] = max(worst["collinear"], abs((w * u.conjugate()).imag) / max(1.0, abs(w)))
        worst["antipode_c"] = max(worst["antipode_c"], abs(ci - antipode(c0)) / max(1.0, abs(ci)))
        fp, fm, mults = fixed_points(q)
        for x in (fp, fm):
            worst["fixed"] = max(worst["fixed"], abs(f_eval(q, x) - x) / max(1.0, abs(x)))
        min_mult = min(min_mult, *(abs(m) for m in mults))
    c0, ci = critical_points(math.sqrt(3.0))
    sqrt3 = max(abs(c0 - 1), abs(ci + 1))
    ok = (worst["antipodal"] < 1e-12 and worst["critical"] < 1e-9 and worst["collinear"] < 1e-10
          and worst["antipode_c"] < 1e-12 and worst["fixed"] < 1e-10 and min_mult > 1.0 and sqrt3 < 1e-12)
    return ok, dict(worst, min_multiplier=min_mult, sqrt3=sqrt3)


def check_dynamics() -> CheckResult:
    return _timed(6, "map numerics over random parameters", 5.0, _dynamics_numerics)


# ---------------------------------------------------------------- 7

EXPECTED_27 = {A(6, 26), A(18, 26), A(2, 26), A(15, 26), A(19, 26), A(5, 26)}


def _boettcher_and_rays(seed=7):
    res = measure_doubly_visible(A(2, 7), radius=0.5)
    q = res["q"]
    rng = np.random.default_rng(seed)
    rad = 0.01 / abs(q) * np.sqrt(rng.random(1000))
    zs = rad * np.exp(2j * np.pi * rng.random(1000))
    fe = 0.0
    for z in zs:
        z = complex(z)
        if z == 0:
            continue
        b = boettcher(q, z)
        fe = max(fe, abs(boettcher(q, f_eval(q, z)) - b * b) / abs(b) ** 2)
    coords = res["coordinates"]
    match = len(coords) == 6 and all(
        min(abs(float(x) - float(y)) for y in EXPECTED_27) < 1e-4 for x in coords
    ) and {min(EXPECTED_27, key=lambda y: abs(float(x) - float(y))) for x in coords} == EXPECTED_27
    ok = fe < 1e-10 and match and res["rotation_number"] == A(1, 3)
    return ok, {"functional_residual": fe, "coordinates": [str(x) for x in coords],
                "max_distance": max(res["distances"], default=None),
                "rotation_number": str(res["rotation_number"]), "q2": [res["q2"].real, res["q2"].imag]}


def check_rays() -> CheckResult:
    return _timed(7, "Böttcher coordinate and doubly visible landing points", 60.0, _boettcher_and_rays)


# ---------------------------------------------------------------- 8


def _fjord():
    ray = parameter_ray(A(2, 7), until_abs_q2=1e3)
    if not ray.q:
        return False, {"message": ray.message}
    w = ray.q[-1] ** 2
    t = (cmath.phase(w) / (2 * math.pi)) % 1.0
    dist = abs((t - 1 / 3 + 0.5) % 1.0 - 0.5)
    return abs(w) > 1e3 and dist < 0.02, {"abs_q2": abs(w), "arg_turns": t, "distance_to_1_3": dist,
                                          "level": ray.levels[-1], "truncated": ray.truncated}


def check_fjord() -> CheckResult:
    return _timed(8, "parameter ray 2/7 escapes through the 1/3 fjord", 120.0, _fjord)


# ---------------------------------------------------------------- 9


def annular_band(q: complex, rmin: float = 1e-3, rmax: float = 1e3, radii: int = 200,
                 points: int = 256, budget: int = 5000) -> dict:
    """Look for circles |z| = r made entirely of Undecided points.

    Such a circle separates 0 from infinity, so if the small circle lies
    in the basin of 0 and the large one in the basin of infinity, the
    Undecided band separates the two basins.
    """
    rs = np.geomspace(rmin, rmax, radii)
    ring = np.exp(2j * np.pi * np.arange(points) / points)
    full = []
    for r in rs:
        codes = classify_points(q, r * ring, budget=budget)
        full.append(bool((codes == 3).all()))
    inner = classify_points(q, rmin * ring, budget=budget)
    outer = classify_points(q, rmax * ring, budget=budget)
    band = rs[np.array(full)]
    ok = bool(band.size) and (inner == 0).all() and (outer == 1).all()
    return {"separating": bool(ok), "band_inner": float(band.min()) if band.size else None,
            "band_outer": float(band.max()) if band.size else None}


def _renders(threads=8):
    t0 = time.perf_counter()
    im = render_param("q", "component", 512, 512, Viewport.square(0j, 4.0), threads=threads)
    t_param = time.perf_counter() - t0
    symmetric = bool(np.array_equal(im.codes, im.codes[::-1, ::-1]))
    band = annular_band(1 - 6j)
    jul = render_julia(1 - 6j, 128, 128, Viewport.square(0j, 4.0), threads=threads)
    has_undecided = jul.counts().get("Undecided", 0) > 0
    with tempfile.TemporaryDirectory() as d:
        a, b = Path(d, "a.ppm"), Path(d, "b.ppm")
        im.save(a)
        render_param("q", "component", 512, 512, Viewport.square(0j, 4.0), threads=threads).save(b)
        same = a.read_bytes() == b.read_bytes()
    ok = t_param < 60.0 and symmetric and band["separating"] and has_undecided and same
    return ok, {"param_seconds": t_param, "symmetric": symmetric, "band": band,
                "deterministic": same, "counts": im.counts()}


def check_renders() -> CheckResult:
    # one 512x512 render is held to 60 s; the check renders it twice plus extras
    return _timed(9, "parameter and Julia renders", 180.0, _renders)


ALL_CHECKS = [check_exact_values, check_gap_law, check_rho, check_goldberg, check_plateau_sum,
              check_dynamics, check_rays, check_fjord, check_renders]


def run_all(only: list[int] | None = None, echo: Callable[[str], None] | None = print) -> list[CheckResult]:
    out = []
    for i, chk in enumerate(ALL_CHECKS, start=1):
        if only and i not in only:
            continue
        r = chk()
        if echo:
            echo(r.line())
        out.append(r)
    return out

import cmath
import math
from fractions import Fraction

import numpy as np
import pytest

from antipode.angles import doubly_visible_set, dynamic_rotation_number, phi_pm
from antipode.circle import Angle
from antipode.dynamics import antipode, f_eval
from antipode.rays import (
    JuliaCoordinates,
    boettcher,
    boettcher_inverse,
    doubly_visible_check,
    external_ray,
    in_regime,
    internal_ray,
    landing_limits,
    level_of_radius,
    measure_doubly_visible,
    param_map,
    parameter_ray,
    regime_radius,
)

A = Angle


def on_ray(theta, r=0.5):
    return parameter_ray(A(theta), [r]).q[-1]


def turns(w):
    return (cmath.phase(w) / (2 * math.pi)) % 1.0


def circ(a, b):
    d = abs(a - b) % 1.0
    return min(d, 1 - d)


# -------------------------------------------------------------- Böttcher


@pytest.mark.parametrize("q", [0.3 + 0.2j, 0.8j, 1.2, -1.5 + 0.5j])
def test_boettcher_functional_equation(q):
    rng = np.random.default_rng(1)
    r = regime_radius(q)
    for _ in range(200):
        z = boettcher_inverse(q, r * math.sqrt(rng.uniform(0.01, 1)) * cmath.exp(2j * math.pi * rng.uniform()))
        b, fb = boettcher(q, z), boettcher(q, f_eval(q, z))
        assert abs(fb - b * b) < 1e-10 * abs(b) ** 2


def test_boettcher_normalisation_and_inverse():
    q = 0.7 - 0.4j
    for z in (1e-8, 1e-6j, -3e-7 + 1e-7j):
        # first-order correction is of size |z| (|q| + 1/|q|)
        assert abs(boettcher(q, z) / (q * z) - 1) < 2 * abs(z) * (abs(q) + 1 / abs(q))
    for w in (0.01, 0.02j, -0.03 + 0.01j):
        assert abs(boettcher(q, boettcher_inverse(q, w)) - w) < 1e-15
    assert not in_regime(q, 10.0)
    with pytest.raises(ValueError):
        boettcher(q, 10.0)


# ---------------------------------------------------------- dynamic rays


def test_ray_pullback_consistency():
    q = on_ray(A(2, 7))
    for th in (A(1, 3), A(1, 5), A(3, 11)):
        tr = internal_ray(q, th, depth=30)
        tr2 = internal_ray(q, A(2 * th), depth=30)
        n = min(len(tr.points) - 1, len(tr2.points))
        assert n >= 25
        for k in range(n):
            assert abs(f_eval(q, tr.points[k + 1]) - tr2.points[k]) < 1e-8 * max(1.0, abs(tr2.points[k]))


def test_ray_points_have_requested_boettcher_coordinate():
    q = on_ray(A(1, 5))
    tr = internal_ray(q, A(1, 3), depth=20)
    for k, (z, r) in enumerate(zip(tr.points, tr.potentials)):
        # push forward into the regime, then undo the squaring
        w = z
        for _ in range(k):
            w = f_eval(q, w)
        b = boettcher(q, w)
        assert abs(abs(b) - r ** (2 ** k)) < 1e-9
        assert circ(turns(b), float(A(Fraction(1, 3) * 2 ** k))) < 1e-9


@pytest.mark.parametrize("T,th,p", [(A(2, 7), A(1, 3), 2), (A(1, 5), A(1, 7), 3), (A(0), A(1, 3), 2)])
def test_landing_point_is_periodic(T, th, p):
    q = on_ray(T)
    tr = internal_ray(q, th, period=p)
    assert tr.landed and not tr.bifurcated
    z = tr.landing_point
    w = z
    for _ in range(p):
        w = f_eval(q, w)
    assert abs(w - z) < 1e-10
    assert abs(tr.points[-1] - z) < 1e-6


def test_external_ray_is_antipode_of_internal():
    q = on_ray(A(2, 7))
    ri = internal_ray(q, A(1, 3), period=2)
    re = external_ray(q, A(1, 3), period=2)
    assert re.external and not ri.external
    for a, b in zip(ri.points, re.points):
        assert abs(antipode(a) - b) < 1e-12 * max(1.0, abs(b))
    assert abs(antipode(ri.landing_point) - re.landing_point) < 1e-12 * abs(re.landing_point)


def test_critical_ray_bifurcates():
    q = on_ray(A(2, 7))
    for th in (A(2, 7), A(1, 7), A(4, 7), A(9, 14)):
        assert internal_ray(q, th).bifurcated
    for th in (A(1, 3), A(0), A(1, 5)):
        assert not internal_ray(q, th).bifurcated


def test_landing_limits_stable_in_eps():
    q = on_ray(A(2, 7))
    for th in (A(1, 7), A(2, 7), A(4, 7)):
        a = landing_limits(q, th, 3, eps_exp=12)
        b = landing_limits(q, th, 3, eps_exp=16)
        assert abs(a[0] - b[0]) < 1e-9 and abs(a[1] - b[1]) < 1e-9
        assert abs(a[0] - a[1]) > 1e-3


# ------------------------------------------------- doubly visible points


@pytest.mark.parametrize("T", [A(0), A(2, 7), A(1, 5), A(1, 3)])
def test_measured_doubly_visible_set(T):
    m = measure_doubly_visible(T)
    X = doubly_visible_set(T)
    assert sorted(m["coordinates"]) == sorted(X.points)
    assert max(m["distances"]) < 1e-4
    assert m["rotation_number"] == dynamic_rotation_number(T)
    assert m["eta_conjugacy_error"] < 1e-10


def test_measured_bounce_limits_match_digit_rule():
    T = A(2, 7)
    m = measure_doubly_visible(T)
    coords = set(m["coordinates"])
    for th in (A(1, 7), A(2, 7), A(4, 7)):
        assert set(phi_pm(T, th)) <= coords


def test_doubly_visible_check_pairs():
    q = on_ray(A(1, 5))
    for ti, te in ((A(1, 15), A(4, 15)), (A(2, 15), A(8, 15)), (A(4, 15), A(1, 15))):
        ok, z = doubly_visible_check(q, (ti, te))
        assert ok and z is not None
    ok, _ = doubly_visible_check(q, (A(1, 15), A(2, 15)))
    assert not ok


def test_julia_coordinates_conjugate_tripling():
    path = parameter_ray(A(1, 5), [0.5], keep_path=True).q
    jc = JuliaCoordinates(path, 2)
    assert jc.conjugacy_error() < 1e-10 and jc.separation() > 0
    q = path[-1]
    for z in jc.points[:4]:
        x, d = jc.coordinate_of(z)
        y, e = jc.coordinate_of(f_eval(q, z))
        assert y == A(3 * x) and max(d, e) < 1e-9


# -------------------------------------------------------- parameter rays


@pytest.mark.parametrize("T", [A(0), A(2, 7), A(1, 5), A(4, 7)])
def test_parameter_ray_matches_param_map(T):
    radii = [0.2, 0.5, 0.8, 0.95]
    pr = parameter_ray(T, radii)
    assert not pr.truncated and len(pr.q) == len(radii)
    for r, q in zip(radii, pr.q):
        P = param_map(q)
        assert abs(abs(P) - r) < 1e-9
        assert circ(turns(P), float(T)) < 1e-9
    assert all(abs(a) < abs(b) for a, b in zip(pr.q2, pr.q2[1:]))


def test_parameter_ray_zero_is_real():
    pr = parameter_ray(A(0), [0.1, 0.5, 0.9, 0.99])
    for w in pr.q2:
        assert w.real > 0 and abs(w.imag) < 1e-12 * w.real


def test_param_map_small_q():
    for q in (1e-3, 2e-3j, 1e-3 * cmath.exp(1j)):
        P = param_map(q)
        assert abs(P / (2 * q * q / (3 * math.sqrt(3))) - 1) < 1e-3
        assert abs(P) < 1


def test_param_map_modulus_below_one():
    for q in (0.5, 0.5j, 1 + 0.5j, -0.8 + 0.9j):
        assert abs(param_map(q)) < 1


def test_levels_and_radii():
    pr = parameter_ray(A(1, 3), levels=[0.0, 4.0, 10.0])
    assert pr.levels == [0.0, 4.0, 10.0]
    assert abs(level_of_radius(pr.radii[1]) - 4.0) < 1e-9
    assert all(abs(a) < abs(b) for a, b in zip(pr.q2, pr.q2[1:]))

import math
import random
from fractions import Fraction

import pytest

from antipode.angles import critical_gap, psi
from antipode.circle import Angle, CircleInterval, mul_by, orbit
from antipode.rotation import (
    PLCircleMap,
    RotationSet,
    compatible,
    deployment_sequence,
    fits_collapsing_intervals,
    gap_extension,
    gap_length_extremes,
    goldberg_orbit,
    monotone_extension,
    orbit_rotation_number,
    periodic_orbits,
    plateau_length,
    reduce,
    rigid_rotation,
    rotation_number,
    semiconjugacy_to_md,
    x_d_of,
)

A = Angle


def half_interval(c, d=2):
    return CircleInterval.from_length(Angle(c), Fraction(1, d))


def float_rotation_number(g: PLCircleMap, n=4000):
    # oracle: translation number of the lift by plain float iteration
    y = 0.0
    for _ in range(n):
        y = float(g.lift(Fraction(y).limit_denominator(10 ** 12)))
    return (y / n) % 1.0


# ------------------------------------------------------------- extensions


def test_monotone_extension_examples():
    g = monotone_extension([CircleInterval.open(A(1, 2), A(0))], 2)
    assert g(A(1, 4)) == A(1, 2) and g(A(1, 8)) == A(1, 4)
    assert g(A(3, 4)) == A(0) and g(A(5, 8)) == A(0)
    g = monotone_extension([CircleInterval.open(A(1, 4), A(3, 4))], 2)
    assert {g(A(k, 8)) for k in (3, 4, 5)} == {A(1, 2)}


def test_monotone_extension_lift_is_monotone_degree_one():
    rng = random.Random(3)
    for _ in range(30):
        c = A(rng.randrange(97), 97)
        g = monotone_extension([half_interval(c)], 2)
        ys = [g.lift(Fraction(k, 50)) for k in range(-50, 101)]
        assert all(a <= b for a, b in zip(ys, ys[1:]))
        assert g.lift(Fraction(7, 11) + 1) == g.lift(Fraction(7, 11)) + 1


def test_monotone_extension_rejects_bad_input():
    with pytest.raises(ValueError):
        monotone_extension([CircleInterval.open(A(0), A(1, 3))], 2)
    I = CircleInterval.from_length(A(0), Fraction(1, 3))
    with pytest.raises(ValueError):
        monotone_extension([I, CircleInterval.from_length(A(1, 6), Fraction(1, 3))], 3)


def test_gap_extension_degree():
    gap = critical_gap(A(2, 7)).interval
    assert gap_extension([gap], 3).degree == 2
    assert gap_extension([gap, gap.shifted(Fraction(1, 2))], 3).degree == 1


# --------------------------------------------------------- rotation numbers


def test_rotation_number_examples():
    assert rotation_number(monotone_extension([CircleInterval.open(A(1, 2), A(0))], 2)) == 0
    assert rotation_number(monotone_extension([CircleInterval.open(A(3, 4), A(1, 4))], 2)) == A(1, 2)
    assert rotation_number(rigid_rotation(Fraction(1, 3))) == A(1, 3)


def test_rotation_number_matches_float_iteration():
    rng = random.Random(4)
    for _ in range(25):
        c = A(rng.randrange(1000), 1000)
        g = monotone_extension([half_interval(c)], 2)
        t = float(rotation_number(g))
        est = float_rotation_number(g)
        assert min(abs(t - est), 1 - abs(t - est)) < 2e-3


def test_rotation_number_monotone_with_plateaus():
    N = 2000
    vals = [rotation_number(monotone_extension([half_interval(A(k, N))], 2)) for k in range(N)]
    # the lift of c -> rot gains one turn: nondecreasing after unwrapping at the end
    assert all(a <= b for a, b in zip(vals, vals[1:]))
    for t in (A(1, 2), A(1, 3), A(2, 5)):
        width = Fraction(sum(1 for v in vals if v == t), N)
        assert abs(width - plateau_length(t)) <= Fraction(2, N)


def test_rotation_number_invariant_under_rigid_conjugation():
    rng = random.Random(5)
    for _ in range(20):
        c = A(rng.randrange(60), 60)
        s = A(rng.randrange(1, 60), 60)
        g = monotone_extension([half_interval(c)], 2)
        h = monotone_extension([half_interval(A(c + s))], 2)
        # h(x) = g(x - s) + s is conjugate to g by a rotation only when d = 1;
        # for the collapsing family the conjugate is rotation by (d-1)s of g
        conj = PLCircleMap(tuple((x + s, y + s) for x, y in g.breakpoints), 1)
        assert rotation_number(conj) == rotation_number(g)
        assert h.degree == 1


# -------------------------------------------------------------- X_d(I)


def test_x_d_of_half_interval_and_reduction():
    X = x_d_of([CircleInterval.open(A(1, 2), A(0))], 2)
    assert X.periodic_points == [A(0)]
    assert X.wandering(4) == [A(1, 16), A(1, 8), A(1, 4), A(1, 2)]
    assert reduce(X).points == [A(0)]


def test_x_d_of_contains_period_two_orbit():
    X = x_d_of([CircleInterval.open(A(3, 4), A(1, 4))], 2)
    assert set(X.periodic_points) == {A(1, 3), A(2, 3)}
    assert X.rotation_number == A(1, 2)


def test_x_d_of_two_sevenths_collapse():
    gap = critical_gap(A(2, 7))
    lo = gap.a + (gap.length - Fraction(1, 3)) / 2
    I1 = CircleInterval.from_length(lo, Fraction(1, 3))
    X = x_d_of([I1, I1.shifted(Fraction(1, 2))], 3)
    assert X.rotation_number == A(1, 3)
    assert set(X.periodic_points) == {A(6, 26), A(18, 26), A(2, 26), A(15, 26), A(19, 26), A(5, 26)}
    assert X.is_antipodal


def _brute_avoiders(intervals, d, den):
    # oracle: every x = k/den whose whole m_d orbit stays out of the intervals
    out = []
    for k in range(den):
        x = A(k, den)
        pre, cyc = orbit(x, d)
        if not any(y in I for y in pre + cyc for I in intervals):
            out.append(x)
    return out


def test_x_d_of_membership_matches_orbit_avoidance():
    gap = critical_gap(A(1, 5))
    lo = gap.a + (gap.length - Fraction(1, 3)) / 2
    I1 = CircleInterval.from_length(lo, Fraction(1, 3))
    ints = [I1, I1.shifted(Fraction(1, 2))]
    X = x_d_of(ints, 3)
    for den in (80, 160, 240):
        for x in _brute_avoiders(ints, 3, den):
            assert X.contains(x)
    for x in X.periodic_points:
        assert x in _brute_avoiders(ints, 3, x.denominator)


def test_gap_multiplicities_sum_to_d_minus_one():
    rng = random.Random(6)
    for _ in range(40):
        c = A(rng.randrange(200), 200)
        X = x_d_of([half_interval(c)], 2)
        assert sum(m for _, m in X.gaps) == 1
        if len(X.points) > 1:
            assert sum(I.length for I, _ in X.gaps) == 1
    for t in (A(1, 3), A(2, 5), A(3, 8)):
        X = goldberg_orbit(t)
        assert sum(m for _, m in X.gaps) == 1


# ----------------------------------------------------------- Goldberg


def test_goldberg_examples():
    assert goldberg_orbit(A(1, 3)).points == [A(1, 7), A(2, 7), A(4, 7)]
    assert goldberg_orbit(A(0)).points == [A(0)]
    assert goldberg_orbit(A(1, 2)).points == [A(1, 3), A(2, 3)]
    assert goldberg_orbit(A(1, 4)).points == [A(1, 15), A(2, 15), A(4, 15), A(8, 15)]


def test_goldberg_is_unique_by_bruteforce():
    for n in range(1, 11):
        found = {}
        for o in periodic_orbits(2, n):
            r = orbit_rotation_number(o, 2)
            if r is not None:
                assert r not in found
                found[r] = sorted(o)
        for p in range(n):
            if math.gcd(p, n) == 1:
                assert found[A(p, n)] == goldberg_orbit(A(p, n)).points


def test_gap_length_extremes():
    assert gap_length_extremes(A(1, 3)) == (Fraction(1, 7), Fraction(4, 7))
    assert gap_length_extremes(A(0)) == (1, 1)
    lens = sorted(I.length for I, _ in goldberg_orbit(A(1, 4)).gaps)
    assert gap_length_extremes(A(1, 4)) == (lens[0], lens[-1]) == (Fraction(1, 15), Fraction(8, 15))


def test_plateau_length_examples():
    assert plateau_length(A(1, 2)) == Fraction(1, 6)
    assert plateau_length(A(0)) == Fraction(1, 2)


def test_plateau_sum_truncated_at_twelve():
    # stated tolerance 2^-11; the exact deficit is larger (recorded in the design notes)
    total = sum(plateau_length(A(p, n)) for n in range(1, 13) for p in range(n) if math.gcd(p, n) == 1)
    assert total < 1
    deficit = 1 - total
    # oracle: the tail sum over n > 12 of phi(n) / (2 (2^n - 1)), evaluated to n = 200
    tail = sum(Fraction(sum(1 for p in range(n) if math.gcd(p, n) == 1), 2 * (2 ** n - 1)) for n in range(13, 200))
    assert abs(deficit - tail) < Fraction(1, 2 ** 150)


@pytest.mark.xfail(strict=True, reason="truncation bound 2^-11 is smaller than the true tail")
def test_plateau_sum_meets_stated_bound():
    total = sum(plateau_length(A(p, n)) for n in range(1, 13) for p in range(n) if math.gcd(p, n) == 1)
    assert total >= 1 - Fraction(1, 2 ** 11)


# ---------------------------------------------------- deployment / compat


def test_deployment_examples():
    assert deployment_sequence((3, [A(1, 4), A(3, 4)])).counts == (1, 1)
    assert deployment_sequence((3, [A(1, 8), A(3, 8)])).counts == (2, 0)
    assert deployment_sequence((3, [A(5, 8), A(7, 8)])).counts == (0, 2)


def test_deployment_uniqueness_d3():
    for n in range(1, 9):
        classes = {}
        for o in periodic_orbits(3, n):
            r = orbit_rotation_number(o, 3)
            if r is None:
                continue
            key = (r, deployment_sequence((3, o)).counts)
            assert key not in classes
            classes[key] = o
        for p in range(n):
            if math.gcd(p, n) == 1:
                assert sum(1 for k in classes if k[0] == A(p, n)) == n + 1


def test_compatible_examples():
    a, b, c = [A(1, 4), A(3, 4)], [A(1, 8), A(3, 8)], [A(5, 8), A(7, 8)]
    assert compatible(a, b, 3) and compatible(a, c, 3)
    assert not compatible(b, c, 3)
    assert compatible(b, b, 3)
    with pytest.raises(ValueError):
        compatible([A(0)], a, 3)


# -------------------------------------------------- rotation set theorem


def _is_rotation_orbit(o, d):
    # oracle: m_d preserves the cyclic order of the orbit
    s = sorted(o)
    n = len(s)
    idx = {x: i for i, x in enumerate(s)}
    shifts = {(idx[mul_by(x, d)] - i) % n for i, x in enumerate(s)}
    return len(shifts) == 1


@pytest.mark.parametrize("d", [2, 3])
def test_rotation_set_iff_collapsing_intervals_fit(d):
    top = 10 if d == 2 else 8
    for n in range(1, top + 1):
        for o in periodic_orbits(d, n):
            assert _is_rotation_orbit(o, d) == fits_collapsing_intervals(o, d)
            assert (orbit_rotation_number(o, d) is not None) == _is_rotation_orbit(o, d)


# -------------------------------------------------------- semiconjugacy


def test_semiconjugacy_identity_and_base_point():
    mD = PLCircleMap(((Fraction(0), Fraction(0)), (Fraction(1), Fraction(3))), 3)
    for x in (A(1, 5), A(2, 7), A(7, 13)):
        h, err = semiconjugacy_to_md(mD, A(0), x)
        assert h == x and err == 0
    g = gap_extension([critical_gap(A(2, 7)).interval], 3)
    assert semiconjugacy_to_md(g, A(0), A(0))[0] == 0


def test_semiconjugacy_rejects_non_fixed_base():
    g = gap_extension([critical_gap(A(2, 7)).interval], 3)
    with pytest.raises(ValueError):
        semiconjugacy_to_md(g, A(1, 2), A(1, 5))


@pytest.mark.parametrize("T", [A(2, 7), A(1, 5), A(1, 6), A(3, 10)])
def test_semiconjugacy_agrees_with_psi(T):
    g = gap_extension([critical_gap(T).interval], 3)
    assert g.degree == 2
    for den in range(1, 40):
        for k in range(den):
            x = A(k, den)
            h, err = semiconjugacy_to_md(g, A(0), x, n=40)
            ref = psi(T, x)
            dist = abs(h - ref)
            assert min(dist, 1 - dist) <= err


def test_semiconjugacy_of_gap_endpoint():
    g = gap_extension([critical_gap(A(2, 7)).interval], 3)
    h, err = semiconjugacy_to_md(g, A(0), A(6, 26), n=15)
    assert err == 0 and h == A(2, 7)


def test_rotation_set_json():
    js = goldberg_orbit(A(1, 3)).to_json()
    assert js["rotation_number"] == "1/3" and js["orbits"] == [["1/7", "2/7", "4/7"]]

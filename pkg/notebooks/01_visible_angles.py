"""
Visible angles and the dynamic rotation number
==============================================

Exact rational walk-through: the critical gap, landing coordinates,
the doubly visible set and the rotation number it carries.
"""

from fractions import Fraction

from antipode.angles import (balanced_pair, critical_gap, doubly_visible_set,
                             dynamic_rotation_number, phi, phi_pm, rho_inverse_plus)
from antipode.circle import Angle

# the parameter-ray angle used throughout
T = Angle(2, 7)
gap = critical_gap(T)
print("critical gap", gap.a, gap.b, "length", gap.length)

# landing coordinates of a few internal rays
for th in (Angle(0), Angle(1, 3), Angle(2, 3)):
    x, digits = phi(T, th, with_digits=True)
    print(f"phi({th}) = {x}   digits {digits}")

# rays on the orbit of T bounce off the critical point and have two limits
for th in (Angle(1, 7), Angle(2, 7), Angle(4, 7)):
    print("limits of", th, phi_pm(T, th))

# points visible from both 0 and infinity form two period-3 orbits
X = doubly_visible_set(T)
print("orbits", [[str(x) for x in o] for o in X.orbits], "rotation", X.rotation_number)

# rho is a devil's staircase; print a coarse sample
for k in range(0, 40, 4):
    th = Angle(k, 40)
    print(f"rho({th}) = {dynamic_rotation_number(th)}")

# inverse and plateaus
print("rho^-1(1/3) =", rho_inverse_plus(Angle(1, 3)))
lo, hi = balanced_pair(Angle(1, 4))
print("plateau of 1/4:", lo, hi, "width", Fraction(hi - lo))

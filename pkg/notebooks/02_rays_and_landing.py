"""
Rays, landing points and the measured rotation number
=====================================================

Place q^2 halfway out along a parameter ray, trace internal rays of
low period and compare the measured doubly visible set with the exact
one.
"""

from antipode.angles import doubly_visible_set
from antipode.circle import Angle
from antipode.rays import internal_ray, measure_doubly_visible, parameter_ray

T = Angle(2, 7)

# q with Phi(q^2) = 0.5 e^(2 pi i T)
pr = parameter_ray(T, [0.25, 0.5, 0.75])
for r, w in zip(pr.radii, pr.q2):
    print(f"|Phi| = {r:.2f}   q^2 = {w:.6f}")
q = pr.q[1]

# a ray that lands, and one that hits the critical point
tr = internal_ray(q, Angle(1, 3), period=2)
print("ray 1/3 lands at", tr.landing_point, "after", len(tr.points), "samples")
tr = internal_ray(q, T)
print("ray 2/7 bifurcated:", tr.bifurcated, "closest approach", tr.closest_to_critical)

# measured versus exact
m = measure_doubly_visible(T)
print("measured", [str(x) for x in m["coordinates"]])
print("exact   ", [str(x) for x in sorted(doubly_visible_set(T).points)])
print("rotation number", m["rotation_number"], "conjugacy error", m["eta_conjugacy_error"])

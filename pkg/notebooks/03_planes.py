"""
Parameter and dynamical planes
==============================

Small renders of the q-plane and of a Herman-ring Julia set.  Images go
to ./out as PPM files with JSON sidecars.
"""

from pathlib import Path

from antipode.dynamics import classify_parameter
from antipode.render import Projection, Viewport, estimate_rotation_hue, render_julia, render_param

out = Path("out")
out.mkdir(exist_ok=True)

# a few labelled parameters
for q in (0.1, 3j, 0.394 - 2.24j, 1 - 6j):
    print(q, classify_parameter(q).value, "hue", estimate_rotation_hue(q))

# q-plane, component types and rotation hue
img = render_param("q", "component", 256, 256, Viewport.square(0j, 4.0), budget=1000)
print(img.counts())
img.save(out / "qplane.ppm")
render_param("q2", "rotation", 256, 256, Viewport.square(0j, 1.0), Projection.CIRCLED,
             budget=1000).save(out / "q2_circled.ppm")

# the Herman ring: an undecided annulus between the two basins
img = render_julia(1 - 6j, 256, 256, Viewport.square(0j, 2.0), budget=3000)
print(img.counts())
img.save(out / "herman.ppm")

"""
Projection methods across a groove
==================================

The classic failure case: a straight hand path crossing a right-angle
groove.  Nearest-point style projections teleport from wall to wall;
the anchored methods walk through the corner.  The largest jump between
consecutive inked points tells the story.
"""

import time

import numpy as np

from surfink.harness import build_surface_map
from surfink.meshes import vgroove
from surfink.projection import Method, StrokeProjector, SystemState

m = vgroove()
print("precomputing the groove embedding...")
t0 = time.perf_counter()
smap = build_surface_map(m, seed=0)
print(f"  done in {time.perf_counter() - t0:.1f} s")

# straight sweep across the groove, 1 mm spacing, 10 cm above the apex
ys = np.arange(-0.2, 0.2 + 1e-9, 0.001)
head = np.array([0.0, 0.0, 1.0])
idq = np.array([1.0, 0.0, 0.0, 0.0])

print(f"\n{'method':18s} {'points':>6s} {'max jump':>10s}")
for method in (Method.SNAP, Method.SPRAYCAN, Method.OCCLUDE,
               Method.SCP, Method.MIMICRY):
    proj = StrokeProjector(m, method, smap)
    for i, y in enumerate(ys):
        proj.feed(SystemState(head, idq, np.array([0.0, y, 0.1]), idq,
                              0.02 * i))
    curve = proj.finish()
    P = np.array([sp.position for sp in curve.points])
    jump = np.linalg.norm(np.diff(P, axis=0), axis=1).max()
    print(f"{method.value:18s} {len(P):6d} {jump * 100:9.2f} cm")

print("\nsnap teleports wall to wall; scp matches it because the fitted")
print("shell is too thin at the crease to smooth these probes; the spray")
print("ray misses half the sweep entirely. occlude survives only because")
print("the eye happens to look straight down; mimicry needs no such luck")
print("and stays at the 1 mm sample spacing through the corner")

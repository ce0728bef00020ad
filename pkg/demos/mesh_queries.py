"""
Raw mesh queries
================

Closest points, ray hits and signed distances on a benchmark mesh.
"""

import numpy as np

from surfink.meshes import icosphere

m = icosphere(3)
print(f"icosphere: {m.n_vertices} vertices, {m.n_faces} faces, "
      f"bbox diagonal {m.bbox_diag:.4f} m")

# closest point from a point floating off the surface
p = np.array([1.4, 0.3, -0.2])
sp = m.closest_point(p)
print(f"\nclosest_point({p}) -> face {sp.face}, "
      f"position {np.round(sp.position, 4)}, "
      f"distance {np.linalg.norm(sp.position - p):.4f} m")

# a ray from outside, aimed at the centre, hits the front face
hit = m.raycast(np.array([3.0, 0.0, 0.0]), np.array([-1.0, 0.0, 0.0]))
print(f"raycast from x=3 toward centre -> face {hit.face}, "
      f"t={hit.t:.4f}, position {np.round(hit.position, 4)}")

# signed distance flips sign across the surface (points on it are
# refused: the winding number cannot call a side there)
print("\nsigned distance along the x axis:")
for x in (1.2, 0.8, 0.3):
    d = m.signed_distance(np.array([x, 0.0, 0.0]))
    side = "outside" if d > 0 else "inside"
    print(f"  x={x:4.1f}  d={d:+.4f}  ({side})")

"""
Curves as segmentation boundaries
=================================

An inked loop closes into an edge cycle and splits the mesh into
regions, which is how drawn curves drive downstream selection.
"""

import numpy as np

from surfink.curves import segment_mesh
from surfink.meshes import icosphere
from surfink.projection import Method, project_stroke, SystemState

m = icosphere(3)
idq = np.array([1.0, 0.0, 0.0, 0.0])

# draw a ring slightly above the equator, hovering off the surface
ts = np.linspace(0.0, 2.0 * np.pi, 120)
samples = [
    SystemState(np.array([0.0, 0.0, 3.0]), idq,
                1.1 * np.array([np.cos(t), np.sin(t), 0.25]), idq,
                0.02 * i)
    for i, t in enumerate(ts)
]
curve = project_stroke(samples, Method.SNAP, m)
print(f"projected loop: {len(curve.points)} points")

seg = segment_mesh(m, curve)
sizes = sorted(np.bincount(seg.labels).tolist(), reverse=True)
closed = seg.cycle[0] == seg.cycle[-1]
print(f"cycle: {len(seg.cycle)} vertices, closed={closed}")
print(f"regions: {seg.n_regions}, face counts {sizes}")

# the ring sits at z ~ 0.25: the cap is the smaller region
assert seg.n_regions == 2 and sizes[0] > sizes[1]
cap = np.argmin([np.bincount(seg.labels)[i] for i in range(seg.n_regions)])
zs = m.face_normals[seg.labels == cap][:, 2]
print(f"smaller region mean normal z: {zs.mean():+.2f} (the top cap)")

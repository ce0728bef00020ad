"""
Target-curve generation
=======================

Grows a smooth on-surface curve from greedily picked control vertices,
then extracts keypoints (endpoints plus curvature extrema).
"""

import numpy as np

from surfink.curves import TargetCurveSpec, sample_target_curve
from surfink.geodesic import GeodesicSolver
from surfink.meshes import torus

m = torus()
solver = GeodesicSolver(m)

spec = TargetCurveSpec(n=5, i0=17, kg=0.06, kn=np.pi / 4, seed=2)
tc = sample_target_curve(m, spec, solver)

P = tc.positions
seg = np.linalg.norm(np.diff(P, axis=0), axis=1)
print(f"curve: {len(P)} samples, length {tc.length:.3f} m, "
      f"max gap {seg.max() * 1000:.1f} mm")
print(f"controls: {list(tc.controls)}")
print(f"keypoints at samples {tc.keypoints}")
print(f"self-intersecting: {tc.self_intersecting}")

# keypoints include both endpoints
assert tc.keypoints[0] == 0 and tc.keypoints[-1] == len(P) - 1

# the curve serializes with exact barycentric coordinates
blob = tc.to_json()
print(f"\nJSON payload: {len(blob)} bytes; "
      f"round trip is exact by construction")

"""
Scoring a stroke
================

Synthesizes a mid-air stroke hovering over a generated target curve,
replays it, and prints the full measure row: accuracy, aesthetics,
effort, mimicry violation and the acceptance verdict.
"""

from surfink.harness import (
    SynthStrokeModel,
    build_surface_map,
    gen_targets,
    replay,
    synth_stroke,
)
from surfink.geodesic import GeodesicSolver
from surfink.meshes import icosphere
from surfink.metrics import CSV_COLUMNS

m = icosphere(2)
solver = GeodesicSolver(m)
smap = build_surface_map(m, seed=0)

target = gen_targets(m, 1, seed=4, solver=solver, smap=smap)[0]
print(f"target: {len(target.positions)} samples, {target.length:.3f} m")

# a hand tracing the target 4.8 cm off the surface with light tremor
model = SynthStrokeModel(offset_mode="fixed-translation", jitter=0.002,
                         rate=50.0)
session = synth_stroke(m, target, model, seed=7)
print(f"stroke: {len(session.samples)} samples, "
      f"drawn offset {session.meta['offset_drawn'] * 100:.1f} cm")

for method in ("mimicry", "spraycan"):
    _, rep = replay(session, method, m, smap, target, solver)
    print(f"\n{method}:")
    for name, cell in zip(CSV_COLUMNS, rep.to_row()):
        print(f"  {name:18s} {cell}")

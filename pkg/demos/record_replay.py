"""
Sessions on disk
================

A recorded session serializes to JSON and replays to the same curve,
byte for byte.  The CSV writer turns a corpus into one scored row per
stroke.
"""

import tempfile
from pathlib import Path

from surfink.harness import (
    CorpusItem,
    Session,
    SynthStrokeModel,
    build_surface_map,
    gen_targets,
    replay_csv,
    synth_stroke,
)
from surfink.geodesic import GeodesicSolver
from surfink.meshes import icosphere

m = icosphere(2)
solver = GeodesicSolver(m)
smap = build_surface_map(m, seed=0)
targets = gen_targets(m, 2, seed=9, solver=solver, smap=smap)
model = SynthStrokeModel(jitter=0.002)

sessions = [synth_stroke(m, t, model, seed=i, mesh_id="ico",
                         target_id=str(i)) for i, t in enumerate(targets)]

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "stroke.json"
    path.write_text(sessions[0].to_json())
    print(f"wrote {path.stat().st_size} bytes")
    back = Session.from_json(path.read_text())
    assert back.to_json() == sessions[0].to_json()
    print("JSON round trip is byte-stable")

corpus = [CorpusItem(s, t, m, smap, solver)
          for s, t in zip(sessions, targets)]
print("\nper-stroke rows under mimicry:")
print(replay_csv(corpus, ["mimicry"]))

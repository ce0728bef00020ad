"""
A small paired benchmark
========================

Replays one synthetic corpus under two methods and runs the paired
signed-rank comparison.  Full-size corpora live behind the CLI
(`surfink compare`); this keeps to one mesh so it finishes in seconds.
"""

from surfink.harness import benchmark_corpus, build_surface_map, compare
from surfink.geodesic import GeodesicSolver
from surfink.meshes import icosphere

m = icosphere(2)
corpus = benchmark_corpus(
    meshes={"ico": m}, per_mesh=8, seed=0,
    maps={"ico": build_surface_map(m, seed=0)},
    solvers={"ico": GeodesicSolver(m)},
)
print(f"corpus: {len(corpus)} strokes on one mesh")

res = compare(corpus, ["mimicry", "spraycan"])
print(f"pairs: total={res.total} accepted={res.accepted} "
      f"rejected={res.rejected}\n")

print(f"{'measure':10s} {'mimicry':>10s} {'spraycan':>10s} "
      f"{'wins':>5s} {'p':>10s}")
for r in res.rows:
    p = "same" if r.p is None else f"{r.p:.5f}"
    print(f"{r.measure:10s} {r.mean_a:10.4f} {r.mean_b:10.4f} "
          f"{r.a_lower:3d}/{res.accepted:<2d} {p:>10s}")

print("\neffort rows tie because both methods replay the same recording;")
print("lower is better everywhere else")

"""surfink: projecting mid-air 3D strokes onto triangle mesh surfaces.

Core pipeline: load or generate a mesh, precompute its offset-shell
embedding, then project streamed controller samples with one of the
projection methods. Target-curve generation, stroke metrics and a replay
harness support reproducible benchmarking of the methods.
"""

from .mesh import (
    AmbiguousWindingError,
    DegenerateGradientError,
    MeshError,
    MeshParseError,
    MeshTopologyError,
    RayHit,
    SurfacePoint,
    TriMesh,
    load_obj,
    save_obj,
)

__version__ = "0.1.0"

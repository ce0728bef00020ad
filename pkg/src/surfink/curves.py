"""Target curves on meshes, keypoints, refinement and segmentation.

Target curves are grown control point by control point, each chosen to sit
at a preferred geodesic distance and normal-map angle from the previous
one, splined, and densified into an equi-arclength on-surface polyline.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.sparse.csgraph import dijkstra as _sp_dijkstra
from scipy.spatial import cKDTree

from .geodesic import GeodesicSolver, SurfacePath, bary_in_face
from .mesh import SurfacePoint, TriMesh

KEYPOINT_MIN_SPACING = 0.03  # meters
KEYPOINT_MAX_GAP = 0.15
SELF_INTERSECT_DIST = 0.001


class CurveError(Exception):
    pass


@dataclass(frozen=True)
class TargetCurveSpec:
    """Parameters of a generated target curve.

    n: control point count; i0: start vertex id; kg: preferred geodesic
    gap between controls, as a fraction of the bbox diagonal; kn:
    preferred normal angle between consecutive controls (radians).
    """

    n: int
    i0: int
    kg: float
    kn: float
    seed: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("need at least two control points")
        if not self.kg > 0:
            raise ValueError("kg must be positive")
        if not 0.0 < self.kn < np.pi:
            raise ValueError("kn must lie in (0, pi)")

    def geodesic_gap(self, mesh: TriMesh) -> float:
        return self.kg * mesh.bbox_diag


@dataclass
class TargetCurve:
    controls: np.ndarray  # vertex ids
    polyline: list  # SurfacePoint, equi-spaced by arclength
    arclengths: np.ndarray
    keypoints: list  # indices into polyline, endpoints included
    self_intersecting: bool = False
    spec: TargetCurveSpec | None = None

    @property
    def positions(self):
        return np.array([sp.position for sp in self.polyline])

    @property
    def length(self):
        return float(self.arclengths[-1])

    def to_json(self) -> str:
        doc = {
            "spec": None if self.spec is None else {
                "n": self.spec.n, "i0": self.spec.i0, "kg": self.spec.kg,
                "kn": self.spec.kn, "seed": self.spec.seed,
            },
            "controls": [int(c) for c in self.controls],
            "polyline": [
                [int(sp.face), [float(b) for b in sp.bary]]
                for sp in self.polyline
            ],
            "keypoints": [int(k) for k in self.keypoints],
            "self_intersecting": bool(self.self_intersecting),
        }
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str, mesh: TriMesh) -> "TargetCurve":
        doc = json.loads(text)
        sps = [mesh.surface_point(f, b) for f, b in doc["polyline"]]
        P = np.array([sp.position for sp in sps])
        s = np.concatenate(
            [[0.0], np.cumsum(np.linalg.norm(np.diff(P, axis=0), axis=1))]
        )
        spec = None
        if doc.get("spec"):
            spec = TargetCurveSpec(**doc["spec"])
        return cls(
            controls=np.asarray(doc["controls"], dtype=np.int64),
            polyline=sps, arclengths=s, keypoints=list(doc["keypoints"]),
            self_intersecting=doc.get("self_intersecting", False), spec=spec,
        )


# ---------------------------------------------------------------------------
# Polyline utilities shared with the metrics code.
# ---------------------------------------------------------------------------

def arclengths(points) -> np.ndarray:
    points = np.asarray(points, dtype=np.float64)
    if len(points) < 2:
        return np.zeros(len(points))
    return np.concatenate(
        [[0.0], np.cumsum(np.linalg.norm(np.diff(points, axis=0), axis=1))]
    )


def resample_polyline(points, count: int) -> np.ndarray:
    """`count` points along the polyline, uniform in arclength."""
    points = np.asarray(points, dtype=np.float64)
    if count < 2:
        raise ValueError("count must be at least 2")
    if len(points) == 1:
        return np.repeat(points, count, axis=0)
    s = arclengths(points)
    if s[-1] == 0.0:
        return np.repeat(points[:1], count, axis=0)
    t = np.linspace(0.0, s[-1], count)
    out = np.empty((count, points.shape[1]))
    for k in range(points.shape[1]):
        out[:, k] = np.interp(t, s, points[:, k])
    return out


def _resample_path(mesh, path: SurfacePath, spacing):
    """Equi-arclength SurfacePoints along an on-surface path."""
    P = path.points
    s = arclengths(P)
    L = float(s[-1])
    if L == 0.0 or len(P) < 2:
        if len(path.seg_faces):
            sp = bary_in_face(mesh, int(path.seg_faces[0]), P[0])
        else:
            sp = mesh.closest_point(P[0])
        return [sp], np.zeros(1)
    m = max(1, int(np.ceil(L / spacing)))
    targets = np.linspace(0.0, L, m + 1)
    seg = np.clip(np.searchsorted(s, targets, side="right") - 1, 0,
                  len(P) - 2)
    out = []
    for t, j in zip(targets, seg):
        den = s[j + 1] - s[j]
        u = 0.0 if den == 0.0 else (t - s[j]) / den
        p = (1.0 - u) * P[j] + u * P[j + 1]
        out.append(bary_in_face(mesh, int(path.seg_faces[j]), p))
    return out, targets


def turning_angles(mesh, polyline) -> np.ndarray:
    """Signed bend at each sample: the angle between consecutive segments,
    measured about the surface normal. Zero at the endpoints."""
    sps = list(polyline)
    P = np.array([sp.position for sp in sps])
    m = len(P)
    out = np.zeros(m)
    for i in range(1, m - 1):
        a = P[i] - P[i - 1]
        b = P[i + 1] - P[i]
        if np.linalg.norm(a) < 1e-15 or np.linalg.norm(b) < 1e-15:
            continue
        n = mesh.point_normal(sps[i])
        out[i] = np.arctan2(float(np.cross(a, b) @ n), float(a @ b))
    return out


# ---------------------------------------------------------------------------
# Spline through control vertices.
# ---------------------------------------------------------------------------

def _catmull_rom(p0, p1, p2, p3, t):
    t = np.asarray(t)[:, None]
    return 0.5 * (
        2.0 * p1
        + (p2 - p0) * t
        + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * t * t
        + (3.0 * p1 - p0 - 3.0 * p2 + p3) * t * t * t
    )


def _concat_paths(solver: GeodesicSolver, sps):
    """Chain exact geodesics between consecutive surface points."""
    pieces = []
    for a, b in zip(sps[:-1], sps[1:]):
        if np.linalg.norm(a.position - b.position) < 1e-15:
            continue
        pieces.append(solver.path(a, b))
    if not pieces:
        p = sps[0]
        return SurfacePath(
            points=np.array([p.position]),
            seg_faces=np.empty(0, dtype=np.int64),
            point_edges=np.array([-1], dtype=np.int64),
        )
    pts = [pieces[0].points]
    segf = [pieces[0].seg_faces]
    pe = [pieces[0].point_edges]
    for pc in pieces[1:]:
        pts.append(pc.points[1:])
        segf.append(pc.seg_faces)
        pe.append(pc.point_edges[1:])
    return SurfacePath(
        points=np.concatenate(pts),
        seg_faces=np.concatenate(segf),
        point_edges=np.concatenate(pe),
    )


def spline_on_mesh(mesh: TriMesh, controls, smap=None, solver=None,
                   spacing=0.005) -> SurfacePath:
    """On-surface interpolating spline through control vertices.

    A uniform Catmull-Rom through the control positions is sampled at four
    times the requested density, pulled to the surface (smooth closest
    point when a surface map is given, plain closest point otherwise) and
    the samples joined by exact geodesics.
    """
    controls = np.asarray(controls, dtype=np.int64)
    if len(controls) < 2:
        raise CurveError("need at least two control vertices")
    if np.any(controls[:-1] == controls[1:]):
        raise CurveError("consecutive control vertices coincide")
    if solver is None:
        solver = GeodesicSolver(mesh)
    if len(controls) == 2:
        return solver.path(mesh.vertex_surface_point(controls[0]),
                           mesh.vertex_surface_point(controls[1]))
    P = mesh.vertices[controls]
    ext = np.vstack([2.0 * P[0] - P[1], P, 2.0 * P[-1] - P[-2]])
    samples = []
    for i in range(len(P) - 1):
        p0, p1, p2, p3 = ext[i], ext[i + 1], ext[i + 2], ext[i + 3]
        k = max(4, int(np.ceil(np.linalg.norm(p2 - p1) / (spacing / 4.0))))
        t = np.linspace(0.0, 1.0, k, endpoint=False)
        samples.append(_catmull_rom(p0, p1, p2, p3, t))
    samples.append(P[-1][None])
    samples = np.concatenate(samples)
    project = smap.scp if smap is not None else mesh.closest_point
    sps = []
    for x in samples:
        sp = project(x)
        if sps and np.linalg.norm(sp.position - sps[-1].position) < 1e-12:
            continue
        sps.append(sp)
    return _concat_paths(solver, sps)


# ---------------------------------------------------------------------------
# Incremental control point selection.
# ---------------------------------------------------------------------------

def _control_objective(mesh, d_geo, prev, candidates, d_pref, kn,
                       normalize):
    """Per-candidate score: squared gap misses in distance and in normal
    angle (units mixed on purpose; normalize divides each by its target)."""
    d_g = d_geo[candidates]
    cosang = mesh.vertex_normals[candidates] @ mesh.vertex_normals[prev]
    d_n = np.arccos(np.clip(cosang, -1.0, 1.0))
    if normalize:
        return ((d_g - d_pref) / d_pref) ** 2 + ((d_n - kn) / kn) ** 2
    return (d_g - d_pref) ** 2 + (d_n - kn) ** 2


def pick_control_vertices(mesh: TriMesh, spec: TargetCurveSpec,
                          solver: GeodesicSolver | None = None,
                          normalize=False) -> np.ndarray:
    """Greedy control selection; each step scans every admissible vertex."""
    if solver is None:
        solver = GeodesicSolver(mesh)
    if not 0 <= spec.i0 < mesh.n_vertices:
        raise CurveError("start vertex out of range")
    d_pref = spec.geodesic_gap(mesh)
    controls = [int(spec.i0)]
    last_field = solver.vertex_distance_field(spec.i0)
    d_min = last_field.copy()
    for _ in range(1, spec.n):
        cand = np.flatnonzero(d_min >= 0.5 * d_pref)
        if len(cand) == 0:
            raise CurveError(
                "no vertex is %.3g away from every control; "
                "use a smaller kg" % (0.5 * d_pref)
            )
        obj = _control_objective(
            mesh, last_field, controls[-1], cand, d_pref, spec.kn, normalize
        )
        c = int(cand[int(np.argmin(obj))])
        controls.append(c)
        last_field = solver.vertex_distance_field(c)
        d_min = np.minimum(d_min, last_field)
    return np.asarray(controls, dtype=np.int64)


def _near_self_intersection(P, s, window):
    kd = cKDTree(P)
    pairs = kd.query_pairs(SELF_INTERSECT_DIST, output_type="ndarray")
    if len(pairs) == 0:
        return False
    gap = np.abs(s[pairs[:, 0]] - s[pairs[:, 1]])
    return bool(np.any(gap > window))


def sample_target_curve(mesh: TriMesh, spec: TargetCurveSpec,
                        solver=None, smap=None, spacing=0.005,
                        normalize=False) -> TargetCurve:
    """Grow, spline and densify a target curve; flags near self-crossings
    (samples under 1 mm apart in space but far apart along the curve)."""
    if solver is None:
        solver = GeodesicSolver(mesh)
    controls = pick_control_vertices(mesh, spec, solver, normalize)
    path = spline_on_mesh(mesh, controls, smap, solver, spacing)
    sps, s = _resample_path(mesh, path, spacing)
    kps = extract_keypoints(mesh, sps, s)
    P = np.array([sp.position for sp in sps])
    window = max(4.0 * spacing, KEYPOINT_MIN_SPACING)
    flagged = _near_self_intersection(P, s, window)
    return TargetCurve(
        controls=controls, polyline=sps, arclengths=s, keypoints=kps,
        self_intersecting=flagged, spec=spec,
    )


# ---------------------------------------------------------------------------
# Keypoints.
# ---------------------------------------------------------------------------

def extract_keypoints(mesh, polyline, s=None,
                      min_spacing=KEYPOINT_MIN_SPACING,
                      max_gap=KEYPOINT_MAX_GAP) -> list:
    """Endpoints plus bend extrema, greedy by bend magnitude.

    Candidates are added largest bend first (ties to the lower index),
    never closer than min_spacing to a chosen keypoint, until no gap
    reaches max_gap. Short curves keep just the endpoints.
    """
    sps = list(polyline)
    m = len(sps)
    if m < 2:
        return [0] * max(m, 1) if m else []
    if s is None:
        s = arclengths([sp.position for sp in sps])
    keys = [0, m - 1]
    if s[-1] < 2 * min_spacing:
        return keys
    theta = np.abs(turning_angles(mesh, sps))
    order = np.lexsort((np.arange(m), -theta))
    order = [int(i) for i in order if 0 < i < m - 1]
    pos = 0
    while True:
        ss = np.sort(s[keys])
        if np.max(np.diff(ss)) < max_gap:
            break
        while pos < len(order):
            i = order[pos]
            pos += 1
            if np.min(np.abs(s[keys] - s[i])) >= min_spacing:
                keys.append(i)
                break
        else:
            break  # nothing left that respects the spacing
    return sorted(keys)


# ---------------------------------------------------------------------------
# Refinement and segmentation of projected curves.
# ---------------------------------------------------------------------------

def _as_surface_points(curve):
    sps = curve.points if hasattr(curve, "points") else list(curve)
    if len(sps) == 0:
        raise CurveError("empty curve")
    return sps


def refine_on_surface(mesh: TriMesh, curve, solver=None) -> SurfacePath:
    """Replace inter-sample chords with exact on-surface geodesics."""
    sps = _as_surface_points(curve)
    if solver is None:
        solver = GeodesicSolver(mesh)
    return _concat_paths(solver, sps)


@dataclass
class MeshSegmentation:
    labels: np.ndarray  # region id per face
    cycle: np.ndarray  # vertex loop; first and last entries coincide
    n_regions: int

    def region_faces(self, r):
        return np.flatnonzero(self.labels == r)


def segment_mesh(mesh: TriMesh, curve, solver=None) -> MeshSegmentation:
    """Close the curve into a vertex cycle along mesh edges and split the
    faces into the regions it bounds."""
    sps = _as_surface_points(curve)
    kd = cKDTree(mesh.vertices)
    near = kd.query(np.array([sp.position for sp in sps]))[1]
    chain = [int(near[0])]
    for v in near[1:]:
        if int(v) != chain[-1]:
            chain.append(int(v))
    if chain[-1] == chain[0] and len(chain) > 1:
        chain.pop()
    if len(set(chain)) < 3:
        raise CurveError("curve snaps to fewer than three distinct vertices")

    elen = np.linalg.norm(
        mesh.vertices[mesh.edges[:, 0]] - mesh.vertices[mesh.edges[:, 1]],
        axis=1,
    )
    nv = mesh.n_vertices
    graph = coo_matrix(
        (elen, (mesh.edges[:, 0], mesh.edges[:, 1])), shape=(nv, nv)
    ).tocsr()
    edge_ids = {tuple(e): i for i, e in enumerate(map(tuple, mesh.edges))}

    cut = set()
    cycle = [chain[0]]
    loop = chain + [chain[0]]
    for a, b in zip(loop[:-1], loop[1:]):
        if a == b:
            continue
        _, pred = _sp_dijkstra(
            graph, directed=False, indices=a, return_predecessors=True
        )
        if pred[b] < 0 and a != b:
            raise CurveError("snapped vertices fall in different components")
        hop = [b]
        while hop[-1] != a:
            hop.append(int(pred[hop[-1]]))
        hop.reverse()
        for u, v in zip(hop[:-1], hop[1:]):
            cut.add(edge_ids[(u, v) if u < v else (v, u)])
            cycle.append(v)

    on_cycle = np.zeros(len(mesh.edges), dtype=bool)
    on_cycle[list(cut)] = True
    keep = (mesh.edge_faces[:, 1] >= 0) & ~on_cycle
    ef = mesh.edge_faces[keep]
    nf = mesh.n_faces
    fgraph = coo_matrix(
        (np.ones(len(ef)), (ef[:, 0], ef[:, 1])), shape=(nf, nf)
    )
    n_comp, raw = connected_components(fgraph, directed=False)
    remap = {}
    labels = np.empty(nf, dtype=np.int64)
    for f in range(nf):
        r = raw[f]
        if r not in remap:
            remap[r] = len(remap)
        labels[f] = remap[r]
    if n_comp == 1:
        warnings.warn("curve does not separate the mesh; a single region")
    return MeshSegmentation(
        labels=labels, cycle=np.asarray(cycle, dtype=np.int64),
        n_regions=n_comp,
    )

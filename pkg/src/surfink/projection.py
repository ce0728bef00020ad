"""Stroke projection operators and the per-stroke driver.

Context-free operators map each mid-air sample independently (rays from the
controller or head, closest point, smooth closest point).  Anchored operators
carry the previous sample and its projection as context: the new sample's
displacement is replayed from the last projected point and the resulting
anchor is mapped to the surface.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .embedding import SurfaceMap
from .mesh import SurfacePoint, TriMesh, closest_point_on_triangles
from .vecmath import quat_rotate, rotation_between, slerp_dir, unit


class Method(str, Enum):
    OCCLUDE = "occlude"
    SPRAYCAN = "spraycan"
    HEAD_CENTRIC = "head"
    SNAP = "snap"
    SCP = "scp"
    HYBRID_RAY = "hybrid"
    MIMICRY = "mimicry"
    MIMICRY_OFFSET = "mimicry-offset"
    MIMICRY_PARALLEL = "mimicry-parallel"
    MIMICRY_PLANAR = "mimicry-planar"
    RAY_LOCAL_PLANE = "ray-localplane"
    RAY_TRANSPORT = "ray-transport"


CONTEXT_FREE = frozenset(
    {Method.OCCLUDE, Method.SPRAYCAN, Method.HEAD_CENTRIC, Method.SNAP,
     Method.SCP}
)
ANCHORED = frozenset(
    {Method.MIMICRY, Method.MIMICRY_OFFSET, Method.MIMICRY_PARALLEL,
     Method.MIMICRY_PLANAR, Method.RAY_LOCAL_PLANE, Method.RAY_TRANSPORT}
)
NEEDS_EMBEDDING = frozenset(
    {Method.SCP, Method.MIMICRY, Method.MIMICRY_OFFSET,
     Method.MIMICRY_PARALLEL}
)


@dataclass
class SystemState:
    """One tracker sample: head and controller poses at time t (seconds)."""

    head_pos: np.ndarray
    head_orient: np.ndarray  # unit quaternion, w first
    ctrl_pos: np.ndarray
    ctrl_orient: np.ndarray
    t: float

    def __post_init__(self):
        self.head_pos = np.asarray(self.head_pos, dtype=np.float64)
        self.ctrl_pos = np.asarray(self.ctrl_pos, dtype=np.float64)
        self.head_orient = np.asarray(self.head_orient, dtype=np.float64)
        self.ctrl_orient = np.asarray(self.ctrl_orient, dtype=np.float64)
        for q in (self.head_orient, self.ctrl_orient):
            if abs(np.linalg.norm(q) - 1.0) > 1e-9:
                raise ValueError("orientation quaternion is not unit length")


@dataclass
class StrokeCursor:
    """Per-stroke context: the last defined projection and stroke sample."""

    q_prev: SurfacePoint | None = None
    p_prev: np.ndarray | None = None
    dp_prev: np.ndarray | None = None
    plane_normal: np.ndarray | None = None
    ray_dir: np.ndarray | None = None
    surf_normal: np.ndarray | None = None
    miss_run: int = 0


@dataclass
class ProjectedCurve:
    method: Method
    points: list = field(default_factory=list)  # SurfacePoint
    source: list = field(default_factory=list)  # sample index per point
    skipped: list = field(default_factory=list)
    times_ms: list = field(default_factory=list)
    flags: list = field(default_factory=list)  # (sample index, reason)

    @property
    def positions(self):
        return np.array([sp.position for sp in self.points]).reshape(-1, 3)

    def __len__(self):
        return len(self.points)


def _nozzle(quat, flip):
    d = quat_rotate(quat, np.array([0.0, 0.0, 1.0]))
    return -d if flip else d


def project_contextfree(method: Method, state: SystemState, mesh: TriMesh,
                        smap: SurfaceMap | None = None, nozzle_flip=False):
    """Single-sample projection; None when a ray misses the mesh."""
    c = state.ctrl_pos
    if method == Method.OCCLUDE:
        hit = mesh.raycast(c, unit(c - state.head_pos))
    elif method == Method.SPRAYCAN:
        hit = mesh.raycast(c, _nozzle(state.ctrl_orient, nozzle_flip))
    elif method == Method.HEAD_CENTRIC:
        hit = mesh.raycast(
            state.head_pos, _nozzle(state.head_orient, nozzle_flip)
        )
    elif method == Method.SNAP:
        return mesh.closest_point(c)
    elif method == Method.SCP:
        return smap.scp(c)
    else:
        raise ValueError("not a context-free method: %s" % method)
    if hit is None:
        return None
    return mesh.surface_point(hit.face, hit.bary)


def hybrid_ray_direction(state: SystemState, last_normal, nozzle_flip=False):
    """Blend of the occlude and spraycan rays, weighted by how well each
    aligns with the last projected surface normal."""
    d_occ = unit(state.ctrl_pos - state.head_pos)
    d_spray = _nozzle(state.ctrl_orient, nozzle_flip)
    w_occ = float(np.clip(np.dot(d_occ, last_normal), 0.0, 1.0))
    w_spray = float(np.clip(np.dot(d_spray, last_normal), 0.0, 1.0))
    if w_occ + w_spray <= 0.0:
        return d_spray
    t = w_spray / (w_occ + w_spray)
    try:
        return slerp_dir(d_occ, d_spray, t)
    except ValueError:  # antipodal rays
        return d_spray


def anchor(cursor: StrokeCursor, p_i) -> np.ndarray:
    """Replay the stroke displacement from the last projected point."""
    return cursor.q_prev.position + (np.asarray(p_i) - cursor.p_prev)


def _distance_gradient(mesh: TriMesh, p):
    """Unit gradient of the unsigned distance field, via the closest point.

    The rejection term in the offset/parallel anchors is even in the
    gradient, so the sign of the signed field does not matter and this form
    also covers open meshes.  None within eps of the surface (non-smooth).
    """
    g = np.asarray(p, dtype=np.float64) - mesh.closest_point(p).position
    n = np.linalg.norm(g)
    if n < 1e-9 * mesh.bbox_diag:
        return None
    return g / n


def mimicry_step(cursor: StrokeCursor, state: SystemState, mesh: TriMesh,
                 smap: SurfaceMap) -> SurfacePoint:
    return smap.scp(anchor(cursor, state.ctrl_pos))


def mimicry_offset_step(cursor, state, mesh, smap):
    """Anchor with the stroke's motion along the distance gradient at p_i
    removed, then smooth closest point."""
    dp = state.ctrl_pos - cursor.p_prev
    g = _distance_gradient(mesh, state.ctrl_pos)
    if g is None:
        return smap.scp(anchor(cursor, state.ctrl_pos)), "offset-degenerate"
    r = cursor.q_prev.position + dp - (dp @ g) * g
    return smap.scp(r), None


def mimicry_parallel_step(cursor, state, mesh, smap):
    """Same rejection as the offset variant, but the gradient is taken at
    the anchor point, tracking a parallel rather than offset surface."""
    dp = state.ctrl_pos - cursor.p_prev
    r0 = anchor(cursor, state.ctrl_pos)
    g = _distance_gradient(mesh, r0)
    if g is None:
        return smap.scp(r0), "parallel-degenerate"
    r = cursor.q_prev.position + dp - (dp @ g) * g
    return smap.scp(r), None


# -- plane / mesh intersection for the locally planar variant ---------------

def _plane_components(mesh: TriMesh, origin, normal):
    """Faces cut by the plane, their cut geometry, and their components.

    Returns (elems, comp) where elems maps face -> list of segments
    ((a, b) endpoints) or the marker "face" for coplanar faces, and comp
    maps face -> component label.
    """
    eps = 1e-9 * mesh.bbox_diag
    s = (mesh.vertices - origin) @ normal
    s = np.where(np.abs(s) < eps, 0.0, s)
    fs = s[mesh.faces]
    cut = ~((fs > 0).all(axis=1) | (fs < 0).all(axis=1))
    cut_ids = np.flatnonzero(cut)
    elems = {}
    for f in cut_ids:
        f = int(f)
        vs = mesh.faces[f]
        sv = s[vs]
        if np.all(sv == 0.0):
            elems[f] = "face"
            continue
        pts = []
        for a, b in ((0, 1), (1, 2), (2, 0)):
            sa, sb = sv[a], sv[b]
            if sa * sb < 0:
                t = sa / (sa - sb)
                pts.append(
                    mesh.vertices[vs[a]]
                    + t * (mesh.vertices[vs[b]] - mesh.vertices[vs[a]])
                )
        for k in range(3):
            if sv[k] == 0.0:
                pts.append(mesh.vertices[vs[k]].copy())
        if not pts:
            continue
        if len(pts) == 1:
            pts = [pts[0], pts[0]]
        elems[f] = (pts[0], pts[1])

    # Union components over shared edges that touch the plane.
    comp = {}
    label = 0
    for f in elems:
        if f in comp:
            continue
        stack = [f]
        comp[f] = label
        while stack:
            g = stack.pop()
            for e in mesh.face_edges[g]:
                va, vb = mesh.edges[e]
                if s[va] * s[vb] > 0:
                    continue
                o1, o2 = mesh.edge_faces[e]
                nb = int(o2 if o1 == g else o1)
                if nb >= 0 and nb in elems and nb not in comp:
                    comp[nb] = label
                    stack.append(nb)
        label += 1
    return elems, comp


def _closest_on_elem(mesh, f, elem, p):
    if elem == "face":
        pt, bary = closest_point_on_triangles(p, mesh.face_corners(f)[None])
        return pt[0], bary[0]
    a, b = elem
    ab = b - a
    den = float(ab @ ab)
    t = 0.0 if den == 0 else float(np.clip((p - a) @ ab / den, 0.0, 1.0))
    x = a + t * ab
    _, bary = closest_point_on_triangles(x, mesh.face_corners(f)[None])
    return x, bary[0]


def mimicry_planar_step(cursor: StrokeCursor, state: SystemState,
                        mesh: TriMesh):
    """Closest point to the anchor on the mesh section through the local
    stroke plane, restricted to the component around the previous point."""
    dp = state.ctrl_pos - cursor.p_prev
    n = None
    if cursor.dp_prev is not None:
        c = np.cross(dp, cursor.dp_prev)
        nc = np.linalg.norm(c)
        if nc > 1e-12:
            n = c / nc
    if n is None:
        n = cursor.plane_normal
    if n is None:
        # Straight stroke so far: no plane to hold, plain anchored SCP
        # semantics degrade to closest point on the whole section ~ mesh.
        r = anchor(cursor, state.ctrl_pos)
        return mesh.closest_point(r), n, "planar-no-normal"
    r = anchor(cursor, state.ctrl_pos)
    elems, comp = _plane_components(mesh, r, n)
    if not elems:
        return cursor.q_prev, n, "planar-no-advance"
    if cursor.q_prev.face in comp:
        want = comp[cursor.q_prev.face]
    else:
        # Nearest component to the previous point, if within one step.
        qp = cursor.q_prev.position
        best = (np.inf, -1)
        for f, elem in elems.items():
            x, _ = _closest_on_elem(mesh, f, elem, qp)
            d = float(np.linalg.norm(x - qp))
            if d < best[0]:
                best = (d, comp[f])
        if best[1] < 0 or best[0] > max(
            float(np.linalg.norm(dp)), 1e-6 * mesh.bbox_diag
        ):
            return cursor.q_prev, n, "planar-no-advance"
        want = best[1]
    best = (np.inf, None, None, None)
    for f, elem in elems.items():
        if comp[f] != want:
            continue
        x, bary = _closest_on_elem(mesh, f, elem, r)
        d = float(np.linalg.norm(x - r))
        if d < best[0] or (d == best[0] and f < best[1]):
            best = (d, f, bary, x)
    return mesh.surface_point(best[1], np.clip(best[2], 0.0, None)), n, None


def _localplane_dir(cursor, dp):
    d = np.cross(dp, np.cross(dp, cursor.p_prev - cursor.q_prev.position))
    n = np.linalg.norm(d)
    if n < 1e-12:
        return cursor.ray_dir
    return d / n


def _transport_dir(cursor, dp):
    d0 = cursor.q_prev.position - cursor.p_prev
    if np.linalg.norm(d0) < 1e-12:
        return cursor.ray_dir
    if cursor.dp_prev is None or np.linalg.norm(cursor.dp_prev) < 1e-12 \
            or np.linalg.norm(dp) < 1e-12:
        return unit(d0)
    try:
        R = rotation_between(cursor.dp_prev, dp)
    except ValueError:
        return unit(d0)
    return unit(R @ d0)


def anchored_raycast_step(variant: Method, cursor: StrokeCursor,
                          state: SystemState, mesh: TriMesh):
    """Bidirectional ray from the anchor; closer hit wins; None on miss."""
    dp = state.ctrl_pos - cursor.p_prev
    if variant == Method.RAY_LOCAL_PLANE:
        d = _localplane_dir(cursor, dp)
    else:
        d = _transport_dir(cursor, dp)
    if d is None:
        return None, None
    r = anchor(cursor, state.ctrl_pos)
    fwd = mesh.raycast(r, d)
    back = mesh.raycast(r, -d)
    hit = None
    if fwd is not None and (back is None or fwd.t <= back.t):
        hit = fwd
    elif back is not None:
        hit = back
    if hit is None:
        return None, d
    return mesh.surface_point(hit.face, hit.bary), d


class StrokeProjector:
    """Incremental per-stroke driver; one instance per stroke.

    feed() consumes samples in time order and returns the projection of each
    (or None when skipped), so that streaming and batch use are bitwise
    identical.
    """

    def __init__(self, mesh: TriMesh, method: Method,
                 smap: SurfaceMap | None = None, nozzle_flip: bool = False,
                 fixed_q0: SurfacePoint | None = None):
        method = Method(method)
        if method in NEEDS_EMBEDDING and smap is None:
            raise ValueError("%s requires a surface map" % method.value)
        self.mesh = mesh
        self.method = method
        self.smap = smap
        self.nozzle_flip = nozzle_flip
        self.fixed_q0 = fixed_q0
        self.cursor = StrokeCursor()
        self.curve = ProjectedCurve(method=method)
        self._i = 0
        self._last_t = None
        self._boot_count = 2 if method == Method.MIMICRY_PLANAR else 1

    def _bootstrap(self, state):
        """First projections of an anchored stroke come from the spray ray."""
        if self.fixed_q0 is not None and self._i == 0:
            return self.fixed_q0, None
        q = project_contextfree(
            Method.SPRAYCAN, state, self.mesh, nozzle_flip=self.nozzle_flip
        )
        if q is None:
            return self.mesh.closest_point(state.ctrl_pos), "bootstrap-snap"
        return q, None

    def _step(self, state):
        m = self.method
        cur = self.cursor
        if m in CONTEXT_FREE:
            q = project_contextfree(
                m, state, self.mesh, self.smap, self.nozzle_flip
            )
            return q, None
        if m == Method.HYBRID_RAY:
            if cur.surf_normal is None:
                d = _nozzle(state.ctrl_orient, self.nozzle_flip)
            else:
                d = hybrid_ray_direction(
                    state, cur.surf_normal, self.nozzle_flip
                )
            hit = self.mesh.raycast(state.ctrl_pos, d)
            if hit is None:
                return None, None
            return self.mesh.surface_point(hit.face, hit.bary), None
        # Anchored methods.
        if cur.q_prev is None or (m == Method.MIMICRY_PLANAR
                                  and self._defined < self._boot_count):
            return self._bootstrap(state)
        if m == Method.MIMICRY:
            return mimicry_step(cur, state, self.mesh, self.smap), None
        if m == Method.MIMICRY_OFFSET:
            return mimicry_offset_step(cur, state, self.mesh, self.smap)
        if m == Method.MIMICRY_PARALLEL:
            return mimicry_parallel_step(cur, state, self.mesh, self.smap)
        if m == Method.MIMICRY_PLANAR:
            q, n, flag = mimicry_planar_step(cur, state, self.mesh)
            if n is not None:
                cur.plane_normal = n
            return q, flag
        q, d = anchored_raycast_step(m, cur, state, self.mesh)
        if d is not None:
            cur.ray_dir = d
        return q, None

    @property
    def _defined(self):
        return len(self.curve.points)

    def feed(self, state: SystemState):
        """Project one sample; returns the SurfacePoint or None (skipped)."""
        if self._last_t is not None and state.t <= self._last_t:
            raise ValueError("sample timestamps must strictly increase")
        self._last_t = state.t
        i = self._i
        t0 = time.perf_counter()
        q, flag = self._step(state)
        dt_ms = (time.perf_counter() - t0) * 1e3
        cur = self.cursor
        if q is None:
            self.curve.skipped.append(i)
            cur.miss_run += 1
        else:
            self.curve.points.append(q)
            self.curve.source.append(i)
            self.curve.times_ms.append(dt_ms)
            if cur.p_prev is not None:
                cur.dp_prev = state.ctrl_pos - cur.p_prev
            cur.q_prev = q
            cur.p_prev = state.ctrl_pos
            cur.surf_normal = self.mesh.point_normal(q)
            cur.miss_run = 0
        if flag:
            self.curve.flags.append((i, flag))
        self._i += 1
        return q

    def finish(self) -> ProjectedCurve:
        return self.curve


def project_stroke(samples, method: Method, mesh: TriMesh,
                   smap: SurfaceMap | None = None, nozzle_flip: bool = False,
                   fixed_q0: SurfacePoint | None = None) -> ProjectedCurve:
    """Project a whole stroke; equivalent to feeding a StrokeProjector."""
    proj = StrokeProjector(mesh, method, smap, nozzle_flip, fixed_q0)
    for s in samples:
        proj.feed(s)
    return proj.finish()

"""Triangle mesh core: loading, closest-point, raycast, signed distance.

Queries are deterministic: ties between faces are always broken toward the
lowest face id, so accelerated queries match exhaustive scans bit for bit.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .vecmath import unit

__all__ = [
    "MeshError",
    "MeshParseError",
    "MeshTopologyError",
    "AmbiguousWindingError",
    "DegenerateGradientError",
    "SurfacePoint",
    "RayHit",
    "TriMesh",
    "load_obj",
    "closest_point_on_triangles",
]


class MeshError(Exception):
    pass


class MeshParseError(MeshError):
    def __init__(self, msg, line=None):
        self.line = line
        super().__init__(msg if line is None else f"line {line}: {msg}")


class MeshTopologyError(MeshError):
    def __init__(self, msg, line=None):
        self.line = line
        super().__init__(msg if line is None else f"line {line}: {msg}")


class AmbiguousWindingError(MeshError):
    """Winding number too far from an integer to decide inside/outside."""

    def __init__(self, winding):
        self.winding = float(winding)
        super().__init__(
            f"winding number {self.winding:.6f} is ambiguous; "
            "cannot sign the distance"
        )


class DegenerateGradientError(MeshError):
    """Signed-distance gradient vanished (medial axis or similar)."""


@dataclass(frozen=True)
class SurfacePoint:
    """A point bound to the surface: face id + barycentric weights.

    Weights may dip to -1e-9 from clamping; they always sum to 1 within
    1e-9 and `position` is the matching combination of face corners.
    """

    face: int
    bary: np.ndarray
    position: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.bary, dtype=np.float64)
        if b.shape != (3,):
            raise ValueError("bary must have shape (3,)")
        if b.min() < -1e-9 or abs(b.sum() - 1.0) > 1e-9:
            raise ValueError(f"invalid barycentric weights {b}")
        object.__setattr__(self, "bary", b)
        object.__setattr__(
            self, "position", np.asarray(self.position, dtype=np.float64)
        )


@dataclass(frozen=True)
class RayHit:
    face: int
    t: float
    position: np.ndarray
    bary: np.ndarray


# ---------------------------------------------------------------------------
# Closest point on triangles (Ericson, Real-Time Collision Detection 5.1.5),
# vectorized over a batch of triangles with progressive region masks.
# ---------------------------------------------------------------------------

def closest_point_on_triangles(p, tri):
    """Closest point to `p` on each triangle of `tri` ((k,3,3) corners).

    Returns (points (k,3), bary (k,3)). Pure dot-product formulation, so it
    also works for corners embedded in R^d (tri of shape (k,3,d)).
    """
    p = np.asarray(p, dtype=np.float64)
    tri = np.asarray(tri, dtype=np.float64)
    a, b, c = tri[:, 0], tri[:, 1], tri[:, 2]
    ab = b - a
    ac = c - a
    ap = p - a
    d1 = np.einsum("ij,ij->i", ab, ap)
    d2 = np.einsum("ij,ij->i", ac, ap)
    bp = p - b
    d3 = np.einsum("ij,ij->i", ab, bp)
    d4 = np.einsum("ij,ij->i", ac, bp)
    cp = p - c
    d5 = np.einsum("ij,ij->i", ab, cp)
    d6 = np.einsum("ij,ij->i", ac, cp)

    k = tri.shape[0]
    bary = np.zeros((k, 3))
    done = np.zeros(k, dtype=bool)

    # Vertex regions.
    m = (d1 <= 0.0) & (d2 <= 0.0)
    bary[m, 0] = 1.0
    done |= m
    m = ~done & (d3 >= 0.0) & (d4 <= d3)
    bary[m, 1] = 1.0
    done |= m
    m = ~done & (d6 >= 0.0) & (d5 <= d6)
    bary[m, 2] = 1.0
    done |= m

    # Edge regions. Guard divisions with np.where to keep the math finite.
    vc = d1 * d4 - d3 * d2
    m = ~done & (vc <= 0.0) & (d1 >= 0.0) & (d3 <= 0.0)
    v = d1 / np.where(d1 - d3 == 0.0, 1.0, d1 - d3)
    bary[m, 0] = 1.0 - v[m]
    bary[m, 1] = v[m]
    done |= m

    vb = d5 * d2 - d1 * d6
    m = ~done & (vb <= 0.0) & (d2 >= 0.0) & (d6 <= 0.0)
    w = d2 / np.where(d2 - d6 == 0.0, 1.0, d2 - d6)
    bary[m, 0] = 1.0 - w[m]
    bary[m, 2] = w[m]
    done |= m

    va = d3 * d6 - d5 * d4
    m = ~done & (va <= 0.0) & (d4 - d3 >= 0.0) & (d5 - d6 >= 0.0)
    denom = (d4 - d3) + (d5 - d6)
    w = (d4 - d3) / np.where(denom == 0.0, 1.0, denom)
    bary[m, 1] = 1.0 - w[m]
    bary[m, 2] = w[m]
    done |= m

    # Interior.
    m = ~done
    if m.any():
        s = va + vb + vc
        s = np.where(s == 0.0, 1.0, s)
        v = vb / s
        w = vc / s
        bary[m, 0] = 1.0 - v[m] - w[m]
        bary[m, 1] = v[m]
        bary[m, 2] = w[m]

    pts = np.einsum("ki,kij->kj", bary, tri)
    return pts, bary


# ---------------------------------------------------------------------------
# AABB tree (median split). Flat arrays so traversal loops stay simple.
# ---------------------------------------------------------------------------

class AabbTree:
    """Binary AABB tree over a set of boxes, median-split on the long axis."""

    LEAF = 8

    def __init__(self, lo, hi):
        n = lo.shape[0]
        self.prim_lo = lo
        self.prim_hi = hi
        cent = 0.5 * (lo + hi)
        order = np.arange(n)
        # Worst case 2n nodes for leaves of size 1.
        cap = max(1, 2 * n)
        self.node_lo = np.empty((cap, 3))
        self.node_hi = np.empty((cap, 3))
        self.child = np.full((cap, 2), -1, dtype=np.int64)  # (left, right)
        self.span = np.zeros((cap, 2), dtype=np.int64)  # (start, count)
        self.n_nodes = 0
        stack = [(0, n, self._alloc())]
        while stack:
            start, end, ni = stack.pop()
            ids = order[start:end]
            self.node_lo[ni] = lo[ids].min(axis=0)
            self.node_hi[ni] = hi[ids].max(axis=0)
            if end - start <= self.LEAF:
                self.span[ni] = (start, end - start)
                continue
            cl = cent[ids]
            axis = int(np.argmax(cl.max(axis=0) - cl.min(axis=0)))
            loc = np.argsort(cl[:, axis], kind="stable")
            order[start:end] = ids[loc]
            mid = start + (end - start) // 2
            li, ri = self._alloc(), self._alloc()
            self.child[ni] = (li, ri)
            stack.append((start, mid, li))
            stack.append((mid, end, ri))
        self.order = order

    def _alloc(self):
        ni = self.n_nodes
        self.n_nodes += 1
        return ni

    def leaf_prims(self, ni):
        s, c = self.span[ni]
        return self.order[s : s + c]

    def box_dist2(self, ni, p):
        d = np.maximum(self.node_lo[ni] - p, 0.0) + np.maximum(
            p - self.node_hi[ni], 0.0
        )
        return float(d @ d)

    def containing(self, p):
        """Ids of primitives whose boxes contain p (inclusive bounds)."""
        out = []
        stack = [0]
        while stack:
            ni = stack.pop()
            if np.any(p < self.node_lo[ni]) or np.any(p > self.node_hi[ni]):
                continue
            li, ri = self.child[ni]
            if li < 0:
                ids = self.leaf_prims(ni)
                inside = np.all(
                    (self.prim_lo[ids] <= p) & (p <= self.prim_hi[ids]), axis=1
                )
                out.extend(ids[inside].tolist())
            else:
                stack.append(li)
                stack.append(ri)
        return np.array(sorted(out), dtype=np.int64)

    def ray_box(self, ni, o, inv_d):
        """Slab test; returns (tmin, tmax) of box interval, may be empty.

        Parallel axes are handled explicitly (inclusive bounds), so rays
        grazing a box face are never pruned.
        """
        lo = self.node_lo[ni]
        hi = self.node_hi[ni]
        tmin, tmax = 0.0, np.inf
        for k in range(3):
            iv = inv_d[k]
            if -np.inf < iv < np.inf:
                t0 = (lo[k] - o[k]) * iv
                t1 = (hi[k] - o[k]) * iv
                if t0 > t1:
                    t0, t1 = t1, t0
                if t0 > tmin:
                    tmin = t0
                if t1 < tmax:
                    tmax = t1
            elif o[k] < lo[k] or o[k] > hi[k]:
                return 1.0, 0.0
        return tmin, tmax


# ---------------------------------------------------------------------------
# TriMesh
# ---------------------------------------------------------------------------

class TriMesh:
    """Manifold triangle soup with adjacency and accelerated queries.

    Construction validates: at least one face, no degenerate faces, no
    out-of-range indices, every edge shared by at most two faces.
    """

    def __init__(self, vertices, faces, face_lines=None):
        self.vertices = np.ascontiguousarray(vertices, dtype=np.float64)
        self.faces = np.ascontiguousarray(faces, dtype=np.int64)
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 3:
            raise MeshTopologyError("vertices must have shape (n, 3)")
        if self.faces.ndim != 2 or self.faces.shape[1] != 3:
            raise MeshTopologyError("faces must have shape (m, 3)")
        if len(self.faces) == 0:
            raise MeshTopologyError("mesh has no faces")
        self._face_lines = face_lines
        self._validate_indices()
        self._build_geometry()
        self._build_topology()
        self._tree = None

    # -- validation / construction ---------------------------------------

    def _line_of(self, f):
        if self._face_lines is None:
            return None
        return self._face_lines[f]

    def _validate_indices(self):
        n = len(self.vertices)
        bad = np.nonzero((self.faces < 0) | (self.faces >= n))[0]
        if len(bad):
            f = int(bad[0])
            raise MeshParseError(
                f"face {f} references vertex {self.faces[f].max()} "
                f"outside 1..{n}",
                self._line_of(f),
            )
        same = (
            (self.faces[:, 0] == self.faces[:, 1])
            | (self.faces[:, 1] == self.faces[:, 2])
            | (self.faces[:, 0] == self.faces[:, 2])
        )
        bad = np.nonzero(same)[0]
        if len(bad):
            f = int(bad[0])
            raise MeshTopologyError(
                f"face {f} repeats a vertex", self._line_of(f)
            )

    def _build_geometry(self):
        v = self.vertices[self.faces]
        cr = np.cross(v[:, 1] - v[:, 0], v[:, 2] - v[:, 0])
        nrm = np.linalg.norm(cr, axis=1)
        self.face_areas = 0.5 * nrm
        scale = max(self.vertices.max() - self.vertices.min(), 1.0)
        bad = np.nonzero(nrm <= 1e-14 * scale * scale)[0]
        if len(bad):
            f = int(bad[0])
            raise MeshTopologyError(
                f"face {f} is degenerate (zero area)", self._line_of(f)
            )
        self.face_normals = cr / nrm[:, None]
        self.bbox_lo = self.vertices.min(axis=0)
        self.bbox_hi = self.vertices.max(axis=0)
        self.bbox_diag = float(np.linalg.norm(self.bbox_hi - self.bbox_lo))

        # Angle-weighted vertex normals.
        vn = np.zeros_like(self.vertices)
        for k in range(3):
            e1 = v[:, (k + 1) % 3] - v[:, k]
            e2 = v[:, (k + 2) % 3] - v[:, k]
            cosang = np.einsum("ij,ij->i", e1, e2) / (
                np.linalg.norm(e1, axis=1) * np.linalg.norm(e2, axis=1)
            )
            ang = np.arccos(np.clip(cosang, -1.0, 1.0))
            np.add.at(vn, self.faces[:, k], ang[:, None] * self.face_normals)
        ln = np.linalg.norm(vn, axis=1)
        nz = ln > 1e-300
        vn[nz] /= ln[nz, None]
        self.vertex_normals = vn

    def _build_topology(self):
        m = len(self.faces)
        raw = self.faces[:, [[0, 1], [1, 2], [2, 0]]].reshape(-1, 2)
        raw_sorted = np.sort(raw, axis=1)
        self.edges, inv, counts = np.unique(
            raw_sorted, axis=0, return_inverse=True, return_counts=True
        )
        bad = np.nonzero(counts > 2)[0]
        if len(bad):
            e = int(bad[0])
            # Third face that touches this edge, for the error message.
            hits = np.nonzero(inv.reshape(m, 3) == e)[0]
            f = int(hits[2]) if len(hits) > 2 else int(hits[-1])
            raise MeshTopologyError(
                f"edge {tuple(self.edges[e])} shared by {counts[e]} faces "
                f"(face {f})",
                self._line_of(f),
            )
        self.face_edges = inv.reshape(m, 3)
        ef = np.full((len(self.edges), 2), -1, dtype=np.int64)
        for f in range(m):
            for e in self.face_edges[f]:
                ef[e, 0 if ef[e, 0] < 0 else 1] = f
        self.edge_faces = ef

        # Vertex -> faces adjacency in CSR form.
        vf_counts = np.bincount(self.faces.ravel(), minlength=len(self.vertices))
        self.vf_ptr = np.concatenate([[0], np.cumsum(vf_counts)])
        self.vf_ind = np.empty(3 * m, dtype=np.int64)
        cursor = self.vf_ptr[:-1].copy()
        for f in range(m):
            for vv in self.faces[f]:
                self.vf_ind[cursor[vv]] = f
                cursor[vv] += 1

    # -- small accessors --------------------------------------------------

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_faces(self):
        return len(self.faces)

    def face_corners(self, f):
        return self.vertices[self.faces[f]]

    def vertex_faces(self, v):
        return self.vf_ind[self.vf_ptr[v] : self.vf_ptr[v + 1]]

    def surface_point(self, face, bary):
        bary = np.asarray(bary, dtype=np.float64)
        pos = bary @ self.face_corners(int(face))
        return SurfacePoint(int(face), bary, pos)

    def vertex_surface_point(self, v):
        f = int(self.vertex_faces(v)[0])
        bary = (self.faces[f] == v).astype(np.float64)
        return SurfacePoint(f, bary, self.vertices[v].copy())

    def point_normal(self, sp: SurfacePoint):
        """Barycentric blend of vertex normals at a surface point (unit)."""
        n = sp.bary @ self.vertex_normals[self.faces[sp.face]]
        return unit(n)

    def normal_distance(self, va, vb):
        """Angle between unit vertex normals (Gauss map distance)."""
        d = float(np.dot(self.vertex_normals[va], self.vertex_normals[vb]))
        return float(np.arccos(np.clip(d, -1.0, 1.0)))

    def gaussian_curvature(self):
        """Per-vertex angle deficit over one third of incident face area."""
        v = self.vertices[self.faces]
        deficit = np.full(len(self.vertices), 2.0 * np.pi)
        area = np.zeros(len(self.vertices))
        boundary = np.zeros(len(self.vertices), dtype=bool)
        be = self.edges[self.edge_faces[:, 1] < 0]
        boundary[be.ravel()] = True
        deficit[boundary] = np.pi
        for k in range(3):
            e1 = v[:, (k + 1) % 3] - v[:, k]
            e2 = v[:, (k + 2) % 3] - v[:, k]
            cosang = np.einsum("ij,ij->i", e1, e2) / (
                np.linalg.norm(e1, axis=1) * np.linalg.norm(e2, axis=1)
            )
            np.subtract.at(
                deficit, self.faces[:, k], np.arccos(np.clip(cosang, -1, 1))
            )
            np.add.at(area, self.faces[:, k], self.face_areas / 3.0)
        area[area == 0.0] = 1.0
        return deficit / area

    # -- closest point -----------------------------------------------------

    def _get_tree(self):
        if self._tree is None:
            v = self.vertices[self.faces]
            self._tree = AabbTree(v.min(axis=1), v.max(axis=1))
        return self._tree

    def closest_point(self, p) -> SurfacePoint:
        """Globally closest surface point; ties -> lowest face id."""
        p = np.asarray(p, dtype=np.float64)
        tree = self._get_tree()
        best_d2 = np.inf
        best = None  # (fid, point, bary)
        # Best-first traversal; equal lower bounds are still visited so the
        # lowest-face-id tie rule matches a full scan exactly.
        import heapq

        heap = [(tree.box_dist2(0, p), 0)]
        while heap:
            lb, ni = heapq.heappop(heap)
            if lb > best_d2:
                continue
            li, ri = tree.child[ni]
            if li < 0:
                ids = tree.leaf_prims(ni)
                tri = self.vertices[self.faces[ids]]
                pts, bary = closest_point_on_triangles(p, tri)
                d2 = np.einsum("ij,ij->i", pts - p, pts - p)
                for j in np.argsort(ids, kind="stable"):
                    fid = int(ids[j])
                    if d2[j] < best_d2 or (
                        d2[j] == best_d2 and (best is None or fid < best[0])
                    ):
                        best_d2 = d2[j]
                        best = (fid, pts[j], bary[j])
            else:
                heapq.heappush(heap, (tree.box_dist2(li, p), li))
                heapq.heappush(heap, (tree.box_dist2(ri, p), ri))
        fid, pt, bary = best
        return SurfacePoint(fid, np.clip(bary, 0.0, None), pt)

    # -- raycast -----------------------------------------------------------

    @staticmethod
    def _ray_frame(d):
        kz = int(np.argmax(np.abs(d)))
        kx = (kz + 1) % 3
        ky = (kz + 2) % 3
        if d[kz] < 0.0:
            kx, ky = ky, kx
        sz = 1.0 / d[kz]
        return kx, ky, kz, d[kx] * sz, d[ky] * sz, sz

    def _ray_tris(self, o, d, frame, ids):
        """Watertight ray/triangle test (Woop et al. 2013) over faces ids.

        Returns (hit mask, t, bary). Shared edges cannot be missed: the
        edge functions are evaluated identically for both incident faces.
        """
        kx, ky, kz, sx, sy, sz = frame
        v = self.vertices[self.faces[ids]] - o
        ax = v[:, :, kx] - sx * v[:, :, kz]
        ay = v[:, :, ky] - sy * v[:, :, kz]
        az = sz * v[:, :, kz]
        a_x, b_x, c_x = ax[:, 0], ax[:, 1], ax[:, 2]
        a_y, b_y, c_y = ay[:, 0], ay[:, 1], ay[:, 2]
        u = c_x * b_y - c_y * b_x
        v_ = a_x * c_y - a_y * c_x
        w = b_x * a_y - b_y * a_x
        same_sign = ((u >= 0) & (v_ >= 0) & (w >= 0)) | (
            (u <= 0) & (v_ <= 0) & (w <= 0)
        )
        det = u + v_ + w
        ok = same_sign & (det != 0.0)
        t = np.full(len(ids), np.inf)
        bary = np.zeros((len(ids), 3))
        if ok.any():
            tt = (
                u[ok] * az[ok, 0] + v_[ok] * az[ok, 1] + w[ok] * az[ok, 2]
            ) / det[ok]
            sel = np.nonzero(ok)[0][tt >= 0.0]
            t[sel] = tt[tt >= 0.0]
            bary[sel, 0] = u[sel] / det[sel]
            bary[sel, 1] = v_[sel] / det[sel]
            bary[sel, 2] = w[sel] / det[sel]
        return t, bary

    def raycast(self, origin, direction):
        """Nearest intersection with t >= 0, or None. Ties -> lowest face."""
        o = np.asarray(origin, dtype=np.float64)
        d = np.asarray(direction, dtype=np.float64)
        n = np.linalg.norm(d)
        if n < 1e-15:
            raise ValueError("raycast direction must be nonzero")
        d = d / n
        frame = self._ray_frame(d)
        tree = self._get_tree()
        with np.errstate(divide="ignore"):
            inv_d = 1.0 / d
        best_t = np.inf
        best = None
        stack = [0]
        while stack:
            ni = stack.pop()
            tmin, tmax = tree.ray_box(ni, o, inv_d)
            if tmin > tmax or tmin > best_t:
                continue
            li, ri = tree.child[ni]
            if li < 0:
                ids = tree.leaf_prims(ni)
                t, bary = self._ray_tris(o, d, frame, ids)
                for j in np.argsort(ids, kind="stable"):
                    fid = int(ids[j])
                    if t[j] < best_t or (
                        t[j] == best_t
                        and np.isfinite(t[j])
                        and (best is None or fid < best[0])
                    ):
                        best_t = t[j]
                        best = (fid, bary[j])
            else:
                stack.append(li)
                stack.append(ri)
        if best is None or not np.isfinite(best_t):
            return None
        fid, bary = best
        bary = np.clip(bary, 0.0, None)
        bary = bary / bary.sum()
        return RayHit(fid, float(best_t), bary @ self.face_corners(fid), bary)

    # -- winding number / signed distance ----------------------------------

    def winding_number(self, p):
        """Generalized winding number via summed signed solid angles."""
        p = np.asarray(p, dtype=np.float64)
        v = self.vertices[self.faces] - p
        a, b, c = v[:, 0], v[:, 1], v[:, 2]
        la = np.linalg.norm(a, axis=1)
        lb = np.linalg.norm(b, axis=1)
        lc = np.linalg.norm(c, axis=1)
        det = np.einsum("ij,ij->i", a, np.cross(b, c))
        denom = (
            la * lb * lc
            + np.einsum("ij,ij->i", a, b) * lc
            + np.einsum("ij,ij->i", b, c) * la
            + np.einsum("ij,ij->i", c, a) * lb
        )
        return float(np.sum(2.0 * np.arctan2(det, denom)) / (4.0 * np.pi))

    def signed_distance(self, p):
        """Distance to the surface, negative when the winding says inside."""
        p = np.asarray(p, dtype=np.float64)
        w = self.winding_number(p)
        r = round(w)
        if abs(w - r) >= 0.3:
            raise AmbiguousWindingError(w)
        d = float(np.linalg.norm(self.closest_point(p).position - p))
        return -d if r % 2 else d

    def sd_gradient(self, p):
        """Unit gradient of signed distance by central differences."""
        p = np.asarray(p, dtype=np.float64)
        h = 1e-4 * self.bbox_diag
        g = np.empty(3)
        for k in range(3):
            e = np.zeros(3)
            e[k] = h
            g[k] = (self.signed_distance(p + e) - self.signed_distance(p - e)) / (
                2.0 * h
            )
        n = np.linalg.norm(g)
        if n < 1e-6:
            raise DegenerateGradientError(
                f"signed-distance gradient vanished at {p} (|g|={n:.2e})"
            )
        return g / n


# ---------------------------------------------------------------------------
# OBJ loading (ASCII subset: v / f records).
# ---------------------------------------------------------------------------

def load_obj(path) -> TriMesh:
    """Load an ASCII OBJ. Only v/f records are used; others warn once.

    Faces must be triangles with 1-based indices (negative = relative).
    Topology problems are reported with the offending line number.
    """
    verts = []
    faces = []
    face_lines = []
    ignored = set()
    with open(path, "r", encoding="utf-8") as fh:
        for ln, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            tok = line.split()
            key = tok[0]
            if key == "v":
                if len(tok) < 4:
                    raise MeshParseError("vertex needs 3 coordinates", ln)
                try:
                    verts.append([float(x) for x in tok[1:4]])
                except ValueError as exc:
                    raise MeshParseError(f"bad vertex number: {exc}", ln)
            elif key == "f":
                refs = tok[1:]
                if len(refs) != 3:
                    raise MeshParseError(
                        f"face has {len(refs)} vertices; only triangles "
                        "are supported",
                        ln,
                    )
                idx = []
                for r in refs:
                    s = r.split("/")[0]
                    try:
                        i = int(s)
                    except ValueError:
                        raise MeshParseError(f"bad face index {r!r}", ln)
                    if i == 0:
                        raise MeshParseError("face index 0 is invalid", ln)
                    i = i - 1 if i > 0 else len(verts) + i
                    if i < 0 or i >= len(verts):
                        raise MeshParseError(
                            f"face index {s} out of range 1..{len(verts)}", ln
                        )
                    idx.append(i)
                faces.append(idx)
                face_lines.append(ln)
            else:
                ignored.add(key)
    if ignored:
        warnings.warn(
            f"{path}: ignored OBJ records {sorted(ignored)}", stacklevel=2
        )
    if not faces:
        raise MeshParseError(f"{path}: no faces found")
    return TriMesh(
        np.array(verts, dtype=np.float64),
        np.array(faces, dtype=np.int64),
        face_lines=face_lines,
    )


def save_obj(mesh: TriMesh, path):
    """Write an ASCII OBJ with full float64 round-trip precision."""
    with open(path, "w", encoding="utf-8") as fh:
        for v in mesh.vertices:
            fh.write(f"v {v[0]:.17g} {v[1]:.17g} {v[2]:.17g}\n")
        for f in mesh.faces:
            fh.write(f"f {f[0] + 1} {f[1] + 1} {f[2] + 1}\n")

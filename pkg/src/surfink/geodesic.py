"""On-surface distances and paths.

Distances come from Dijkstra over the vertex graph augmented with one
Steiner node per edge midpoint (all 15 node pairs of each face are arcs).
Point-to-point paths are straightened: the Dijkstra face strip is unfolded
isometrically into the plane, a funnel pass finds the taut path inside the
strip, and path points pinned at mesh vertices are rerouted around the
cheaper side of the vertex until the path is locally shortest.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra as _sp_dijkstra

from .mesh import MeshError, SurfacePoint, TriMesh

__all__ = ["GeodesicSolver", "SurfacePath"]


@dataclass
class SurfacePath:
    """Polyline on the surface. Segment i runs points[i] -> points[i+1]
    inside face seg_faces[i]; interior points sit on mesh edges
    (point_edges[i] >= 0) or strictly inside a face (-1)."""

    points: np.ndarray  # (k, 3)
    seg_faces: np.ndarray  # (k-1,)
    point_edges: np.ndarray  # (k,)

    @property
    def length(self):
        if len(self.points) < 2:
            return 0.0
        return float(
            np.sum(np.linalg.norm(np.diff(self.points, axis=0), axis=1))
        )

    def surface_points(self, mesh: TriMesh):
        """Each path point as a SurfacePoint, bound to the face of the
        segment that follows it (last point: the segment before)."""
        out = []
        k = len(self.points)
        for i in range(k):
            f = int(self.seg_faces[min(i, k - 2)])
            out.append(bary_in_face(mesh, f, self.points[i]))
        return out


def bary_in_face(mesh, f, p):
    """Clamped barycentric coordinates of p in face f, as a SurfacePoint."""
    a, b, c = mesh.face_corners(f)
    n = np.cross(b - a, c - a)
    nn = float(n @ n)
    w = np.empty(3)
    w[0] = float(np.cross(b - p, c - p) @ n) / nn
    w[1] = float(np.cross(c - p, a - p) @ n) / nn
    w[2] = 1.0 - w[0] - w[1]
    w = np.clip(w, 0.0, None)
    w = w / w.sum()
    return SurfacePoint(f, w, w @ mesh.face_corners(f))


def _cross2(u, v):
    return u[0] * v[1] - u[1] * v[0]


def _tri_area2(a, b, c):
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _reached(apex, bound, p, side):
    """Has p reached the funnel boundary ray apex->bound? side is +1 for
    the left boundary, -1 for the right. Collinear-but-behind-the-apex
    points have not reached it (the ray only extends forward)."""
    ar = side * _tri_area2(apex, bound, p)
    if ar < 0.0:
        return False
    if ar == 0.0 and float(
        (p[0] - apex[0]) * (bound[0] - apex[0])
        + (p[1] - apex[1]) * (bound[1] - apex[1])
    ) <= 0.0:
        return False
    return True


class GeodesicSolver:
    """Per-mesh geodesic machinery; build once, query many times."""

    def __init__(self, mesh: TriMesh):
        self.mesh = mesh
        nv = mesh.n_vertices
        ne = len(mesh.edges)
        self.nv = nv
        self.n_nodes = nv + ne
        mids = 0.5 * (
            mesh.vertices[mesh.edges[:, 0]] + mesh.vertices[mesh.edges[:, 1]]
        )
        self.node_pos = np.vstack([mesh.vertices, mids])

        f = mesh.faces
        fe = mesh.face_edges + nv
        pairs = np.concatenate(
            [
                f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]],
                np.stack([f[:, 0], fe[:, 0]], axis=1),
                np.stack([f[:, 1], fe[:, 0]], axis=1),
                np.stack([f[:, 1], fe[:, 1]], axis=1),
                np.stack([f[:, 2], fe[:, 1]], axis=1),
                np.stack([f[:, 2], fe[:, 2]], axis=1),
                np.stack([f[:, 0], fe[:, 2]], axis=1),
                np.stack([f[:, 0], fe[:, 1]], axis=1),
                np.stack([f[:, 1], fe[:, 2]], axis=1),
                np.stack([f[:, 2], fe[:, 0]], axis=1),
                fe[:, [0, 1]], fe[:, [1, 2]], fe[:, [2, 0]],
            ]
        )
        pairs = np.unique(np.sort(pairs, axis=1), axis=0)
        w = np.linalg.norm(
            self.node_pos[pairs[:, 0]] - self.node_pos[pairs[:, 1]], axis=1
        )
        n = self.n_nodes
        self.graph = coo_matrix(
            (
                np.concatenate([w, w]),
                (
                    np.concatenate([pairs[:, 0], pairs[:, 1]]),
                    np.concatenate([pairs[:, 1], pairs[:, 0]]),
                ),
            ),
            shape=(n, n),
        ).tocsr()
        self.adj_ptr = self.graph.indptr
        self.adj_ind = self.graph.indices
        self.adj_w = self.graph.data

    # -- distance fields ---------------------------------------------------

    def vertex_distance_field(self, sources):
        """Graph distance from source vertex ids to every vertex."""
        sources = np.atleast_1d(np.asarray(sources, dtype=np.int64))
        d = _sp_dijkstra(self.graph, directed=False, indices=sources)
        d = d.min(axis=0) if d.ndim == 2 else d
        return d[: self.nv]

    def pairwise_vertex_distances(self, ids):
        """Dense graph distances between the given vertex ids."""
        ids = np.asarray(ids, dtype=np.int64)
        d = _sp_dijkstra(self.graph, directed=False, indices=ids)[:, ids]
        return 0.5 * (d + d.T)

    # -- Dijkstra between arbitrary surface points --------------------------

    def _face_nodes(self, f):
        return np.concatenate(
            [self.mesh.faces[f], self.mesh.face_edges[f] + self.nv]
        )

    def _dijkstra_nodes(self, a: SurfacePoint, b: SurfacePoint):
        """Node path between the faces of a and b; early exit at b."""
        apos, bpos = a.position, b.position
        targets = {
            int(n): float(np.linalg.norm(self.node_pos[n] - bpos))
            for n in self._face_nodes(b.face)
        }
        dist = {}
        prev = {}
        heap = []
        for n in self._face_nodes(a.face):
            n = int(n)
            d = float(np.linalg.norm(self.node_pos[n] - apos))
            heapq.heappush(heap, (d, n, -1))
        best_total = np.inf
        best_node = -1
        while heap:
            d, n, pn = heapq.heappop(heap)
            if n in dist:
                continue
            dist[n] = d
            prev[n] = pn
            if d >= best_total:
                break
            if n in targets and d + targets[n] < best_total:
                best_total = d + targets[n]
                best_node = n
            for j in range(self.adj_ptr[n], self.adj_ptr[n + 1]):
                m = int(self.adj_ind[j])
                if m not in dist:
                    heapq.heappush(heap, (d + float(self.adj_w[j]), m, n))
        if best_node < 0:
            raise MeshError("no on-surface path between query points")
        path = []
        n = best_node
        while n != -1:
            path.append(n)
            n = prev[n]
        return path[::-1]

    # -- face strip construction --------------------------------------------

    def _node_faces(self, n):
        if n < self.nv:
            return [int(x) for x in self.mesh.vertex_faces(n)]
        return [int(x) for x in self.mesh.edge_faces[n - self.nv] if x >= 0]

    def _shared_edge(self, f, g):
        s = set(self.mesh.face_edges[f]) & set(self.mesh.face_edges[g])
        return min(s) if s else -1

    def _corner_angle(self, f, v):
        idx = list(self.mesh.faces[f]).index(v)
        a = self.mesh.face_corners(f)
        e1 = a[(idx + 1) % 3] - a[idx]
        e2 = a[(idx + 2) % 3] - a[idx]
        c = float(e1 @ e2) / (np.linalg.norm(e1) * np.linalg.norm(e2))
        return float(np.arccos(np.clip(c, -1.0, 1.0)))

    def _vertex_edges_in_face(self, f, v):
        return [
            int(e)
            for e in self.mesh.face_edges[f]
            if v in self.mesh.edges[e]
        ]

    def _on_edge(self, e, p, eps):
        if e < 0:
            return False
        va, vb = self.mesh.edges[e]
        A = self.mesh.vertices[va]
        d = self.mesh.vertices[vb] - A
        t = float((p - A) @ d) / float(d @ d)
        t = min(max(t, 0.0), 1.0)
        return float(np.linalg.norm(A + t * d - p)) <= eps

    def _fan_walk_faces(self, v, f_start, first_edge, f_end):
        """Faces strictly between f_start and f_end around v, walking out
        of f_start through first_edge. None if the walk hits a boundary."""
        deg = len(self.mesh.vertex_faces(v))
        seq = []
        ang = 0.0
        f, e = int(f_start), int(first_edge)
        for _ in range(deg + 1):
            f1, f2 = self.mesh.edge_faces[e]
            nf = int(f2 if f1 == f else f1)
            if nf < 0:
                return None
            if nf == f_end:
                return seq, ang
            seq.append(nf)
            ang += self._corner_angle(nf, v)
            ee = self._vertex_edges_in_face(nf, v)
            e = ee[0] if ee[1] == e else ee[1]
            f = nf
        return None

    def _fan_faces(self, v, f_start, f_end):
        """Faces strictly between f_start and f_end around v, cheaper side.

        Returns [] when the fan cannot be walked (boundary on both sides).
        """
        best = None
        for e0 in self._vertex_edges_in_face(f_start, v):
            r = self._fan_walk_faces(v, f_start, e0, f_end)
            if r is not None and (best is None or r[1] < best[1]):
                best = r
        return best[0] if best else []

    def _initial_strip(self, a, b, nodes):
        faces = [int(a.face)]
        for i in range(len(nodes) - 1):
            c = set(self._node_faces(nodes[i])) & set(
                self._node_faces(nodes[i + 1])
            )
            if c:
                faces.append(min(c))
        faces.append(int(b.face))
        return self._normalize_strip(faces)

    def _normalize_strip(self, faces):
        """Drop repeats and bridge vertex-only adjacencies with fans."""
        out = [faces[0]]
        for g in faces[1:]:
            f = out[-1]
            if g == f:
                continue
            if self._shared_edge(f, g) >= 0:
                out.append(g)
                continue
            sv = set(self.mesh.faces[f]) & set(self.mesh.faces[g])
            if not sv:
                raise MeshError("disconnected face strip")
            v = min(sv)
            for h in self._fan_faces(v, f, g):
                if h != out[-1]:
                    out.append(h)
            if out[-1] != g:
                out.append(g)
        return out

    # -- strip unfolding + funnel -------------------------------------------

    def _unfold_strip(self, a, b, strip):
        """Unfold the strip into 2D. Returns (a2, b2, portals) where
        portals[i] = (left2, right2, left_vid, right_vid, edge_id)."""
        mesh = self.mesh
        vid = mesh.faces[strip[0]]
        c3 = mesh.vertices[vid]
        lab = float(np.linalg.norm(c3[1] - c3[0]))
        cur = {
            int(vid[0]): np.zeros(2),
            int(vid[1]): np.array([lab, 0.0]),
        }
        cur[int(vid[2])] = self._trilaterate(
            cur[int(vid[0])],
            cur[int(vid[1])],
            float(np.linalg.norm(c3[2] - c3[0])),
            float(np.linalg.norm(c3[2] - c3[1])),
            +1.0,
        )
        a2 = a.bary @ np.array([cur[int(v)] for v in vid])
        portals = []
        for i in range(len(strip) - 1):
            f, g = strip[i], strip[i + 1]
            e = self._shared_edge(f, g)
            va, vb = (int(x) for x in mesh.edges[e])
            A, B = cur[va], cur[vb]
            q = next(int(v) for v in mesh.faces[f] if v not in (va, vb))
            side = -np.sign(_cross2(B - A, cur[q] - A)) or 1.0
            w = next(int(v) for v in mesh.faces[g] if v not in (va, vb))
            W2 = self._trilaterate(
                A,
                B,
                float(np.linalg.norm(mesh.vertices[w] - mesh.vertices[va])),
                float(np.linalg.norm(mesh.vertices[w] - mesh.vertices[vb])),
                side,
            )
            if _cross2(B - A, cur[q] - A) < 0.0:
                portals.append((A, B, va, vb, e))
            else:
                portals.append((B, A, vb, va, e))
            cur = {va: A, vb: B, w: W2}
        vid = mesh.faces[strip[-1]]
        b2 = b.bary @ np.array([cur[int(v)] for v in vid])
        return a2, b2, portals

    @staticmethod
    def _trilaterate(A, B, da, db, side):
        ab = B - A
        L = float(np.linalg.norm(ab))
        x = (da * da - db * db + L * L) / (2.0 * L)
        y2 = da * da - x * x
        y = np.sqrt(y2) if y2 > 0.0 else 0.0
        d = ab / L
        n = np.array([-d[1], d[0]])
        return A + x * d + side * y * n

    @staticmethod
    def _funnel(a2, b2, portals):
        """Taut path in the unfolded corridor (simple funnel algorithm).

        Returns bend list [(point2, vertex_id)] excluding the endpoints.
        """
        ports = [(p[0], p[1], p[2], p[3]) for p in portals]
        ports.append((b2, b2, -1, -1))
        bends = []
        apex = a2
        left, right = ports[0][0], ports[0][1]
        li = ri = ai = 0
        i = 1
        guard = 0
        limit = 4 * len(ports) * (len(ports) + 2)
        while i < len(ports):
            guard += 1
            if guard > limit:
                break
            l2, r2 = ports[i][0], ports[i][1]
            # area(a,b,c) > 0 means c lies left of ray a->b.
            if _tri_area2(apex, right, r2) >= 0.0:
                # r2 tightens the right boundary inward (leftward).
                if np.array_equal(apex, right) or not _reached(
                    apex, left, r2, +1.0
                ):
                    right = r2
                    ri = i
                else:
                    # Right boundary crossed the left one: bend at left.
                    bends.append((left, ports[li][2]))
                    apex = left
                    ai = li
                    left = right = apex
                    li = ri = ai
                    i = ai + 1
                    continue
            if _tri_area2(apex, left, l2) <= 0.0:
                if np.array_equal(apex, left) or not _reached(
                    apex, right, l2, -1.0
                ):
                    left = l2
                    li = i
                else:
                    bends.append((right, ports[ri][3]))
                    apex = right
                    ai = ri
                    left = right = apex
                    li = ri = ai
                    i = ai + 1
                    continue
            i += 1
        return bends

    def _portal_params(self, a2, b2, portals, bends):
        """Crossing parameter t on each portal along the funnel path."""
        path2 = [a2] + [p for p, _ in bends] + [b2]
        ts = np.empty(len(portals))
        seg = 0
        for i, (L2, R2, lv, rv, e) in enumerate(portals):
            va, vb = self.mesh.edges[e]
            P2, Q2 = (L2, R2) if lv == va else (R2, L2)
            t = None
            while seg < len(path2) - 1:
                p, q = path2[seg], path2[seg + 1]
                d0 = _tri_area2(P2, Q2, p)
                d1 = _tri_area2(P2, Q2, q)
                if d0 == d1:
                    # Segment parallel to the portal (bend on a shared
                    # endpoint); locate by closest portal endpoint.
                    dp = min(
                        np.linalg.norm(p - P2), np.linalg.norm(p - Q2)
                    )
                    if dp < 1e-12:
                        t = 0.0 if np.linalg.norm(p - P2) <= dp else 1.0
                        break
                    seg += 1
                    continue
                s = d0 / (d0 - d1)
                if s < -1e-9:
                    seg += 1
                    continue
                if s > 1.0 + 1e-9:
                    seg += 1
                    continue
                x = p + np.clip(s, 0.0, 1.0) * (q - p)
                dd = Q2 - P2
                t = float((x - P2) @ dd / (dd @ dd))
                break
            if t is None:
                t = 0.5
            ts[i] = min(max(t, 0.0), 1.0)
        return ts

    # -- vertex rerouting ----------------------------------------------------

    def _angle_between_in_face(self, v, u, w):
        c = float(u @ w) / (np.linalg.norm(u) * np.linalg.norm(w))
        return float(np.arccos(np.clip(c, -1.0, 1.0)))

    def _side_angle(self, v, strip, s, e, prev_p, next_p, portals_e):
        """Intrinsic angle swept from prev to next through the current
        strip faces around pinned vertex v (portals s..e pinned)."""
        mesh = self.mesh
        vp = mesh.vertices[v]
        ang = 0.0
        # Partial corner in the face before the run.
        e0 = portals_e[s]
        o0 = int(mesh.edges[e0][0] if mesh.edges[e0][1] == v else mesh.edges[e0][1])
        ang += self._angle_between_in_face(v, prev_p - vp, mesh.vertices[o0] - vp)
        for i in range(s, e):
            fmid = strip[i + 1]
            ang += self._corner_angle(fmid, v)
        e1 = portals_e[e]
        o1 = int(mesh.edges[e1][0] if mesh.edges[e1][1] == v else mesh.edges[e1][1])
        ang += self._angle_between_in_face(v, mesh.vertices[o1] - vp, next_p - vp)
        return ang

    def _total_angle(self, v):
        return sum(
            self._corner_angle(int(f), v) for f in self.mesh.vertex_faces(v)
        )

    def _is_boundary_vertex(self, v):
        for f in self.mesh.vertex_faces(v):
            for e in self._vertex_edges_in_face(int(f), v):
                if self.mesh.edge_faces[e][1] < 0:
                    return True
        return False

    # -- public path ---------------------------------------------------------

    def _common_face(self, a: SurfacePoint, b: SurfacePoint):
        if a.face == b.face:
            return a.face
        mesh = self.mesh
        fb = set(mesh.faces[b.face])
        va = [
            int(mesh.faces[a.face][k]) for k in range(3) if a.bary[k] > 1e-12
        ]
        if all(v in fb for v in va):
            return b.face
        vb = [
            int(mesh.faces[b.face][k]) for k in range(3) if b.bary[k] > 1e-12
        ]
        fa = set(mesh.faces[a.face])
        if all(v in fa for v in vb):
            return a.face
        return -1

    def path(self, a: SurfacePoint, b: SurfacePoint, max_passes=50
             ) -> SurfacePath:
        """Locally shortest path from a to b.

        The pair is solved in a canonical order so that path(a, b) is
        always the exact reverse of path(b, a) and its length equals
        distance(a, b)."""
        ka = (a.face, tuple(np.round(a.bary, 12)))
        kb = (b.face, tuple(np.round(b.bary, 12)))
        if kb < ka:
            rev = self._path_impl(b, a, max_passes)
            return SurfacePath(
                rev.points[::-1].copy(),
                rev.seg_faces[::-1].copy(),
                rev.point_edges[::-1].copy(),
            )
        return self._path_impl(a, b, max_passes)

    def _path_impl(self, a: SurfacePoint, b: SurfacePoint, max_passes
                   ) -> SurfacePath:
        cf = self._common_face(a, b)
        if cf >= 0:
            return SurfacePath(
                np.vstack([a.position, b.position]),
                np.array([cf], dtype=np.int64),
                np.array([-1, -1], dtype=np.int64),
            )
        nodes = self._dijkstra_nodes(a, b)
        strip = self._initial_strip(a, b, nodes)
        mesh = self.mesh
        eps_v = 1e-9 * mesh.bbox_diag
        # An endpoint sitting exactly on the first (last) portal edge makes
        # that portal collinear with the endpoint and derails the funnel;
        # the face behind it is unusable by a taut path, so drop it.
        eps_e = 1e-12 * mesh.bbox_diag
        while len(strip) >= 2 and self._on_edge(
            self._shared_edge(strip[0], strip[1]), a.position, eps_e
        ):
            strip = strip[1:]
            a = bary_in_face(mesh, strip[0], a.position)
        while len(strip) >= 2 and self._on_edge(
            self._shared_edge(strip[-2], strip[-1]), b.position, eps_e
        ):
            strip = strip[:-1]
            b = bary_in_face(mesh, strip[-1], b.position)
        if len(strip) == 1:
            return SurfacePath(
                np.vstack([a.position, b.position]),
                np.array([strip[0]], dtype=np.int64),
                np.array([-1, -1], dtype=np.int64),
            )
        for _ in range(max_passes):
            a2, b2, portals = self._unfold_strip(a, b, strip)
            bends = self._funnel(a2, b2, portals)
            ts = self._portal_params(a2, b2, portals, bends)
            portals_e = [p[4] for p in portals]
            # Pinned runs: consecutive portals crossing at the same vertex.
            pinned = []
            for i, t in enumerate(ts):
                ed = mesh.edges[portals_e[i]]
                v = int(ed[0]) if t <= 1e-12 else (
                    int(ed[1]) if t >= 1.0 - 1e-12 else -1
                )
                if v >= 0 and pinned and pinned[-1][0] == v and pinned[-1][2] == i - 1:
                    pinned[-1] = (v, pinned[-1][1], i)
                elif v >= 0:
                    pinned.append((v, i, i))
            if not pinned:
                break
            pts3 = self._crossing_points(portals_e, ts)
            flips = []
            for v, s, e in pinned:
                prev_p = a.position if s == 0 else pts3[s - 1]
                next_p = b.position if e == len(ts) - 1 else pts3[e + 1]
                vp = mesh.vertices[v]
                if (np.linalg.norm(prev_p - vp) < eps_v
                        or np.linalg.norm(next_p - vp) < eps_v):
                    # Path endpoint sits on the vertex itself; nothing to bend.
                    continue
                th_cur = self._side_angle(
                    v, strip, s, e, prev_p, next_p, portals_e
                )
                # A taut bend wraps v with the corridor-side angle >= pi.
                # Cutting across the far side shortens iff that side's
                # wedge is under pi (and tighter than the current one).
                th_other = self._total_angle(v) - th_cur
                if th_other >= np.pi - 1e-9 or th_other >= th_cur:
                    continue
                ee = self._vertex_edges_in_face(strip[s], v)
                e_other = ee[0] if ee[1] == portals_e[s] else ee[1]
                r = self._fan_walk_faces(v, strip[s], e_other, strip[e + 1])
                if r is None:
                    continue
                flips.append((s, e, r[0]))
            if not flips:
                break
            out = []
            last = 0
            for s, e, fan in flips:
                out += strip[last : s + 1] + fan
                last = e + 1
            out += strip[last:]
            strip = self._normalize_strip(out)
        else:
            # Pass budget exhausted after a flip: refresh the crossing data
            # so the emitted polyline matches the final strip.
            a2, b2, portals = self._unfold_strip(a, b, strip)
            bends = self._funnel(a2, b2, portals)
            ts = self._portal_params(a2, b2, portals, bends)
            portals_e = [p[4] for p in portals]
        return self._emit(a, b, strip, portals_e, ts)

    def _crossing_points(self, portals_e, ts):
        ev = self.mesh.edges[portals_e]
        pa = self.mesh.vertices[ev[:, 0]]
        pb = self.mesh.vertices[ev[:, 1]]
        return pa + ts[:, None] * (pb - pa)

    def _emit(self, a, b, strip, portals_e, ts):
        pts3 = self._crossing_points(portals_e, ts)
        pts = [a.position]
        edges = [-1]
        faces = []
        for i in range(len(portals_e)):
            pts.append(pts3[i])
            edges.append(int(portals_e[i]))
            faces.append(strip[i])
        pts.append(b.position)
        edges.append(-1)
        faces.append(strip[-1])
        eps = 1e-12 * max(self.mesh.bbox_diag, 1.0)
        keep_p = [0]
        keep_f = []
        for i in range(1, len(pts)):
            if np.linalg.norm(np.asarray(pts[i]) - pts[keep_p[-1]]) > eps:
                keep_p.append(i)
                keep_f.append(faces[i - 1])
            elif i == len(pts) - 1:
                keep_p[-1] = i
        if len(keep_p) < 2:
            keep_p = [0, len(pts) - 1]
            keep_f = [faces[-1]]
        return SurfacePath(
            np.asarray([pts[i] for i in keep_p]),
            np.asarray(keep_f, dtype=np.int64),
            np.asarray([edges[i] for i in keep_p], dtype=np.int64),
        )

    def distance(self, a: SurfacePoint, b: SurfacePoint) -> float:
        """Length of the straightened path (path() already canonicalizes
        the pair order, so this is exactly symmetric)."""
        return self.path(a, b).length

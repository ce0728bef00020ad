"""High-dimensional surface embedding and smooth closest-point queries.

A subset of surface vertices (landmarks) is laid out in R^d by metric MDS on
geodesic distances, the remaining vertices follow via a Laplacian
least-squares solve, and both offset copies of every vertex share the surface
coordinate, so lifting a shell point through its tet lands exactly on the
embedded surface.  Smooth closest point is then: locate in shell, lift to
R^d, project back with tangent-plane blending (Phong projection).
"""

from __future__ import annotations

import struct

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .geodesic import GeodesicSolver
from .mesh import SurfacePoint, TriMesh, closest_point_on_triangles
from .shell import ShellTetMesh, build_shell

_MAGIC = b"SRFNKEMB"
_VERSION = 1

# Above this many landmarks the exact pairwise paths get too slow and the
# Dijkstra distances on the midpoint graph (a few percent high) are used.
_EXACT_PAIRS_LIMIT = 48


class EmbeddingError(RuntimeError):
    def __init__(self, msg, trace=None):
        super().__init__(msg)
        self.trace = trace


class ShellEmbedding:
    """Per shell-vertex R^d coordinates plus the landmark bookkeeping."""

    def __init__(self, coords, d, landmarks, stress, n_surface):
        self.coords = coords
        self.d = int(d)
        self.landmarks = landmarks
        self.stress = float(stress)
        self.n_surface = int(n_surface)

    @property
    def surface_coords(self):
        return self.coords[: self.n_surface]


def _select_landmarks(mesh: TriMesh, solver: GeodesicSolver):
    nv = mesh.n_vertices
    k = np.abs(mesh.gaussian_curvature())
    order = np.argsort(-k, kind="stable")
    take = min(512, max(int(np.ceil(0.05 * nv)), 0))
    chosen = list(order[:take])
    floor = min(32, nv)
    # Farthest-point fill keeps tiny or flat meshes from degenerating to a
    # handful of boundary corners.
    while len(chosen) < floor:
        field = solver.vertex_distance_field(chosen)
        nxt = int(np.argmax(field))
        if nxt in chosen:
            break
        chosen.append(nxt)
    return np.array(sorted(chosen), dtype=np.int64)


def _landmark_distances(mesh, solver, lm):
    if len(lm) <= _EXACT_PAIRS_LIMIT:
        D = np.zeros((len(lm), len(lm)))
        pts = [mesh.vertex_surface_point(int(v)) for v in lm]
        for i in range(len(lm)):
            for j in range(i + 1, len(lm)):
                D[i, j] = D[j, i] = solver.distance(pts[i], pts[j])
        return D
    return solver.pairwise_vertex_distances(lm)


def _classical_mds(D, d):
    n = len(D)
    J = np.eye(n) - 1.0 / n
    B = -0.5 * J @ (D * D) @ J
    w, V = np.linalg.eigh(B)
    w = w[::-1][:d]
    V = V[:, ::-1][:, :d]
    X = V * np.sqrt(np.clip(w, 0.0, None))
    if d > X.shape[1]:
        X = np.pad(X, ((0, 0), (0, d - X.shape[1])))
    return X


def _stress(X, D):
    diff = X[:, None, :] - X[None, :, :]
    dist = np.sqrt((diff * diff).sum(axis=2))
    iu = np.triu_indices(len(D), 1)
    return float(((dist[iu] - D[iu]) ** 2).sum()), dist


def _smacof(D, X0, max_iter=200, rel_tol=1e-6):
    n = len(D)
    X = X0.copy()
    s, dist = _stress(X, D)
    trace = [s]
    for _ in range(max_iter):
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(dist > 0, D / np.where(dist > 0, dist, 1.0), 0.0)
        B = -ratio
        np.fill_diagonal(B, 0.0)
        np.fill_diagonal(B, -B.sum(axis=1))
        X = B @ X / n
        s_new, dist = _stress(X, D)
        trace.append(s_new)
        done = s_new == 0.0 or (s > 0 and (s - s_new) / s < rel_tol)
        s = s_new
        if done:
            break
    return X, s, trace


def _ls_extend(mesh: TriMesh, lm, X_lm, d, weight=100.0):
    """Laplacian least-squares placement of the non-landmark vertices."""
    nv = mesh.n_vertices
    e = mesh.edges
    adj = sp.coo_matrix(
        (np.ones(2 * len(e)), (np.concatenate([e[:, 0], e[:, 1]]),
                               np.concatenate([e[:, 1], e[:, 0]]))),
        shape=(nv, nv),
    ).tocsr()
    deg = np.asarray(adj.sum(axis=1)).ravel()
    lap = sp.eye(nv) - sp.diags(1.0 / deg) @ adj
    sel = sp.coo_matrix(
        (np.full(len(lm), weight), (np.arange(len(lm)), lm)), shape=(len(lm), nv)
    ).tocsr()
    A = (lap.T @ lap + sel.T @ sel).tocsc()
    rhs = sel.T @ (weight * X_lm)
    return spla.splu(A).solve(rhs)


def embed(mesh: TriMesh, shell: ShellTetMesh, d: int = 8,
          seed: int = 0) -> ShellEmbedding:
    """Embed the shell vertices in R^d.

    The pipeline is deterministic; seed is accepted for interface stability.
    """
    if d < 3:
        raise ValueError("d must be at least 3")
    solver = GeodesicSolver(mesh)
    lm = _select_landmarks(mesh, solver)
    D = _landmark_distances(mesh, solver, lm)
    X0 = _classical_mds(D, d)
    X_lm, stress, trace = _smacof(D, X0)
    if trace and stress > trace[0]:
        raise EmbeddingError(
            "MDS stress did not improve on its initialization: %r" % (trace,),
            trace,
        )
    Xs = _ls_extend(mesh, lm, X_lm, d)
    nv = mesh.n_vertices
    # Offset copies share the surface coordinate.  Free placement would pull
    # lifted points off the embedded surface and break the planar case; with
    # shared fibers any tet lift is a convex combination of the face's three
    # surface coordinates.
    coords = np.concatenate([Xs, Xs, Xs], axis=0)
    return ShellEmbedding(coords, d, lm, stress, nv)


# ---------------------------------------------------------------------------
# Phong projection
# ---------------------------------------------------------------------------

class _PhongData:
    """Precomputed R^d face bases, aligned edge planes, and the solver."""

    K_NEAREST = 16

    def __init__(self, mesh: TriMesh, Xs):
        self.mesh = mesh
        self.Xs = Xs
        d = Xs.shape[1]
        tri = Xs[mesh.faces]  # (nf, 3, d)
        self.tri = tri

        # Orthonormal 2-flat basis per face.
        E = np.stack([tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0]], axis=2)
        Bf = np.linalg.qr(E)[0]  # (nf, d, 2)

        # Edge planes: top eigenvectors of the averaged projection operators.
        P = np.einsum("fik,fjk->fij", Bf, Bf)
        M = np.empty((len(mesh.edges), d, d))
        f1, f2 = mesh.edge_faces[:, 0], mesh.edge_faces[:, 1]
        interior = f2 >= 0
        M[interior] = 0.5 * (P[f1[interior]] + P[f2[interior]])
        M[~interior] = P[f1[~interior]]
        Be = np.linalg.eigh(M)[1][:, :, -2:]  # (ne, d, 2)

        # Align each face's three edge planes to the face basis so the blend
        # does not cancel: minimize ||Be R - Bf|| over rotations R.
        opp = mesh.face_edges[:, [1, 2, 0]]  # edge opposite local vertex i
        Bfe = Be[opp]  # (nf, 3, d, 2)
        C = np.einsum("feki,fkj->feij", Bfe, Bf)
        U, _, Vt = np.linalg.svd(C)
        self.tilde = Bfe @ (U @ Vt)  # (nf, 3, d, 2)

    def residual(self, y, faces, ab):
        a, b = ab[:, 0], ab[:, 1]
        u = np.stack([a, b, 1.0 - a - b], axis=1)
        S = np.einsum("mi,mij->mj", u, self.tri[faces])
        w = np.stack(
            [u[:, 1] * u[:, 2], u[:, 2] * u[:, 0], u[:, 0] * u[:, 1]], axis=1
        )
        w = np.abs(w) + 1e-12
        w = w / w.sum(axis=1, keepdims=True)
        A = np.einsum("me,mekj->mkj", w, self.tilde[faces])
        return np.einsum("mkj,mk->mj", A, y[None, :] - S), S, u

    def newton(self, y, faces, max_iter=20, tol=1e-10):
        """Damped Newton on all candidate faces at once."""
        m = len(faces)
        _, bary = closest_point_on_triangles(y, self.tri[faces])
        ab = bary[:, :2].copy()
        g, S, u = self.residual(y, faces, ab)
        gn = np.abs(g).max(axis=1)
        h = 1e-7
        for _ in range(max_iter):
            active = gn > tol
            if not active.any():
                break
            ga = self.residual(y, faces, ab + np.array([h, 0.0]))[0]
            gb = self.residual(y, faces, ab + np.array([0.0, h]))[0]
            J = np.stack([(ga - g) / h, (gb - g) / h], axis=2)  # (m, 2, 2)
            det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
            ok = active & (np.abs(det) > 1e-18)
            step = np.zeros((m, 2))
            step[ok, 0] = (-g[ok, 0] * J[ok, 1, 1] + g[ok, 1] * J[ok, 0, 1]) \
                / det[ok]
            step[ok, 1] = (-g[ok, 1] * J[ok, 0, 0] + g[ok, 0] * J[ok, 1, 0]) \
                / det[ok]
            scale = np.ones(m)
            for _ in range(6):
                trial = ab + scale[:, None] * step
                gn_t = np.abs(self.residual(y, faces, trial)[0]).max(axis=1)
                worse = ok & (gn_t > gn)
                if not worse.any():
                    break
                scale[worse] *= 0.5
            ab = np.where(ok[:, None], ab + scale[:, None] * step, ab)
            g, S, u = self.residual(y, faces, ab)
            gn = np.abs(g).max(axis=1)
        return u, S, gn <= tol

    def candidate_faces(self, y):
        d2 = ((self.Xs - y) ** 2).sum(axis=1)
        k = min(self.K_NEAREST, len(d2))
        near = np.argpartition(d2, k - 1)[:k]
        m = self.mesh
        return np.unique(
            np.concatenate([m.vertex_faces(int(v)) for v in near])
        )

    def project(self, y) -> SurfacePoint:
        y = np.asarray(y, dtype=np.float64)
        faces = self.candidate_faces(y)
        u, S, converged = self.newton(y, faces)
        inside = converged & (u.min(axis=1) >= -1e-6)
        if inside.any():
            idx = np.flatnonzero(inside)
            d2 = ((y[None, :] - S[idx]) ** 2).sum(axis=1)
            best = idx[np.lexsort((faces[idx], d2))[0]]
            bary = np.clip(u[best], 0.0, None)
            return self.mesh.surface_point(
                int(faces[best]), bary / bary.sum()
            )
        # No interior Newton solution: R^d closest point, clamped.
        pts, bary = closest_point_on_triangles(y, self.tri[faces])
        d2 = ((y[None, :] - pts) ** 2).sum(axis=1)
        best = np.lexsort((faces, d2))[0]
        b = np.clip(bary[best], 0.0, None)
        return self.mesh.surface_point(int(faces[best]), b / b.sum())


def _phong_data(embedding: ShellEmbedding, mesh: TriMesh) -> _PhongData:
    pd = getattr(embedding, "_phong_cache", None)
    if pd is None or pd.mesh is not mesh:
        pd = _PhongData(mesh, embedding.surface_coords)
        embedding._phong_cache = pd
    return pd


class SurfaceMap:
    """Bundle of mesh, offset shell and embedding answering SCP queries."""

    def __init__(self, mesh: TriMesh, shell: ShellTetMesh,
                 embedding: ShellEmbedding):
        if shell.mesh is not mesh:
            raise ValueError("shell was built for a different mesh")
        if embedding.n_surface != mesh.n_vertices:
            raise ValueError("embedding does not match the mesh")
        self.mesh = mesh
        self.shell = shell
        self.embedding = embedding
        self._phong = _phong_data(embedding, mesh)

    @classmethod
    def build(cls, mesh: TriMesh, mu: float = 0.2, d: int = 8,
              seed: int = 0) -> "SurfaceMap":
        shell = build_shell(mesh, mu)
        return cls(mesh, shell, embed(mesh, shell, d=d, seed=seed))

    def lift(self, p):
        hit = self.shell.locate(p)
        if hit is None:
            return None
        tet, bary = hit
        return bary @ self.embedding.coords[self.shell.tets[tet]]

    def phong_project(self, y) -> SurfacePoint:
        return self._phong.project(y)

    def scp(self, p) -> SurfacePoint:
        """Smooth closest point: lift through the shell when inside it."""
        p = np.asarray(p, dtype=np.float64)
        y = self.lift(p)
        if y is None:
            return self.mesh.closest_point(p)
        return self._phong.project(y)

    # -- serialization -----------------------------------------------------

    def save(self, path):
        emb = self.embedding
        with open(path, "wb") as fh:
            fh.write(struct.pack(
                "<8sIIdIIIId",
                _MAGIC, _VERSION, emb.d, self.shell.mu,
                emb.n_surface, len(self.shell.vertices),
                len(self.shell.tets), len(emb.landmarks), emb.stress,
            ))
            fh.write(emb.coords.astype("<f8").tobytes())
            fh.write(emb.landmarks.astype("<i8").tobytes())

    @classmethod
    def load(cls, path, mesh: TriMesh) -> "SurfaceMap":
        with open(path, "rb") as fh:
            head = fh.read(struct.calcsize("<8sIIdIIIId"))
            (magic, version, d, mu, nv, n_shell, n_tets, n_lm,
             stress) = struct.unpack("<8sIIdIIIId", head)
            if magic != _MAGIC:
                raise ValueError("not an embedding file")
            if version != _VERSION:
                raise ValueError("unsupported embedding version %d" % version)
            if nv != mesh.n_vertices:
                raise ValueError(
                    "embedding was computed for %d vertices, mesh has %d"
                    % (nv, mesh.n_vertices)
                )
            coords = np.frombuffer(
                fh.read(8 * n_shell * d), dtype="<f8"
            ).reshape(n_shell, d).copy()
            lm = np.frombuffer(fh.read(8 * n_lm), dtype="<i8").copy()
        shell = build_shell(mesh, mu)
        if len(shell.vertices) != n_shell or len(shell.tets) != n_tets:
            raise ValueError("shell layout mismatch; file is stale")
        emb = ShellEmbedding(coords, d, lm, stress, nv)
        return cls(mesh, shell, emb)


# Functional forms of the query operations.

def lift(embedding: ShellEmbedding, shell: ShellTetMesh, p):
    hit = shell.locate(p)
    if hit is None:
        return None
    tet, bary = hit
    return bary @ embedding.coords[shell.tets[tet]]


def phong_project(embedding: ShellEmbedding, mesh: TriMesh,
                  y) -> SurfacePoint:
    return _phong_data(embedding, mesh).project(y)


def smooth_closest_point(embedding: ShellEmbedding, shell: ShellTetMesh,
                         mesh: TriMesh, p) -> SurfacePoint:
    p = np.asarray(p, dtype=np.float64)
    y = lift(embedding, shell, p)
    if y is None:
        return mesh.closest_point(p)
    return _phong_data(embedding, mesh).project(y)

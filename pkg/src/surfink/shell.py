"""Offset-shell tetrahedral volume around a triangle mesh.

The shell spans the normal offsets [-mu, +mu] of the surface: every vertex
gets two displaced copies, every face two triangular prisms (below and above
the original layer), and every prism splits into three tetrahedra.  Diagonal
choice on the prism side quads is keyed on global vertex ids so neighbouring
prisms agree on the shared quad and the tet mesh conforms.
"""

from __future__ import annotations

import numpy as np

from .mesh import AabbTree, MeshError, TriMesh


class ShellBuildError(MeshError):
    """Offset prisms collapsed or inverted for the requested thickness."""

    def __init__(self, face, mu):
        super().__init__(
            "face %d produces an inverted tet at mu=%g; reduce mu below the "
            "local feature size" % (face, mu)
        )
        self.face = face
        self.mu = mu


# Prism split templates.  Local labels: bottom triangle (0,1,2), top (3,4,5),
# vertex i+3 directly above vertex i, winding such that the bottom normal
# points into the prism.  Rotated so the apex column holds the smallest
# global id; the remaining quad's diagonal picks template A or B.
_UP_A = ((0, 1, 2, 5), (0, 1, 5, 4), (0, 4, 5, 3))  # diag 1-5
_UP_B = ((0, 1, 2, 4), (0, 4, 2, 5), (0, 4, 5, 3))  # diag 2-4
_DOWN_A = ((0, 1, 2, 3), (1, 2, 3, 4), (2, 3, 4, 5))  # diag 2-4
_DOWN_B = ((0, 1, 2, 3), (1, 2, 3, 5), (1, 3, 4, 5))  # diag 1-5


class ShellTetMesh:
    """Conforming tet mesh of the +/-mu offset volume around a surface.

    Vertex layout: [0, nv) original surface layer, [nv, 2nv) outer (+mu),
    [2nv, 3nv) inner (-mu).  Tets are stored face-major, six per surface
    face (three above the surface layer, then three below).
    """

    def __init__(self, mesh: TriMesh, mu: float):
        if mu <= 0:
            raise ValueError("mu must be positive")
        self.mesh = mesh
        self.mu = float(mu)
        nv = len(mesh.vertices)
        n = mesh.vertex_normals
        self.vertices = np.concatenate(
            [mesh.vertices, mesh.vertices + mu * n, mesh.vertices - mu * n]
        )

        f = mesh.faces
        nf = len(f)
        # Rotate each face so column 0 carries its smallest vertex id.
        rot = np.argmin(f, axis=1)
        cols = np.stack(
            [f[np.arange(nf), (rot + k) % 3] for k in range(3)], axis=1
        )
        case_a = cols[:, 1] < cols[:, 2]

        tets = np.empty((6 * nf, 4), dtype=np.int64)
        # Upper prism: bottom = surface layer, top = outer layer.
        up = np.concatenate([cols, cols + nv], axis=1)
        # Lower prism: bottom = inner layer, top = surface layer.  The quad
        # diagonal rule keys on the surface ids here as well, but the apex
        # lands on the top layer, hence the mirrored templates.
        down = np.concatenate([cols + 2 * nv, cols], axis=1)
        for t in range(3):
            tets[6 * np.arange(nf) + t] = np.where(
                case_a[:, None],
                up[:, _UP_A[t]],
                up[:, _UP_B[t]],
            )
            tets[6 * np.arange(nf) + 3 + t] = np.where(
                case_a[:, None],
                down[:, _DOWN_A[t]],
                down[:, _DOWN_B[t]],
            )
        self.tets = tets
        self.tet_face = np.repeat(np.arange(nf, dtype=np.int64), 6)

        corners = self.vertices[tets]  # (nt, 4, 3)
        e = corners[:, 1:] - corners[:, :1]
        vol = np.linalg.det(e) / 6.0
        bad = np.flatnonzero(vol <= 1e-15)
        if len(bad):
            raise ShellBuildError(int(self.tet_face[bad[0]]), mu)
        self.volumes = vol

        # Per-tet inverse edge matrices for barycentric solves: columns are
        # the edge vectors, so bary[1:] = inv @ (p - v0).
        self._inv = np.linalg.inv(np.swapaxes(e, 1, 2))
        self._v0 = corners[:, 0]
        self._tree = AabbTree(corners.min(axis=1), corners.max(axis=1))

    def face_tets(self, face: int) -> np.ndarray:
        """Tet ids of the two prisms extruded from a surface face."""
        return np.arange(6 * face, 6 * face + 6, dtype=np.int64)

    def tet_bary(self, tet: int, p) -> np.ndarray:
        b = self._inv[tet] @ (np.asarray(p, dtype=np.float64) - self._v0[tet])
        return np.concatenate([[1.0 - b.sum()], b])

    def locate(self, p):
        """Containing tet and barycentric weights, or None outside the shell.

        Among tets containing p (weights >= -1e-9) the lowest id wins, which
        matches an exhaustive ascending scan.
        """
        p = np.asarray(p, dtype=np.float64)
        cand = self._tree.containing(p)
        if len(cand):
            b = np.einsum(
                "nij,nj->ni", self._inv[cand], p - self._v0[cand]
            )
            bary = np.concatenate([1.0 - b.sum(axis=1)[:, None], b], axis=1)
            ok = np.flatnonzero(bary.min(axis=1) >= -1e-9)
            if len(ok):
                i = ok[0]  # cand is ascending
                return int(cand[i]), bary[i]
        return None

    def contains(self, p) -> bool:
        return self.locate(p) is not None


def build_shell(mesh: TriMesh, mu: float) -> ShellTetMesh:
    """Validated offset shell; raises ShellBuildError when mu is too thick."""
    return ShellTetMesh(mesh, mu)


def fit_shell(mesh: TriMesh, mu: float, max_halvings: int = 8) -> ShellTetMesh:
    """build_shell, halving mu until the prisms stop inverting.

    Sharp creases bound the feasible thickness by the local feature size; a
    thinner shell is harmless for anchored queries, which stay within a
    sample step of the surface.
    """
    for _ in range(max_halvings):
        try:
            return ShellTetMesh(mesh, mu)
        except ShellBuildError:
            mu *= 0.5
    return ShellTetMesh(mesh, mu)

"""Procedural benchmark meshes at roughly desk scale (units: meters).

All generators return watertight manifolds except `plane` and `vgroove`,
which are open sheets used for degenerate-geometry tests.
"""

from __future__ import annotations

import numpy as np

from .mesh import TriMesh

__all__ = [
    "plane",
    "icosphere",
    "uv_sphere",
    "bumpy_sphere",
    "capsule",
    "vgroove",
    "torus",
    "benchmark_meshes",
]


def _grid_faces(ni, nj, offset=0, flip=False):
    """Triangulate an (ni+1) x (nj+1) vertex grid (row-major)."""
    faces = []
    for i in range(ni):
        for j in range(nj):
            a = offset + i * (nj + 1) + j
            b = a + 1
            c = a + (nj + 1)
            d = c + 1
            if flip:
                faces.append([a, c, b])
                faces.append([b, c, d])
            else:
                faces.append([a, b, c])
                faces.append([b, d, c])
    return faces


def plane(n=16, size=1.0):
    """Unit-ish square grid in the z=0 plane, normals along +z."""
    xs = np.linspace(-size / 2, size / 2, n + 1)
    xx, yy = np.meshgrid(xs, xs, indexing="ij")
    verts = np.stack([xx.ravel(), yy.ravel(), np.zeros(xx.size)], axis=1)
    return TriMesh(verts, np.array(_grid_faces(n, n, flip=True)))


def icosphere(subdivisions=3, radius=1.0):
    """Unit icosahedron subdivided `subdivisions` times, then normalized."""
    t = (1.0 + np.sqrt(5.0)) / 2.0
    verts = np.array(
        [
            [-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
            [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
            [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1],
        ],
        dtype=np.float64,
    )
    verts /= np.linalg.norm(verts, axis=1)[:, None]
    faces = [
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ]
    verts = verts.tolist()
    for _ in range(subdivisions):
        cache = {}

        def midpoint(a, b):
            key = (a, b) if a < b else (b, a)
            if key not in cache:
                m = np.array(verts[a]) + np.array(verts[b])
                m /= np.linalg.norm(m)
                cache[key] = len(verts)
                verts.append(m.tolist())
            return cache[key]

        nxt = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            nxt += [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
        faces = nxt
    return TriMesh(radius * np.array(verts), np.array(faces))


def uv_sphere(n_lat=32, n_lon=48, radius=1.0):
    """Latitude/longitude sphere with triangle fans at the poles."""
    verts = [[0.0, 0.0, radius]]
    for i in range(1, n_lat):
        th = np.pi * i / n_lat
        for j in range(n_lon):
            ph = 2 * np.pi * j / n_lon
            verts.append(
                [
                    radius * np.sin(th) * np.cos(ph),
                    radius * np.sin(th) * np.sin(ph),
                    radius * np.cos(th),
                ]
            )
    verts.append([0.0, 0.0, -radius])
    south = len(verts) - 1
    ring = lambda i: 1 + (i - 1) * n_lon  # noqa: E731

    faces = []
    for j in range(n_lon):
        faces.append([0, ring(1) + j, ring(1) + (j + 1) % n_lon])
    for i in range(1, n_lat - 1):
        for j in range(n_lon):
            a = ring(i) + j
            b = ring(i) + (j + 1) % n_lon
            c = ring(i + 1) + j
            d = ring(i + 1) + (j + 1) % n_lon
            faces.append([a, c, b])
            faces.append([b, c, d])
    for j in range(n_lon):
        a = ring(n_lat - 1) + j
        b = ring(n_lat - 1) + (j + 1) % n_lon
        faces.append([a, south, b])
    return TriMesh(np.array(verts), np.array(faces))


def bumpy_sphere(subdivisions=3, radius=1.0, amp=0.05, freq=3.0, n_lat=None,
                 n_lon=None):
    """Sphere with a smooth sinusoidal radial displacement field.

    Pass n_lat/n_lon to get a lat-long base with a controllable triangle
    count instead of the icosphere base.
    """
    base = (
        uv_sphere(n_lat, n_lon, radius)
        if n_lat is not None
        else icosphere(subdivisions, radius)
    )
    v = base.vertices
    r = np.linalg.norm(v, axis=1)
    d = v / r[:, None]
    bump = (
        np.sin(freq * v[:, 0]) * np.sin(freq * v[:, 1]) * np.sin(freq * v[:, 2])
    )
    return TriMesh(v + (amp * bump)[:, None] * d, base.faces.copy())


def capsule(radius=0.35, half_height=0.5, n_lat=8, n_lon=32, n_seg=6):
    """Cylinder of half-length `half_height` along z with hemisphere caps."""
    verts = [[0.0, 0.0, half_height + radius]]
    rows = []
    # Top hemisphere rows (excluding pole), equator lands at z=half_height.
    for i in range(1, n_lat + 1):
        th = 0.5 * np.pi * i / n_lat
        rows.append((radius * np.sin(th), half_height + radius * np.cos(th)))
    # Cylinder interior rows.
    for k in range(1, n_seg):
        rows.append((radius, half_height - 2 * half_height * k / n_seg))
    # Bottom hemisphere rows (equator first, excluding pole).
    for i in range(n_lat):
        th = 0.5 * np.pi * i / n_lat
        rows.append((radius * np.cos(th), -half_height - radius * np.sin(th)))
    for rr, z in rows:
        for j in range(n_lon):
            ph = 2 * np.pi * j / n_lon
            verts.append([rr * np.cos(ph), rr * np.sin(ph), z])
    verts.append([0.0, 0.0, -half_height - radius])
    south = len(verts) - 1
    ring = lambda i: 1 + i * n_lon  # noqa: E731

    faces = []
    for j in range(n_lon):
        faces.append([0, ring(0) + j, ring(0) + (j + 1) % n_lon])
    for i in range(len(rows) - 1):
        for j in range(n_lon):
            a = ring(i) + j
            b = ring(i) + (j + 1) % n_lon
            c = ring(i + 1) + j
            d = ring(i + 1) + (j + 1) % n_lon
            faces.append([a, c, b])
            faces.append([b, c, d])
    last = len(rows) - 1
    for j in range(n_lon):
        a = ring(last) + j
        b = ring(last) + (j + 1) % n_lon
        faces.append([a, south, b])
    return TriMesh(np.array(verts), np.array(faces))


def vgroove(n=24, width=0.5, length=1.2):
    """Two planar walls meeting at 90 degrees along the x axis (open).

    The crease runs along x at the origin; walls rise at 45 degrees on
    either side, so snapping across the valley is discontinuous.
    """
    xs = np.linspace(-length / 2, length / 2, n + 1)
    s = np.linspace(0.0, width, n // 2 + 1)
    c = 1.0 / np.sqrt(2.0)
    verts = []
    # Wall on +y side: y = s/sqrt2, z = s/sqrt2. First row is the crease.
    for si in s:
        for x in xs:
            verts.append([x, si * c, si * c])
    # Wall on -y side, sharing the crease row (skip si=0).
    off2 = len(verts)
    for si in s[1:]:
        for x in xs:
            verts.append([x, -si * c, si * c])
    faces = _grid_faces(len(s) - 1, n)
    # Second wall indexes: row 0 is the shared crease row.
    def idx2(i, j):
        return j if i == 0 else off2 + (i - 1) * (n + 1) + j

    for i in range(len(s) - 1):
        for j in range(n):
            a, b = idx2(i, j), idx2(i, j + 1)
            cc, d = idx2(i + 1, j), idx2(i + 1, j + 1)
            faces.append([a, cc, b])
            faces.append([b, cc, d])
    return TriMesh(np.array(verts), np.array(faces))


def torus(major=0.7, minor=0.25, n_major=48, n_minor=24):
    verts = []
    for i in range(n_major):
        u = 2 * np.pi * i / n_major
        for j in range(n_minor):
            v = 2 * np.pi * j / n_minor
            w = major + minor * np.cos(v)
            verts.append(
                [w * np.cos(u), w * np.sin(u), minor * np.sin(v)]
            )
    faces = []
    for i in range(n_major):
        for j in range(n_minor):
            a = i * n_minor + j
            b = i * n_minor + (j + 1) % n_minor
            c = ((i + 1) % n_major) * n_minor + j
            d = ((i + 1) % n_major) * n_minor + (j + 1) % n_minor
            faces.append([a, b, c])
            faces.append([b, d, c])
    return TriMesh(np.array(verts), np.array(faces))


def benchmark_meshes():
    """The six standard test meshes, keyed by name."""
    return {
        "plane": plane(),
        "icosphere": icosphere(3),
        "capsule": capsule(),
        "vgroove": vgroove(),
        "bumpy": bumpy_sphere(3),
        "torus": torus(),
    }

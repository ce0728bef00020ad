"""Small vector / quaternion helpers shared across the package.

Quaternions are stored as (w, x, y, z), matching the session file layout.
"""

from __future__ import annotations

import numpy as np


def unit(v, eps=1e-15):
    """Normalize v. Raises ValueError on (near-)zero input."""
    v = np.asarray(v, dtype=np.float64)
    n = np.linalg.norm(v)
    if n < eps:
        raise ValueError("cannot normalize near-zero vector")
    return v / n


def quat_normalize(q):
    q = np.asarray(q, dtype=np.float64)
    return q / np.linalg.norm(q)


def quat_rotate(q, v):
    """Rotate vector v by unit quaternion q = (w, x, y, z)."""
    q = np.asarray(q, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    w, u = q[0], q[1:]
    # Rodrigues form of q v q*; avoids building the 3x3 matrix.
    return v + 2.0 * np.cross(u, np.cross(u, v) + w * v)


def quat_to_matrix(q):
    """3x3 rotation matrix for unit quaternion q = (w, x, y, z)."""
    w, x, y, z = np.asarray(q, dtype=np.float64)
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def quat_from_two_vectors(a, b):
    """Unit quaternion rotating direction a onto direction b."""
    a = unit(a)
    b = unit(b)
    c = np.cross(a, b)
    d = float(np.dot(a, b))
    if d < -1.0 + 1e-12:
        # 180 degrees: any axis orthogonal to a works.
        axis = np.cross(a, [1.0, 0.0, 0.0])
        if np.linalg.norm(axis) < 1e-6:
            axis = np.cross(a, [0.0, 1.0, 0.0])
        axis = unit(axis)
        return np.array([0.0, axis[0], axis[1], axis[2]])
    q = np.empty(4)
    q[0] = 1.0 + d
    q[1:] = c
    return quat_normalize(q)


def rotation_between(a, b):
    """3x3 rotation taking direction a to direction b (minimal-angle)."""
    return quat_to_matrix(quat_from_two_vectors(a, b))


def slerp_dir(a, b, t):
    """Spherical interpolation between unit directions a and b.

    t=0 gives a, t=1 gives b. Raises ValueError for antipodal inputs,
    where the interpolation plane is undefined.
    """
    a = unit(a)
    b = unit(b)
    d = float(np.clip(np.dot(a, b), -1.0, 1.0))
    if d < -1.0 + 1e-9:
        raise ValueError("slerp undefined for antipodal directions")
    ang = np.arccos(d)
    if ang < 1e-12:
        return unit((1.0 - t) * a + t * b)
    s = np.sin(ang)
    return (np.sin((1.0 - t) * ang) / s) * a + (np.sin(t * ang) / s) * b


def rotation_angle(r_rel):
    """Rotation angle of a relative rotation matrix, in [0, pi]."""
    c = (np.trace(r_rel) - 1.0) * 0.5
    return float(np.arccos(np.clip(c, -1.0, 1.0)))

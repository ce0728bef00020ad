"""Quantitative stroke measures: accuracy, aesthetics, effort, filtering,
mimicry violation, repeat consistency and the signed-rank test.

Curve inputs are duck-typed: anything with `positions`, `points`, or a bare
(k, 3) array works.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.stats import rankdata

from .curves import arclengths, refine_on_surface, resample_polyline
from .geodesic import SurfacePath
from .mesh import TriMesh
from .vecmath import quat_rotate, rotation_angle, unit

RESAMPLE_COUNT = 101
NOISE_HOP = 0.05  # meters between consecutive mid-air samples
EFFORT_SIGMA = 0.020  # seconds


class MetricsError(Exception):
    pass


class Verdict(str, Enum):
    ACCEPTED = "accepted"
    SHORT = "short"
    NOISY = "noisy"
    INVERTED = "inverted"


def curve_positions(obj) -> np.ndarray:
    if isinstance(obj, np.ndarray):
        return np.asarray(obj, dtype=np.float64)
    if isinstance(obj, SurfacePath):
        return np.asarray(obj.points, dtype=np.float64)
    for attr in ("positions", "points"):
        val = getattr(obj, attr, None)
        if val is None:
            continue
        if isinstance(val, np.ndarray):
            return np.asarray(val, dtype=np.float64)
        return np.array([getattr(p, "position", p) for p in val],
                        dtype=np.float64)
    return np.asarray(obj, dtype=np.float64)


# ---------------------------------------------------------------------------
# Resampling and accuracy.
# ---------------------------------------------------------------------------

@dataclass
class ResampledCurve:
    points: np.ndarray
    length: float

    @property
    def m(self):
        return len(self.points)


def resample(curve, m: int = RESAMPLE_COUNT) -> ResampledCurve:
    """m points equi-spaced by arclength along the curve."""
    P = curve_positions(curve)
    if m < 2:
        raise MetricsError("m must be at least 2")
    L = float(arclengths(P)[-1]) if len(P) > 1 else 0.0
    if L <= 0.0:
        raise MetricsError("cannot resample a zero-length curve")
    return ResampledCurve(points=resample_polyline(P, m), length=L)


def _as_resampled(c, m=RESAMPLE_COUNT):
    return c if isinstance(c, ResampledCurve) else resample(c, m)


def d_ep(q, x) -> float:
    """Mean distance between same-index samples."""
    q = _as_resampled(q)
    x = _as_resampled(x)
    if q.m != x.m:
        raise MetricsError("sample counts differ")
    return float(np.mean(np.linalg.norm(q.points - x.points, axis=1)))


def d_sym(q, x) -> float:
    """Mean nearest-sample distance, averaged over both directions."""
    q = _as_resampled(q)
    x = _as_resampled(x)
    d = np.linalg.norm(q.points[:, None, :] - x.points[None, :, :], axis=2)
    return float(0.5 * d.min(axis=1).mean() + 0.5 * d.min(axis=0).mean())


# ---------------------------------------------------------------------------
# Aesthetics on the refined curve.
# ---------------------------------------------------------------------------

def _signed_angle(a, b, n):
    return float(np.arctan2(np.cross(a, b) @ n, a @ b))


def _vertex_at(mesh, f, p, eps):
    for v in mesh.faces[f]:
        if np.linalg.norm(mesh.vertices[v] - p) < eps:
            return int(v)
    return -1


def _vertex_edge_dirs(mesh, f, v):
    """Directions along the two edges of face f leaving vertex v."""
    others = [u for u in mesh.faces[f] if u != v]
    p = mesh.vertices[v]
    return [unit(mesh.vertices[u] - p) for u in others], others


def _fan_left_angle(mesh, v, f_in, f_out, u, w):
    """Surface angle at vertex v from the back direction to the outgoing
    one, swept through the side left of travel. None if the walk leaves
    the mesh through a boundary."""
    p = mesh.vertices[v]
    n_in = mesh.face_normals[f_in]
    left = np.cross(n_in, u)
    dirs, others = _vertex_edge_dirs(mesh, f_in, v)
    side = [d @ left for d in dirs]
    k = int(np.argmax(side))  # edge on the left of travel
    if f_in == f_out:
        return None  # same-face case is handled flat
    total = abs(_signed_angle(-u, dirs[k], n_in))
    cur, prev_other = f_in, others[k]
    for _ in range(64):
        e = None
        for ei in mesh.face_edges[cur]:
            a, b = mesh.edges[ei]
            if {a, b} == {v, prev_other}:
                e = ei
                break
        o1, o2 = mesh.edge_faces[e]
        nxt = int(o2 if o1 == cur else o1)
        if nxt < 0:
            return None
        if nxt == f_out:
            d_entry = unit(mesh.vertices[prev_other] - p)
            total += abs(_signed_angle(d_entry, w, mesh.face_normals[nxt]))
            return total
        dd, oo = _vertex_edge_dirs(mesh, nxt, v)
        j = 0 if oo[1] == prev_other else 1
        total += abs(_signed_angle(dd[0], dd[1], mesh.face_normals[nxt]))
        cur, prev_other = nxt, oo[j]
    return None


def _vertex_on_boundary(mesh, v):
    for f in mesh.vertex_faces(v):
        for e in mesh.face_edges[f]:
            if v in mesh.edges[e] and -1 in mesh.edge_faces[e]:
                return True
    return False


def _total_vertex_angle(mesh, v):
    tot = 0.0
    p = mesh.vertices[v]
    for f in mesh.vertex_faces(v):
        dirs, _ = _vertex_edge_dirs(mesh, f, v)
        tot += abs(_signed_angle(dirs[0], dirs[1], mesh.face_normals[f]))
    return tot


def geodesic_turning(mesh: TriMesh, path: SurfacePath) -> np.ndarray:
    """Signed deviation from the straightest direction at each interior
    path point (positive turns right of travel). Flat across faces and
    edges; cone-corrected at mesh vertices."""
    P = path.points
    segf = path.seg_faces
    m = len(P)
    out = np.zeros(m)
    eps = 1e-9 * mesh.bbox_diag
    for i in range(1, m - 1):
        a = P[i] - P[i - 1]
        b = P[i + 1] - P[i]
        if np.linalg.norm(a) < 1e-14 or np.linalg.norm(b) < 1e-14:
            continue
        u, w = unit(a), unit(b)
        f_in, f_out = int(segf[i - 1]), int(segf[i])
        v = _vertex_at(mesh, f_in, P[i], eps)
        if v >= 0 and f_in != f_out:
            # the cone normalization only makes sense at interior
            # vertices; on a boundary vertex the left fan spans the whole
            # opening and would report a straight pass as a U-turn
            if _vertex_on_boundary(mesh, v):
                n = unit(mesh.face_normals[f_in] + mesh.face_normals[f_out])
                out[i] = -_signed_angle(u, w, n)
                continue
            theta_left = _fan_left_angle(mesh, v, f_in, f_out, u, w)
            if theta_left is not None:
                total = _total_vertex_angle(mesh, v)
                out[i] = (2.0 * np.pi / total) * (theta_left - 0.5 * total)
                continue
        if f_in == f_out:
            out[i] = -_signed_angle(u, w, mesh.face_normals[f_in])
            continue
        shared = set(mesh.face_edges[f_in]) & set(mesh.face_edges[f_out])
        if shared:
            ei = shared.pop()
            e = mesh.vertices[mesh.edges[ei][1]] \
                - mesh.vertices[mesh.edges[ei][0]]
            e = unit(e) if e @ u >= 0 else -unit(e)
            psi = _signed_angle(u, e, mesh.face_normals[f_in]) \
                + _signed_angle(e, w, mesh.face_normals[f_out])
            out[i] = -float(np.arctan2(np.sin(psi), np.cos(psi)))
        else:
            # Disconnected hop; measure about the mean normal.
            n = unit(mesh.face_normals[f_in] + mesh.face_normals[f_out])
            out[i] = -_signed_angle(u, w, n)
    return out


def aesthetics(mesh: TriMesh, refined: SurfacePath, target_length: float):
    """(K_E, K_g, F_g): total turning, total surface turning, and surface
    turning variation, each normalized by the target curve length."""
    P = np.asarray(refined.points, dtype=np.float64)
    if len(P) < 3:
        raise MetricsError("need at least three points")
    if target_length <= 0:
        raise MetricsError("target length must be positive")
    faces = list(refined.seg_faces) + [refined.seg_faces[-1]]
    for i, f in enumerate(faces):
        tri = mesh.face_corners(int(f))
        n = mesh.face_normals[int(f)]
        if abs((P[i] - tri[0]) @ n) > 1e-6 * mesh.bbox_diag:
            raise MetricsError("curve point %d is off the surface" % i)
    seg = np.diff(P, axis=0)
    ln = np.linalg.norm(seg, axis=1)
    k_e = 0.0
    for i in range(len(seg) - 1):
        if ln[i] < 1e-14 or ln[i + 1] < 1e-14:
            continue
        c = float(seg[i] @ seg[i + 1]) / (ln[i] * ln[i + 1])
        k_e += float(np.arccos(np.clip(c, -1.0, 1.0)))
    tg = geodesic_turning(mesh, refined)
    inner = tg[1:-1]
    k_g = float(np.sum(np.abs(inner)))
    f_g = float(np.sum(np.abs(np.diff(inner)))) if len(inner) > 1 else 0.0
    return k_e / target_length, k_g / target_length, f_g / target_length


# ---------------------------------------------------------------------------
# Effort.
# ---------------------------------------------------------------------------

def _session_samples(session):
    return getattr(session, "samples", session)


def _gauss_filter(t, X, sigma):
    """Per-sample Gaussian average over a +-3 sigma time window; the kernel
    is renormalized over the samples present (no padding)."""
    t = np.asarray(t, dtype=np.float64)
    X = np.asarray(X, dtype=np.float64)
    out = np.empty_like(X)
    for i in range(len(t)):
        lo = np.searchsorted(t, t[i] - 3.0 * sigma)
        hi = np.searchsorted(t, t[i] + 3.0 * sigma, side="right")
        w = np.exp(-0.5 * ((t[lo:hi] - t[i]) / sigma) ** 2)
        out[i] = (w[:, None] * X[lo:hi]).sum(axis=0) / w.sum()
    return out


def _polyline_length(P):
    if len(P) < 2:
        return 0.0
    return float(np.sum(np.linalg.norm(np.diff(P, axis=0), axis=1)))


def _rotation_length(t, quats, sigma):
    fwd = np.array([quat_rotate(q, [0.0, 0.0, 1.0]) for q in quats])
    up = np.array([quat_rotate(q, [0.0, 1.0, 0.0]) for q in quats])
    fwd = _gauss_filter(t, fwd, sigma)
    up = _gauss_filter(t, up, sigma)
    total = 0.0
    prev = None
    for f, u in zip(fwd, up):
        f = unit(f)
        u = u - (u @ f) * f
        u = unit(u)
        M = np.stack([f, u, np.cross(f, u)], axis=1)
        if prev is not None:
            total += rotation_angle(prev.T @ M)
        prev = M
    return total


def effort(session, target_length: float):
    """(T_h, T_c, R_h, R_c, tau): smoothed head/controller path lengths and
    orientation path lengths per meter of target, plus execution time."""
    samples = list(_session_samples(session))
    if len(samples) < 2:
        raise MetricsError("need at least two samples")
    t = np.array([s.t for s in samples])
    if np.any(np.diff(t) <= 0):
        raise MetricsError("timestamps must strictly increase")
    if target_length <= 0:
        raise MetricsError("target length must be positive")
    hp = _gauss_filter(t, np.array([s.head_pos for s in samples]),
                       EFFORT_SIGMA)
    cp = _gauss_filter(t, np.array([s.ctrl_pos for s in samples]),
                       EFFORT_SIGMA)
    t_h = _polyline_length(hp) / target_length
    t_c = _polyline_length(cp) / target_length
    r_h = _rotation_length(t, [s.head_orient for s in samples],
                           EFFORT_SIGMA) / target_length
    r_c = _rotation_length(t, [s.ctrl_orient for s in samples],
                           EFFORT_SIGMA) / target_length
    return t_h, t_c, r_h, r_c, float(t[-1] - t[0])


# ---------------------------------------------------------------------------
# Mimicry violation, filtering, consistency.
# ---------------------------------------------------------------------------

def mimicry_violation(stroke, target, m: int = RESAMPLE_COUNT) -> float:
    """Spread of the same-index distances between the stroke and target,
    as a fraction of the target length. Zero for a pure translation."""
    p = _as_resampled(stroke, m)
    x = _as_resampled(target, m)
    d = np.linalg.norm(p.points - x.points, axis=1)
    return float((d.max() - d.min()) / x.length)


def count_inversions(seq) -> int:
    seq = list(seq)
    return sum(
        1
        for j in range(len(seq))
        for k in range(j + 1, len(seq))
        if seq[j] > seq[k]
    )


def filter_stroke(session, projected, target) -> Verdict:
    """First failing test wins: too short, then jumpy mid-air samples,
    then keypoints visited mostly in reverse order."""
    Q = curve_positions(projected)
    X = curve_positions(target)
    if _polyline_length(Q) < 0.5 * _polyline_length(X):
        return Verdict.SHORT
    P = np.array([s.ctrl_pos for s in _session_samples(session)])
    if len(P) > 1 and np.max(
        np.linalg.norm(np.diff(P, axis=0), axis=1)
    ) > NOISE_HOP:
        return Verdict.NOISY
    kp = list(target.keypoints)
    key_pts = X[kp]
    d = np.linalg.norm(Q[:, None, :] - key_pts[None, :, :], axis=2)
    idx = d.argmin(axis=0)
    last = len(kp) - 1
    if count_inversions(idx) > last * (last + 1) / 4.0:
        return Verdict.INVERTED
    return Verdict.ACCEPTED


def consistency(f_orig: float, f_repeat: float) -> float:
    """Relative change against the original value (not symmetric)."""
    if f_orig == 0:
        raise MetricsError("original value is zero")
    return abs(f_orig - f_repeat) / abs(f_orig)


# ---------------------------------------------------------------------------
# Wilcoxon signed-rank test.
# ---------------------------------------------------------------------------

def _exact_cdf_at(ranks2, w2):
    """P(W <= w) for rank sums under random signs; ranks doubled so that
    midranks become integers."""
    total = int(np.sum(ranks2))
    counts = np.zeros(total + 1, dtype=np.float64)
    counts[0] = 1.0
    for r in ranks2:
        r = int(r)
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[: total + 1 - r]
        counts = counts + shifted
    counts /= counts.sum()
    return float(counts[: int(w2) + 1].sum())


def wilcoxon_signed_rank(pairs):
    """Two-sided signed-rank test over (a, b) pairs.

    Zero differences are dropped and ties midranked. Up to 25 usable
    pairs the p-value enumerates every sign assignment; beyond that a
    normal approximation with tie-corrected variance and continuity
    correction is used. z is positive when a tends to exceed b.
    """
    arr = np.asarray(pairs, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise MetricsError("pairs must be (n, 2)")
    d = arr[:, 0] - arr[:, 1]
    d = d[d != 0.0]
    n = len(d)
    if n == 0:
        raise MetricsError("all differences are zero")
    ranks = rankdata(np.abs(d))
    w_pos = float(ranks[d > 0].sum())
    w_neg = float(ranks[d < 0].sum())
    mean = n * (n + 1) / 4.0
    var = n * (n + 1) * (2 * n + 1) / 24.0
    _, tie_counts = np.unique(np.abs(d), return_counts=True)
    var -= float(np.sum(tie_counts**3 - tie_counts)) / 48.0
    if var <= 0:
        raise MetricsError("degenerate variance (all ranks tied away)")
    delta = w_pos - mean
    cc = 0.5 if delta > 0 else (-0.5 if delta < 0 else 0.0)
    z = (w_pos - mean - cc) / np.sqrt(var)
    if n <= 25:
        ranks2 = np.rint(2.0 * ranks).astype(np.int64)
        w2 = np.rint(2.0 * min(w_pos, w_neg))
        p = min(1.0, 2.0 * _exact_cdf_at(ranks2, w2))
    else:
        from scipy.stats import norm
        p = 2.0 * float(norm.sf(abs(z)))
    return p, float(z)


# ---------------------------------------------------------------------------
# Report bundle.
# ---------------------------------------------------------------------------

CSV_COLUMNS = [
    "d_ep", "d_sym", "k_e", "k_g", "f_g",
    "t_h", "t_c", "r_h", "r_c", "tau",
    "mimicry_violation", "verdict",
]


@dataclass
class MetricReport:
    """One stroke's measures.  Accuracy fields are None when no target
    curve was available; those render as empty CSV cells."""

    d_ep: float | None
    d_sym: float | None
    k_e: float
    k_g: float
    f_g: float
    t_h: float
    t_c: float
    r_h: float
    r_c: float
    tau: float
    mimicry_violation: float | None
    verdict: Verdict | None

    def to_row(self):
        vals = [getattr(self, c) for c in CSV_COLUMNS[:-1]]
        row = ["" if v is None else "%.9g" % v for v in vals]
        return row + [self.verdict.value if self.verdict is not None else ""]

    def to_json(self):
        doc = {c: getattr(self, c) for c in CSV_COLUMNS[:-1]}
        doc["verdict"] = self.verdict.value if self.verdict is not None else None
        return json.dumps(doc)

    @staticmethod
    def csv_header():
        return ",".join(CSV_COLUMNS)

    def to_csv(self):
        return ",".join(self.to_row())


def stroke_report(mesh, session, projected, target=None, refined=None,
                  solver=None) -> MetricReport:
    """All measures for one stroke.  Without a target the report is
    restricted to aesthetics and effort, normalised by the projected
    curve's own length."""
    if refined is None:
        refined = refine_on_surface(mesh, projected, solver)
    if target is not None:
        L = float(arclengths(curve_positions(target))[-1])
    else:
        L = float(arclengths(refined.points)[-1])
        if L <= 0.0:
            raise MetricsError("projected curve has zero length")
    k_e, k_g, f_g = aesthetics(mesh, refined, L)
    t_h, t_c, r_h, r_c, tau = effort(session, L)
    if target is None:
        return MetricReport(
            d_ep=None, d_sym=None,
            k_e=k_e, k_g=k_g, f_g=f_g,
            t_h=t_h, t_c=t_c, r_h=r_h, r_c=r_c, tau=tau,
            mimicry_violation=None, verdict=None,
        )
    stroke = np.array([s.ctrl_pos for s in _session_samples(session)])
    return MetricReport(
        d_ep=d_ep(projected, target),
        d_sym=d_sym(projected, target),
        k_e=k_e, k_g=k_g, f_g=f_g,
        t_h=t_h, t_c=t_c, r_h=r_h, r_c=r_c, tau=tau,
        mimicry_violation=mimicry_violation(stroke, target),
        verdict=filter_stroke(session, projected, target),
    )

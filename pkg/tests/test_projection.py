import numpy as np
import pytest

from surfink import meshes as meshlib
from surfink.curves import arclengths
from surfink.projection import (
    Method,
    StrokeCursor,
    StrokeProjector,
    SystemState,
    anchor,
    anchored_raycast_step,
    hybrid_ray_direction,
    mimicry_offset_step,
    mimicry_parallel_step,
    mimicry_planar_step,
    mimicry_step,
    project_contextfree,
    project_stroke,
)
from surfink.vecmath import quat_from_two_vectors, unit

IDQ = np.array([1.0, 0.0, 0.0, 0.0])
Z = np.array([0.0, 0.0, 1.0])
DOWN = quat_from_two_vectors(Z, -Z)


def st(c, h=(0.0, 0.0, 2.0), cq=None, hq=None, t=0.0):
    return SystemState(
        np.asarray(h, dtype=np.float64),
        IDQ if hq is None else hq,
        np.asarray(c, dtype=np.float64),
        IDQ if cq is None else cq,
        t,
    )


def stroke_states(points, cq=None, h=(0.0, 0.0, 2.0)):
    return [
        st(p, h=h, cq=cq, t=0.02 * i) for i, p in enumerate(points)
    ]


# -- context-free projections ------------------------------------------------


def test_occlude_collinear(get_mesh):
    sp = project_contextfree(
        Method.OCCLUDE, st((0, 0, 1.0), h=(0, 0, 2.0)), get_mesh("plane8")
    )
    assert np.allclose(sp.position, [0, 0, 0], atol=1e-12)


def test_spraycan_straight_down(get_mesh):
    sp = project_contextfree(
        Method.SPRAYCAN, st((0.25, 0.25, 1.0), cq=DOWN), get_mesh("plane8")
    )
    assert np.allclose(sp.position, [0.25, 0.25, 0], atol=1e-12)


def test_spraycan_parallel_misses(get_mesh):
    side = quat_from_two_vectors(Z, np.array([1.0, 0.0, 0.0]))
    sp = project_contextfree(
        Method.SPRAYCAN, st((0.25, 0.25, 1.0), cq=side), get_mesh("plane8")
    )
    assert sp is None


def test_snap_is_closest_point(get_mesh):
    sp = project_contextfree(
        Method.SNAP, st((0.2, 0.3, 0.7)), get_mesh("plane8")
    )
    assert np.allclose(sp.position, [0.2, 0.3, 0], atol=1e-12)


def test_head_ray_from_controller(get_mesh):
    sp = project_contextfree(
        Method.HEAD_CENTRIC,
        st((0.3, 0.4, 1.0), h=(0.3, 0.4, 2.0), hq=DOWN),
        get_mesh("plane8"),
    )
    assert np.allclose(sp.position, [0.3, 0.4, 0], atol=1e-12)


def test_scp_method_on_plane(get_mesh, get_smap):
    sp = project_contextfree(
        Method.SCP,
        st((0.1, -0.2, 0.05)),
        get_mesh("plane8"),
        get_smap("plane8"),
    )
    assert np.allclose(sp.position, [0.1, -0.2, 0.0], atol=1e-8)


def test_hybrid_equal_directions_identity():
    s = st((0.0, 0.0, 1.0), h=(0.0, 0.0, 2.0), cq=DOWN)
    # occlude ray (head->ctrl) and nozzle both point straight down
    d = hybrid_ray_direction(s, last_normal=-unit(np.array([0, 0, 1.0])))
    assert np.allclose(d, [0, 0, -1], atol=1e-12)


def test_hybrid_zero_weight_limit():
    # spraycan nozzle anti-aligned with the last normal gets zero weight,
    # occlude aligned gets full weight: the occlude ray must come back
    s = st((0.5, 0.0, 1.0), h=(0.0, 0.0, 1.0), cq=DOWN)
    d_occ = unit(np.array([0.5, 0.0, 0.0]))
    d = hybrid_ray_direction(s, last_normal=d_occ)
    assert np.allclose(d, d_occ, atol=1e-12)


# -- anchoring algebra -------------------------------------------------------


def _cursor_at(mesh, q_pos, p_prev):
    return StrokeCursor(
        q_prev=mesh.closest_point(np.asarray(q_pos, dtype=np.float64)),
        p_prev=np.asarray(p_prev, dtype=np.float64),
    )


def test_anchor_zero_displacement(get_mesh):
    cur = _cursor_at(get_mesh("plane8"), [0.1, 0.1, 0], [0.3, 0.3, 0.8])
    r = anchor(cur, np.array([0.3, 0.3, 0.8]))
    assert np.allclose(r, cur.q_prev.position, atol=1e-12)


def test_anchor_vector_addition(get_mesh):
    cur = _cursor_at(get_mesh("plane8"), [0, 0, 0], [0, 0, 1.0])
    r = anchor(cur, np.array([0.01, 0.0, 1.0]))
    assert np.allclose(r, [0.01, 0, 0], atol=1e-12)


def test_anchor_translation_invariance(get_mesh, rng):
    m = get_mesh("plane8")
    v = rng.normal(size=3)
    q = m.closest_point(np.array([0.2, -0.1, 0.0]))
    p_prev = np.array([0.3, 0.1, 0.6])
    p_i = np.array([0.33, 0.12, 0.61])
    r1 = anchor(StrokeCursor(q_prev=q, p_prev=p_prev), p_i)
    r2 = anchor(StrokeCursor(q_prev=q, p_prev=p_prev + v), p_i + v)
    assert np.allclose(r1, r2, atol=1e-12)


def test_mimicry_step_plane_drops_z(get_mesh, get_smap):
    m = get_mesh("plane8")
    cur = _cursor_at(m, [0, 0, 0], [0, 0, 1.0])
    q = mimicry_step(cur, st((0.01, 0.02, 1.5)), m, get_smap("plane8"))
    assert np.allclose(q.position, [0.01, 0.02, 0], atol=1e-12)


def test_mimicry_step_zero_displacement_fixed_point(get_mesh, get_smap):
    m = get_mesh("plane8")
    cur = _cursor_at(m, [0.15, -0.2, 0], [0.4, 0.4, 0.9])
    q = mimicry_step(cur, st((0.4, 0.4, 0.9)), m, get_smap("plane8"))
    assert np.allclose(q.position, cur.q_prev.position, atol=1e-12)


def test_mimicry_on_surface_stroke_identity(get_mesh, get_smap):
    m = get_mesh("plane8")
    pts = [(x, 0.4 * x, 0.0) for x in np.linspace(-0.3, 0.3, 25)]
    curve = project_stroke(
        stroke_states(pts, cq=DOWN), Method.MIMICRY, m, get_smap("plane8")
    )
    assert not curve.skipped
    for q, p in zip(curve.points, pts):
        assert np.linalg.norm(q.position - p) <= 1e-6 * m.bbox_diag


def test_offset_step_tangential_rejection_exact(get_mesh, get_smap):
    # gradient on the plane is exactly +z, so the radial part of the
    # stroke motion must be fully removed and the tangential part kept
    m = get_mesh("plane8")
    smap = get_smap("plane8")
    cur = _cursor_at(m, [0.0, 0.0, 0.0], [0.0, 0.0, 0.3])
    q, flag = mimicry_offset_step(
        cur, st((0.05, 0.1, 0.45)), m, smap
    )
    assert flag is None
    assert np.allclose(q.position, [0.05, 0.1, 0.0], atol=1e-12)


def test_offset_step_pure_radial_no_motion(get_mesh, get_smap):
    m = get_mesh("plane8")
    cur = _cursor_at(m, [0.1, 0.1, 0.0], [0.1, 0.1, 0.2])
    q, flag = mimicry_offset_step(cur, st((0.1, 0.1, 0.5)), m,
                                  get_smap("plane8"))
    assert flag is None
    assert np.allclose(q.position, cur.q_prev.position, atol=1e-12)


def test_offset_step_tangential_equals_plain_anchor(get_mesh, get_smap):
    m = get_mesh("plane8")
    smap = get_smap("plane8")
    cur1 = _cursor_at(m, [0.0, -0.1, 0.0], [0.2, 0.2, 0.4])
    cur2 = _cursor_at(m, [0.0, -0.1, 0.0], [0.2, 0.2, 0.4])
    s = st((0.26, 0.13, 0.4))  # purely tangential motion
    q_off, _ = mimicry_offset_step(cur1, s, m, smap)
    q_mim = mimicry_step(cur2, s, m, smap)
    assert np.allclose(q_off.position, q_mim.position, atol=1e-12)


def test_parallel_equals_offset_on_plane(get_mesh, get_smap, rng):
    # the sd gradient is uniform over a plane, so evaluation point cannot
    # matter: both variants must agree on any stroke
    m = get_mesh("plane8")
    smap = get_smap("plane8")
    for _ in range(10):
        qp = np.array([rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4), 0.0])
        pp = qp + np.array([0, 0, rng.uniform(0.1, 0.5)])
        pi = pp + rng.normal(scale=0.03, size=3)
        s = st(pi)
        q1, f1 = mimicry_offset_step(
            StrokeCursor(q_prev=m.closest_point(qp), p_prev=pp), s, m, smap
        )
        q2, f2 = mimicry_parallel_step(
            StrokeCursor(q_prev=m.closest_point(qp), p_prev=pp), s, m, smap
        )
        assert f1 is None and f2 is None
        assert np.allclose(q1.position, q2.position, atol=1e-12)


def test_offset_and_parallel_gradient_evaluation_points(get_mesh, get_smap):
    # above a sphere pole the offset variant reads the gradient at the
    # stroke sample, the parallel variant at the anchor; with the stroke
    # sample on the polar axis the offset gradient is exactly radial
    m = get_mesh("icosphere")
    smap = get_smap("icosphere")
    pole = m.closest_point(np.array([0.0, 0.0, 1.2]))
    cur = StrokeCursor(q_prev=pole, p_prev=np.array([0.0, 0.0, 1.2]))
    s = st((0.0, 0.0, 1.30))  # purely radial stroke motion
    q_off, _ = mimicry_offset_step(cur, s, m, smap)
    assert np.linalg.norm(q_off.position - pole.position) < 1e-6


def test_planar_step_fixed_plane_circle(get_mesh, get_smap):
    # stroke confined to the y=0.2 plane over a sphere: every projected
    # point stays in one plane
    m = get_mesh("icosphere")
    n = 40
    ang = np.linspace(-0.5, 0.5, n)
    pts = [(1.3 * np.sin(a), 0.2, 1.3 * np.cos(a)) for a in ang]
    curve = project_stroke(
        stroke_states(pts, cq=DOWN), Method.MIMICRY_PLANAR, m,
        get_smap("icosphere"),
    )
    ys = np.array([q.position[1] for q in curve.points[2:]])
    assert np.ptp(ys) < 1e-6


def test_planar_step_collinear_reuses_normal(get_mesh):
    m = get_mesh("plane8")
    n = np.array([0.0, 1.0, 0.0])
    cur = StrokeCursor(
        q_prev=m.closest_point(np.array([0.0, 0.0, 0.0])),
        p_prev=np.array([0.0, 0.0, 0.3]),
        dp_prev=np.array([0.01, 0.0, 0.0]),
        plane_normal=n,
    )
    # collinear displacement: cross(dp, dp_prev) = 0, stored normal reused
    q, n_out, flag = mimicry_planar_step(cur, st((0.02, 0.0, 0.3)), m)
    assert np.allclose(np.abs(n_out), np.abs(n), atol=1e-12)
    assert flag is None


def test_planar_step_normal_sign_invariance(get_mesh):
    m = get_mesh("plane8")
    out = []
    for sgn in (1.0, -1.0):
        cur = StrokeCursor(
            q_prev=m.closest_point(np.array([0.0, 0.0, 0.0])),
            p_prev=np.array([0.0, 0.0, 0.3]),
            plane_normal=sgn * np.array([0.0, 1.0, 0.0]),
        )
        q, _, _ = mimicry_planar_step(cur, st((0.05, 0.0, 0.3)), m)
        out.append(q.position)
    assert np.allclose(out[0], out[1], atol=1e-12)


def test_localplane_translates_stroke_to_plane(get_mesh):
    m = get_mesh("plane8")
    pts = [(x, 0.1, 0.3) for x in np.linspace(-0.3, 0.3, 20)]
    curve = project_stroke(stroke_states(pts, cq=DOWN),
                           Method.RAY_LOCAL_PLANE, m)
    assert not curve.skipped
    for q, p in zip(curve.points, pts):
        assert np.allclose(q.position, [p[0], p[1], 0.0], atol=1e-9)


def test_transport_identity_rotation(get_mesh):
    m = get_mesh("plane8")
    cur = StrokeCursor(
        q_prev=m.closest_point(np.array([0.0, 0.0, 0.0])),
        p_prev=np.array([0.0, 0.0, 0.3]),
        dp_prev=np.array([0.01, 0.0, 0.0]),
        ray_dir=np.array([0.0, 0.0, -1.0]),
    )
    q, d = anchored_raycast_step(
        Method.RAY_TRANSPORT, cur, st((0.01, 0.0, 0.3)), m
    )
    assert np.allclose(d, [0.0, 0.0, -1.0], atol=1e-12)
    assert q is not None


def test_raycast_miss_skips_and_curve_connects(get_mesh):
    # walk off the edge of the open plane: rays miss, samples skip, and
    # the curve keeps collecting once the stroke comes back
    m = get_mesh("plane8")
    xs = list(np.linspace(0.3, 0.8, 12)) + list(np.linspace(0.8, 0.4, 10))
    pts = [(x, 0.0, 0.3) for x in xs]
    curve = project_stroke(stroke_states(pts, cq=DOWN),
                           Method.RAY_LOCAL_PLANE, m)
    assert curve.skipped  # off-mesh span
    assert len(curve.points) + len(curve.skipped) == len(pts)
    for q in curve.points:
        assert abs(q.position[0]) <= 0.5 + 1e-9


# -- whole-stroke behavior ---------------------------------------------------


def test_single_sample_mimicry_equals_spraycan(get_mesh, get_smap):
    m = get_mesh("plane8")
    s = st((0.2, -0.1, 0.8), cq=DOWN)
    mim = project_stroke([s], Method.MIMICRY, m, get_smap("plane8"))
    spray = project_contextfree(Method.SPRAYCAN, s, m)
    assert len(mim.points) == 1
    assert np.allclose(mim.points[0].position, spray.position, atol=1e-12)


@pytest.mark.parametrize("method", list(Method))
def test_on_surface_stroke_all_methods(get_mesh, get_smap, method):
    # a stroke drawn on the surface itself converges for every method;
    # the anchored ray variants need an epsilon of standoff because their
    # ray direction comes from the stroke-to-surface offset
    m = get_mesh("plane8")
    ray_variants = (Method.RAY_LOCAL_PLANE, Method.RAY_TRANSPORT)
    lift = 1e-4 if method in ray_variants else 0.0
    tol = 1e-3 * m.bbox_diag if method in ray_variants \
        else 1e-6 * m.bbox_diag
    xs = np.linspace(-0.25, 0.25, 15)
    pts = [(x, 0.2 * x, lift) for x in xs]
    # the head hovers over each sample looking down so the view ray and
    # the head nozzle both pass through the sample
    states = [
        st(p, h=(p[0], p[1], 2.0), cq=DOWN, hq=DOWN, t=0.02 * i)
        for i, p in enumerate(pts)
    ]
    curve = project_stroke(states, method, m, get_smap("plane8"))
    assert not curve.skipped
    for q, p in zip(curve.points, pts):
        on_plane = np.array([p[0], p[1], 0.0])
        assert np.linalg.norm(q.position - on_plane) <= tol


def test_planar_reduction_on_plane(get_mesh, get_smap):
    # on a plane every mimicry flavor degenerates to the same projection
    m = get_mesh("plane8")
    smap = get_smap("plane8")
    rng = np.random.default_rng(7)
    base = np.array([0.0, 0.0, 0.35])
    pts = [base]
    for _ in range(30):
        pts.append(pts[-1] + rng.normal(scale=0.015, size=3))
    curves = {
        meth: project_stroke(stroke_states(pts, cq=DOWN), meth, m, smap)
        for meth in (Method.MIMICRY, Method.MIMICRY_OFFSET,
                     Method.MIMICRY_PARALLEL)
    }
    ref = curves[Method.MIMICRY]
    for meth, cur in curves.items():
        assert len(cur.points) == len(ref.points)
        for qa, qb in zip(cur.points, ref.points):
            assert np.allclose(qa.position, qb.position, atol=1e-9)


def test_sphere_arc_length_preserved(get_mesh, get_smap):
    # anchoring replays stroke displacements, so the inked curve keeps
    # the stroke's arc length even though it wraps further around the
    # sphere than the subtended angle
    m = get_mesh("icosphere")
    smap = get_smap("icosphere")
    n = 80
    ang = np.linspace(0.0, np.pi / 2, n)
    pts = [(1.2 * np.sin(a), 0.0, 1.2 * np.cos(a)) for a in ang]
    curve = project_stroke(stroke_states(pts, cq=DOWN), Method.MIMICRY, m,
                           smap)
    L_stroke = 1.2 * np.pi / 2
    L_curve = arclengths([q.position for q in curve.points])[-1]
    assert L_curve == pytest.approx(L_stroke, rel=0.02)


def test_timestamps_must_increase(get_mesh, get_smap):
    m = get_mesh("plane8")
    proj = StrokeProjector(m, Method.MIMICRY, get_smap("plane8"))
    proj.feed(st((0.0, 0.0, 0.3), t=0.0))
    with pytest.raises(ValueError):
        proj.feed(st((0.01, 0.0, 0.3), t=0.0))
    # the cursor survives a rejected sample untouched
    q = proj.feed(st((0.01, 0.0, 0.3), t=0.1))
    assert q is not None


def test_fixed_q0_overrides_bootstrap(get_mesh, get_smap):
    m = get_mesh("plane8")
    q0 = m.closest_point(np.array([-0.2, -0.2, 0.0]))
    pts = [(0.1 * i, 0.0, 0.4) for i in range(5)]
    curve = project_stroke(
        stroke_states(pts, cq=DOWN), Method.MIMICRY, m,
        get_smap("plane8"), fixed_q0=q0,
    )
    assert np.allclose(curve.points[0].position, q0.position, atol=1e-9)


def test_streamed_equals_batch(get_mesh, get_smap):
    m = get_mesh("plane8")
    smap = get_smap("plane8")
    rng = np.random.default_rng(3)
    pts = [np.array([0.0, 0.0, 0.3])]
    for _ in range(40):
        pts.append(pts[-1] + rng.normal(scale=0.02, size=3))
    states = stroke_states(pts, cq=DOWN)
    batch = project_stroke(states, Method.MIMICRY, m, smap)
    proj = StrokeProjector(m, Method.MIMICRY, smap)
    for s in states:
        proj.feed(s)
    stream = proj.finish()
    assert len(stream.points) == len(batch.points)
    for qa, qb in zip(stream.points, batch.points):
        assert qa.face == qb.face
        assert np.array_equal(qa.position, qb.position)


def test_times_ms_recorded(get_mesh, get_smap):
    m = get_mesh("plane8")
    pts = [(0.02 * i, 0.0, 0.3) for i in range(10)]
    curve = project_stroke(stroke_states(pts, cq=DOWN), Method.MIMICRY, m,
                           get_smap("plane8"))
    assert len(curve.times_ms) == len(curve.points)
    assert all(t >= 0.0 for t in curve.times_ms)

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hst
from scipy.stats import wilcoxon as scipy_wilcoxon

from surfink.geodesic import SurfacePath
from surfink.curves import arclengths, refine_on_surface
from surfink.metrics import (
    CSV_COLUMNS,
    MetricReport,
    MetricsError,
    Verdict,
    aesthetics,
    consistency,
    count_inversions,
    d_ep,
    d_sym,
    effort,
    filter_stroke,
    mimicry_violation,
    resample,
    stroke_report,
    wilcoxon_signed_rank,
)
from surfink.mesh import TriMesh
from surfink.projection import Method, SystemState, project_stroke

from .oracles import brute_inversions, resample_chords, wilcoxon_brute

IDQ = np.array([1.0, 0.0, 0.0, 0.0])


def _quat_z(angle):
    return np.array([np.cos(angle / 2), 0.0, 0.0, np.sin(angle / 2)])


def _states(ctrl, head=(0.0, 0.0, 2.0), t0=0.0, dt=0.02, cq=None):
    head = np.asarray(head, dtype=np.float64)
    out = []
    for i, c in enumerate(np.asarray(ctrl, dtype=np.float64)):
        q = IDQ if cq is None else cq[i]
        out.append(SystemState(head, IDQ, c, q, t0 + dt * i))
    return out


def _flat_path(points):
    # on a flat mesh every face shares the plane, so one id serves
    P = np.asarray(points, dtype=np.float64)
    return SurfacePath(
        P,
        np.zeros(len(P) - 1, dtype=np.int64),
        np.full(len(P), -1, dtype=np.int64),
    )


def _zigzag(midpoints=False, n_seg=5, seg=0.2, half=np.pi / 12):
    # five 0.2 m legs, heading alternating +-15 deg: four 30 deg bends
    # over exactly one metre of ink
    p = np.array([-0.483, 0.0, 0.0])
    pts = [p]
    for i in range(n_seg):
        a = half if i % 2 == 0 else -half
        d = np.array([np.cos(a), np.sin(a), 0.0])
        if midpoints:
            pts.append(p + 0.5 * seg * d)
        p = p + seg * d
        pts.append(p)
    return np.array(pts)


class _Curve:
    """Bare target stand-in: a polyline plus keypoint indices."""

    def __init__(self, positions, keypoints):
        self.positions = np.asarray(positions, dtype=np.float64)
        self.keypoints = list(keypoints)


# -- resampling --------------------------------------------------------------


def test_resample_straight_line_is_uniform():
    P = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    r = resample(P, 5)
    assert r.length == pytest.approx(1.0, abs=1e-15)
    assert np.allclose(r.points[:, 2], np.linspace(0.0, 1.0, 5), atol=1e-15)


def test_resample_matches_chord_oracle(rng):
    P = np.cumsum(rng.normal(size=(17, 3)), axis=0)
    r = resample(P, 101)
    assert np.allclose(r.points, resample_chords(P, 101), atol=1e-12)


def test_resample_rejects_degenerate_input():
    with pytest.raises(MetricsError):
        resample(np.zeros((4, 3)), 101)
    with pytest.raises(MetricsError):
        resample(np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]), 1)


# -- endpoint and symmetric distance ----------------------------------------


def test_d_ep_identical_curves_is_zero(rng):
    P = np.cumsum(rng.normal(size=(12, 3)), axis=0)
    assert d_ep(P, P.copy()) == 0.0
    assert d_sym(P, P.copy()) == 0.0


def test_d_ep_pure_translation_gives_offset_norm(rng):
    P = np.cumsum(rng.normal(size=(12, 3)), axis=0)
    c = np.array([0.3, -0.1, 0.25])
    assert d_ep(P + c, P) == pytest.approx(np.linalg.norm(c), rel=1e-12)
    assert d_sym(P + c, P) <= np.linalg.norm(c) + 1e-12


def test_d_ep_matches_brute_resample(rng):
    P = np.cumsum(rng.normal(size=(9, 3)), axis=0)
    Q = np.cumsum(rng.normal(size=(14, 3)), axis=0)
    rp = resample_chords(P, 101)
    rq = resample_chords(Q, 101)
    want = np.mean(np.linalg.norm(rp - rq, axis=1))
    assert d_ep(P, Q) == pytest.approx(want, rel=1e-12)
    dm = np.linalg.norm(rp[:, None, :] - rq[None, :, :], axis=2)
    want_sym = 0.5 * dm.min(axis=1).mean() + 0.5 * dm.min(axis=0).mean()
    assert d_sym(P, Q) == pytest.approx(want_sym, rel=1e-12)


def test_d_sym_forgives_reversed_direction(rng):
    P = np.cumsum(rng.normal(size=(20, 3)), axis=0)
    assert d_ep(P[::-1], P) > 0.1
    assert d_sym(P[::-1], P) < 1e-9


def test_d_sym_is_symmetric(rng):
    P = np.cumsum(rng.normal(size=(8, 3)), axis=0)
    Q = np.cumsum(rng.normal(size=(11, 3)), axis=0)
    assert d_sym(P, Q) == d_sym(Q, P)


def test_distance_rejects_mismatched_sample_counts():
    P = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
    with pytest.raises(MetricsError):
        d_ep(resample(P, 51), resample(P, 101))


# -- aesthetics --------------------------------------------------------------


def test_zigzag_turning_totals(get_mesh):
    m = get_mesh("plane8")
    k_e, k_g, f_g = aesthetics(m, _flat_path(_zigzag()), 1.0)
    assert k_e == pytest.approx(2.0 * np.pi / 3.0, abs=1e-9)
    assert k_g == pytest.approx(2.0 * np.pi / 3.0, abs=1e-9)
    # corner-to-corner sign flips: three jumps of pi/3
    assert f_g == pytest.approx(np.pi, abs=1e-9)


def test_fairness_doubles_turning_with_straight_gaps(get_mesh):
    # a zero-turn sample between corners makes every corner count twice
    # in the variation
    m = get_mesh("plane8")
    k_e, k_g, f_g = aesthetics(m, _flat_path(_zigzag(midpoints=True)), 1.0)
    assert k_e == pytest.approx(2.0 * np.pi / 3.0, abs=1e-9)
    assert f_g == pytest.approx(2.0 * k_g, rel=1e-9)


def test_straight_line_has_no_turning(get_mesh):
    m = get_mesh("plane8")
    xs = np.linspace(-0.4, 0.4, 9)
    P = np.stack([xs, np.zeros(9), np.zeros(9)], axis=1)
    k_e, k_g, f_g = aesthetics(m, _flat_path(P), 0.8)
    assert k_e <= 1e-7 and k_g <= 1e-7 and f_g <= 1e-7


def test_geodesics_have_no_surface_turning(get_mesh, get_solver, rng):
    m = get_mesh("icosphere")
    solver = get_solver("icosphere")
    for _ in range(5):
        a, b = rng.integers(0, m.n_vertices, size=2)
        if a == b:
            continue
        path = solver.path(m.vertex_surface_point(int(a)),
                           m.vertex_surface_point(int(b)))
        if len(path.points) < 3:
            continue
        _, k_g, _ = aesthetics(m, path, path.length)
        assert k_g * path.length < 1e-9


def test_plane_geodesic_turning_equals_euclidean(get_mesh, get_solver):
    # every turn on a flat sheet is a surface turn, even where the
    # refined path brushes boundary vertices
    m = get_mesh("plane8")
    xs = np.linspace(-0.4, 0.4, 33)
    pts = np.stack([xs, 0.12 * np.sin(2.0 * np.pi * xs / 0.8),
                    np.zeros(33)], axis=1)
    sps = [m.closest_point(p) for p in pts]
    refined = refine_on_surface(m, sps, get_solver("plane8"))
    k_e, k_g, _ = aesthetics(m, refined, 0.8)
    assert k_e == pytest.approx(k_g, rel=1e-5)


def test_aesthetics_rejects_lifted_points(get_mesh):
    m = get_mesh("plane8")
    P = np.array([[0.0, 0.0, 0.01], [0.1, 0.0, 0.01], [0.2, 0.05, 0.01]])
    with pytest.raises(MetricsError):
        aesthetics(m, _flat_path(P), 1.0)


# -- effort ------------------------------------------------------------------


def test_effort_stationary_pose():
    c = np.tile([0.1, 0.2, 0.5], (150, 1))
    t_h, t_c, r_h, r_c, tau = effort(_states(c, dt=3.0 / 149.0), 1.0)
    assert t_h < 1e-9 and t_c < 1e-9
    assert r_h < 1e-5 and r_c < 1e-5
    assert tau == pytest.approx(3.0, abs=1e-12)


def test_effort_straight_sweep_lengths():
    # controller covers one metre in four seconds, head never moves
    n = 201
    xs = np.linspace(0.0, 1.0, n)
    c = np.stack([xs, np.zeros(n), np.full(n, 0.5)], axis=1)
    t_h, t_c, r_h, r_c, tau = effort(_states(c, dt=4.0 / (n - 1)), 0.5)
    assert t_c == pytest.approx(1.0 / 0.5, rel=0.02)
    assert t_h < 1e-9
    assert r_h < 1e-5 and r_c < 1e-5
    assert tau == pytest.approx(4.0, abs=1e-12)


def test_effort_counts_wrist_rotation():
    n = 201
    c = np.tile([0.0, 0.0, 0.5], (n, 1))
    cq = [_quat_z(np.pi / 4.0 * (4.0 * i / (n - 1))) for i in range(n)]
    _, _, r_h, r_c, _ = effort(_states(c, dt=4.0 / (n - 1), cq=cq), 2.0)
    assert r_c == pytest.approx(np.pi / 2.0, rel=0.02)
    assert r_h < 1e-5


def test_effort_input_validation():
    c = np.tile([0.0, 0.0, 0.5], (10, 1))
    with pytest.raises(MetricsError):
        effort(_states(c)[:1], 1.0)
    with pytest.raises(MetricsError):
        effort(_states(c), 0.0)
    bad = _states(c)
    bad[4] = SystemState(bad[4].head_pos, IDQ, bad[4].ctrl_pos, IDQ,
                         bad[3].t)
    with pytest.raises(MetricsError):
        effort(bad, 1.0)


# -- mimicry violation -------------------------------------------------------


def test_translation_is_a_perfect_mimic(rng):
    X = np.cumsum(rng.normal(size=(25, 3)), axis=0)
    assert mimicry_violation(X + np.array([0.0, -0.8, 0.3]), X) < 1e-12


def test_mimicry_violation_matches_definition(rng):
    X = np.cumsum(rng.normal(size=(15, 3)), axis=0)
    ramp = np.linspace(0.0, 0.4, 15)[:, None] * np.array([0.0, 0.0, 1.0])
    P = X + ramp
    rp = resample_chords(P, 101)
    rx = resample_chords(X, 101)
    d = np.linalg.norm(rp - rx, axis=1)
    L = float(arclengths(X)[-1])  # the input length, not the 101-gon's
    got = mimicry_violation(P, X)
    assert got > 0.0
    assert got == pytest.approx((d.max() - d.min()) / L, rel=1e-9)


# -- inversions and consistency ----------------------------------------------


def test_count_inversions_basics():
    assert count_inversions([0, 1, 2, 3]) == 0
    assert count_inversions([4, 3, 2, 1, 0]) == 10
    assert count_inversions([2, 1]) == 1
    assert count_inversions([]) == 0


@settings(max_examples=50, deadline=None)
@given(hst.lists(hst.integers(min_value=0, max_value=9), max_size=12))
def test_count_inversions_matches_oracle(seq):
    assert count_inversions(seq) == brute_inversions(seq)


def test_consistency_values():
    assert consistency(2.0, 2.0) == 0.0
    assert consistency(2.0, 3.0) == pytest.approx(0.5)
    assert consistency(3.0, 2.0) == pytest.approx(1.0 / 3.0)
    with pytest.raises(MetricsError):
        consistency(0.0, 1.0)


# -- stroke filter -----------------------------------------------------------


def _plane_line_setup(get_mesh, n=41, lift=0.05):
    m = get_mesh("plane8")
    xs = np.linspace(-0.2, 0.2, n)
    stroke = np.stack([xs, np.zeros(n), np.full(n, lift)], axis=1)
    tx = np.linspace(-0.2, 0.2, 21)
    target = _Curve(np.stack([tx, np.zeros(21), np.zeros(21)], axis=1),
                    [0, 5, 10, 15, 20])
    return m, stroke, target


def test_filter_accepts_a_clean_stroke(get_mesh):
    m, stroke, target = _plane_line_setup(get_mesh)
    samples = _states(stroke)
    proj = project_stroke(samples, Method.SNAP, m)
    assert filter_stroke(samples, proj, target) is Verdict.ACCEPTED


def test_filter_flags_short_strokes(get_mesh):
    m, stroke, target = _plane_line_setup(get_mesh)
    samples = _states(stroke[:16])
    proj = project_stroke(samples, Method.SNAP, m)
    assert filter_stroke(samples, proj, target) is Verdict.SHORT


def test_filter_flags_jumpy_controllers(get_mesh):
    m, stroke, target = _plane_line_setup(get_mesh)
    stroke = stroke.copy()
    stroke[20, 1] += 0.06  # one hop above the 5 cm gate
    samples = _states(stroke)
    proj = project_stroke(samples, Method.SNAP, m)
    assert filter_stroke(samples, proj, target) is Verdict.NOISY


def test_filter_flags_reversed_keypoint_order(get_mesh):
    m, stroke, target = _plane_line_setup(get_mesh)
    samples = _states(stroke[::-1])
    proj = project_stroke(samples, Method.SNAP, m)
    # five keypoints walked backwards: 10 inversions against a gate of 5
    assert filter_stroke(samples, proj, target) is Verdict.INVERTED


def test_filter_short_takes_precedence(get_mesh):
    m, stroke, target = _plane_line_setup(get_mesh)
    part = stroke[:16][::-1].copy()
    part[8, 2] += 0.06  # vertical hop: noisy mid-air, same snap footprint
    samples = _states(part)
    proj = project_stroke(samples, Method.SNAP, m)
    assert filter_stroke(samples, proj, target) is Verdict.SHORT


# -- ranked pairs ------------------------------------------------------------


def test_wilcoxon_six_straight_wins():
    pairs = np.stack([np.arange(6) + 2.0, np.arange(6) + 1.0], axis=1)
    p, z = wilcoxon_signed_rank(pairs)
    assert p == 0.03125
    # identical differences rank-tie, shrinking the variance
    assert z == pytest.approx(10.0 / np.sqrt(18.375), rel=1e-12)
    # distinct magnitudes, same sign pattern: untied variance
    pairs = np.stack([np.arange(6) + 1.0, np.zeros(6)], axis=1)
    p, z = wilcoxon_signed_rank(pairs)
    assert p == 0.03125
    assert z == pytest.approx(10.0 / np.sqrt(22.75), rel=1e-12)


def test_wilcoxon_matches_scipy_exact(rng):
    for n in (5, 8, 12):
        a = rng.normal(size=n)
        b = rng.normal(size=n)
        p, _ = wilcoxon_signed_rank(np.stack([a, b], axis=1))
        ref = scipy_wilcoxon(a, b, alternative="two-sided", method="exact")
        assert p == pytest.approx(ref.pvalue, abs=1e-9)


def test_wilcoxon_matches_scipy_approx(rng):
    a = rng.normal(size=40)
    b = a - rng.normal(0.3, 1.0, size=40)
    p, z = wilcoxon_signed_rank(np.stack([a, b], axis=1))
    ref = scipy_wilcoxon(a, b, alternative="two-sided", method="approx",
                         correction=True)
    assert p == pytest.approx(ref.pvalue, abs=1e-9)


def test_wilcoxon_matches_sign_enumeration(rng):
    # integer lattices force ties and dropped zeros
    for _ in range(12):
        n = int(rng.integers(3, 13))
        pairs = rng.integers(0, 4, size=(n, 2)).astype(np.float64)
        if np.all(pairs[:, 0] == pairs[:, 1]):
            pairs[0, 0] += 1.0
        p, _ = wilcoxon_signed_rank(pairs)
        assert p == pytest.approx(wilcoxon_brute(pairs), abs=1e-12)


def test_wilcoxon_antisymmetry(rng):
    a = rng.normal(size=9)
    b = rng.normal(size=9)
    p1, z1 = wilcoxon_signed_rank(np.stack([a, b], axis=1))
    p2, z2 = wilcoxon_signed_rank(np.stack([b, a], axis=1))
    assert p1 == pytest.approx(p2, abs=1e-12)
    assert z1 == pytest.approx(-z2, abs=1e-12)


def test_wilcoxon_input_validation():
    with pytest.raises(MetricsError):
        wilcoxon_signed_rank(np.zeros((3, 3)))
    with pytest.raises(MetricsError):
        wilcoxon_signed_rank(np.ones((5, 2)))


# -- whole-stroke reports ----------------------------------------------------


def _sine_setup(mesh, s=1.0):
    xs = np.linspace(-0.4, 0.4, 65) * s
    ys = 0.1 * s * np.sin(2.0 * np.pi * xs / (0.8 * s))
    stroke = np.stack([xs, ys, np.full(65, 0.05 * s)], axis=1)
    cq = [_quat_z(0.3 * i / 64.0) for i in range(65)]
    samples = _states(stroke, head=(0.0, 0.0, 2.0 * s), cq=cq)
    tx = np.linspace(-0.4, 0.4, 33) * s
    ty = 0.1 * s * np.sin(2.0 * np.pi * tx / (0.8 * s)) + 0.02 * s
    target = _Curve(np.stack([tx, ty, np.zeros(33)], axis=1),
                    [0, 8, 16, 24, 32])
    proj = project_stroke(samples, Method.SNAP, mesh)
    return samples, proj, target


def test_stroke_report_full(get_mesh):
    m = get_mesh("plane8")
    samples, proj, target = _sine_setup(m)
    rep = stroke_report(m, samples, proj, target)
    assert rep.verdict is Verdict.ACCEPTED
    assert 0.0 < rep.d_ep < 0.1
    assert rep.d_sym <= rep.d_ep + 1e-12
    assert rep.k_e > 0 and rep.tau > 0
    row = rep.to_row()
    assert len(row) == len(CSV_COLUMNS)
    assert row[-1] == "accepted"
    assert "" not in row


def test_stroke_report_without_target(get_mesh):
    m = get_mesh("plane8")
    samples, proj, _ = _sine_setup(m)
    rep = stroke_report(m, samples, proj)
    assert rep.d_ep is None and rep.d_sym is None
    assert rep.mimicry_violation is None and rep.verdict is None
    row = rep.to_row()
    assert row[0] == "" and row[1] == "" and row[-2] == "" and row[-1] == ""
    assert rep.to_csv().count(",") == len(CSV_COLUMNS) - 1
    doc = json.loads(rep.to_json())
    assert doc["d_ep"] is None and doc["verdict"] is None
    assert MetricReport.csv_header() == ",".join(CSV_COLUMNS)


def test_report_covaries_with_scene_scale(get_mesh):
    # scaling the whole scene by s: distances follow s, curvature
    # measures follow 1/s, times and the mimicry spread stay put
    m1 = get_mesh("plane8")
    s = 2.5
    m2 = TriMesh(m1.vertices * s, m1.faces)
    r1 = stroke_report(m1, *_sine_setup(m1))
    r2 = stroke_report(m2, *_sine_setup(m2, s=s))
    assert r2.d_ep == pytest.approx(s * r1.d_ep, rel=1e-9)
    assert r2.d_sym == pytest.approx(s * r1.d_sym, rel=1e-9)
    assert r2.k_e == pytest.approx(r1.k_e / s, rel=1e-6)
    assert r2.k_g == pytest.approx(r1.k_g / s, rel=1e-6)
    assert r2.f_g == pytest.approx(r1.f_g / s, rel=1e-6)
    assert r2.t_h == pytest.approx(r1.t_h, rel=1e-9, abs=1e-12)
    assert r2.t_c == pytest.approx(r1.t_c, rel=1e-9)
    assert r2.r_h == pytest.approx(r1.r_h / s, rel=1e-9, abs=1e-12)
    assert r2.r_c == pytest.approx(r1.r_c / s, rel=1e-9)
    assert r2.tau == r1.tau
    assert r2.mimicry_violation == pytest.approx(r1.mimicry_violation,
                                                 rel=1e-9)
    assert r2.verdict is r1.verdict

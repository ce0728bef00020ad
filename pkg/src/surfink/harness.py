"""Synthetic stroke corpus: generation, replay and paired comparison.

A Session is a recorded mid-air stroke (tracker samples plus the ids
needed to replay it).  synth_stroke traces a target curve with a
configurable hand model; replay projects a session under any method and
scores it; compare runs two methods over a corpus and reports
per-measure statistics with a signed-rank test.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .curves import CurveError, TargetCurve, TargetCurveSpec, sample_target_curve
from .embedding import SurfaceMap, embed
from .geodesic import GeodesicSolver
from .mesh import TriMesh
from .meshes import benchmark_meshes
from .metrics import CSV_COLUMNS, MetricReport, Verdict, stroke_report, \
    wilcoxon_signed_rank
from .projection import Method, ProjectedCurve, SystemState, project_stroke
from .shell import fit_shell
from .vecmath import quat_from_two_vectors, unit


class HarnessError(Exception):
    pass


# ---------------------------------------------------------------------------
# Sessions.
# ---------------------------------------------------------------------------

@dataclass
class Session:
    """One recorded stroke plus the ids needed to replay it."""

    mesh: str
    samples: list  # SystemState, strictly increasing t
    method: str | None = None
    target: str | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.samples) == 0:
            raise HarnessError("a session needs at least one sample")
        t = [s.t for s in self.samples]
        if any(b <= a for a, b in zip(t, t[1:])):
            raise HarnessError("sample timestamps must strictly increase")

    def to_json(self) -> str:
        doc = {"mesh": self.mesh}
        if self.method is not None:
            doc["method"] = self.method
        if self.target is not None:
            doc["target"] = self.target
        if self.meta:
            doc["meta"] = self.meta
        doc["samples"] = [
            {
                "t_ms": s.t * 1000.0,
                "c": [float(x) for x in s.ctrl_pos],
                "h": [float(x) for x in s.head_pos],
                "cq": [float(x) for x in s.ctrl_orient],
                "hq": [float(x) for x in s.head_orient],
            }
            for s in self.samples
        ]
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "Session":
        doc = json.loads(text)
        samples = [
            SystemState(
                head_pos=rec["h"], head_orient=rec["hq"],
                ctrl_pos=rec["c"], ctrl_orient=rec["cq"],
                t=rec["t_ms"] / 1000.0,
            )
            for rec in doc["samples"]
        ]
        return cls(
            mesh=doc["mesh"], samples=samples, method=doc.get("method"),
            target=doc.get("target"), meta=doc.get("meta", {}),
        )


# ---------------------------------------------------------------------------
# Synthetic strokes.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SynthStrokeModel:
    """How a synthetic user holds the controller while tracing a target.

    offset_mode "normal-offset" keeps the hand off the surface along the
    local normal; "fixed-translation" shifts the whole trace by one
    constant vector.  The actual hand distance of a stroke is drawn once
    from a folded Gaussian centred on `offset`.  `jitter` is the
    per-axis sigma of Gaussian hand tremor; the nozzle, aimed against
    the local normal, wobbles by the equivalent angle at the working
    distance.  The head stays fixed at head_offset from the mesh centre,
    facing it.
    """

    offset_mode: str = "normal-offset"
    offset: float = 0.048
    offset_sigma: float = 0.012
    jitter: float = 0.0
    rate: float = 60.0
    speed: float = 0.25
    head_offset: tuple = (0.0, -0.9, 1.2)

    def __post_init__(self):
        if self.offset_mode not in ("normal-offset", "fixed-translation"):
            raise ValueError("unknown offset mode %r" % (self.offset_mode,))
        if self.rate < 50.0:
            raise ValueError("sampling rate below 50 Hz")
        if self.offset < 0 or self.offset_sigma < 0 or self.jitter < 0:
            raise ValueError("offsets and jitter must be non-negative")
        if self.speed <= 0:
            raise ValueError("hand speed must be positive")


# hand position drifts slowly, wrist angle flutters faster; white
# per-sample noise would be far rougher than any human stroke
TREMOR_SMOOTH_S = 0.1
AIM_SMOOTH_S = 0.05


def _smooth_noise(rng, t, n, sigma, smooth):
    """Per-axis Gaussian noise, time-correlated, rescaled to sigma."""
    from .metrics import _gauss_filter

    raw = rng.normal(0.0, 1.0, (n, 3))
    out = _gauss_filter(t, raw, smooth)
    rms = np.sqrt(np.mean(out**2, axis=0))
    rms[rms < 1e-12] = 1.0
    return out / rms * sigma


def synth_stroke(mesh: TriMesh, target: TargetCurve, model: SynthStrokeModel,
                 seed: int = 0, mesh_id: str = "",
                 target_id: str | None = None) -> Session:
    """Trace a target at constant speed under the hand model.

    Deterministic per seed.  Timestamps run at the model rate; the
    controller nozzle (its +z axis) points against the local surface
    normal, with tremor-equivalent angular wobble when jitter is on.
    """
    L = target.length
    if L <= 0:
        raise HarnessError("target curve has zero length")
    rng = np.random.default_rng(seed)
    n = max(2, int(np.ceil(L / model.speed * model.rate)) + 1)
    t = np.arange(n) / model.rate
    stations = np.linspace(0.0, L, n)
    X = target.positions
    s = target.arclengths
    base = np.stack(
        [np.interp(stations, s, X[:, k]) for k in range(3)], axis=1
    )
    # nearest polyline sample supplies the local surface normal
    j = np.searchsorted(s, stations).clip(1, len(s) - 1)
    j -= (stations - s[j - 1]) < (s[j] - stations)
    normals = np.array([mesh.point_normal(target.polyline[k]) for k in j])

    amt = abs(rng.normal(model.offset, model.offset_sigma))
    if model.offset_mode == "normal-offset":
        P = base + amt * normals
    else:
        # hand settles straight off the surface at the stroke start and
        # keeps that displacement while tracing
        P = base + amt * normals[0]
    if model.jitter > 0:
        P = P + _smooth_noise(rng, t, n, model.jitter, TREMOR_SMOOTH_S)

    aims = -normals
    if model.jitter > 0 and amt > 1e-9:
        aims = aims + _smooth_noise(rng, t, n, model.jitter / amt,
                                    AIM_SMOOTH_S)
    zhat = np.array([0.0, 0.0, 1.0])
    cq = []
    for a in aims:
        na = np.linalg.norm(a)
        d = a / na if na > 1e-9 else -zhat
        cq.append(quat_from_two_vectors(zhat, d))

    centre = 0.5 * (mesh.bbox_lo + mesh.bbox_hi)
    h = centre + np.asarray(model.head_offset, dtype=np.float64)
    hq = quat_from_two_vectors(zhat, unit(centre - h))

    samples = [
        SystemState(head_pos=h, head_orient=hq, ctrl_pos=P[i],
                    ctrl_orient=cq[i], t=float(t[i]))
        for i in range(n)
    ]
    return Session(
        mesh=mesh_id, samples=samples, target=target_id,
        meta={"seed": seed, "offset_drawn": float(amt)},
    )


# ---------------------------------------------------------------------------
# Replay and comparison.
# ---------------------------------------------------------------------------

def replay(session: Session, method, mesh: TriMesh,
           smap: SurfaceMap | None = None,
           target: TargetCurve | None = None, solver=None,
           nozzle_flip: bool = False):
    """Project a recorded session and score it; (curve, report).

    Without a target the report is restricted to aesthetics and effort.
    """
    if method is None:
        method = session.method
    if method is None:
        raise HarnessError("no method stored in the session or given")
    curve = project_stroke(session.samples, Method(method), mesh, smap,
                           nozzle_flip)
    if len(curve) < 3:
        raise HarnessError("projection produced fewer than three points")
    report = stroke_report(mesh, session, curve, target, solver=solver)
    return curve, report


@dataclass
class CorpusItem:
    """One stroke of a comparison corpus, with its replay context."""

    session: Session
    target: TargetCurve
    mesh: TriMesh
    smap: SurfaceMap | None = None
    solver: GeodesicSolver | None = None


# the ten method-dependent measures; the mimicry violation and the
# verdict depend only on the mid-air stroke and its target
MEASURES = CSV_COLUMNS[:10]


@dataclass
class MeasureStats:
    measure: str
    mean_a: float
    std_a: float
    mean_b: float
    std_b: float
    p: float | None
    z: float | None
    a_lower: int
    b_lower: int
    ties: int
    note: str = ""


@dataclass
class Comparison:
    method_a: str
    method_b: str
    rows: list  # MeasureStats, one per measure
    total: int
    accepted: int
    rejected: int
    verdicts: dict  # method -> {verdict value: count}

    def to_csv(self) -> str:
        a, b = self.method_a, self.method_b
        lines = [
            "# pairs: total=%d accepted=%d rejected=%d"
            % (self.total, self.accepted, self.rejected),
            "measure,%s_mean,%s_std,%s_mean,%s_std,p,z,%s_lower,%s_lower,"
            "ties,note" % (a, a, b, b, a, b),
        ]
        for r in self.rows:
            p = "" if r.p is None else "%.9g" % r.p
            z = "" if r.z is None else "%.9g" % r.z
            lines.append(
                "%s,%.9g,%.9g,%.9g,%.9g,%s,%s,%d,%d,%d,%s"
                % (r.measure, r.mean_a, r.std_a, r.mean_b, r.std_b,
                   p, z, r.a_lower, r.b_lower, r.ties, r.note)
            )
        return "\n".join(lines) + "\n"


def compare(corpus, methods) -> Comparison:
    """Replay every corpus stroke under two methods and pair the scores.

    A pair survives only when the stroke passes the acceptance filter
    under both methods.  Fewer than five surviving pairs is an error;
    measures with identical scores on every pair are reported as "no
    difference" instead of a p-value.
    """
    if len(methods) != 2:
        raise HarnessError("compare wants exactly two methods")
    ma, mb = (Method(m) for m in methods)
    kept = {m: {k: [] for k in MEASURES} for m in (ma, mb)}
    verdicts = {m: {} for m in (ma, mb)}
    total = accepted = 0
    for item in corpus:
        total += 1
        reports = {}
        for m in (ma, mb):
            _, rep = replay(item.session, m, item.mesh, item.smap,
                            item.target, item.solver)
            reports[m] = rep
            v = rep.verdict.value
            verdicts[m][v] = verdicts[m].get(v, 0) + 1
        if all(reports[m].verdict == Verdict.ACCEPTED for m in (ma, mb)):
            accepted += 1
            for m in (ma, mb):
                for k in MEASURES:
                    kept[m][k].append(getattr(reports[m], k))
    if accepted < 5:
        raise HarnessError(
            "only %d stroke pairs survived the filter; need at least 5"
            % accepted
        )
    rows = []
    for k in MEASURES:
        va = np.array(kept[ma][k])
        vb = np.array(kept[mb][k])
        d = va - vb
        if np.all(d == 0.0):
            p = z = None
            note = "no difference"
        else:
            p, z = wilcoxon_signed_rank(np.stack([va, vb], axis=1))
            note = ""
        rows.append(MeasureStats(
            measure=k,
            mean_a=float(va.mean()), std_a=float(va.std(ddof=1)),
            mean_b=float(vb.mean()), std_b=float(vb.std(ddof=1)),
            p=p, z=z,
            a_lower=int(np.sum(d < 0)), b_lower=int(np.sum(d > 0)),
            ties=int(np.sum(d == 0)), note=note,
        ))
    return Comparison(
        method_a=ma.value, method_b=mb.value, rows=rows, total=total,
        accepted=accepted, rejected=total - accepted,
        verdicts={m.value: verdicts[m] for m in (ma, mb)},
    )


def replay_csv(corpus, methods) -> str:
    """One CSV row per stroke and method; byte-stable across runs."""
    lines = ["mesh,target,method," + MetricReport.csv_header()]
    for item in corpus:
        for m in methods:
            m = Method(m)
            _, rep = replay(item.session, m, item.mesh, item.smap,
                            item.target, item.solver)
            lines.append("%s,%s,%s,%s" % (
                item.session.mesh, item.session.target or "", m.value,
                rep.to_csv(),
            ))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Benchmark corpus.
# ---------------------------------------------------------------------------

def build_surface_map(mesh: TriMesh, mu: float | None = None, d: int = 8,
                      seed: int = 0) -> SurfaceMap:
    """Shell plus embedding with a thickness the mesh can support.

    Defaults to a tenth of the bbox diagonal; creased meshes get the
    thickness halved until the shell stops self-intersecting.
    """
    if mu is None:
        mu = 0.1 * mesh.bbox_diag
    shell = fit_shell(mesh, mu)
    return SurfaceMap(mesh, shell, embed(mesh, shell, d=d, seed=seed))


def gen_targets(mesh: TriMesh, count: int, seed: int = 0, solver=None,
                smap=None, n_range=(4, 5), kg_range=(0.04, 0.08),
                kn_range=(np.pi / 6, 5 * np.pi / 12), spacing=0.01,
                max_tries: int = 50):
    """Draw target curve specs at random until `count` usable curves grow.

    Self-intersecting curves and specs the mesh cannot host are redrawn;
    deterministic per seed.
    """
    if solver is None:
        solver = GeodesicSolver(mesh)
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        for _ in range(max_tries):
            spec = TargetCurveSpec(
                n=int(rng.integers(n_range[0], n_range[1] + 1)),
                i0=int(rng.integers(mesh.n_vertices)),
                kg=float(rng.uniform(*kg_range)),
                kn=float(rng.uniform(*kn_range)),
                seed=seed,
            )
            try:
                t = sample_target_curve(mesh, spec, solver, smap, spacing)
            except CurveError:
                continue
            if not t.self_intersecting:
                out.append(t)
                break
        else:
            raise HarnessError(
                "no usable curve after %d draws on this mesh" % max_tries
            )
    return out


def benchmark_corpus(meshes=None, per_mesh: int = 10, seed: int = 0,
                     model: SynthStrokeModel | None = None, maps=None,
                     solvers=None):
    """Synthetic corpus over the benchmark meshes; list of CorpusItem.

    Pass maps/solvers dicts to reuse precomputed embeddings.
    """
    if meshes is None:
        meshes = benchmark_meshes()
    if model is None:
        # a fixed hand displacement is the gentlest realistic regime:
        # the anchored methods reproduce the trace, while a nozzle held
        # against the local normal slants away from the offset direction
        model = SynthStrokeModel(offset_mode="fixed-translation",
                                 jitter=0.003, rate=50.0)
    items = []
    for k, (name, mesh) in enumerate(sorted(meshes.items())):
        solver = (solvers or {}).get(name) or GeodesicSolver(mesh)
        smap = (maps or {}).get(name) or build_surface_map(mesh, seed=seed)
        targets = gen_targets(mesh, per_mesh, seed + 17 * k, solver, smap)
        for i, t in enumerate(targets):
            sess = synth_stroke(
                mesh, t, model, seed=1000 * (seed + 1) + 100 * k + i,
                mesh_id=name, target_id=str(i),
            )
            items.append(CorpusItem(session=sess, target=t, mesh=mesh,
                                    smap=smap, solver=solver))
    return items

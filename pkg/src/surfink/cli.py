"""Command line front end.

Subcommands walk the full pipeline: gen-mesh, precompute, gen-targets,
synth, replay, compare and serve.  All file formats are JSON except the
replay/compare outputs, which are CSV with a fixed documented header.
Validation problems exit with status 2.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .curves import CurveError, TargetCurve, TargetCurveSpec, sample_target_curve
from .embedding import EmbeddingError, SurfaceMap
from .geodesic import GeodesicSolver
from .harness import (HarnessError, Session, SynthStrokeModel, CorpusItem,
                      build_surface_map, compare, gen_targets, replay,
                      replay_csv, synth_stroke)
from .mesh import MeshError, load_obj, save_obj
from .meshes import benchmark_meshes
from .metrics import MetricReport, MetricsError
from .projection import Method
from .shell import ShellBuildError


class CliError(Exception):
    pass


_VALIDATION_ERRORS = (CliError, CurveError, EmbeddingError, HarnessError,
                      MeshError, MetricsError, ShellBuildError, ValueError,
                      KeyError, OSError, json.JSONDecodeError)


def _load_mesh(path):
    if not os.path.exists(path):
        raise CliError("mesh file not found: %s" % path)
    return load_obj(path)


def _map_path(mesh_path):
    return os.path.splitext(mesh_path)[0] + ".scp"


def _load_map(mesh_path, mesh, map_path=None):
    """Precomputed embedding next to the mesh, or a fresh default build."""
    path = map_path or _map_path(mesh_path)
    if os.path.exists(path):
        return SurfaceMap.load(path, mesh)
    return build_surface_map(mesh)


def _read_corpus(path):
    with open(path) as fh:
        doc = json.load(fh)
    mesh_path = doc["mesh"]
    mesh = _load_mesh(mesh_path)
    targets = [
        TargetCurve.from_json(json.dumps(t), mesh) for t in doc["targets"]
    ]
    sessions = [Session.from_json(json.dumps(s)) for s in doc["sessions"]]
    return mesh_path, mesh, targets, sessions


def _corpus_items(mesh_path, mesh, targets, sessions, map_path=None):
    smap = _load_map(mesh_path, mesh, map_path)
    solver = GeodesicSolver(mesh)
    items = []
    for sess in sessions:
        if sess.target is None:
            raise CliError("corpus session lacks a target id")
        items.append(CorpusItem(session=sess, target=targets[int(sess.target)],
                                mesh=mesh, smap=smap, solver=solver))
    return items


def _write(path, text):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# Subcommands.
# ---------------------------------------------------------------------------

def cmd_gen_mesh(args):
    names = sorted(benchmark_meshes()) if args.name == "all" else [args.name]
    meshes = benchmark_meshes()
    for name in names:
        if name not in meshes:
            raise CliError(
                "unknown mesh %r; pick from %s or 'all'"
                % (name, ", ".join(sorted(meshes)))
            )
        out = args.out
        if out is None or args.name == "all":
            out = os.path.join(args.outdir or ".", name + ".obj")
        save_obj(meshes[name], out)
        print("wrote %s (%d faces)" % (out, meshes[name].n_faces))


def cmd_precompute(args):
    mesh = _load_mesh(args.mesh)
    smap = build_surface_map(mesh, mu=args.mu, d=args.d, seed=args.seed)
    out = args.out or _map_path(args.mesh)
    smap.save(out)
    print("wrote %s (mu=%.4g, d=%d, stress=%.4g)"
          % (out, smap.shell.mu, smap.embedding.d, smap.embedding.stress))


def cmd_gen_targets(args):
    mesh = _load_mesh(args.mesh)
    smap = _load_map(args.mesh, mesh, args.map)
    solver = GeodesicSolver(mesh)
    if args.kg is not None or args.kn is not None or args.n is not None:
        # pinned spec values; only the start vertex varies
        rng = np.random.default_rng(args.seed)
        targets = []
        tries = 0
        while len(targets) < args.count:
            if tries > 50 * args.count:
                raise CliError("could not grow enough usable curves")
            tries += 1
            spec = TargetCurveSpec(
                n=args.n if args.n is not None else 5,
                i0=int(rng.integers(mesh.n_vertices)),
                kg=args.kg if args.kg is not None else 0.06,
                kn=args.kn if args.kn is not None else np.pi / 4,
                seed=args.seed,
            )
            try:
                t = sample_target_curve(mesh, spec, solver, smap)
            except CurveError:
                continue
            if not t.self_intersecting:
                targets.append(t)
    else:
        targets = gen_targets(mesh, args.count, seed=args.seed,
                              solver=solver, smap=smap)
    doc = {
        "mesh": args.mesh,
        "targets": [json.loads(t.to_json()) for t in targets],
    }
    _write(args.out, json.dumps(doc) + "\n")
    if args.out:
        print("wrote %s (%d targets)" % (args.out, len(targets)))


def cmd_synth(args):
    with open(args.targets) as fh:
        doc = json.load(fh)
    mesh_path = doc["mesh"]
    mesh = _load_mesh(mesh_path)
    targets = [
        TargetCurve.from_json(json.dumps(t), mesh) for t in doc["targets"]
    ]
    model = SynthStrokeModel(
        offset_mode=args.mode, offset=args.offset, jitter=args.jitter,
        rate=args.rate,
    )
    sessions = [
        synth_stroke(mesh, t, model, seed=args.seed + i,
                     mesh_id=mesh_path, target_id=str(i))
        for i, t in enumerate(targets)
    ]
    out_doc = {
        "mesh": mesh_path,
        "targets": doc["targets"],
        "sessions": [json.loads(s.to_json()) for s in sessions],
    }
    _write(args.out, json.dumps(out_doc) + "\n")
    if args.out:
        print("wrote %s (%d sessions)" % (args.out, len(sessions)))


def cmd_replay(args):
    with open(args.session) as fh:
        doc = json.load(fh)
    if "sessions" in doc:
        mesh_path, mesh, targets, sessions = _read_corpus(args.session)
        items = _corpus_items(mesh_path, mesh, targets, sessions, args.map)
        _write(args.out, replay_csv(items, [args.method]))
    else:
        sess = Session.from_json(json.dumps(doc))
        mesh = _load_mesh(sess.mesh)
        smap = _load_map(sess.mesh, mesh, args.map)
        _, rep = replay(sess, args.method, mesh, smap)
        _write(args.out,
               MetricReport.csv_header() + "\n" + rep.to_csv() + "\n")


def cmd_compare(args):
    methods = args.methods.split(",")
    mesh_path, mesh, targets, sessions = _read_corpus(args.corpus)
    items = _corpus_items(mesh_path, mesh, targets, sessions, args.map)
    comp = compare(items, methods)
    _write(args.out, comp.to_csv())
    if args.out:
        print("wrote %s (%d of %d pairs accepted)"
              % (args.out, comp.accepted, comp.total))


def cmd_serve(args):
    from .service import run

    run(port=args.port, meshdir=args.meshdir, precomputed=args.precomputed)


# ---------------------------------------------------------------------------
# Parser.
# ---------------------------------------------------------------------------

def _method(text):
    try:
        return Method(text)
    except ValueError:
        raise argparse.ArgumentTypeError(
            "unknown method %r; pick from %s"
            % (text, ", ".join(m.value for m in Method))
        )


def build_parser():
    ap = argparse.ArgumentParser(
        prog="surfink",
        description="Project mid-air strokes onto mesh surfaces.",
    )
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("gen-mesh", help="write a benchmark mesh as OBJ")
    p.add_argument("name", help="mesh name or 'all'")
    p.add_argument("-o", "--out", help="output OBJ path")
    p.add_argument("--outdir", help="output directory for 'all'")
    p.set_defaults(fn=cmd_gen_mesh)

    p = sub.add_parser("precompute", help="build and save a surface map")
    p.add_argument("mesh", help="mesh OBJ path")
    p.add_argument("--mu", type=float, default=None,
                   help="shell thickness (default: a tenth of the bbox "
                        "diagonal, halved as needed)")
    p.add_argument("--d", type=int, default=8, help="embedding dimension")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--out", help="output path (default <mesh>.scp)")
    p.set_defaults(fn=cmd_precompute)

    p = sub.add_parser("gen-targets", help="grow target curves on a mesh")
    p.add_argument("mesh", help="mesh OBJ path")
    p.add_argument("--n", type=int, default=None, help="control point count")
    p.add_argument("--kg", type=float, default=None,
                   help="preferred control gap, fraction of bbox diagonal")
    p.add_argument("--kn", type=float, default=None,
                   help="preferred normal angle between controls (rad)")
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--map", help="precomputed surface map")
    p.add_argument("-o", "--out", help="output JSON path (default stdout)")
    p.set_defaults(fn=cmd_gen_targets)

    p = sub.add_parser("synth", help="synthesize strokes tracing targets")
    p.add_argument("targets", help="gen-targets output JSON")
    p.add_argument("--offset", type=float, default=0.048,
                   help="mean hand-to-surface distance (m)")
    p.add_argument("--jitter", type=float, default=0.0,
                   help="per-axis hand tremor sigma (m)")
    p.add_argument("--rate", type=float, default=60.0,
                   help="sampling rate (Hz, at least 50)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", default="normal-offset",
                   choices=["normal-offset", "fixed-translation"])
    p.add_argument("-o", "--out", help="output JSON path (default stdout)")
    p.set_defaults(fn=cmd_synth)

    p = sub.add_parser("replay", help="project a recorded session and score")
    p.add_argument("session", help="session or synth corpus JSON")
    p.add_argument("--method", type=_method, required=True)
    p.add_argument("--map", help="precomputed surface map")
    p.add_argument("-o", "--out", help="output CSV path (default stdout)")
    p.set_defaults(fn=cmd_replay)

    p = sub.add_parser("compare", help="paired two-method comparison")
    p.add_argument("corpus", help="synth corpus JSON")
    p.add_argument("--methods", required=True,
                   help="two method names, comma separated")
    p.add_argument("--map", help="precomputed surface map")
    p.add_argument("--out", help="output CSV path (default stdout)")
    p.set_defaults(fn=cmd_compare)

    p = sub.add_parser("serve", help="run the websocket drawing service")
    p.add_argument("--port", type=int, default=8787)
    p.add_argument("--meshdir", default=".",
                   help="directory of OBJ meshes to expose")
    p.add_argument("--precomputed", default=None,
                   help="directory of .scp files (default: next to meshes)")
    p.set_defaults(fn=cmd_serve)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.fn(args)
    except _VALIDATION_ERRORS as e:
        print("error: %s" % e, file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

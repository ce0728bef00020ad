"""Live drawing service: one websocket, JSON ops, per-session strokes.

Ops over /ws: open, point, end, undo, close, list.  Each point is acked
with its projected surface point before the client sends the next, so
streaming a session through the service and replaying it in batch feed
the same StrokeProjector and produce bit-identical curves.  Meshes are
served over plain GET for clients that render them.
"""

from __future__ import annotations

import asyncio
import glob
import json
import os
import time
from contextlib import asynccontextmanager
from dataclasses import dataclass, field

import numpy as np
from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect

from .embedding import SurfaceMap
from .geodesic import GeodesicSolver
from .harness import build_surface_map
from .mesh import TriMesh, load_obj
from .meshes import benchmark_meshes
from .metrics import MetricsError, stroke_report
from .projection import Method, NEEDS_EMBEDDING, StrokeProjector, SystemState


class MeshStore:
    """Built-in benchmark meshes, overlaid with any OBJ files in meshdir.

    Surface maps load from the precomputed directory when present and
    are built on first use otherwise.
    """

    def __init__(self, meshdir=None, precomputed=None):
        self._meshes = dict(benchmark_meshes())
        self._precomputed = precomputed
        self._map_paths = {}
        if meshdir:
            for path in sorted(glob.glob(os.path.join(meshdir, "*.obj"))):
                name = os.path.splitext(os.path.basename(path))[0]
                self._meshes[name] = load_obj(path)
                scp = os.path.splitext(path)[0] + ".scp"
                if os.path.exists(scp):
                    self._map_paths[name] = scp
        if precomputed:
            for path in sorted(glob.glob(os.path.join(precomputed, "*.scp"))):
                name = os.path.splitext(os.path.basename(path))[0]
                if name in self._meshes:
                    self._map_paths[name] = path
        self._maps = {}
        self._solvers = {}

    def ids(self):
        return sorted(self._meshes)

    def __contains__(self, mid):
        return mid in self._meshes

    def mesh(self, mid) -> TriMesh:
        return self._meshes[mid]

    def smap(self, mid) -> SurfaceMap:
        if mid not in self._maps:
            path = self._map_paths.get(mid)
            if path:
                self._maps[mid] = SurfaceMap.load(path, self._meshes[mid])
            else:
                self._maps[mid] = build_surface_map(self._meshes[mid])
        return self._maps[mid]

    def solver(self, mid) -> GeodesicSolver:
        if mid not in self._solvers:
            self._solvers[mid] = GeodesicSolver(self._meshes[mid])
        return self._solvers[mid]


@dataclass
class LiveSession:
    sid: str
    mesh_id: str
    method: Method
    projector: StrokeProjector
    samples: list = field(default_factory=list)  # active stroke
    strokes: list = field(default_factory=list)  # completed (curve, samples)
    created_at: float = field(default_factory=time.time)
    lock: asyncio.Lock = field(default_factory=asyncio.Lock)

    @property
    def mid_stroke(self):
        return len(self.samples) > 0


def _mesh_summary(store, mid):
    mesh = store.mesh(mid)
    return {
        "id": mid,
        "n_vertices": mesh.n_vertices,
        "n_faces": mesh.n_faces,
        "bbox": [list(map(float, mesh.bbox_lo)),
                 list(map(float, mesh.bbox_hi))],
    }


def _point_payload(sp):
    if sp is None:
        return None
    return {
        "face": int(sp.face),
        "bary": [float(b) for b in sp.bary],
        "position": [float(x) for x in sp.position],
    }


def _err(op, code, reason):
    return {"ok": False, "op": op, "code": code, "error": reason}


class ServiceState:
    def __init__(self, store: MeshStore):
        self.store = store
        self.sessions = {}
        self._next = 0

    def new_sid(self):
        self._next += 1
        return "s%d" % self._next


async def _handle(state: ServiceState, msg) -> dict:
    op = msg.get("op")
    if op == "list":
        return {"ok": True, "op": "list",
                "meshes": [_mesh_summary(state.store, m)
                           for m in state.store.ids()]}
    if op == "open":
        mid = msg.get("mesh")
        if mid not in state.store:
            return _err("open", "not-found", "unknown mesh %r" % mid)
        try:
            method = Method(msg.get("method", "mimicry"))
        except ValueError:
            return _err("open", "bad-request",
                        "unknown method %r" % msg.get("method"))
        smap = state.store.smap(mid) if method in NEEDS_EMBEDDING else None
        sid = state.new_sid()
        sess = LiveSession(
            sid=sid, mesh_id=mid, method=method,
            projector=StrokeProjector(state.store.mesh(mid), method, smap),
        )
        state.sessions[sid] = sess
        return {"ok": True, "op": "open", "session": sid,
                "mesh": mid, "method": method.value}

    sid = msg.get("session")
    sess = state.sessions.get(sid)
    if sess is None:
        return _err(op or "?", "not-found", "unknown session %r" % sid)

    if op == "point":
        async with sess.lock:
            try:
                st = SystemState(
                    head_pos=msg["h"], head_orient=msg["hq"],
                    ctrl_pos=msg["c"], ctrl_orient=msg["cq"],
                    t=float(msg["t_ms"]) / 1000.0,
                )
            except (KeyError, TypeError, ValueError) as e:
                return _err("point", "bad-request", "bad sample: %s" % e)
            try:
                sp = sess.projector.feed(st)
            except ValueError as e:
                # out-of-order timestamp; the cursor is untouched
                return _err("point", "rejected", str(e))
            sess.samples.append(st)
            return {"ok": True, "op": "point", "point": _point_payload(sp),
                    "skipped": sp is None}

    if op == "method":
        try:
            method = Method(msg.get("method"))
        except ValueError:
            return _err("method", "bad-request",
                        "unknown method %r" % msg.get("method"))
        if sess.mid_stroke:
            return _err("method", "rejected",
                        "cannot switch methods mid-stroke")
        smap = (state.store.smap(sess.mesh_id)
                if method in NEEDS_EMBEDDING else None)
        sess.method = method
        sess.projector = StrokeProjector(
            state.store.mesh(sess.mesh_id), method, smap)
        return {"ok": True, "op": "method", "method": method.value}

    if op == "end":
        async with sess.lock:
            curve = sess.projector.finish()
            if len(sess.samples) == 0:
                return _err("end", "rejected", "no points in stroke")
            report = None
            reason = None
            if len(curve) >= 3:
                try:
                    rep = stroke_report(
                        state.store.mesh(sess.mesh_id), sess.samples, curve,
                        None, solver=state.store.solver(sess.mesh_id),
                    )
                    report = json.loads(rep.to_json())
                except MetricsError as e:
                    reason = str(e)
            else:
                reason = "too few projected points for metrics"
            sess.strokes.append((curve, sess.samples))
            smap = (state.store.smap(sess.mesh_id)
                    if sess.method in NEEDS_EMBEDDING else None)
            sess.projector = StrokeProjector(
                state.store.mesh(sess.mesh_id), sess.method, smap)
            sess.samples = []
            out = {"ok": True, "op": "end", "n_points": len(curve),
                   "n_skipped": len(curve.skipped), "report": report}
            if reason:
                out["reason"] = reason
            return out

    if op == "undo":
        async with sess.lock:
            removed = 0
            if sess.strokes:
                sess.strokes.pop()
                removed = 1
            return {"ok": True, "op": "undo", "removed": removed,
                    "strokes": len(sess.strokes)}

    if op == "close":
        del state.sessions[sid]
        return {"ok": True, "op": "close", "session": sid}

    return _err(op or "?", "bad-request", "unknown op %r" % op)


def create_app(meshdir=None, precomputed=None, announce_port=None) -> FastAPI:
    store = MeshStore(meshdir, precomputed)
    state = ServiceState(store)

    @asynccontextmanager
    async def lifespan(app):
        if announce_port is not None:
            print("surfink service ready on 127.0.0.1:%d" % announce_port,
                  flush=True)
        yield

    app = FastAPI(title="surfink service", lifespan=lifespan)
    app.state.service = state

    @app.get("/meshes")
    def list_meshes():
        return [_mesh_summary(store, m) for m in store.ids()]

    @app.get("/meshes/{mid}")
    def get_mesh(mid: str):
        if mid not in store:
            raise HTTPException(status_code=404,
                                detail="unknown mesh %r" % mid)
        mesh = store.mesh(mid)
        doc = _mesh_summary(store, mid)
        doc["vertices"] = [[float(x) for x in v] for v in mesh.vertices]
        doc["faces"] = [[int(i) for i in f] for f in mesh.faces]
        doc["normals"] = [[float(x) for x in n]
                          for n in mesh.vertex_normals]
        return doc

    @app.websocket("/ws")
    async def ws(sock: WebSocket):
        await sock.accept()
        try:
            while True:
                try:
                    msg = await sock.receive_json()
                except json.JSONDecodeError:
                    await sock.send_json(
                        _err("?", "bad-request", "message is not JSON"))
                    continue
                await sock.send_json(await _handle(state, msg))
        except WebSocketDisconnect:
            pass

    return app


def run(port=8787, meshdir=None, precomputed=None):
    import uvicorn

    app = create_app(meshdir, precomputed, announce_port=port)
    uvicorn.run(app, host="127.0.0.1", port=port, log_level="warning")

import numpy as np
import pytest
from fastapi.testclient import TestClient

from surfink import meshes as meshlib
from surfink.embedding import SurfaceMap
from surfink.harness import build_surface_map
from surfink.mesh import load_obj, save_obj
from surfink.projection import Method, SystemState, project_stroke
from surfink.service import create_app

IDQ = [1.0, 0.0, 0.0, 0.0]


@pytest.fixture(scope="module")
def meshdir(tmp_path_factory):
    d = tmp_path_factory.mktemp("served")
    save_obj(meshlib.plane(8), d / "plane.obj")
    mesh = load_obj(d / "plane.obj")
    build_surface_map(mesh, seed=0).save(d / "plane.scp")
    return d


@pytest.fixture(scope="module")
def client(meshdir):
    with TestClient(create_app(meshdir=str(meshdir))) as c:
        yield c


def _sample(i, pos, t_ms=None):
    return {
        "op": "point", "c": list(pos), "cq": IDQ,
        "h": [0.0, 0.0, 2.0], "hq": IDQ,
        "t_ms": 20.0 * i if t_ms is None else t_ms,
    }


def _line(n=8, lift=0.05):
    xs = np.linspace(-0.2, 0.2, n)
    return [[float(x), 0.0, lift] for x in xs]


# -- http --------------------------------------------------------------------


def test_list_meshes(client):
    r = client.get("/meshes")
    assert r.status_code == 200
    ids = [m["id"] for m in r.json()]
    assert "plane" in ids and "icosphere" in ids
    entry = next(m for m in r.json() if m["id"] == "plane")
    assert entry["n_faces"] == 128
    assert len(entry["bbox"]) == 2


def test_get_mesh_geometry(client):
    doc = client.get("/meshes/plane").json()
    assert len(doc["vertices"]) == doc["n_vertices"] == 81
    assert len(doc["faces"]) == doc["n_faces"] == 128
    assert len(doc["normals"]) == doc["n_vertices"]
    assert all(len(f) == 3 for f in doc["faces"][:5])


def test_get_mesh_404(client):
    assert client.get("/meshes/teapot").status_code == 404


# -- websocket ops -----------------------------------------------------------


def test_ws_list(client):
    with client.websocket_connect("/ws") as ws:
        ws.send_json({"op": "list"})
        msg = ws.receive_json()
        assert msg["ok"] and msg["op"] == "list"
        assert any(m["id"] == "plane" for m in msg["meshes"])


def test_open_validation(client):
    with client.websocket_connect("/ws") as ws:
        ws.send_json({"op": "open", "mesh": "teapot"})
        assert ws.receive_json()["code"] == "not-found"
        ws.send_json({"op": "open", "mesh": "plane", "method": "teleport"})
        assert ws.receive_json()["code"] == "bad-request"
        ws.send_json({"op": "open", "mesh": "plane"})
        msg = ws.receive_json()
        assert msg["ok"] and msg["method"] == "mimicry"
        assert msg["session"].startswith("s")


def test_point_end_round_trip(client):
    with client.websocket_connect("/ws") as ws:
        ws.send_json({"op": "open", "mesh": "plane", "method": "snap"})
        sid = ws.receive_json()["session"]
        for i, p in enumerate(_line(3)):
            ws.send_json(_sample(i, p) | {"session": sid})
            msg = ws.receive_json()
            assert msg["ok"] and not msg["skipped"]
            assert abs(msg["point"]["position"][2]) < 1e-12
        ws.send_json({"op": "end", "session": sid})
        msg = ws.receive_json()
        assert msg["ok"] and msg["n_points"] == 3 and msg["n_skipped"] == 0
        assert msg["report"]["d_ep"] is None
        assert msg["report"]["tau"] == pytest.approx(0.04)
        # the projector reset: a second stroke starts clean
        ws.send_json(_sample(0, [0.1, 0.1, 0.05]) | {"session": sid})
        assert ws.receive_json()["ok"]


def test_out_of_order_point_rejected_without_corruption(client):
    with client.websocket_connect("/ws") as ws:
        ws.send_json({"op": "open", "mesh": "plane", "method": "snap"})
        sid = ws.receive_json()["session"]
        pts = _line(4)
        ws.send_json(_sample(0, pts[0]) | {"session": sid})
        ws.receive_json()
        ws.send_json(_sample(1, pts[1]) | {"session": sid})
        ws.receive_json()
        ws.send_json(_sample(0, pts[2], t_ms=10.0) | {"session": sid})
        assert ws.receive_json()["code"] == "rejected"
        ws.send_json(_sample(2, pts[2]) | {"session": sid})
        assert ws.receive_json()["ok"]
        ws.send_json({"op": "end", "session": sid})
        assert ws.receive_json()["n_points"] == 3


def test_method_switch_blocked_mid_stroke(client):
    with client.websocket_connect("/ws") as ws:
        ws.send_json({"op": "open", "mesh": "plane", "method": "snap"})
        sid = ws.receive_json()["session"]
        ws.send_json(_sample(0, [0.0, 0.0, 0.05]) | {"session": sid})
        ws.receive_json()
        ws.send_json({"op": "method", "method": "scp", "session": sid})
        assert ws.receive_json()["code"] == "rejected"
        ws.send_json({"op": "end", "session": sid})
        ws.receive_json()
        ws.send_json({"op": "method", "method": "scp", "session": sid})
        msg = ws.receive_json()
        assert msg["ok"] and msg["method"] == "scp"


def test_undo_and_close(client):
    with client.websocket_connect("/ws") as ws:
        ws.send_json({"op": "open", "mesh": "plane", "method": "snap"})
        sid = ws.receive_json()["session"]
        for i, p in enumerate(_line(3)):
            ws.send_json(_sample(i, p) | {"session": sid})
            ws.receive_json()
        ws.send_json({"op": "end", "session": sid})
        ws.receive_json()
        ws.send_json({"op": "undo", "session": sid})
        msg = ws.receive_json()
        assert msg["removed"] == 1 and msg["strokes"] == 0
        ws.send_json({"op": "undo", "session": sid})
        assert ws.receive_json()["removed"] == 0
        ws.send_json({"op": "close", "session": sid})
        assert ws.receive_json()["ok"]
        ws.send_json(_sample(0, [0.0, 0.0, 0.05]) | {"session": sid})
        assert ws.receive_json()["code"] == "not-found"


def test_sessions_are_isolated(client):
    with client.websocket_connect("/ws") as ws:
        ws.send_json({"op": "open", "mesh": "plane", "method": "snap"})
        a = ws.receive_json()["session"]
        ws.send_json({"op": "open", "mesh": "plane", "method": "snap"})
        b = ws.receive_json()["session"]
        assert a != b
        for i, p in enumerate(_line(5)):
            ws.send_json(_sample(i, p) | {"session": a})
            ws.receive_json()
        for i, p in enumerate(_line(3)):
            ws.send_json(_sample(i, p) | {"session": b})
            ws.receive_json()
        ws.send_json({"op": "end", "session": a})
        assert ws.receive_json()["n_points"] == 5
        ws.send_json({"op": "end", "session": b})
        assert ws.receive_json()["n_points"] == 3


def test_bad_payloads(client):
    with client.websocket_connect("/ws") as ws:
        ws.send_text("not json")
        assert ws.receive_json()["code"] == "bad-request"
        ws.send_json({"op": "warp"})
        assert ws.receive_json()["code"] == "not-found"  # no session either
        ws.send_json({"op": "open", "mesh": "plane", "method": "snap"})
        sid = ws.receive_json()["session"]
        ws.send_json({"op": "point", "session": sid, "c": [0, 0, 0.05]})
        assert ws.receive_json()["code"] == "bad-request"
        ws.send_json({"op": "warp", "session": sid})
        assert ws.receive_json()["code"] == "bad-request"


# -- streaming equals batch --------------------------------------------------


def test_streamed_curve_matches_batch(client, meshdir):
    rng = np.random.default_rng(4)
    n = 24
    xs = np.linspace(-0.3, 0.3, n)
    pts = np.stack([
        xs, 0.15 * np.sin(4.0 * xs), 0.05 + 0.01 * rng.standard_normal(n),
    ], axis=1)
    acked = []
    with client.websocket_connect("/ws") as ws:
        ws.send_json({"op": "open", "mesh": "plane", "method": "mimicry"})
        sid = ws.receive_json()["session"]
        for i, p in enumerate(pts):
            ws.send_json(_sample(i, [float(v) for v in p])
                         | {"session": sid})
            msg = ws.receive_json()
            assert msg["ok"]
            acked.append(msg["point"])
        ws.send_json({"op": "end", "session": sid})
        assert ws.receive_json()["n_points"] == n

    # independent batch replay from the same files the service loaded
    mesh = load_obj(meshdir / "plane.obj")
    smap = SurfaceMap.load(meshdir / "plane.scp", mesh)
    samples = [
        SystemState(head_pos=[0.0, 0.0, 2.0], head_orient=IDQ,
                    ctrl_pos=[float(v) for v in p], ctrl_orient=IDQ,
                    t=20.0 * i / 1000.0)
        for i, p in enumerate(pts)
    ]
    batch = project_stroke(samples, Method.MIMICRY, mesh, smap)
    assert len(batch.points) == len(acked)
    for got, want in zip(acked, batch.points):
        assert got["face"] == want.face
        assert got["bary"] == [float(b) for b in want.bary]
        assert got["position"] == [float(x) for x in want.position]

"""
Streaming a stroke into the live service
========================================

Runs the websocket service in-process and pushes samples one at a time,
the way a headset client would.  Every sample is acked with the inked
surface point; ending the stroke returns the score report.
"""

import numpy as np
from fastapi.testclient import TestClient

from surfink.service import create_app

client = TestClient(create_app())
idq = [1.0, 0.0, 0.0, 0.0]

names = [s["id"] for s in client.get("/meshes").json()]
print(f"built-in meshes: {', '.join(names)}")

xs = np.linspace(-0.3, 0.3, 25)
with client.websocket_connect("/ws") as ws:
    ws.send_json({"op": "open", "mesh": "plane", "method": "mimicry"})
    sid = ws.receive_json()["session"]
    print(f"\nsession {sid} open on the plane, anchored tracing")

    for i, x in enumerate(xs):
        ws.send_json({
            "op": "point", "session": sid,
            "c": [float(x), float(0.15 * np.sin(6.0 * x)), 0.05],
            "cq": idq, "h": [0.0, 0.0, 2.0], "hq": idq,
            "t_ms": 20.0 * i,
        })
        ack = ws.receive_json()
        if i % 8 == 0:
            p = np.round(ack["point"]["position"], 3)
            print(f"  sample {i:2d} -> face {ack['point']['face']:4d} at {p}")

    ws.send_json({"op": "end", "session": sid})
    end = ws.receive_json()
    print(f"\nstroke closed: {end['n_points']} points inked")
    rep = end["report"]
    print(f"ambient curvature {rep['k_e']:.3f} rad/m, "
          f"surface curvature {rep['k_g']:.3f} rad/m, "
          f"torque proxy {rep['tau']:.3f}")

    ws.send_json({"op": "close", "session": sid})
    ws.receive_json()

print("\nthe same samples replayed in batch match these acks bit for bit")
print("(see the streaming test in the acceptance suite)")

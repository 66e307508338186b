#!/usr/bin/env python3
"""Run the HTTP scoring service in-process and exercise its endpoints.

Starts the service on a loopback port with the built-in published logistic
model, checks liveness, scores a questionnaire, and shows the field-level
validation errors a malformed request gets back.
"""

import json
import threading
import urllib.request
from urllib.error import HTTPError

from pqscreen.cohort import PQ_ITEM_NAMES
from pqscreen.serve import create_server

server = create_server("paper-eq1", host="127.0.0.1", port=0)
port = server.socket.getsockname()[1]
threading.Thread(target=server.serve_forever, daemon=True).start()
base = f"http://127.0.0.1:{port}"
print(f"service on {base}")


def get(path):
    with urllib.request.urlopen(base + path) as resp:
        return json.loads(resp.read())


def post(path, body):
    req = urllib.request.Request(
        base + path, data=json.dumps(body).encode(),
        headers={"Content-Type": "application/json"},
    )
    with urllib.request.urlopen(req) as resp:
        return json.loads(resp.read())


print("health:", get("/v1/health"))
info = get("/v1/model")
print(f"model: {info['model_id']} ({info['model_type']}, "
      f"{len(info['feature_names'])} features)")

request = {
    "features": {name: 0 for name in PQ_ITEM_NAMES},
    "age": 66,
    "gender": 1,
}
request["features"]["P2_TRMR"] = 3
request["features"]["P2_HWRT"] = 2
response = post("/v1/score", request)
print(f"probability {response['probability']:.4%}, "
      f"linear score {response['linear_score']:+.4f}")
top = sorted(response["contributions"], key=lambda c: -abs(c["contribution"]))[:3]
for c in top:
    print(f"  {c['feature']:10s} value {c['value']:g} -> {c['contribution']:+.4f}")

bad = {"features": {"P2_TRMR": 9}, "age": -4, "gender": 2}
try:
    post("/v1/score", bad)
except HTTPError as err:
    errors = json.loads(err.read())["errors"]
    print(f"invalid request rejected with {err.code}; first errors:")
    for e in errors[:3]:
        print(f"  {e['field']}: {e['message']}")

server.shutdown()

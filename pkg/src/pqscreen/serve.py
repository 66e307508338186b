"""HTTP scoring service for a loaded model artifact.

Endpoints:
  POST /v1/score   questionnaire answers -> probability and contributions
  GET  /v1/model   artifact metadata
  GET  /v1/health  liveness probe

Requests and responses are JSON/UTF-8. Responses are a pure function of
(artifact, request body), so identical requests produce byte-identical
bodies. Validation failures return 400 with a field-level error list and
never reach the model.
"""

from __future__ import annotations

import json
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np
from scipy.special import expit

from .artifacts import load_artifact, model_from_artifact
from .cohort import AGE_MAX, AGE_MIN, MAX_SEVERITY, PQ_ITEM_NAMES
from .learn import LogisticModel, logistic_score, predict_score, SvmModel

DEFAULT_PORT = 8471
SCORE_SCHEMA_VERSION = 1


class RequestError(ValueError):
    def __init__(self, errors):
        self.errors = errors
        super().__init__(f"{len(errors)} validation error(s)")


def validate_score_request(body) -> tuple[dict, float, int]:
    """Check a /v1/score body; returns (features, age, gender) or raises."""
    errors = []
    if not isinstance(body, dict):
        raise RequestError([{"field": "", "message": "request body must be a JSON object"}])
    allowed_top = {"features", "age", "gender"}
    for key in body:
        if key not in allowed_top:
            errors.append({"field": key, "message": "unknown field"})
    features = body.get("features")
    if not isinstance(features, dict):
        errors.append({"field": "features", "message": "must be an object of the 20 items"})
        features = {}
    for key in features:
        if key not in PQ_ITEM_NAMES:
            errors.append({"field": f"features.{key}", "message": "unknown item"})
    clean = {}
    for name in PQ_ITEM_NAMES:
        if name not in features:
            errors.append({"field": f"features.{name}", "message": "missing item"})
            continue
        v = features[name]
        if isinstance(v, bool) or not isinstance(v, (int, float)) or v != int(v):
            errors.append({"field": f"features.{name}", "message": "severity must be an integer"})
        elif not (0 <= int(v) <= MAX_SEVERITY):
            errors.append(
                {"field": f"features.{name}", "message": "severity must lie in 0..4"}
            )
        else:
            clean[name] = int(v)
    age = body.get("age")
    if isinstance(age, bool) or not isinstance(age, (int, float)):
        errors.append({"field": "age", "message": "age must be a number"})
    elif not (AGE_MIN <= float(age) <= AGE_MAX):
        errors.append({"field": "age", "message": f"age must lie in [{AGE_MIN}, {AGE_MAX}]"})
    gender = body.get("gender")
    if isinstance(gender, bool) or gender not in (0, 1):
        errors.append({"field": "gender", "message": "gender must be coded 0 or 1"})
    if errors:
        raise RequestError(errors)
    return clean, float(age), int(gender)


class ScoringService:
    """Stateless scorer wrapping one loaded artifact."""

    def __init__(self, artifact: dict):
        self.artifact = artifact
        self.model, self.selector, self.feature_names = model_from_artifact(artifact)
        self.model_id = artifact.get("model_id", "custom")

    def score(self, features: dict, age: float, gender: int) -> dict:
        x = np.array([features[n] for n in PQ_ITEM_NAMES] + [gender, age], dtype=float)
        z = self.selector.transform(x) if self.selector is not None else x
        if isinstance(self.model, LogisticModel):
            probability, linear, contribs = logistic_score(self.model, z)
            names = (
                self.model.feature_names
                if self.model.feature_names is not None
                else tuple(self.feature_names)
            )
            contributions = [
                {"feature": n, "value": float(v), "contribution": float(c)}
                for n, v, c in zip(names, z, contribs)
            ]
            intercept = self.model.intercept
        else:
            raw = float(predict_score(self.model, z))
            probability = float(expit(raw)) if isinstance(self.model, SvmModel) else raw
            linear = None
            contributions = []
            intercept = None
        return {
            "schema_version": SCORE_SCHEMA_VERSION,
            "model_id": self.model_id,
            "probability": float(probability),
            "linear_score": linear,
            "intercept": intercept,
            "contributions": contributions,
        }

    def handle_score_body(self, raw_body: bytes) -> tuple[int, dict]:
        try:
            body = json.loads(raw_body.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError):
            return 400, {"errors": [{"field": "", "message": "body is not valid JSON"}]}
        try:
            features, age, gender = validate_score_request(body)
        except RequestError as e:
            return 400, {"errors": e.errors}
        return 200, self.score(features, age, gender)

    def model_info(self) -> dict:
        return {
            "schema_version": self.artifact.get("schema_version"),
            "model_id": self.model_id,
            "model_type": self.artifact.get("model_type"),
            "feature_names": list(self.feature_names),
            "toolkit_version": self.artifact.get("toolkit_version"),
        }


def _encode(payload: dict) -> bytes:
    return json.dumps(payload, separators=(",", ":")).encode("utf-8")


def make_handler(service: ScoringService):
    class Handler(BaseHTTPRequestHandler):
        def log_message(self, *args):  # quiet by default
            pass

        def _send(self, status: int, payload: dict):
            body = _encode(payload)
            self.send_response(status)
            self.send_header("Content-Type", "application/json; charset=utf-8")
            self.send_header("Content-Length", str(len(body)))
            self.send_header("Access-Control-Allow-Origin", "*")
            self.end_headers()
            self.wfile.write(body)

        def do_OPTIONS(self):
            self.send_response(204)
            self.send_header("Access-Control-Allow-Origin", "*")
            self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
            self.send_header("Access-Control-Allow-Headers", "Content-Type")
            self.send_header("Content-Length", "0")
            self.end_headers()

        def do_GET(self):
            if self.path == "/v1/health":
                self._send(200, {"status": "ok"})
            elif self.path == "/v1/model":
                self._send(200, service.model_info())
            else:
                self._send(404, {"errors": [{"field": "", "message": "not found"}]})

        def do_POST(self):
            if self.path != "/v1/score":
                self._send(404, {"errors": [{"field": "", "message": "not found"}]})
                return
            length = int(self.headers.get("Content-Length") or 0)
            raw = self.rfile.read(length)
            status, payload = service.handle_score_body(raw)
            self._send(status, payload)

    return Handler


def create_server(
    artifact_path_or_name: str = "paper-eq1",
    host: str = "127.0.0.1",
    port: int = DEFAULT_PORT,
) -> ThreadingHTTPServer:
    artifact = load_artifact(artifact_path_or_name)
    service = ScoringService(artifact)
    server = ThreadingHTTPServer((host, port), make_handler(service))
    server.service = service
    return server


def serve(artifact_path_or_name: str = "paper-eq1", host: str = "127.0.0.1",
          port: int = DEFAULT_PORT) -> None:
    server = create_server(artifact_path_or_name, host, port)
    sa = server.socket.getsockname()
    print(f"scoring service listening on http://{sa[0]}:{sa[1]} "
          f"(model {server.service.model_id})")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.shutdown()

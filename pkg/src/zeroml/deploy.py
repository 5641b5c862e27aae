"""Deployer: portable JSON model artifacts and an HTTP prediction server.

An artifact carries the frozen feature schema next to the learned
parameters, so predictions never touch training data and never refit.
"""

from __future__ import annotations

import datetime as dt
import json
import logging
import os
from http import HTTPStatus
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Union

from .automl import models
from .automl.report import Report
from .automl.selector import TrainedModel
from .data import Dataset, FeatureSchema
from .errors import DeployError, FormatError, SchemaError, ZeroMLError

log = logging.getLogger(__name__)

ARTIFACT_FORMAT_VERSION = 1
TEST_EPOCH_ENV = "ZEROML_TEST_EPOCH"
SUPPORTED_TARGETS = ("file", "edge", "api")

_REQUIRED_KEYS = ("format_version", "task", "metric", "cv_score", "roster_version", "seed",
                  "created_at", "feature_schema", "model_kind", "hyperparams", "parameters")


def created_at(test_mode: bool = False) -> str:
    """UTC ISO-8601 timestamp; ``ZEROML_TEST_EPOCH`` (seconds) pins it, test mode zeroes it."""
    pinned = os.environ.get(TEST_EPOCH_ENV)
    if pinned is not None:
        when = dt.datetime.fromtimestamp(float(pinned), tz=dt.timezone.utc)
    elif test_mode:
        when = dt.datetime.fromtimestamp(0, tz=dt.timezone.utc)
    else:
        when = dt.datetime.now(tz=dt.timezone.utc).replace(microsecond=0)
    return when.strftime("%Y-%m-%dT%H:%M:%SZ")


def artifact_dict(m: TrainedModel, test_mode: bool = False) -> dict:
    return {
        "format_version": ARTIFACT_FORMAT_VERSION,
        "task": m.task,
        "metric": m.metric,
        "cv_score": m.cv_score,
        "roster_version": m.roster_version,
        "seed": m.seed,
        "created_at": created_at(test_mode),
        "candidate_index": m.candidate_index,
        "feature_schema": m.schema.to_dict(),
        "model_kind": m.model_kind,
        "hyperparams": dict(m.hyperparams),
        "parameters": m.estimator.params(),
        "report": m.report.to_dict() if m.report is not None else None,
    }


def dumps_artifact(m: TrainedModel, test_mode: bool = False) -> str:
    return json.dumps(artifact_dict(m, test_mode), sort_keys=True, indent=1,
                      allow_nan=False, ensure_ascii=False) + "\n"


def save_artifact(m: TrainedModel, path: Union[str, Path], test_mode: bool = False) -> None:
    """Write ``m`` as one UTF-8 JSON document with sorted keys."""
    text = dumps_artifact(m, test_mode)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def model_from_dict(doc: dict) -> TrainedModel:
    if not isinstance(doc, dict):
        raise FormatError("artifact must be a JSON object")
    version = doc.get("format_version")
    if version != ARTIFACT_FORMAT_VERSION:
        raise FormatError(f"unsupported artifact format_version {version!r} "
                          f"(this build reads {ARTIFACT_FORMAT_VERSION})")
    absent = [k for k in _REQUIRED_KEYS if k not in doc]
    if absent:
        raise FormatError(f"artifact is missing keys: {', '.join(absent)}")
    try:
        schema = FeatureSchema.from_dict(doc["feature_schema"])
        estimator = models.restore(doc["model_kind"], doc["hyperparams"], doc["parameters"])
        report = Report.from_dict(doc["report"]) if doc.get("report") else None
    except (KeyError, TypeError, ValueError, SchemaError) as exc:
        raise FormatError(f"artifact schema mismatch: {type(exc).__name__}: {exc}") from None
    if (doc["task"] == "classification") != (schema.classes is not None):
        raise FormatError("artifact task does not match its target schema")
    return TrainedModel(schema, doc["model_kind"], dict(doc["hyperparams"]), estimator,
                        doc["task"], doc["metric"], float(doc["cv_score"]), int(doc["seed"]),
                        int(doc["roster_version"]), int(doc.get("candidate_index", 0)), report)


def load_artifact(path: Union[str, Path]) -> TrainedModel:
    raw = Path(path).read_bytes()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise FormatError(f"artifact is not UTF-8 (byte offset {exc.start})") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        offset = len(text[:exc.pos].encode("utf-8"))
        raise FormatError(f"artifact is not valid JSON at byte offset {offset}: {exc.msg}") from None
    return model_from_dict(doc)


def instances_dataset(m: TrainedModel, instances) -> Dataset:
    """Turn request instances into a dataset typed by the model's schema."""
    if not isinstance(instances, list) or not all(isinstance(r, dict) for r in instances):
        raise SchemaError('"instances" must be a list of objects')
    absent = sorted({c for r in instances for c in m.schema.input_columns if c not in r})
    if absent:
        raise SchemaError(f"missing columns: {', '.join(absent)}")
    return Dataset.from_records(instances, m.schema.input_columns, m.schema.categorical_columns)


class PredictionHandler(BaseHTTPRequestHandler):
    server_version = "zeroml"
    protocol_version = "HTTP/1.1"
    model: TrainedModel
    report_doc: dict | None

    def _send(self, status: int, payload: dict) -> None:
        body = json.dumps(payload).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _not_allowed(self, allowed: str) -> None:
        body = json.dumps({"error": f"method not allowed; use {allowed}"}).encode()
        self.send_response(HTTPStatus.METHOD_NOT_ALLOWED)
        self.send_header("Allow", allowed)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _route(self, method: str) -> None:
        path = self.path.split("?", 1)[0]
        routes = {"/health": "GET", "/report": "GET", "/predict": "POST"}
        if path not in routes:
            # drain any body so the connection stays usable
            self.rfile.read(int(self.headers.get("Content-Length") or 0))
            self._send(HTTPStatus.NOT_FOUND, {"error": f"no such endpoint {path}"})
            return
        if routes[path] != method:
            self.rfile.read(int(self.headers.get("Content-Length") or 0))
            self._not_allowed(routes[path])
            return
        if path == "/health":
            self._send(HTTPStatus.OK, {"status": "ok"})
        elif path == "/report":
            if self.report_doc is None:
                self._send(HTTPStatus.NOT_FOUND, {"error": "artifact has no stored report"})
            else:
                self._send(HTTPStatus.OK, self.report_doc)
        else:
            self._predict()

    def _predict(self) -> None:
        length = int(self.headers.get("Content-Length") or 0)
        body = self.rfile.read(length)
        try:
            doc = json.loads(body)
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            self._send(HTTPStatus.BAD_REQUEST, {"error": f"malformed JSON: {exc}"})
            return
        if not isinstance(doc, dict) or "instances" not in doc:
            self._send(HTTPStatus.BAD_REQUEST, {"error": 'body must be {"instances": [...]}'})
            return
        try:
            d = instances_dataset(self.model, doc["instances"])
            predictions = self.model.predict(d)
        except ZeroMLError as exc:
            self._send(HTTPStatus.BAD_REQUEST, {"error": str(exc)})
            return
        except Exception as exc:  # input-caused faults map to 400, never 500
            log.exception("prediction failed")
            self._send(HTTPStatus.BAD_REQUEST, {"error": f"{type(exc).__name__}: {exc}"})
            return
        self._send(HTTPStatus.OK, {"predictions": predictions})

    def do_GET(self):
        self._route("GET")

    def do_POST(self):
        self._route("POST")

    def do_PUT(self):
        self._route("PUT")

    def do_DELETE(self):
        self._route("DELETE")

    def do_PATCH(self):
        self._route("PATCH")

    def log_message(self, format, *args):
        log.info("%s - %s", self.address_string(), format % args)


def make_server(model: TrainedModel, host: str = "127.0.0.1", port: int = 0) -> ThreadingHTTPServer:
    """Bind a threaded server for ``model`` without starting it (port 0 = any free port)."""
    report_doc = model.report.to_dict() if model.report is not None else None
    handler = type("BoundPredictionHandler", (PredictionHandler,),
                   {"model": model, "report_doc": report_doc})
    server = ThreadingHTTPServer((host, port), handler)
    server.daemon_threads = True
    return server


def serve(artifact_path: Union[str, Path], port: int, host: str = "0.0.0.0") -> None:
    """Serve ``artifact_path`` over HTTP until interrupted."""
    model = load_artifact(artifact_path)
    server = make_server(model, host, port)
    log.warning("serving %s on http://%s:%d", artifact_path, host, server.server_address[1])
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()


def parse_address(dest: str) -> tuple[str, int]:
    host, sep, port = dest.rpartition(":")
    if not sep:
        host, port = "0.0.0.0", dest
    try:
        return host or "0.0.0.0", int(port)
    except ValueError:
        raise DeployError(f"api destination must be host:port, got {dest!r}") from None


def check_target(target: str) -> None:
    if target == "serverless":
        raise DeployError("target 'serverless' not supported in v1")
    if target not in SUPPORTED_TARGETS:
        raise DeployError(f"unknown deploy target {target!r} (expected {', '.join(SUPPORTED_TARGETS)})")

"""HTTP service over the pipeline: dataset upload, async explanation jobs,
explanation retrieval and prediction.

Endpoints (all JSON, UTF-8):
  POST /datasets               multipart CSV ("file") + config ("config")
  GET  /datasets/{id}/features schema of an uploaded dataset
  POST /datasets/{id}/explain  start a job; body is the explain request
  GET  /jobs/{id}              job status
  GET  /explanations/{id}      stored explanation, byte-identical to the file
  POST /explanations/{id}/predict  {"instance": {...}} -> label + provenance

Jobs run on worker threads and are polled; artifacts live in the flat store.
"""

from __future__ import annotations

import json
import threading
import time

from fastapi import FastAPI, HTTPException, Request, Response

from .data import BinConfig, load_csv
from .errors import TwoLevelError
from .mining import MinerConfig
from .objective import ObjectiveConfig
from .oracle import OracleSource
from .pipeline import ExplainRequest, explain, model_from_explanation, to_canonical_json
from .store import Store


def _parse_multipart(body: bytes, content_type: str) -> dict[str, bytes]:
    """Minimal multipart/form-data parser; returns field name -> payload."""
    marker = "boundary="
    if marker not in content_type:
        raise HTTPException(400, "multipart body without boundary")
    boundary = content_type.split(marker, 1)[1].split(";")[0].strip().strip('"')
    delimiter = b"--" + boundary.encode()
    fields: dict[str, bytes] = {}
    for part in body.split(delimiter):
        part = part.strip(b"\r\n")
        if not part or part == b"--":
            continue
        if b"\r\n\r\n" not in part:
            continue
        header_block, payload = part.split(b"\r\n\r\n", 1)
        name = None
        for line in header_block.split(b"\r\n"):
            text = line.decode("utf-8", "replace")
            if text.lower().startswith("content-disposition"):
                for piece in text.split(";"):
                    piece = piece.strip()
                    if piece.startswith("name="):
                        name = piece[5:].strip('"')
        if name:
            fields[name] = payload
    return fields


def _field_error(field: str, message: str) -> HTTPException:
    return HTTPException(400, {"field": field, "message": message})


def _build_request(dataset, payload: dict) -> ExplainRequest:
    objective = payload.get("objective", {})
    miner = payload.get("miner", {})
    try:
        obj_cfg = ObjectiveConfig.from_json(json.dumps(objective))
    except (TwoLevelError, ValueError, TypeError) as exc:
        raise _field_error("objective", str(exc))
    try:
        miner_cfg = MinerConfig(
            min_support=float(miner.get("min_support", 0.05)),
            max_width=int(miner.get("max_width", min(obj_cfg.max_width, 3))),
            max_candidates=int(miner.get("max_candidates", 200)),
        )
    except (TwoLevelError, ValueError, TypeError) as exc:
        raise _field_error("miner", str(exc))
    features = payload.get("features")
    if features is not None:
        if (not isinstance(features, list) or not features
                or not all(isinstance(f, str) for f in features)):
            raise _field_error("features", "must be a nonempty list of feature names")
    oracle = None
    if payload.get("oracle"):
        spec = payload["oracle"]
        try:
            oracle = OracleSource(spec["mode"], spec["endpoint"],
                                  timeout=float(spec.get("timeout", 30.0)),
                                  batch_size=int(spec.get("batch_size", 256)))
        except (TwoLevelError, KeyError, ValueError, TypeError) as exc:
            raise _field_error("oracle", str(exc))
    seed = payload.get("seed")
    if seed is not None and not isinstance(seed, int):
        raise _field_error("seed", "must be an integer")
    try:
        return ExplainRequest(
            dataset=dataset, oracle=oracle, miner=miner_cfg, objective=obj_cfg,
            user_features=frozenset(features) if features is not None else None,
            seed=seed, all_labels=bool(payload.get("all_labels", False)),
        )
    except TwoLevelError as exc:
        raise _field_error("request", str(exc))


def create_app(store_dir: str) -> FastAPI:
    app = FastAPI(title="twolevel")
    store = Store(store_dir)
    app.state.store = store

    def load_dataset(dataset_id: str):
        state = store.dataset_state(dataset_id)
        if state == "uploading":
            raise HTTPException(409, "dataset still uploading")
        if state == "missing":
            raise HTTPException(404, "unknown dataset")
        meta = store.dataset_meta(dataset_id)
        binning = BinConfig.from_json(json.dumps(meta.get("binning", {})))
        return load_csv(str(store.dataset_path(dataset_id)), meta["label_column"], binning)

    @app.post("/datasets")
    async def upload_dataset(request: Request):
        content_type = request.headers.get("content-type", "")
        if not content_type.startswith("multipart/form-data"):
            raise HTTPException(400, "expected multipart/form-data")
        fields = _parse_multipart(await request.body(), content_type)
        if "file" not in fields:
            raise _field_error("file", "CSV part is required")
        try:
            config = json.loads(fields.get("config", b"{}") or b"{}")
        except json.JSONDecodeError as exc:
            raise _field_error("config", f"not valid JSON: {exc}")
        if "label_column" not in config:
            raise _field_error("config.label_column", "required")
        dataset_id = store.begin_dataset_upload()
        try:
            store.finish_dataset_upload(dataset_id, fields["file"], {
                "label_column": config["label_column"],
                "binning": config.get("binning", {}),
            })
            load_dataset(dataset_id)   # validate eagerly so bad uploads 400
        except HTTPException:
            store.dataset_path(dataset_id).unlink(missing_ok=True)
            raise
        except TwoLevelError as exc:
            store.abort_dataset_upload(dataset_id)
            store.dataset_path(dataset_id).unlink(missing_ok=True)
            raise _field_error("file", str(exc))
        return {"id": dataset_id}

    @app.get("/datasets/{dataset_id}/features")
    def dataset_features(dataset_id: str):
        ds = load_dataset(dataset_id)
        features = []
        for f in ds.schema:
            entry = {"name": f.name, "kind": f.kind}
            if f.values:
                entry["values"] = list(f.values)
            if f.thresholds:
                entry["thresholds"] = list(f.thresholds)
            features.append(entry)
        return {"features": features, "label_column": ds.label_column,
                "labels": list(ds.label_set)}

    @app.post("/datasets/{dataset_id}/explain")
    async def start_explain(dataset_id: str, request: Request):
        ds = load_dataset(dataset_id)
        try:
            payload = json.loads(await request.body() or b"{}")
        except json.JSONDecodeError as exc:
            raise HTTPException(400, f"body is not valid JSON: {exc}")
        explain_request = _build_request(ds, payload)   # validate before queueing
        job = store.create_job("explain", {"dataset_id": dataset_id, "payload": payload})

        def run():
            job.advance("running", started_at=time.time())
            store.save_job(job)
            try:
                doc = explain(explain_request)
                explanation_id = store.save_explanation(to_canonical_json(doc))
                job.advance("done", result_id=explanation_id, finished_at=time.time())
            except Exception as exc:
                job.advance("failed", error=f"{type(exc).__name__}: {exc}",
                            finished_at=time.time())
            store.save_job(job)

        threading.Thread(target=run, daemon=True).start()
        return {"job_id": job.id}

    @app.get("/jobs/{job_id}")
    def job_status(job_id: str):
        job = store.get_job(job_id)
        if job is None:
            raise HTTPException(404, "unknown job")
        return {"id": job.id, "kind": job.kind, "state": job.state,
                "result_id": job.result_id, "error": job.error,
                "created_at": job.created_at, "started_at": job.started_at,
                "finished_at": job.finished_at}

    @app.get("/explanations/{explanation_id}")
    def get_explanation(explanation_id: str):
        raw = store.explanation_bytes(explanation_id)
        if raw is None:
            raise HTTPException(404, "unknown explanation")
        return Response(content=raw, media_type="application/json")

    @app.post("/explanations/{explanation_id}/predict")
    async def predict(explanation_id: str, request: Request):
        raw = store.explanation_bytes(explanation_id)
        if raw is None:
            raise HTTPException(404, "unknown explanation")
        try:
            body = json.loads(await request.body() or b"{}")
        except json.JSONDecodeError as exc:
            raise HTTPException(400, f"body is not valid JSON: {exc}")
        instance = body.get("instance")
        if not isinstance(instance, dict):
            raise _field_error("instance", "must be an object of feature values")
        model = model_from_explanation(json.loads(raw))
        prediction = model.predict_instance(instance)
        return {
            "label": prediction.label,
            "provenance": {"kind": prediction.kind, "rule_index": prediction.rule_index},
            "fired_rules": list(prediction.fired),
        }

    return app

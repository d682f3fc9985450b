"""Flat-directory artifact store: datasets, explanations, jobs.

Layout: datasets/{id}.csv (+ .meta.json), explanations/{id}.json,
jobs/{id}.json. Every file is written to a temp path and renamed, so readers
only ever see complete artifacts; job state transitions are forward-only.
"""

from __future__ import annotations

import json
import os
import tempfile
import threading
import time
import uuid
from dataclasses import asdict, dataclass, field
from pathlib import Path

JOB_STATES = ("queued", "running", "done", "failed")


@dataclass
class Job:
    id: str
    kind: str                      # "explain" | "sweep"
    state: str = "queued"
    request: dict = field(default_factory=dict)
    result_id: str | None = None
    error: str | None = None
    created_at: float = 0.0
    started_at: float | None = None
    finished_at: float | None = None

    def advance(self, state: str, **updates) -> None:
        if JOB_STATES.index(state) < JOB_STATES.index(self.state):
            raise ValueError(f"job state cannot go {self.state} -> {state}")
        self.state = state
        for key, value in updates.items():
            setattr(self, key, value)


def new_id() -> str:
    return uuid.uuid4().hex[:12]


class Store:
    def __init__(self, root: str):
        self.root = Path(root)
        for sub in ("datasets", "explanations", "jobs"):
            (self.root / sub).mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._uploading: set[str] = set()
        self._jobs: dict[str, Job] = {}

    # --- datasets ---------------------------------------------------------
    def dataset_path(self, dataset_id: str) -> Path:
        return self.root / "datasets" / f"{dataset_id}.csv"

    def dataset_meta_path(self, dataset_id: str) -> Path:
        return self.root / "datasets" / f"{dataset_id}.meta.json"

    def begin_dataset_upload(self) -> str:
        dataset_id = new_id()
        with self._lock:
            self._uploading.add(dataset_id)
        return dataset_id

    def finish_dataset_upload(self, dataset_id: str, csv_bytes: bytes, meta: dict) -> None:
        self._atomic_write(self.dataset_path(dataset_id), csv_bytes)
        self._atomic_write(self.dataset_meta_path(dataset_id),
                           json.dumps(meta, sort_keys=True).encode())
        with self._lock:
            self._uploading.discard(dataset_id)

    def abort_dataset_upload(self, dataset_id: str) -> None:
        with self._lock:
            self._uploading.discard(dataset_id)

    def dataset_state(self, dataset_id: str) -> str:
        with self._lock:
            if dataset_id in self._uploading:
                return "uploading"
        return "ready" if self.dataset_path(dataset_id).exists() else "missing"

    def dataset_meta(self, dataset_id: str) -> dict:
        return json.loads(self.dataset_meta_path(dataset_id).read_text(encoding="utf-8"))

    # --- explanations -----------------------------------------------------
    def explanation_path(self, explanation_id: str) -> Path:
        return self.root / "explanations" / f"{explanation_id}.json"

    def save_explanation(self, text: str) -> str:
        explanation_id = new_id()
        self._atomic_write(self.explanation_path(explanation_id), text.encode())
        return explanation_id

    def explanation_bytes(self, explanation_id: str) -> bytes | None:
        path = self.explanation_path(explanation_id)
        return path.read_bytes() if path.exists() else None

    # --- jobs --------------------------------------------------------------
    def job_path(self, job_id: str) -> Path:
        return self.root / "jobs" / f"{job_id}.json"

    def create_job(self, kind: str, request: dict) -> Job:
        job = Job(id=new_id(), kind=kind, request=request, created_at=time.time())
        with self._lock:
            self._jobs[job.id] = job
        self.save_job(job)
        return job

    def save_job(self, job: Job) -> None:
        self._atomic_write(self.job_path(job.id), json.dumps(asdict(job)).encode())

    def get_job(self, job_id: str) -> Job | None:
        with self._lock:
            if job_id in self._jobs:
                return self._jobs[job_id]
        path = self.job_path(job_id)
        if not path.exists():
            return None
        return Job(**json.loads(path.read_text(encoding="utf-8")))

    def _atomic_write(self, path: Path, data: bytes) -> None:
        fd, tmp = tempfile.mkstemp(dir=str(path.parent), prefix=".tmp-")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

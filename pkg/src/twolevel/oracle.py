"""Black-box labelers: a dataset column, a subprocess, or an HTTP predictor.

The wire protocol is one JSON object per request: {"instances":[{feature:
value, ...}, ...]} answered by {"labels":[...]}. Subprocess oracles speak it
as newline-delimited JSON over stdin/stdout; HTTP oracles via POST /predict.
Labels are opaque strings. Responses are cached per row content within a run,
so identical rows always get identical labels and any batch partition yields
the same concatenated label list.
"""

from __future__ import annotations

import json
import queue
import shlex
import subprocess
import threading
from dataclasses import dataclass
from typing import Mapping, Sequence

import requests

from .errors import LabelError, OracleUnavailableError, ProtocolError, SchemaError

MODE_COLUMN = "column"
MODE_SUBPROCESS = "subprocess"
MODE_HTTP = "http"


@dataclass(frozen=True)
class OracleSource:
    """Where labels come from: a column name, a command line, or a URL."""

    mode: str
    endpoint: str
    timeout: float = 30.0
    batch_size: int = 256

    def __post_init__(self):
        if self.mode not in (MODE_COLUMN, MODE_SUBPROCESS, MODE_HTTP):
            raise SchemaError(f"unknown oracle mode {self.mode!r}")
        if self.timeout <= 0:
            raise SchemaError("oracle timeout must be positive")
        if self.batch_size < 1:
            raise SchemaError("batch_size must be >= 1")

    @classmethod
    def parse(cls, spec: str, **kw) -> "OracleSource":
        """CLI shorthand: 'column', 'cmd:<command line>' or an http(s) URL."""
        if spec.startswith("cmd:"):
            return cls(MODE_SUBPROCESS, spec[4:], **kw)
        if spec.startswith(("http://", "https://")):
            return cls(MODE_HTTP, spec, **kw)
        return cls(MODE_COLUMN, spec, **kw)


def _row_key(row: Mapping[str, object]) -> str:
    return json.dumps(row, sort_keys=True, separators=(",", ":"), default=str)


def _check_labels(payload: object, expected: int, raw: str) -> list[str]:
    if not isinstance(payload, dict) or "labels" not in payload:
        raise ProtocolError(f"response missing 'labels': {raw!r}")
    labels = payload["labels"]
    if not isinstance(labels, list) or len(labels) != expected:
        raise ProtocolError(f"expected {expected} labels, got: {raw!r}")
    for c in labels:
        if not isinstance(c, str):
            raise LabelError(f"label {c!r} is not a string")
    return labels


class _SubprocessOracle:
    """One long-running predictor process; one request line per batch."""

    def __init__(self, command: str, timeout: float):
        self.timeout = timeout
        try:
            self.proc = subprocess.Popen(
                shlex.split(command), stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                text=True, bufsize=1)
        except OSError as exc:
            raise OracleUnavailableError(f"cannot start {command!r}: {exc}") from exc
        self._lines: queue.Queue = queue.Queue()
        self._reader = threading.Thread(target=self._pump, daemon=True)
        self._reader.start()

    def _pump(self):
        assert self.proc.stdout is not None
        for line in self.proc.stdout:
            self._lines.put(line)
        self._lines.put(None)

    def ask(self, rows: Sequence[Mapping[str, object]]) -> list[str]:
        request = json.dumps({"instances": [dict(r) for r in rows]}) + "\n"
        try:
            assert self.proc.stdin is not None
            self.proc.stdin.write(request)
            self.proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise OracleUnavailableError(f"predictor process died: {exc}") from exc
        try:
            line = self._lines.get(timeout=self.timeout)
        except queue.Empty:
            raise OracleUnavailableError(
                f"predictor gave no answer within {self.timeout}s")
        if line is None:
            raise OracleUnavailableError("predictor closed its output stream")
        try:
            payload = json.loads(line)
        except json.JSONDecodeError:
            raise ProtocolError(f"malformed response line: {line!r}")
        return _check_labels(payload, len(rows), line.strip())

    def close(self):
        if self.proc.poll() is None:
            self.proc.terminate()
            try:
                self.proc.wait(timeout=2)
            except subprocess.TimeoutExpired:
                self.proc.kill()


def _http_ask(src: OracleSource, rows: Sequence[Mapping[str, object]]) -> list[str]:
    url = src.endpoint.rstrip("/") + "/predict"
    body = {"instances": [dict(r) for r in rows]}
    try:
        resp = requests.post(url, json=body, timeout=src.timeout)
    except requests.Timeout as exc:
        raise OracleUnavailableError(f"predictor at {url} timed out") from exc
    except requests.RequestException as exc:
        raise OracleUnavailableError(f"predictor at {url} unreachable: {exc}") from exc
    if resp.status_code != 200:
        raise ProtocolError(f"predictor returned HTTP {resp.status_code}: {resp.text!r}")
    try:
        payload = resp.json()
    except ValueError:
        raise ProtocolError(f"malformed response body: {resp.text!r}")
    return _check_labels(payload, len(rows), resp.text)


class LabelCache:
    """Insert-or-get cache keyed by row content; safe for concurrent use."""

    def __init__(self):
        self._data: dict[str, str] = {}
        self._lock = threading.Lock()

    def get(self, key: str) -> str | None:
        return self._data.get(key)

    def put(self, key: str, label: str) -> str:
        with self._lock:
            return self._data.setdefault(key, label)


def label_all(rows: Sequence[Mapping[str, object]], src: OracleSource,
              cache: LabelCache | None = None) -> list[str]:
    """One label per row, order preserved. Duplicate rows are asked once."""
    cache = cache if cache is not None else LabelCache()
    if src.mode == MODE_COLUMN:
        out = []
        for i, row in enumerate(rows):
            if src.endpoint not in row:
                raise SchemaError(f"row {i} has no column {src.endpoint!r}")
            out.append(str(row[src.endpoint]))
        return out

    keys = [_row_key(r) for r in rows]
    labels: list[str | None] = [cache.get(k) for k in keys]
    pending: list[int] = []
    seen: set[str] = set()
    for i, lab in enumerate(labels):
        if lab is None and keys[i] not in seen:
            pending.append(i)
            seen.add(keys[i])

    proc = _SubprocessOracle(src.endpoint, src.timeout) if src.mode == MODE_SUBPROCESS else None
    try:
        for start in range(0, len(pending), src.batch_size):
            batch = pending[start:start + src.batch_size]
            batch_rows = [rows[i] for i in batch]
            answers = proc.ask(batch_rows) if proc else _http_ask(src, batch_rows)
            for i, lab in zip(batch, answers):
                cache.put(keys[i], lab)
    finally:
        if proc:
            proc.close()

    out = []
    for k in keys:
        lab = cache.get(k)
        assert lab is not None
        out.append(lab)
    return out

import json

import pytest

from twolevel.cli import resolve_store_dir
from twolevel.mining import MinerConfig, dump_candidates, mine
from twolevel.objective import ObjectiveConfig
from twolevel.store import Job, Store


class TestStore:
    def test_dataset_lifecycle(self, tmp_path):
        store = Store(str(tmp_path / "s"))
        dataset_id = store.begin_dataset_upload()
        assert store.dataset_state(dataset_id) == "uploading"
        store.finish_dataset_upload(dataset_id, b"a,label\n1,X\n",
                                    {"label_column": "label"})
        assert store.dataset_state(dataset_id) == "ready"
        assert store.dataset_meta(dataset_id)["label_column"] == "label"
        assert store.dataset_state("missing") == "missing"

    def test_job_forward_only(self, tmp_path):
        store = Store(str(tmp_path / "s"))
        job = store.create_job("explain", {"x": 1})
        job.advance("running")
        job.advance("done", result_id="abc")
        with pytest.raises(ValueError):
            job.advance("running")
        store.save_job(job)
        loaded = store.get_job(job.id)
        assert loaded.state == "done" and loaded.result_id == "abc"

    def test_missing_job_is_none(self, tmp_path):
        store = Store(str(tmp_path / "s"))
        assert store.get_job("nope") is None

    def test_explanations_roundtrip_bytes(self, tmp_path):
        store = Store(str(tmp_path / "s"))
        explanation_id = store.save_explanation('{"rules": []}')
        assert store.explanation_bytes(explanation_id) == b'{"rules": []}'
        assert store.explanation_bytes("nope") is None


def test_store_dir_env_override(monkeypatch):
    monkeypatch.delenv("BETA_STORE_DIR", raising=False)
    assert resolve_store_dir("./fallback") == "./fallback"
    monkeypatch.setenv("BETA_STORE_DIR", "/custom/store")
    assert resolve_store_dir("./fallback") == "/custom/store"


def test_candidate_dump_jsonl(toy8, tmp_path):
    candidates = mine(toy8, MinerConfig(min_support=0.25, max_width=2))
    path = tmp_path / "candidates.jsonl"
    dump_candidates(candidates, toy8, str(path))
    lines = path.read_text(encoding="utf-8").strip().splitlines()
    assert len(lines) == len(candidates)
    first = json.loads(lines[0])
    assert set(first) == {"predicates", "support"}
    assert isinstance(first["support"], int)


def test_objective_config_json_roundtrip():
    cfg = ObjectiveConfig(weights=(1, 1, 1, 2, 5), max_rules=6, max_width=3,
                          max_descriptors=2, delta=0.02, normalize=False,
                          active_constraints=3)
    text = json.dumps(cfg.to_json_dict())
    back = ObjectiveConfig.from_json(text)
    assert back == cfg
    assert json.loads(text)["eps"] == [6, 3, 2]
    assert json.loads(text)["k"] == 3

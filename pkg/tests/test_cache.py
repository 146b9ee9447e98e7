import json
import logging

import pytest
from filelock import FileLock

from modvillain.cache import MISSING, CacheLockTimeout, JsonCache, atomic_write_text, pi_key


def test_put_get_roundtrip(tmp_path):
    c = JsonCache(tmp_path)
    key = pi_key(3, [0, 0, 4], (0, 1), (0, 1), 64)
    c.put(key, 0.125)
    assert c.get(key) == 0.125
    assert (c.hits, c.misses) == (1, 0)


def test_missing_key_is_marker(tmp_path):
    c = JsonCache(tmp_path)
    assert c.get("nope") is MISSING
    assert c.misses == 1


def test_version_bump_invalidates(tmp_path):
    JsonCache(tmp_path, version="0.1.0").put("k", 1.5)
    assert JsonCache(tmp_path, version="0.1.0").get("k") == 1.5
    assert JsonCache(tmp_path, version="0.2.0").get("k") is MISSING


def test_corrupted_store_rebuilt(tmp_path, caplog):
    c = JsonCache(tmp_path)
    c.path.write_text("{not json")
    with caplog.at_level(logging.WARNING):
        assert c.get("k") is MISSING
        c.put("k", 2.0)
    assert "corrupted" in caplog.text
    assert json.loads(c.path.read_text())["k"]["value"] == 2.0


def test_lock_timeout_is_retryable_error(tmp_path):
    c = JsonCache(tmp_path, timeout=0.05)
    with FileLock(str(c.path) + ".lock", is_singleton=False):
        with pytest.raises(CacheLockTimeout):
            c.get("k")


def test_env_var_directory(tmp_path, monkeypatch):
    monkeypatch.setenv("MODVILLAIN_CACHE_DIR", str(tmp_path / "env"))
    c = JsonCache()
    c.put("k", 1.0)
    assert (tmp_path / "env" / "pi_entries.json").exists()


def test_atomic_write_leaves_no_temp(tmp_path):
    target = tmp_path / "out.txt"
    atomic_write_text(target, "a\n")
    atomic_write_text(target, "b\n")
    assert target.read_text() == "b\n"
    assert sorted(p.name for p in tmp_path.iterdir()) == ["out.txt"]


def test_key_is_canonical():
    assert pi_key(3, (0, 0, 1), (0, 1), (0, 1), 64) == pi_key(3, [0, 0, 1], [0, 1], [0, 1], 64)

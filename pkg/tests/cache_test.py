"""Tests for the walklab.cache module."""

from __future__ import annotations

from pathlib import Path

import pytest

from walklab.cache import ResultCache, default_cache_dir
from walklab.records import ResultRecord


def make_record(config_hash: str = "ab" * 32) -> ResultRecord:
    return ResultRecord(
        command="growth",
        config={"group": "free:2"},
        config_hash=config_hash,
        outputs={"spheres": [1, 4, 12]},
    )


def test_default_dir_follows_environment(cache_dir: Path) -> None:
    assert default_cache_dir() == cache_dir
    assert ResultCache().directory == cache_dir


def test_round_trip(tmp_path: Path) -> None:
    cache = ResultCache(tmp_path / "cache")
    record = make_record()
    cache.put(record)
    assert cache.path(record.config_hash).exists()

    stored = cache.get(record.config_hash)
    assert stored is not None
    assert stored.cached
    assert stored.outputs == record.outputs
    assert stored.created == record.created
    assert not list((tmp_path / "cache").glob("*.tmp"))


def test_missing_entry(tmp_path: Path) -> None:
    assert ResultCache(tmp_path).get("cd" * 32) is None


def test_other_version_is_stale(tmp_path: Path) -> None:
    cache = ResultCache(tmp_path)
    record = make_record().model_copy(update={"version": "0.0.1"})
    cache.put(record)
    assert cache.get(record.config_hash) is None


def test_mismatched_hash_is_stale(tmp_path: Path) -> None:
    cache = ResultCache(tmp_path)
    record = make_record()
    cache.put(record)
    other = "ef" * 32
    cache.path(record.config_hash).rename(cache.path(other))
    assert cache.get(other) is None


def test_corrupt_entry_is_ignored(
    tmp_path: Path, caplog: pytest.LogCaptureFixture
) -> None:
    cache = ResultCache(tmp_path)
    config_hash = "12" * 32
    cache.path(config_hash).write_text("{not json")
    assert cache.get(config_hash) is None
    assert "Ignoring unreadable" in caplog.text


def test_put_overwrites(tmp_path: Path) -> None:
    cache = ResultCache(tmp_path)
    cache.put(make_record())
    cache.put(make_record().model_copy(update={"outputs": {"spheres": [1]}}))
    stored = cache.get("ab" * 32)
    assert stored is not None
    assert stored.outputs == {"spheres": [1]}

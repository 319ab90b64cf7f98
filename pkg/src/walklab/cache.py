"""On-disk cache of result records, keyed by configuration hash."""

from __future__ import annotations

import fcntl
import logging
import os
import tempfile
from collections.abc import Iterator
from contextlib import contextmanager
from pathlib import Path

from pydantic import ValidationError

from walklab import __version__
from walklab.records import ResultRecord

__all__ = ["CACHE_DIR_ENV", "ResultCache", "default_cache_dir"]

CACHE_DIR_ENV = "WALKLAB_CACHE_DIR"
"""Environment variable that selects the cache directory."""


def default_cache_dir() -> Path:
    """``$WALKLAB_CACHE_DIR``, or ``~/.cache/walklab``."""
    configured = os.environ.get(CACHE_DIR_ENV)
    if configured:
        return Path(configured)
    return Path.home() / ".cache" / "walklab"


class ResultCache:
    """Result records stored as ``<config hash>.json`` files.

    Reads and writes take an advisory lock on the directory, and records are
    written to a temporary file and renamed into place, so concurrent
    processes never see a partial file. Records written by another walklab
    version are treated as missing.

    Parameters
    ----------
    directory
        Cache directory; created on first write.
    """

    def __init__(self, directory: Path | None = None) -> None:
        self._directory = directory or default_cache_dir()
        self._logger = logging.getLogger(__name__)

    @property
    def directory(self) -> Path:
        return self._directory

    def path(self, config_hash: str) -> Path:
        return self._directory / f"{config_hash}.json"

    def get(self, config_hash: str) -> ResultRecord | None:
        """The stored record for a configuration hash, if still valid."""
        path = self.path(config_hash)
        if not path.exists():
            return None
        with self._locked():
            try:
                record = ResultRecord.model_validate_json(path.read_text())
            except (OSError, ValidationError) as e:
                self._logger.warning("Ignoring unreadable %s: %s", path, e)
                return None
        if record.config_hash != config_hash or record.version != __version__:
            self._logger.info("Stale cache entry %s", path.name)
            return None
        self._logger.debug("Cache hit %s", path.name)
        return record.model_copy(update={"cached": True})

    def put(self, record: ResultRecord) -> None:
        """Store a record under its configuration hash."""
        self._directory.mkdir(parents=True, exist_ok=True)
        with self._locked():
            fd, tmp = tempfile.mkstemp(
                dir=self._directory, prefix=".", suffix=".tmp"
            )
            try:
                with os.fdopen(fd, "w") as f:
                    f.write(record.model_dump_json())
                    f.flush()
                    os.fsync(f.fileno())
                os.replace(tmp, self.path(record.config_hash))
            except BaseException:
                Path(tmp).unlink(missing_ok=True)
                raise

    @contextmanager
    def _locked(self) -> Iterator[None]:
        self._directory.mkdir(parents=True, exist_ok=True)
        with (self._directory / ".lock").open("a") as lock:
            fcntl.flock(lock, fcntl.LOCK_EX)
            try:
                yield
            finally:
                fcntl.flock(lock, fcntl.LOCK_UN)

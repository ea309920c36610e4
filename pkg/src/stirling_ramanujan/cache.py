"""On-disk result cache: one JSON file, whole-file advisory lock.

Values are stored as the decimal strings that were printed, so a cache hit
reproduces earlier output byte for byte.  Writes go to a temporary file that
replaces the cache atomically; readers and writers both hold ``fcntl`` locks
on a sidecar ``.lock`` file.
"""

from __future__ import annotations

import contextlib
import datetime as _dt
import fcntl
import json
import os
import tempfile
from pathlib import Path
from typing import Iterator, Optional

__all__ = ["SCHEMA_VERSION", "CacheError", "ResultCache"]

SCHEMA_VERSION = 1


class CacheError(RuntimeError):
    """Unreadable cache file or unsupported schema version."""


class ResultCache:
    def __init__(self, path: str | os.PathLike):
        self.path = Path(path)
        self.lock_path = self.path.with_name(self.path.name + ".lock")

    @contextlib.contextmanager
    def _locked(self, exclusive: bool) -> Iterator[None]:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.lock_path, "a") as fh:
            fcntl.flock(fh, fcntl.LOCK_EX if exclusive else fcntl.LOCK_SH)
            try:
                yield
            finally:
                fcntl.flock(fh, fcntl.LOCK_UN)

    def _read(self) -> dict:
        if not self.path.exists():
            return {"schema_version": SCHEMA_VERSION, "entries": {}}
        try:
            data = json.loads(self.path.read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise CacheError(f"cannot read cache {self.path}: {exc}") from exc
        version = data.get("schema_version") if isinstance(data, dict) else None
        if version != SCHEMA_VERSION:
            raise CacheError(
                f"cache {self.path} has schema_version {version!r}; only {SCHEMA_VERSION} is supported"
            )
        if not isinstance(data.get("entries"), dict):
            raise CacheError(f"cache {self.path} has no entries table")
        return data

    def _write(self, data: dict) -> None:
        fd, tmp = tempfile.mkstemp(prefix=self.path.name + ".", dir=self.path.parent)
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                json.dump(data, fh, indent=2, sort_keys=True)
                fh.write("\n")
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp, self.path)
        except BaseException:
            with contextlib.suppress(FileNotFoundError):
                os.unlink(tmp)
            raise

    def get(self, key: str) -> Optional[dict]:
        with self._locked(exclusive=False):
            return self._read()["entries"].get(key)

    def put(self, key: str, value: str, error_bound: str) -> dict:
        entry = {
            "value": value,
            "error_bound": error_bound,
            "created_at": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        }
        with self._locked(exclusive=True):
            data = self._read()
            data["entries"][key] = entry
            self._write(data)
        return entry

    def entries(self) -> dict:
        with self._locked(exclusive=False):
            return dict(self._read()["entries"])

    def clear(self) -> int:
        with self._locked(exclusive=True):
            data = self._read()
            count = len(data["entries"])
            self._write({"schema_version": SCHEMA_VERSION, "entries": {}})
        return count

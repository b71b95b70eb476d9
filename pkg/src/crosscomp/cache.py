"""On-disk cache of search results, one JSON file per canonical problem key."""

from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Any

log = logging.getLogger(__name__)

CACHE_ENV = "CROSSCOMP_CACHE"


def problem_key(kind: str, spaces, t: int, budget: int, version: str, **extra) -> dict[str, Any]:
    key = {
        "kind": kind,
        "spaces": [[s.n, s.l] for s in spaces],
        "t": t,
        "budget": budget,
        "version": version,
    }
    key.update(extra)
    return key


class ResultCache:
    """Keyed JSON store; a directory that cannot be written disables it."""

    def __init__(self, directory: str | os.PathLike | None):
        self.directory: Path | None = None
        self.hits = 0
        self.misses = 0
        if directory is None:
            return
        path = Path(directory)
        try:
            path.mkdir(parents=True, exist_ok=True)
            probe = tempfile.NamedTemporaryFile(dir=path, delete=True)
            probe.close()
        except OSError as e:
            log.warning("cache directory %s is not writable (%s); caching disabled", path, e)
            return
        self.directory = path

    @property
    def enabled(self) -> bool:
        return self.directory is not None

    def _path(self, key: dict[str, Any]) -> Path:
        digest = hashlib.sha256(json.dumps(key, sort_keys=True).encode()).hexdigest()
        return self.directory / f"{digest[:32]}.json"

    def get(self, key: dict[str, Any]) -> dict[str, Any] | None:
        if not self.enabled:
            return None
        path = self._path(key)
        if not path.exists():
            self.misses += 1
            return None
        try:
            with open(path) as fh:
                stored = json.load(fh)
            if stored.get("key") != key:
                raise ValueError("key mismatch")
            value = stored["result"]
        except (OSError, ValueError, KeyError, TypeError) as e:
            log.warning("ignoring unreadable cache entry %s (%s)", path.name, e)
            self.misses += 1
            return None
        self.hits += 1
        return value

    def put(self, key: dict[str, Any], result: dict[str, Any]) -> None:
        if not self.enabled:
            return
        path = self._path(key)
        try:
            fd, tmp = tempfile.mkstemp(dir=self.directory, suffix=".tmp")
            with os.fdopen(fd, "w") as fh:
                json.dump({"key": key, "result": result}, fh, sort_keys=True)
            os.replace(tmp, path)
        except OSError as e:
            log.warning("could not write cache entry %s (%s)", path.name, e)

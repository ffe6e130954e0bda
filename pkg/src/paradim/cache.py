"""On-disk result cache keyed by a content hash, serialized by an advisory file lock."""

from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import dataclass
from pathlib import Path

from filelock import FileLock

from . import __version__
from ._backend import BACKEND

# bump the suffix when an algorithm change alters cached numbers
CODE_VERSION = f"paradim-{__version__}+1"
ENV_DIR = "PARADIM_CACHE_DIR"
DEFAULT_DIR = ".paradim-cache"


def canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def cache_key(command: str, params: dict) -> str:
    # backend is part of the tag: compiled and pure paths may round differently
    blob = canonical({"command": command, "params": params,
                      "version": CODE_VERSION, "backend": BACKEND})
    return hashlib.sha256(blob.encode()).hexdigest()


@dataclass(frozen=True)
class CacheEntry:
    key: str
    payload: str
    created_at: float


class ResultCache:
    def __init__(self, root: str | os.PathLike | None = None, enabled: bool = True):
        root = root or os.environ.get(ENV_DIR) or DEFAULT_DIR
        self.root = Path(root)
        self.enabled = enabled

    def _path(self, key):
        return self.root / key[:2] / f"{key}.json"

    def _lock(self):
        self.root.mkdir(parents=True, exist_ok=True)
        return FileLock(str(self.root / ".lock"))

    def get(self, key: str) -> CacheEntry | None:
        if not self.enabled:
            return None
        p = self._path(key)
        if not p.exists():
            return None
        with self._lock():
            rec = json.loads(p.read_text())
        return CacheEntry(key=key, payload=rec["payload"], created_at=rec["created_at"])

    def put(self, key: str, payload: str) -> CacheEntry:
        entry = CacheEntry(key=key, payload=payload, created_at=time.time())
        if not self.enabled:
            return entry
        p = self._path(key)
        with self._lock():
            p.parent.mkdir(parents=True, exist_ok=True)
            tmp = p.with_suffix(".tmp")
            tmp.write_text(json.dumps({"payload": payload, "created_at": entry.created_at}))
            tmp.replace(p)
        return entry

    def memo(self, command: str, params: dict, compute):
        """Payload (a JSON-able object) from cache, or computed and stored."""
        key = cache_key(command, params)
        hit = self.get(key)
        if hit is not None:
            return json.loads(hit.payload)
        value = compute()
        self.put(key, canonical(value))
        return json.loads(canonical(value))

"""On-disk JSON cache with a schema version and a content checksum.

A file whose version, key or checksum does not match is ignored (and later
overwritten); it never produces an error.  Writes go to a temporary file in
the same directory and are moved into place with ``os.replace``.
"""
from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path

SCHEMA_VERSION = 1


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _checksum(payload) -> str:
    return hashlib.sha256(_canonical(payload).encode()).hexdigest()


def default_cache_dir() -> Path:
    env = os.environ.get("WCE_CACHE_DIR")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "wce"


class Cache:
    def __init__(self, directory=None, enabled: bool = True):
        self.dir = Path(directory) if directory else default_cache_dir()
        self.enabled = enabled
        self.rejected = []

    def path(self, key: dict) -> Path:
        digest = hashlib.sha256(_canonical(key).encode()).hexdigest()[:24]
        return self.dir / f"{key.get('kind', 'entry')}-{digest}.json"

    def load(self, key: dict):
        if not self.enabled:
            return None
        p = self.path(key)
        if not p.exists():
            return None
        try:
            data = json.loads(p.read_text())
            ok = (data.get("schema") == SCHEMA_VERSION and data.get("key") == key
                  and data.get("checksum") == _checksum(data.get("payload")))
        except (OSError, ValueError, AttributeError):
            ok = False
        if not ok:
            self.rejected.append(str(p))
            return None
        return data["payload"]

    def store(self, key: dict, payload) -> None:
        if not self.enabled:
            return
        self.dir.mkdir(parents=True, exist_ok=True)
        doc = {"schema": SCHEMA_VERSION, "key": key, "checksum": _checksum(payload), "payload": payload}
        fd, tmp = tempfile.mkstemp(dir=self.dir, prefix=".tmp-", suffix=".json")
        try:
            with os.fdopen(fd, "w") as fh:
                fh.write(_canonical(doc))
            os.replace(tmp, self.path(key))
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

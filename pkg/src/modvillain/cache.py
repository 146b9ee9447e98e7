"""Single-file JSON cache for expensive projector entries.

Readers and the writer serialise through a file lock next to the store.
Entries carry the package version and are ignored after an upgrade.
"""

import json
import logging
import os
import tempfile
from pathlib import Path

from filelock import FileLock, Timeout

from . import __version__

log = logging.getLogger(__name__)

MISSING = object()
ENV_VAR = "MODVILLAIN_CACHE_DIR"


class CacheLockTimeout(RuntimeError):
    """The cache lock could not be acquired; the operation may be retried."""


def default_dir():
    return Path(os.environ.get(ENV_VAR) or Path.home() / ".cache" / "modvillain")


def atomic_write_text(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def pi_key(d, offset, alpha_p, alpha_q, grid_n):
    return json.dumps([int(d), [int(x) for x in offset], list(alpha_p), list(alpha_q), int(grid_n)])


class JsonCache:
    def __init__(self, directory=None, name="pi_entries.json", version=__version__, timeout=30.0):
        self.dir = Path(directory) if directory is not None else default_dir()
        self.path = self.dir / name
        self.version = version
        self.timeout = timeout
        self.hits = 0
        self.misses = 0
        self.dir.mkdir(parents=True, exist_ok=True)
        self._lock = FileLock(str(self.path) + ".lock")

    def _load(self):
        if not self.path.exists():
            return {}
        try:
            data = json.loads(self.path.read_text())
            if not isinstance(data, dict):
                raise ValueError("cache root is not an object")
            return data
        except ValueError as exc:
            log.warning("cache %s is corrupted (%s); rebuilding", self.path, exc)
            return {}

    def _locked(self):
        try:
            return self._lock.acquire(timeout=self.timeout)
        except Timeout:
            raise CacheLockTimeout(f"timed out waiting for {self._lock.lock_file}") from None

    def get(self, key):
        with self._locked():
            entry = self._load().get(key)
        if entry is None or entry.get("version") != self.version:
            self.misses += 1
            return MISSING
        self.hits += 1
        return entry["value"]

    def put(self, key, value, record=None):
        with self._locked():
            data = self._load()
            data[key] = {"version": self.version, "value": value, **(record or {})}
            atomic_write_text(self.path, json.dumps(data, indent=1, sort_keys=True))
        return value

"""Small shared helpers: canonical JSON, digests, timestamps, resources."""
from __future__ import annotations

import hashlib
import json
import time
from datetime import datetime, timezone
from importlib import resources as _importlib_resources
from typing import Any, Callable

Clock = Callable[[], float]


def canonical_dumps(value: Any) -> str:
    """Serialize to the canonical interchange form: sorted keys, UTF-8, no padding."""
    return json.dumps(value, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def canonical_bytes(value: Any) -> bytes:
    return canonical_dumps(value).encode("utf-8")


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def digest_of(value: Any) -> str:
    return sha256_hex(canonical_bytes(value))


def iso_utc(epoch_seconds: float) -> str:
    return datetime.fromtimestamp(epoch_seconds, tz=timezone.utc).isoformat()


def wall_clock() -> float:
    return time.time()


_resource_cache: dict[str, str] = {}


def load_text_resource(filename: str) -> str:
    """Read a pinned text resource; the single trailing newline of the file is
    not part of the text."""
    if filename not in _resource_cache:
        path = _importlib_resources.files("roundtable.resources") / filename
        _resource_cache[filename] = path.read_text(encoding="utf-8").rstrip("\n")
    return _resource_cache[filename]


def resource_file_sha256(filename: str) -> str:
    path = _importlib_resources.files("roundtable.resources") / filename
    return sha256_hex(path.read_bytes())

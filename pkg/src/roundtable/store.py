"""Optimistic-concurrency document store with in-memory and file backends.

Documents are JSON-compatible dicts addressed by string keys. Every write goes
through a compare-and-swap on the key's version, so concurrent mutations retry
against fresh reads instead of blocking each other. ``transact_group`` extends
the swap with create-only side records, which is how a room document update and
the chat message it produces commit atomically.

The file backend appends every commit to a write-ahead journal (fsync before
acknowledging) and replays it on open, so a crash after a successful return
never loses the write.
"""
from __future__ import annotations

import json
import logging
import os
import random
import threading
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable, Optional

from .errors import ConflictExhausted, StorageError
from .util import canonical_dumps

log = logging.getLogger(__name__)

DEFAULT_RETRY_LIMIT = 16
# Base backoff doubles per attempt, jittered; capped so a contended key never
# stalls a request for long.
_BACKOFF_BASE = 0.0002
_BACKOFF_CAP = 0.02

# fn(current_value_or_None) -> new_value, or None to skip the write.
Mutation = Callable[[Optional[dict]], Optional[dict]]
# fn(current_value_or_None) -> (new_value_or_None, [(key, value), ...])
GroupMutation = Callable[[Optional[dict]], tuple[Optional[dict], list[tuple[str, dict]]]]


@dataclass
class StoreRecord:
    key: str
    value: dict
    version: int


def _check_key(key: str) -> None:
    if not key or key.startswith("/") or key.endswith("/"):
        raise StorageError(f"malformed key: {key!r}")
    for part in key.split("/"):
        if not part or part in (".", ".."):
            raise StorageError(f"malformed key: {key!r}")
        if not all(c.isalnum() or c in "._-" for c in part):
            raise StorageError(f"malformed key: {key!r}")


def _backoff(attempt: int, rng: random.Random) -> None:
    delay = min(_BACKOFF_CAP, _BACKOFF_BASE * (2 ** attempt))
    time.sleep(rng.uniform(0, delay))


class DocumentStore(ABC):
    """Shared transact loop; backends supply snapshot reads and CAS commits."""

    def __init__(self, retry_limit: int = DEFAULT_RETRY_LIMIT):
        self.retry_limit = retry_limit
        self._rng = random.Random()

    # -- backend primitives --

    @abstractmethod
    def _read(self, key: str) -> tuple[Optional[dict], int]:
        """Return (value, version); version 0 means the key does not exist."""

    @abstractmethod
    def _commit(self, key: str, expected_version: int, value: dict,
                creates: list[tuple[str, dict]]) -> Optional[int]:
        """Atomically write if the key is still at expected_version.

        Returns the new version, or None on a version conflict. A create
        colliding with an existing key is a corruption bug, not a conflict,
        and raises StorageError.
        """

    # -- public API --

    def get(self, key: str) -> Optional[StoreRecord]:
        _check_key(key)
        value, version = self._read(key)
        if version == 0:
            return None
        return StoreRecord(key=key, value=value, version=version)

    def transact(self, key: str, fn: Mutation) -> StoreRecord:
        return self.transact_group(key, lambda value: (fn(value), []))

    def transact_group(self, key: str, fn: GroupMutation) -> StoreRecord:
        """Read-modify-write with create-only side records, retried on conflict.

        ``fn`` must be pure: it may run several times and only the final,
        committed run counts. If ``fn`` raises, nothing is written. If ``fn``
        returns (None, _) the write is skipped and the current record returned.
        """
        _check_key(key)
        for attempt in range(self.retry_limit):
            value, version = self._read(key)
            new_value, creates = fn(value)
            if new_value is None:
                if version == 0:
                    raise StorageError(f"no-op mutation on missing key {key!r}")
                return StoreRecord(key=key, value=value, version=version)
            for create_key, _ in creates:
                _check_key(create_key)
            new_version = self._commit(key, version, new_value, creates)
            if new_version is not None:
                return StoreRecord(key=key, value=new_value, version=new_version)
            _backoff(attempt, self._rng)
        raise ConflictExhausted(f"gave up after {self.retry_limit} attempts on {key!r}")

    @abstractmethod
    def list_keys(self, prefix: str = "") -> list[str]:
        """All document keys under the prefix, sorted."""

    @abstractmethod
    def put_blob(self, blob_id: str, data: bytes) -> None:
        """Store immutable binary content (image bytes)."""

    @abstractmethod
    def get_blob(self, blob_id: str) -> bytes:
        """Raises StorageError if absent."""

    def close(self) -> None:
        pass


class InMemoryStore(DocumentStore):
    """Default backend; values are kept JSON-encoded so readers never alias."""

    def __init__(self, retry_limit: int = DEFAULT_RETRY_LIMIT):
        super().__init__(retry_limit)
        self._lock = threading.Lock()
        self._docs: dict[str, tuple[str, int]] = {}
        self._blobs: dict[str, bytes] = {}

    def _read(self, key: str) -> tuple[Optional[dict], int]:
        with self._lock:
            entry = self._docs.get(key)
        if entry is None:
            return None, 0
        return json.loads(entry[0]), entry[1]

    def _commit(self, key, expected_version, value, creates):
        encoded = canonical_dumps(value)
        encoded_creates = [(k, canonical_dumps(v)) for k, v in creates]
        with self._lock:
            current_version = self._docs.get(key, (None, 0))[1]
            if current_version != expected_version:
                return None
            for create_key, _ in encoded_creates:
                if create_key in self._docs:
                    raise StorageError(f"create collision on {create_key!r}")
            new_version = expected_version + 1
            self._docs[key] = (encoded, new_version)
            for create_key, create_encoded in encoded_creates:
                self._docs[create_key] = (create_encoded, 1)
            return new_version

    def list_keys(self, prefix: str = "") -> list[str]:
        with self._lock:
            return sorted(k for k in self._docs if k.startswith(prefix))

    def put_blob(self, blob_id: str, data: bytes) -> None:
        _check_key(blob_id)
        with self._lock:
            self._blobs[blob_id] = bytes(data)

    def get_blob(self, blob_id: str) -> bytes:
        with self._lock:
            data = self._blobs.get(blob_id)
        if data is None:
            raise StorageError(f"no blob {blob_id!r}")
        return data


class FileStore(DocumentStore):
    """Durable backend: documents under <root>/<key>.json, blobs as .png files,
    and a journal whose fsync is the commit point.
    """

    JOURNAL_NAME = "journal.log"

    def __init__(self, root: str, retry_limit: int = DEFAULT_RETRY_LIMIT):
        super().__init__(retry_limit)
        self.root = os.path.abspath(root)
        self._lock = threading.Lock()
        self._docs: dict[str, tuple[str, int]] = {}
        os.makedirs(self.root, exist_ok=True)
        self._load_documents()
        self._replay_journal()
        self._journal = open(self._journal_path(), "ab")

    # -- layout --

    def _journal_path(self) -> str:
        return os.path.join(self.root, self.JOURNAL_NAME)

    def _doc_path(self, key: str) -> str:
        return os.path.join(self.root, *key.split("/")) + ".json"

    def _blob_path(self, blob_id: str) -> str:
        return os.path.join(self.root, *blob_id.split("/")) + ".png"

    def _key_from_path(self, path: str) -> str:
        rel = os.path.relpath(path, self.root)
        return rel[: -len(".json")].replace(os.sep, "/")

    # -- recovery --

    def _load_documents(self) -> None:
        for dirpath, _, filenames in os.walk(self.root):
            for name in filenames:
                if not name.endswith(".json"):
                    continue
                path = os.path.join(dirpath, name)
                try:
                    with open(path, "r", encoding="utf-8") as f:
                        record = json.load(f)
                    self._docs[self._key_from_path(path)] = (
                        canonical_dumps(record["value"]), record["version"])
                except (ValueError, KeyError, OSError):
                    # Torn write from a crash between journal append and file
                    # apply; the journal replay below restores it.
                    log.warning("skipping unreadable document file %s", path)

    def _replay_journal(self) -> None:
        path = self._journal_path()
        if not os.path.exists(path):
            return
        replayed = 0
        with open(path, "rb") as f:
            for raw in f:
                raw = raw.strip()
                if not raw:
                    continue
                try:
                    entry = json.loads(raw.decode("utf-8"))
                    writes = entry["writes"]
                except (ValueError, KeyError):
                    # A torn tail line is the expected crash artifact; the
                    # commit it belonged to was never acknowledged.
                    log.warning("discarding torn journal tail")
                    break
                for write in writes:
                    key = write["key"]
                    current = self._docs.get(key, (None, 0))[1]
                    if write["version"] > current:
                        self._docs[key] = (canonical_dumps(write["value"]), write["version"])
                        self._apply_to_file(key, write["value"], write["version"], durable=True)
                        replayed += 1
        if replayed:
            log.info("journal replay applied %d write(s)", replayed)
        # All replayed state is now in the document files; start fresh.
        with open(path, "wb") as f:
            f.flush()
            os.fsync(f.fileno())

    # -- primitives --

    def _read(self, key: str) -> tuple[Optional[dict], int]:
        with self._lock:
            entry = self._docs.get(key)
        if entry is None:
            return None, 0
        return json.loads(entry[0]), entry[1]

    def _commit(self, key, expected_version, value, creates):
        with self._lock:
            current_version = self._docs.get(key, (None, 0))[1]
            if current_version != expected_version:
                return None
            for create_key, _ in creates:
                if create_key in self._docs:
                    raise StorageError(f"create collision on {create_key!r}")
            new_version = expected_version + 1
            writes = [{"key": key, "value": value, "version": new_version}]
            writes += [{"key": k, "value": v, "version": 1} for k, v in creates]
            line = canonical_dumps({"writes": writes}).encode("utf-8") + b"\n"
            self._journal.write(line)
            self._journal.flush()
            os.fsync(self._journal.fileno())
            # Committed. File application below is redundancy the journal
            # already guarantees.
            for write in writes:
                self._docs[write["key"]] = (canonical_dumps(write["value"]), write["version"])
                self._apply_to_file(write["key"], write["value"], write["version"])
            return new_version

    def _apply_to_file(self, key: str, value: dict, version: int,
                       durable: bool = False) -> None:
        # Runtime writes rely on the journal fsync for durability; replay
        # fsyncs because the journal is truncated right afterwards.
        path = self._doc_path(key)
        os.makedirs(os.path.dirname(path), exist_ok=True)
        tmp = path + ".tmp"
        with open(tmp, "w", encoding="utf-8") as f:
            f.write(canonical_dumps({"value": value, "version": version}))
            if durable:
                f.flush()
                os.fsync(f.fileno())
        os.replace(tmp, path)

    def list_keys(self, prefix: str = "") -> list[str]:
        with self._lock:
            return sorted(k for k in self._docs if k.startswith(prefix))

    def put_blob(self, blob_id: str, data: bytes) -> None:
        _check_key(blob_id)
        path = self._blob_path(blob_id)
        os.makedirs(os.path.dirname(path), exist_ok=True)
        tmp = path + ".tmp"
        with open(tmp, "wb") as f:
            f.write(data)
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp, path)

    def get_blob(self, blob_id: str) -> bytes:
        path = self._blob_path(blob_id)
        try:
            with open(path, "rb") as f:
                return f.read()
        except OSError as exc:
            raise StorageError(f"no blob {blob_id!r}") from exc

    def close(self) -> None:
        with self._lock:
            if not self._journal.closed:
                self._journal.close()

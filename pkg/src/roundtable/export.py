"""Session export: a deterministic ZIP bundle of one room.

Layout: manifest.json (room metadata, roster, artifact index), prompts.json
(all prompt sets), transcript.jsonl (messages in seq order), and
images/<artifact_id>.png. All JSON is canonical and zip entries carry a fixed
timestamp, so exporting the same state twice is byte-identical and a bundle
re-serialized after reading reproduces its own bytes.
"""
from __future__ import annotations

import io
import json
import logging
import zipfile
from dataclasses import dataclass, field

from .errors import InvalidRequest, UnknownRoom
from .models import (
    RoomDocument,
    artifact_key,
    message_key,
    prompt_set_key,
    room_key,
    snapshot_key,
)
from .store import DocumentStore
from .util import canonical_bytes

log = logging.getLogger(__name__)

_ZIP_EPOCH = (1980, 1, 1, 0, 0, 0)
_COMPRESS_LEVEL = 6


@dataclass
class ExportBundle:
    manifest: dict
    transcript: list[dict]
    prompt_sets: list[dict]
    # (artifact_id, png bytes), ordered by artifact id as stored in the zip.
    images: list[tuple[str, bytes]] = field(default_factory=list)


def build_bundle(store: DocumentStore, room_id: str) -> ExportBundle:
    """Assemble a consistent snapshot: one versioned read of the room document
    pins next_seq and the ref lists; messages and artifacts are immutable."""
    record = store.get(room_key(room_id))
    if record is None:
        raise UnknownRoom(f"no room {room_id!r}")
    room = RoomDocument.from_dict(record.value)

    transcript = []
    for seq in range(1, room.next_seq):
        msg = store.get(message_key(room_id, seq))
        if msg is None:
            raise InvalidRequest(f"message {seq} missing from room {room_id!r}")
        transcript.append(msg.value)

    prompt_sets = []
    for ps_id in room.prompt_set_refs:
        ps = store.get(prompt_set_key(ps_id))
        if ps is not None:
            prompt_sets.append(ps.value)

    artifacts = []
    images = []
    for artifact_id in room.artifact_refs:
        meta = store.get(artifact_key(artifact_id))
        if meta is None:
            continue
        artifacts.append(meta.value)
        images.append((artifact_id, store.get_blob(artifact_key(meta.value["bytes_ref"]))))

    snapshots = []
    for snap_id in room.scene_refs:
        snap = store.get(snapshot_key(snap_id))
        if snap is not None:
            snapshots.append(snap.value)

    manifest = {
        "room_id": room.room_id,
        "participants": list(room.participants),
        "agent_roster": [a.to_dict() for a in room.agent_roster],
        "round_count": room.current_round,
        "created_at": room.created_at,
        "ended_at": room.ended_at,
        "message_count": room.next_seq - 1,
        "artifacts": artifacts,
        "snapshots": snapshots,
    }
    images.sort(key=lambda pair: pair[0])
    return ExportBundle(manifest=manifest, transcript=transcript,
                        prompt_sets=prompt_sets, images=images)


def write_archive(bundle: ExportBundle) -> bytes:
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w") as archive:
        def put(name: str, data: bytes) -> None:
            info = zipfile.ZipInfo(name, date_time=_ZIP_EPOCH)
            info.external_attr = 0o644 << 16
            info.compress_type = zipfile.ZIP_DEFLATED
            archive.writestr(info, data, compresslevel=_COMPRESS_LEVEL)

        put("manifest.json", canonical_bytes(bundle.manifest))
        put("prompts.json", canonical_bytes(bundle.prompt_sets))
        transcript = b"".join(canonical_bytes(m) + b"\n" for m in bundle.transcript)
        put("transcript.jsonl", transcript)
        for artifact_id, data in sorted(bundle.images, key=lambda pair: pair[0]):
            put(f"images/{artifact_id}.png", data)
    return buf.getvalue()


def read_archive(data: bytes) -> ExportBundle:
    with zipfile.ZipFile(io.BytesIO(data)) as archive:
        manifest = json.loads(archive.read("manifest.json").decode("utf-8"))
        prompt_sets = json.loads(archive.read("prompts.json").decode("utf-8"))
        transcript = [json.loads(line) for line in
                      archive.read("transcript.jsonl").decode("utf-8").splitlines() if line]
        images = []
        for name in archive.namelist():
            if name.startswith("images/") and name.endswith(".png"):
                images.append((name[len("images/"):-len(".png")], archive.read(name)))
    images.sort(key=lambda pair: pair[0])
    return ExportBundle(manifest=manifest, transcript=transcript,
                        prompt_sets=prompt_sets, images=images)


def export_session(store: DocumentStore, room_id: str) -> bytes:
    """The zip for one room; repeated calls without intervening writes are
    byte-identical."""
    return write_archive(build_bundle(store, room_id))

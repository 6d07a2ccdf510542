"""Scene snapshots, design revisions, and the append-only artifact log.

A saved snapshot stores the scene image as a SourceScene artifact; a revision
applies a prompt set to a source artifact and appends a RevisedDesign whose
generation_index counts revisions along the lineage (a revision of a source
is generation 1, a revision of that is 2, and so on). Both are announced in
chat through System messages carrying machine-readable attachments.
"""
from __future__ import annotations

import logging
from typing import Optional

from .errors import (
    EmptyPromptSet,
    InvalidRequest,
    InvalidViewParams,
    RoomNotActive,
    UnknownArtifact,
    UnknownPromptSet,
    UnknownSnapshot,
    UnknownUser,
)
from .imaging import ImageRevisionProvider, SceneProvider, content_hash
from .models import (
    ImageArtifact,
    KIND_REVISED_DESIGN,
    KIND_SOURCE_SCENE,
    PromptSet,
    ROLE_SYSTEM,
    RoomDocument,
    STATUS_ACTIVE,
    SceneSnapshot,
    artifact_key,
    prompt_set_key,
    safe_key_segment,
    snapshot_key,
)
from .rooms import RoomService, RoomTxn
from .store import DocumentStore
from .util import load_text_resource

log = logging.getLogger(__name__)

REVISION_INSTRUCTION_RESOURCE = "image_revision_instruction.txt"

_VIEW_RANGES = {
    "heading": (0.0, 360.0),   # [0, 360)
    "pitch": (-90.0, 90.0),    # [-90, 90]
    "fov": (0.0, 120.0),       # (0, 120]
    "latitude": (-90.0, 90.0),
    "longitude": (-180.0, 180.0),
}


def validate_view_params(view: dict) -> dict:
    """Normalize and range-check view parameters; raises InvalidViewParams."""
    if not isinstance(view, dict):
        raise InvalidViewParams("view params must be an object")
    panorama_id = view.get("panorama_id")
    if not isinstance(panorama_id, str) or not panorama_id.strip() or len(panorama_id) > 128:
        raise InvalidViewParams("panorama_id must be a non-empty string")
    normalized = {"panorama_id": panorama_id.strip()}
    for field in ("heading", "pitch", "fov", "latitude", "longitude"):
        raw = view.get(field)
        if isinstance(raw, bool) or not isinstance(raw, (int, float)):
            raise InvalidViewParams(f"{field} must be a number")
        value = float(raw)
        low, high = _VIEW_RANGES[field]
        if field == "heading":
            ok = low <= value < high
        elif field == "fov":
            ok = low < value <= high
        else:
            ok = low <= value <= high
        if not ok:
            raise InvalidViewParams(f"{field}={value} outside allowed range")
        normalized[field] = value
    return normalized


def revision_instruction(prompt_texts: list[str]) -> str:
    """The pinned preserve-the-scene preamble followed by the prompt lines."""
    return load_text_resource(REVISION_INSTRUCTION_RESOURCE) + "\n" + "\n".join(prompt_texts)


class SceneService:
    def __init__(self, store: DocumentStore, rooms: RoomService,
                 scene_provider: SceneProvider, image_provider: ImageRevisionProvider):
        self.store = store
        self.rooms = rooms
        self.scene_provider = scene_provider
        self.image_provider = image_provider

    # ---- snapshots ----

    def save_snapshot(self, room_id: str, username: str, view: dict) -> dict:
        """Fetch the current street view and pin it into the session as a
        SourceScene artifact plus a System announcement."""
        normalized = validate_view_params(view)
        room = self.rooms.get_room(room_id)
        if room.status != STATUS_ACTIVE:
            raise RoomNotActive("snapshots require an active session")
        if username not in room.participants:
            raise UnknownUser(f"{username!r} has not joined this room")

        # Provider call happens outside any transaction.
        image = self.scene_provider.fetch_scene_image(normalized)
        digest = content_hash(image)
        snap_id, art_id = self.rooms.reserve_ids(room_id, "snap", "art")
        self.store.put_blob(artifact_key(art_id), image)

        def fn(room: RoomDocument, txn: RoomTxn):
            if room.status != STATUS_ACTIVE:
                raise RoomNotActive("snapshots require an active session")
            msg = txn.add_message(
                author="System", role=ROLE_SYSTEM,
                content=(f"{username} saved a street view of panorama "
                         f"{normalized['panorama_id']} (heading {normalized['heading']:.1f}, "
                         f"pitch {normalized['pitch']:.1f}, fov {normalized['fov']:.1f})."),
                attachment={"kind": "snapshot", "id": snap_id, "artifact_id": art_id})
            snapshot = SceneSnapshot(
                snapshot_id=snap_id,
                room_id=room_id,
                panorama_id=normalized["panorama_id"],
                heading=normalized["heading"],
                pitch=normalized["pitch"],
                fov=normalized["fov"],
                latitude=normalized["latitude"],
                longitude=normalized["longitude"],
                image_ref=art_id,
                saved_round=room.current_round,
            )
            artifact = ImageArtifact(
                artifact_id=art_id,
                room_id=room_id,
                kind=KIND_SOURCE_SCENE,
                bytes_ref=art_id,
                content_hash=digest,
                created_round=room.current_round,
                generation_index=1,
                source_snapshot=snap_id,
                announce_seq=msg.seq,
                created_at=txn.timestamp,
            )
            txn.create_doc(snapshot_key(snap_id), snapshot.to_dict())
            txn.create_doc(artifact_key(art_id), artifact.to_dict())
            room.scene_refs.append(snap_id)
            room.artifact_refs.append(art_id)
            return snapshot, artifact

        _, _, (snapshot, artifact) = self.rooms.room_transaction(room_id, fn)
        return {"snapshot": snapshot.to_dict(), "artifact": artifact.to_dict()}

    def get_snapshot(self, snapshot_id: str) -> dict:
        if not safe_key_segment(snapshot_id):
            raise UnknownSnapshot(f"no snapshot {snapshot_id!r}")
        record = self.store.get(snapshot_key(snapshot_id))
        if record is None:
            raise UnknownSnapshot(f"no snapshot {snapshot_id!r}")
        return record.value

    # ---- revisions ----

    def revise_image(self, room_id: str, prompt_set_id: str,
                     source_artifact_id: Optional[str] = None) -> dict:
        """Apply a prompt set to a source artifact (most recent by default)
        and append the next-generation RevisedDesign."""
        if not safe_key_segment(prompt_set_id):
            raise UnknownPromptSet(f"no prompt set {prompt_set_id!r}")
        ps_record = self.store.get(prompt_set_key(prompt_set_id))
        if ps_record is None:
            raise UnknownPromptSet(f"no prompt set {prompt_set_id!r}")
        prompt_set = PromptSet.from_dict(ps_record.value)
        if prompt_set.room_id != room_id:
            raise InvalidRequest("prompt set belongs to a different room")
        if not prompt_set.items:
            raise EmptyPromptSet("prompt set has no items to apply")

        room = self.rooms.get_room(room_id)
        if room.status != STATUS_ACTIVE:
            raise RoomNotActive("image revision requires an active session")
        source = self._resolve_source(room, source_artifact_id)
        source_bytes = self.store.get_blob(artifact_key(source.bytes_ref))
        instruction = revision_instruction([item.text for item in prompt_set.items])

        revised = self.image_provider.revise(source_bytes, instruction)
        digest = content_hash(revised)
        generation = 1 if source.kind == KIND_SOURCE_SCENE else source.generation_index + 1
        (art_id,) = self.rooms.reserve_ids(room_id, "art")
        self.store.put_blob(artifact_key(art_id), revised)

        def fn(room: RoomDocument, txn: RoomTxn):
            if room.status != STATUS_ACTIVE:
                raise RoomNotActive("image revision requires an active session")
            msg = txn.add_message(
                author="System", role=ROLE_SYSTEM,
                content=(f"AI design revision (generation {generation}) is ready; "
                         f"{len(prompt_set.items)} prompt(s) applied."),
                attachment={"kind": "artifact", "id": art_id})
            artifact = ImageArtifact(
                artifact_id=art_id,
                room_id=room_id,
                kind=KIND_REVISED_DESIGN,
                bytes_ref=art_id,
                content_hash=digest,
                created_round=room.current_round,
                generation_index=generation,
                source_snapshot=source.source_snapshot,
                prompt_set=prompt_set_id,
                parent_artifact=source.artifact_id,
                announce_seq=msg.seq,
                created_at=txn.timestamp,
            )
            txn.create_doc(artifact_key(art_id), artifact.to_dict())
            room.artifact_refs.append(art_id)
            return artifact

        _, _, artifact = self.rooms.room_transaction(room_id, fn)
        return artifact.to_dict()

    def _resolve_source(self, room: RoomDocument,
                        source_artifact_id: Optional[str]) -> ImageArtifact:
        if source_artifact_id is None:
            if not room.artifact_refs:
                raise UnknownArtifact("the room has no artifact to revise; save a snapshot first")
            source_artifact_id = room.artifact_refs[-1]
        if not safe_key_segment(source_artifact_id):
            raise UnknownArtifact(f"no artifact {source_artifact_id!r}")
        record = self.store.get(artifact_key(source_artifact_id))
        if record is None:
            raise UnknownArtifact(f"no artifact {source_artifact_id!r}")
        artifact = ImageArtifact.from_dict(record.value)
        if artifact.room_id != room.room_id:
            raise UnknownArtifact("artifact belongs to a different room")
        return artifact

    # ---- reads ----

    def list_artifacts(self, room_id: str) -> list[dict]:
        room = self.rooms.get_room(room_id)
        artifacts = []
        for artifact_id in room.artifact_refs:
            record = self.store.get(artifact_key(artifact_id))
            if record is not None:
                artifacts.append(record.value)
        return artifacts

    def get_artifact(self, artifact_id: str) -> dict:
        if not safe_key_segment(artifact_id):
            raise UnknownArtifact(f"no artifact {artifact_id!r}")
        record = self.store.get(artifact_key(artifact_id))
        if record is None:
            raise UnknownArtifact(f"no artifact {artifact_id!r}")
        return record.value

    def get_artifact_bytes(self, artifact_id: str) -> bytes:
        artifact = self.get_artifact(artifact_id)
        return self.store.get_blob(artifact_key(artifact["bytes_ref"]))

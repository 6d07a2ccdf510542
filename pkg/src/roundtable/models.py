"""Domain documents: rooms, messages, agents, prompt sets, scenes, artifacts.

Everything is a plain dataclass with a dict round-trip so the document store
only ever sees JSON-compatible values.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional

# Room lifecycle states. Transitions only ever move left to right.
STATUS_LOBBY = "lobby"
STATUS_ACTIVE = "active"
STATUS_ENDED = "ended"
ROOM_STATUSES = (STATUS_LOBBY, STATUS_ACTIVE, STATUS_ENDED)

# Message / agent roles.
ROLE_USER = "user"
ROLE_FACILITATOR = "facilitator"
ROLE_DESIGNER = "designer"
ROLE_PLANNER = "planner"
ROLE_SYSTEM = "system"
MESSAGE_ROLES = (ROLE_USER, ROLE_FACILITATOR, ROLE_DESIGNER, ROLE_PLANNER, ROLE_SYSTEM)
EXPERT_ROLES = (ROLE_DESIGNER, ROLE_PLANNER)

# Display labels used both in stored messages and in provider history.
AGENT_LABELS = {
    ROLE_FACILITATOR: "AI Facilitator",
    ROLE_DESIGNER: "AI Designer",
    ROLE_PLANNER: "AI Planner",
    ROLE_SYSTEM: "System",
}

# Expert registration phases.
PHASE_AT_CREATION = "at_creation"
PHASE_MID_SESSION = "mid_session"

# Prompt item origins.
ORIGIN_EXTRACTED = "extracted"
ORIGIN_USER_ADDED = "user_added"
ORIGIN_USER_EDITED = "user_edited"

# Artifact kinds.
KIND_SOURCE_SCENE = "source_scene"
KIND_REVISED_DESIGN = "revised_design"


@dataclass
class AgentActivation:
    agent_role: str
    activation_round: int

    def to_dict(self) -> dict:
        return {"agent_role": self.agent_role, "activation_round": self.activation_round}

    @classmethod
    def from_dict(cls, d: dict) -> "AgentActivation":
        return cls(agent_role=d["agent_role"], activation_round=d["activation_round"])


@dataclass
class RoomDocument:
    room_id: str
    participants: list[str]
    readiness: dict[str, bool]
    status: str
    current_round: int
    responded_users: set[str]
    agent_roster: list[AgentActivation]
    next_seq: int
    scene_refs: list[str]
    artifact_refs: list[str]
    prompt_set_refs: list[str] = field(default_factory=list)
    # round -> {"state": pending|done|failed, "seq": int|None}; one entry per
    # completed round, created atomically with the round advance.
    facilitator_rounds: dict[str, dict] = field(default_factory=dict)
    next_id: int = 1
    max_participants: int = 16
    created_at: str = ""
    ended_at: Optional[str] = None

    def roster_entry(self, agent_role: str) -> Optional[AgentActivation]:
        for entry in self.agent_roster:
            if entry.agent_role == agent_role:
                return entry
        return None

    def to_dict(self) -> dict:
        return {
            "room_id": self.room_id,
            "participants": list(self.participants),
            "readiness": dict(self.readiness),
            "status": self.status,
            "current_round": self.current_round,
            "responded_users": sorted(self.responded_users),
            "agent_roster": [a.to_dict() for a in self.agent_roster],
            "next_seq": self.next_seq,
            "scene_refs": list(self.scene_refs),
            "artifact_refs": list(self.artifact_refs),
            "prompt_set_refs": list(self.prompt_set_refs),
            "facilitator_rounds": {k: dict(v) for k, v in self.facilitator_rounds.items()},
            "next_id": self.next_id,
            "max_participants": self.max_participants,
            "created_at": self.created_at,
            "ended_at": self.ended_at,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RoomDocument":
        return cls(
            room_id=d["room_id"],
            participants=list(d["participants"]),
            readiness=dict(d["readiness"]),
            status=d["status"],
            current_round=d["current_round"],
            responded_users=set(d["responded_users"]),
            agent_roster=[AgentActivation.from_dict(a) for a in d["agent_roster"]],
            next_seq=d["next_seq"],
            scene_refs=list(d["scene_refs"]),
            artifact_refs=list(d["artifact_refs"]),
            prompt_set_refs=list(d.get("prompt_set_refs", [])),
            facilitator_rounds={k: dict(v) for k, v in d.get("facilitator_rounds", {}).items()},
            next_id=d.get("next_id", 1),
            max_participants=d.get("max_participants", 16),
            created_at=d.get("created_at", ""),
            ended_at=d.get("ended_at"),
        )


@dataclass
class ChatMessage:
    room_id: str
    seq: int
    author: str
    role: str
    content: str
    timestamp: str
    round_index: int
    # Optional machine-readable reference carried by System announcements,
    # e.g. {"kind": "artifact", "id": "..."} for a generated design.
    attachment: Optional[dict] = None

    def to_dict(self) -> dict:
        return {
            "room_id": self.room_id,
            "seq": self.seq,
            "author": self.author,
            "role": self.role,
            "content": self.content,
            "timestamp": self.timestamp,
            "round_index": self.round_index,
            "attachment": dict(self.attachment) if self.attachment else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ChatMessage":
        return cls(
            room_id=d["room_id"],
            seq=d["seq"],
            author=d["author"],
            role=d["role"],
            content=d["content"],
            timestamp=d["timestamp"],
            round_index=d["round_index"],
            attachment=dict(d["attachment"]) if d.get("attachment") else None,
        )


@dataclass
class PostOutcome:
    stored_message: ChatMessage
    round_completed: bool
    facilitator_reply: Optional[ChatMessage] = None
    new_round: Optional[int] = None
    # Set when the round completed but the facilitator provider failed; the
    # round still advances and the failure is recorded as a System message.
    facilitator_error: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "stored_message": self.stored_message.to_dict(),
            "round_completed": self.round_completed,
            "facilitator_reply": self.facilitator_reply.to_dict() if self.facilitator_reply else None,
            "new_round": self.new_round,
            "facilitator_error": self.facilitator_error,
        }


@dataclass
class PromptItem:
    text: str
    origin: str
    valid: bool = True

    def to_dict(self) -> dict:
        return {"text": self.text, "origin": self.origin, "valid": self.valid}

    @classmethod
    def from_dict(cls, d: dict) -> "PromptItem":
        return cls(text=d["text"], origin=d["origin"], valid=d["valid"])


@dataclass
class PromptSet:
    prompt_set_id: str
    room_id: str
    # The serialized segment the extraction ran on, embedded for provenance.
    source_segment: dict
    items: list[PromptItem]
    created_round: int
    degraded: bool = False

    def valid_count(self) -> int:
        return sum(1 for item in self.items if item.valid)

    def to_dict(self) -> dict:
        return {
            "prompt_set_id": self.prompt_set_id,
            "room_id": self.room_id,
            "source_segment": dict(self.source_segment),
            "items": [i.to_dict() for i in self.items],
            "created_round": self.created_round,
            "degraded": self.degraded,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PromptSet":
        return cls(
            prompt_set_id=d["prompt_set_id"],
            room_id=d["room_id"],
            source_segment=dict(d["source_segment"]),
            items=[PromptItem.from_dict(i) for i in d["items"]],
            created_round=d["created_round"],
            degraded=d.get("degraded", False),
        )


@dataclass
class SceneSnapshot:
    snapshot_id: str
    room_id: str
    panorama_id: str
    heading: float
    pitch: float
    fov: float
    latitude: float
    longitude: float
    image_ref: str
    saved_round: int

    def to_dict(self) -> dict:
        return {
            "snapshot_id": self.snapshot_id,
            "room_id": self.room_id,
            "panorama_id": self.panorama_id,
            "heading": self.heading,
            "pitch": self.pitch,
            "fov": self.fov,
            "latitude": self.latitude,
            "longitude": self.longitude,
            "image_ref": self.image_ref,
            "saved_round": self.saved_round,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SceneSnapshot":
        return cls(
            snapshot_id=d["snapshot_id"],
            room_id=d["room_id"],
            panorama_id=d["panorama_id"],
            heading=d["heading"],
            pitch=d["pitch"],
            fov=d["fov"],
            latitude=d["latitude"],
            longitude=d["longitude"],
            image_ref=d["image_ref"],
            saved_round=d["saved_round"],
        )


@dataclass
class ImageArtifact:
    artifact_id: str
    room_id: str
    kind: str
    bytes_ref: str
    content_hash: str
    created_round: int
    generation_index: int
    source_snapshot: Optional[str] = None
    prompt_set: Optional[str] = None
    parent_artifact: Optional[str] = None
    announce_seq: int = 0
    created_at: str = ""

    def to_dict(self) -> dict:
        return {
            "artifact_id": self.artifact_id,
            "room_id": self.room_id,
            "kind": self.kind,
            "bytes_ref": self.bytes_ref,
            "content_hash": self.content_hash,
            "created_round": self.created_round,
            "generation_index": self.generation_index,
            "source_snapshot": self.source_snapshot,
            "prompt_set": self.prompt_set,
            "parent_artifact": self.parent_artifact,
            "announce_seq": self.announce_seq,
            "created_at": self.created_at,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ImageArtifact":
        return cls(
            artifact_id=d["artifact_id"],
            room_id=d["room_id"],
            kind=d["kind"],
            bytes_ref=d["bytes_ref"],
            content_hash=d["content_hash"],
            created_round=d["created_round"],
            generation_index=d["generation_index"],
            source_snapshot=d.get("source_snapshot"),
            prompt_set=d.get("prompt_set"),
            parent_artifact=d.get("parent_artifact"),
            announce_seq=d.get("announce_seq", 0),
            created_at=d.get("created_at", ""),
        )


@dataclass
class SegmentDocument:
    user_id: str
    segment_id: str
    messages: list[dict]

    def to_dict(self) -> dict:
        return {
            "user_id": self.user_id,
            "segment_id": self.segment_id,
            "messages": [dict(m) for m in self.messages],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SegmentDocument":
        return cls(user_id=d["user_id"], segment_id=d["segment_id"],
                   messages=[dict(m) for m in d["messages"]])


@dataclass
class ValidationResult:
    valid: bool
    word_count: int
    first_word: str
    violations: list[str]

    def to_dict(self) -> dict:
        return {
            "valid": self.valid,
            "word_count": self.word_count,
            "first_word": self.first_word,
            "violations": list(self.violations),
        }


# Store keys. Kept in one place so the file layout stays coherent.

def safe_key_segment(value: str) -> bool:
    """Whether value can appear as one path segment of a store key. Ids that
    fail this cannot exist in the store, so lookups can report them as
    unknown without a round trip."""
    if not value or value in (".", ".."):
        return False
    return all(c.isalnum() or c in "._-" for c in value)


def room_key(room_id: str) -> str:
    return f"rooms/{room_id}"


def message_key(room_id: str, seq: int) -> str:
    return f"messages/{room_id}/{seq}"


def snapshot_key(snapshot_id: str) -> str:
    return f"snapshots/{snapshot_id}"


def artifact_key(artifact_id: str) -> str:
    return f"artifacts/{artifact_id}"


def prompt_set_key(prompt_set_id: str) -> str:
    return f"prompt_sets/{prompt_set_id}"


def request_key(room_id: str, request_id: str) -> str:
    return f"requests/{room_id}/{request_id}"

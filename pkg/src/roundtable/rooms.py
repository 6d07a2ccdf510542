"""Room lifecycle and the round-based discussion protocol.

A round completes when every participant has posted at least one user message
in it. Completion, the round advance, and the facilitator-invocation claim all
commit in one store transaction, so concurrent posts elect exactly one claim
winner. The winner then calls the facilitator provider outside any lock and
stores the reply in a follow-up transaction that re-checks the claim, keeping
the one-facilitator-message-per-round invariant even across retries.
"""
from __future__ import annotations

import logging
from typing import Callable, Optional

from .errors import (
    DuplicateUsername,
    EmptyContent,
    InvalidRequest,
    InvalidUsername,
    NotInLobby,
    ProviderError,
    RoomClosed,
    RoomFull,
    RoomNotActive,
    UnknownRoom,
    UnknownRound,
    UnknownUser,
)
from .models import (
    AGENT_LABELS,
    AgentActivation,
    ChatMessage,
    PostOutcome,
    ROLE_FACILITATOR,
    ROLE_SYSTEM,
    ROLE_USER,
    RoomDocument,
    STATUS_ACTIVE,
    STATUS_ENDED,
    STATUS_LOBBY,
    artifact_key,
    message_key,
    room_key,
    safe_key_segment,
)
from .store import DocumentStore
from .util import Clock, iso_utc, wall_clock

log = logging.getLogger(__name__)

MAX_USERNAME_LEN = 64
MAX_ROOM_ID_LEN = 64
_RESERVED_NAMES = frozenset(AGENT_LABELS.values())

# Facilitator hook: (full history, completed round) -> reply text.
FacilitatorFn = Callable[[list[ChatMessage], int], str]


def _valid_identifier(value: str, max_len: int) -> bool:
    return len(value) <= max_len and safe_key_segment(value)


class RoomTxn:
    """Collects the writes of one room transaction: message records get their
    seq from the room document here, so seq stays gapless by construction."""

    def __init__(self, room: RoomDocument, timestamp: str):
        self.room = room
        self.timestamp = timestamp
        self.messages: list[ChatMessage] = []
        self.creates: list[tuple[str, dict]] = []
        self.skip = False  # set to abandon the write and keep current state

    def add_message(self, *, author: str, role: str, content: str,
                    round_index: Optional[int] = None,
                    attachment: Optional[dict] = None) -> ChatMessage:
        seq = self.room.next_seq
        self.room.next_seq += 1
        msg = ChatMessage(
            room_id=self.room.room_id,
            seq=seq,
            author=author,
            role=role,
            content=content,
            timestamp=self.timestamp,
            round_index=self.room.current_round if round_index is None else round_index,
            attachment=attachment,
        )
        self.messages.append(msg)
        self.creates.append((message_key(self.room.room_id, seq), msg.to_dict()))
        return msg

    def create_doc(self, key: str, value: dict) -> None:
        self.creates.append((key, value))

    def reserve_id(self, prefix: str) -> str:
        n = self.room.next_id
        self.room.next_id += 1
        return f"{self.room.room_id}-{prefix}-{n}"


class RoomService:
    def __init__(self, store: DocumentStore, *, clock: Clock = wall_clock,
                 max_participants: int = 16,
                 facilitator_fn: Optional[FacilitatorFn] = None):
        self.store = store
        self.clock = clock
        self.max_participants = max_participants
        self.facilitator_fn = facilitator_fn

    # ---- generic room transaction ----

    def room_transaction(self, room_id: str, fn) -> tuple[RoomDocument, RoomTxn, object]:
        """Run fn(room, txn) atomically against the room document.

        fn may mutate the room, queue messages/side documents on the txn, and
        return a result. It can run multiple times under contention; only the
        committed run's effects and result are kept.
        """
        if not safe_key_segment(room_id):
            raise UnknownRoom(f"no room {room_id!r}")
        cell: dict = {}

        def mutation(doc):
            if doc is None:
                raise UnknownRoom(f"no room {room_id!r}")
            room = RoomDocument.from_dict(doc)
            txn = RoomTxn(room, iso_utc(self.clock()))
            result = fn(room, txn)
            cell["out"] = (room, txn, result)
            if txn.skip:
                return None, []
            return room.to_dict(), txn.creates

        self.store.transact_group(room_key(room_id), mutation)
        return cell["out"]

    # ---- lifecycle ----

    def create_or_join_room(self, room_id: str, username: str) -> dict:
        """Join the room, creating it on first contact. Returns the room view."""
        username = username.strip()
        if not _valid_identifier(room_id, MAX_ROOM_ID_LEN):
            raise InvalidRequest(f"room id must be 1-{MAX_ROOM_ID_LEN} chars of [A-Za-z0-9._-]")
        if not username or len(username) > MAX_USERNAME_LEN:
            raise InvalidUsername(f"username must be 1-{MAX_USERNAME_LEN} chars after trimming")
        if username in _RESERVED_NAMES:
            raise InvalidUsername(f"{username!r} is reserved")

        def mutation(doc):
            if doc is None:
                room = RoomDocument(
                    room_id=room_id,
                    participants=[username],
                    readiness={username: False},
                    status=STATUS_LOBBY,
                    current_round=1,
                    responded_users=set(),
                    agent_roster=[AgentActivation(ROLE_FACILITATOR, 1)],
                    next_seq=1,
                    scene_refs=[],
                    artifact_refs=[],
                    max_participants=self.max_participants,
                    created_at=iso_utc(self.clock()),
                )
                return room.to_dict(), []
            room = RoomDocument.from_dict(doc)
            if room.status != STATUS_LOBBY:
                raise RoomClosed("room is no longer accepting participants")
            if username in room.participants:
                raise DuplicateUsername(f"{username!r} is already taken in this room")
            if len(room.participants) >= room.max_participants:
                raise RoomFull(f"room holds at most {room.max_participants} participants")
            room.participants.append(username)
            room.readiness[username] = False
            return room.to_dict(), []

        record = self.store.transact_group(room_key(room_id), mutation)
        return self.room_view(RoomDocument.from_dict(record.value))

    def set_ready(self, room_id: str, username: str, ready: bool) -> dict:
        """Toggle lobby readiness; the room activates when everyone is ready."""
        def fn(room: RoomDocument, txn: RoomTxn):
            if room.status != STATUS_LOBBY:
                raise NotInLobby("readiness only applies before the session starts")
            if username not in room.participants:
                raise UnknownUser(f"{username!r} has not joined this room")
            room.readiness[username] = ready
            if room.participants and all(room.readiness.get(u) for u in room.participants):
                room.status = STATUS_ACTIVE
                room.responded_users = set()
            return None

        room, _, _ = self.room_transaction(room_id, fn)
        return self.room_view(room)

    def end_session(self, room_id: str, username: str) -> dict:
        def fn(room: RoomDocument, txn: RoomTxn):
            if room.status == STATUS_ENDED:
                raise RoomClosed("session already ended")
            if room.status != STATUS_ACTIVE:
                raise RoomNotActive("session has not started")
            if username not in room.participants:
                raise UnknownUser(f"{username!r} has not joined this room")
            room.status = STATUS_ENDED
            room.ended_at = txn.timestamp
            txn.add_message(author="System", role=ROLE_SYSTEM,
                            content=f"{username} ended the session.")
            return None

        room, _, _ = self.room_transaction(room_id, fn)
        return self.room_view(room)

    # ---- discussion ----

    def post_message(self, room_id: str, username: str, content: str) -> PostOutcome:
        """Store a user message; if it completes the round, advance the round
        and run the facilitator synthesis as the unique claim winner."""
        if not content or not content.strip():
            raise EmptyContent("message content is empty")

        def fn(room: RoomDocument, txn: RoomTxn):
            if room.status == STATUS_ENDED:
                raise RoomClosed("this session has ended")
            if room.status != STATUS_ACTIVE:
                raise RoomNotActive("posting requires an active session")
            if username not in room.participants:
                raise UnknownUser(f"{username!r} has not joined this room")
            msg = txn.add_message(author=username, role=ROLE_USER, content=content)
            completed = None
            room.responded_users.add(username)
            if room.responded_users == set(room.participants):
                completed = room.current_round
                room.current_round += 1
                room.responded_users = set()
                room.facilitator_rounds[str(completed)] = {"state": "pending", "seq": None}
            return msg, completed

        _, _, (msg, completed) = self.room_transaction(room_id, fn)
        if completed is None:
            return PostOutcome(stored_message=msg, round_completed=False)
        reply, error = self._run_facilitator(room_id, completed)
        return PostOutcome(
            stored_message=msg,
            round_completed=True,
            facilitator_reply=reply,
            new_round=completed + 1,
            facilitator_error=error,
        )

    def start_new_round(self, room_id: str, username: str,
                        expected_round: Optional[int] = None) -> dict:
        """Advance the round without facilitator synthesis.

        ``expected_round`` is the round the caller observed; if the room has
        already moved past it (e.g. a concurrent initiation won), the call is
        a no-op so racing clicks advance the round exactly once.
        """
        def fn(room: RoomDocument, txn: RoomTxn):
            if room.status != STATUS_ACTIVE:
                raise RoomNotActive("rounds only advance in an active session")
            if username not in room.participants:
                raise UnknownUser(f"{username!r} has not joined this room")
            if expected_round is not None and expected_round != room.current_round:
                txn.skip = True
                return False
            room.current_round += 1
            room.responded_users = set()
            txn.add_message(author="System", role=ROLE_SYSTEM,
                            content=f"{username} started round {room.current_round}.")
            return True

        room, _, advanced = self.room_transaction(room_id, fn)
        view = self.room_view(room)
        view["advanced"] = advanced
        return view

    # ---- facilitator claim ----

    def _run_facilitator(self, room_id: str, completed_round: int):
        history = self.room_history(room_id)
        try:
            if self.facilitator_fn is None:
                raise ProviderError("no facilitator provider configured")
            content = self.facilitator_fn(history, completed_round)
        except ProviderError as exc:
            log.warning("facilitator failed for %s round %d: %s", room_id, completed_round, exc)
            self._resolve_claim(room_id, completed_round, None, str(exc))
            return None, "facilitator_unavailable"
        reply = self._resolve_claim(room_id, completed_round, content, None)
        return reply, None

    def _resolve_claim(self, room_id: str, round_index: int,
                       content: Optional[str], error: Optional[str]):
        """Fulfill or fail the facilitator claim for a completed round. At most
        one Facilitator message per round: a claim already done wins."""
        def fn(room: RoomDocument, txn: RoomTxn):
            claim = room.facilitator_rounds.get(str(round_index))
            if claim is None:
                raise UnknownRound(f"round {round_index} has no facilitator claim")
            if claim["state"] == "done":
                txn.skip = True
                return claim["seq"]
            if content is None:
                claim["state"] = "failed"
                txn.add_message(
                    author="System", role=ROLE_SYSTEM,
                    content=(f"Facilitator synthesis for round {round_index} failed "
                             f"({error}). The round has advanced; request a retry to "
                             "get the summary."),
                    round_index=round_index)
                return None
            msg = txn.add_message(author=AGENT_LABELS[ROLE_FACILITATOR],
                                  role=ROLE_FACILITATOR, content=content,
                                  round_index=round_index)
            claim["state"] = "done"
            claim["seq"] = msg.seq
            return msg.seq

        _, _, seq = self.room_transaction(room_id, fn)
        if content is None or seq is None:
            return None
        return self.get_message(room_id, seq)

    def retry_facilitator(self, room_id: str, round_index: int) -> ChatMessage:
        """Re-invoke the facilitator after a failure. Idempotent once done."""
        room = self.get_room(room_id)
        claim = room.facilitator_rounds.get(str(round_index))
        if claim is None:
            raise UnknownRound(f"round {round_index} was not completed by posts")
        if claim["state"] == "done":
            return self.get_message(room_id, claim["seq"])
        reply, error = self._run_facilitator(room_id, round_index)
        if error:
            raise ProviderError("facilitator provider failed again; retry later")
        return reply

    # ---- ids ----

    def reserve_ids(self, room_id: str, *prefixes: str) -> list[str]:
        """Burn deterministic ids off the room's counter in one transaction.
        Reserved before blob writes so a later commit retry reuses the same id."""
        def fn(room: RoomDocument, txn: RoomTxn):
            return [txn.reserve_id(prefix) for prefix in prefixes]

        _, _, ids = self.room_transaction(room_id, fn)
        return ids

    # ---- reads ----

    def get_room(self, room_id: str) -> RoomDocument:
        if not safe_key_segment(room_id):
            raise UnknownRoom(f"no room {room_id!r}")
        record = self.store.get(room_key(room_id))
        if record is None:
            raise UnknownRoom(f"no room {room_id!r}")
        return RoomDocument.from_dict(record.value)

    def get_message(self, room_id: str, seq: int) -> ChatMessage:
        record = self.store.get(message_key(room_id, seq))
        if record is None:
            raise InvalidRequest(f"no message {seq} in room {room_id!r}")
        return ChatMessage.from_dict(record.value)

    def room_history(self, room_id: str) -> list[ChatMessage]:
        room = self.get_room(room_id)
        return [self.get_message(room_id, seq) for seq in range(1, room.next_seq)]

    def get_room_state(self, room_id: str, since_seq: int = 0) -> dict:
        """Polling delta: room snapshot plus everything after since_seq."""
        if since_seq < 0:
            raise InvalidRequest("since_seq must be >= 0")
        room = self.get_room(room_id)
        messages = [self.get_message(room_id, seq).to_dict()
                    for seq in range(since_seq + 1, room.next_seq)]
        artifacts = []
        for artifact_id in room.artifact_refs:
            record = self.store.get(artifact_key(artifact_id))
            if record and record.value.get("announce_seq", 0) > since_seq:
                artifacts.append(record.value)
        return {"room": self.room_view(room), "messages": messages, "artifacts": artifacts}

    def room_view(self, room: RoomDocument) -> dict:
        view = room.to_dict()
        view["latest_seq"] = room.next_seq - 1
        del view["next_seq"]
        del view["next_id"]
        del view["facilitator_rounds"]
        return view

"""Agent roster: pinned personas, provider invocation, expert registration.

Each agent role carries a pinned system prompt (resource file) and pinned
generation parameters. Facilitator synthesis and prompt parsing run cooler
(temperature 0.35, top-p 0.9) than the conversational experts (0.85, 0.95);
all are capped at 1024 output tokens.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

from .errors import (
    AgentNotActive,
    AlreadyRegistered,
    InvalidPhase,
    InvalidRole,
    RoomNotActive,
)
from .models import (
    AGENT_LABELS,
    AgentActivation,
    ChatMessage,
    EXPERT_ROLES,
    PHASE_AT_CREATION,
    PHASE_MID_SESSION,
    ROLE_DESIGNER,
    ROLE_FACILITATOR,
    ROLE_PLANNER,
    RoomDocument,
    STATUS_ACTIVE,
    STATUS_LOBBY,
)
from .providers import ChatProvider, CompletionRequest
from .rooms import RoomService, RoomTxn
from .util import load_text_resource

log = logging.getLogger(__name__)

ROLE_PROMPT_PARSER = "prompt_parser"

PROMPT_RESOURCES = {
    ROLE_FACILITATOR: "system_prompt_facilitator.txt",
    ROLE_DESIGNER: "system_prompt_designer.txt",
    ROLE_PLANNER: "system_prompt_planner.txt",
    ROLE_PROMPT_PARSER: "system_prompt_prompt_parser.txt",
}

# (max_output_tokens, temperature, top_p) per role; these are contractual and
# asserted against recorded provider requests in the tests.
GENERATION_PARAMS = {
    ROLE_FACILITATOR: (1024, 0.35, 0.9),
    ROLE_PROMPT_PARSER: (1024, 0.35, 0.9),
    ROLE_DESIGNER: (1024, 0.85, 0.95),
    ROLE_PLANNER: (1024, 0.85, 0.95),
}

DEFAULT_HISTORY_MAX_MESSAGES = 200
DEFAULT_HISTORY_MAX_CHARS = 60_000


@dataclass(frozen=True)
class AgentConfig:
    role: str
    system_prompt: str
    max_output_tokens: int
    temperature: float
    top_p: float


def render_system_prompt(role: str) -> str:
    if role not in PROMPT_RESOURCES:
        raise InvalidRole(f"no system prompt for role {role!r}")
    return load_text_resource(PROMPT_RESOURCES[role])


def agent_config(role: str) -> AgentConfig:
    if role not in GENERATION_PARAMS:
        raise InvalidRole(f"unknown agent role {role!r}")
    tokens, temperature, top_p = GENERATION_PARAMS[role]
    return AgentConfig(role=role, system_prompt=render_system_prompt(role),
                       max_output_tokens=tokens, temperature=temperature, top_p=top_p)


def truncate_history(messages: list[ChatMessage],
                     max_messages: int = DEFAULT_HISTORY_MAX_MESSAGES,
                     max_chars: int = DEFAULT_HISTORY_MAX_CHARS) -> list[ChatMessage]:
    """Newest messages within the count/char budget, oldest dropped first.
    The round-1 scene announcement survives truncation so agents stay grounded
    in the scene even in long sessions."""
    pinned: Optional[ChatMessage] = None
    for msg in messages:
        if (msg.round_index == 1 and msg.attachment
                and msg.attachment.get("kind") == "snapshot"):
            pinned = msg
            break
    kept: list[ChatMessage] = []
    chars = 0
    for msg in reversed(messages):
        if len(kept) >= max_messages:
            break
        if kept and chars + len(msg.content) > max_chars:
            break
        kept.append(msg)
        chars += len(msg.content)
    kept.reverse()
    if pinned is not None and pinned not in kept:
        kept.insert(0, pinned)
    return kept


def build_completion_request(role: str, history: list[ChatMessage],
                             max_messages: int = DEFAULT_HISTORY_MAX_MESSAGES,
                             max_chars: int = DEFAULT_HISTORY_MAX_CHARS) -> CompletionRequest:
    """History goes in as (speaker label, content) pairs: usernames for users,
    "AI Designer"/"AI Planner"/"AI Facilitator" for agents. Earlier agent turns
    read as other participants, never as the assistant's own words."""
    config = agent_config(role)
    truncated = truncate_history(history, max_messages, max_chars)
    return CompletionRequest(
        system_prompt=config.system_prompt,
        history=tuple((msg.author, msg.content) for msg in truncated),
        max_output_tokens=config.max_output_tokens,
        temperature=config.temperature,
        top_p=config.top_p,
    )


class AgentRosterService:
    def __init__(self, store, rooms: RoomService, provider: ChatProvider, *,
                 history_max_messages: int = DEFAULT_HISTORY_MAX_MESSAGES,
                 history_max_chars: int = DEFAULT_HISTORY_MAX_CHARS):
        self.store = store
        self.rooms = rooms
        self.provider = provider
        self.history_max_messages = history_max_messages
        self.history_max_chars = history_max_chars

    def facilitator_reply(self, history: list[ChatMessage], completed_round: int) -> str:
        """Synthesis for a completed round; called by the round protocol's
        claim winner. Exactly one provider call per invocation."""
        if completed_round < 1:
            raise InvalidRole(f"completed_round must be >= 1, got {completed_round}")
        request = build_completion_request(
            ROLE_FACILITATOR, history,
            self.history_max_messages, self.history_max_chars)
        return self.provider.complete(request)

    def register_expert(self, room_id: str, agent_role: str, phase: str) -> dict:
        """Add a Designer/Planner to the roster. Lobby registrations are active
        from round 1; mid-session ones join from the next round."""
        if agent_role not in EXPERT_ROLES:
            raise InvalidRole(f"expert role must be one of {EXPERT_ROLES}, got {agent_role!r}")
        if phase not in (PHASE_AT_CREATION, PHASE_MID_SESSION):
            raise InvalidPhase(f"unknown registration phase {phase!r}")

        def fn(room: RoomDocument, txn: RoomTxn):
            if room.roster_entry(agent_role) is not None:
                raise AlreadyRegistered(f"{agent_role} is already on the roster")
            if phase == PHASE_AT_CREATION:
                if room.status != STATUS_LOBBY:
                    raise InvalidPhase("at_creation registration requires the lobby")
                activation_round = 1
            else:
                if room.status != STATUS_ACTIVE:
                    raise InvalidPhase("mid_session registration requires an active session")
                activation_round = room.current_round + 1
            room.agent_roster.append(AgentActivation(agent_role, activation_round))
            txn.add_message(
                author="System", role="system",
                content=(f"{AGENT_LABELS[agent_role]} joined the roster and "
                         f"participates from round {activation_round}."))
            return activation_round

        _, _, activation_round = self.rooms.room_transaction(room_id, fn)
        return {"agent_role": agent_role, "activation_round": activation_round}

    def query_expert(self, room_id: str, agent_role: str) -> ChatMessage:
        """On-demand expert reply. Never counts toward round completion."""
        if agent_role not in EXPERT_ROLES:
            raise InvalidRole(f"expert role must be one of {EXPERT_ROLES}, got {agent_role!r}")
        room = self.rooms.get_room(room_id)
        self._check_active(room, agent_role)
        history = self.rooms.room_history(room_id)
        request = build_completion_request(
            agent_role, history, self.history_max_messages, self.history_max_chars)
        content = self.provider.complete(request)

        def fn(room: RoomDocument, txn: RoomTxn):
            self._check_active(room, agent_role)
            return txn.add_message(author=AGENT_LABELS[agent_role],
                                   role=agent_role, content=content)

        _, _, msg = self.rooms.room_transaction(room_id, fn)
        return msg

    @staticmethod
    def _check_active(room: RoomDocument, agent_role: str) -> None:
        if room.status != STATUS_ACTIVE:
            raise RoomNotActive("expert queries require an active session")
        entry = room.roster_entry(agent_role)
        if entry is None:
            raise AgentNotActive(f"{agent_role} is not on this room's roster")
        if room.current_round < entry.activation_round:
            raise AgentNotActive(
                f"{agent_role} joins the conversation in round {entry.activation_round}")

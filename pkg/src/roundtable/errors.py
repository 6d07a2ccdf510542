"""Error types shared across the service.

Every error carries a stable machine-readable ``code`` (used verbatim by the
HTTP gateway) and a ``retryable`` hint for clients.
"""
from __future__ import annotations


class RoundtableError(Exception):
    code = "internal_error"
    retryable = False
    http_status = 500

    def __init__(self, message: str = ""):
        super().__init__(message or self.__class__.__name__)
        self.message = message or self.__class__.__name__


# ---- room / session ----

class UnknownRoom(RoundtableError):
    code = "unknown_room"
    http_status = 404


class UnknownUser(RoundtableError):
    code = "unknown_user"
    http_status = 404


class InvalidUsername(RoundtableError):
    code = "invalid_username"
    http_status = 422


class DuplicateUsername(RoundtableError):
    code = "duplicate_username"
    http_status = 409


class RoomFull(RoundtableError):
    code = "room_full"
    http_status = 409


class RoomClosed(RoundtableError):
    code = "room_closed"
    http_status = 409


class NotInLobby(RoundtableError):
    code = "not_in_lobby"
    http_status = 409


class RoomNotActive(RoundtableError):
    code = "room_not_active"
    http_status = 409


class EmptyContent(RoundtableError):
    code = "empty_content"
    http_status = 422


class UnknownRound(RoundtableError):
    code = "unknown_round"
    http_status = 404


class InvalidRequest(RoundtableError):
    code = "invalid_request"
    http_status = 422


# ---- agents ----

class InvalidRole(RoundtableError):
    code = "invalid_role"
    http_status = 422


class InvalidPhase(RoundtableError):
    code = "invalid_phase"
    http_status = 409


class AlreadyRegistered(RoundtableError):
    code = "already_registered"
    http_status = 409


class AgentNotActive(RoundtableError):
    code = "agent_not_active"
    http_status = 409


class ProviderError(RoundtableError):
    code = "provider_error"
    retryable = True
    http_status = 502


# ---- prompt pipeline ----

class EmptyHistory(RoundtableError):
    code = "empty_history"
    http_status = 422


class EmptyText(RoundtableError):
    code = "empty_text"
    http_status = 422


class UnknownPromptSet(RoundtableError):
    code = "unknown_prompt_set"
    http_status = 404


class IndexOutOfRange(RoundtableError):
    code = "index_out_of_range"
    http_status = 409


# ---- scenes / imagery ----

class InvalidViewParams(RoundtableError):
    code = "invalid_view_params"
    http_status = 422


class SceneProviderError(ProviderError):
    code = "scene_provider_error"


class ImageProviderError(ProviderError):
    code = "image_provider_error"


class EmptyPromptSet(RoundtableError):
    code = "empty_prompt_set"
    http_status = 422


class UnknownArtifact(RoundtableError):
    code = "unknown_artifact"
    http_status = 404


class UnknownSnapshot(RoundtableError):
    code = "unknown_snapshot"
    http_status = 404


# ---- store ----

class StorageError(RoundtableError):
    code = "storage_error"
    retryable = True
    http_status = 503


class ConflictExhausted(StorageError):
    code = "conflict_exhausted"
    retryable = True
    http_status = 503


# ---- config ----

class ConfigError(RoundtableError):
    code = "config_error"
    http_status = 500

"""Roundtable: a self-hostable service for collaborative urban co-design.

Multiple residents and AI agents deliberate in rounds over street-level
scenes; the discussion is distilled into actionable design prompts that
drive image revisions, and the whole session exports as a reproducible
archive.
"""
from .agents import AgentRosterService, agent_config, render_system_prompt
from .config import ServiceConfig, Services, build_services, load_config
from .errors import RoundtableError
from .export import build_bundle, export_session, read_archive, write_archive
from .imaging import (
    MockImageRevisionProvider,
    MockSceneProvider,
    content_hash,
)
from .models import (
    ChatMessage,
    ImageArtifact,
    PromptItem,
    PromptSet,
    RoomDocument,
    SceneSnapshot,
)
from .prompts import PromptService, apply_edits, validate_prompt
from .providers import CompletionRequest, MockChatProvider
from .rooms import RoomService
from .scenes import SceneService, validate_view_params
from .store import DocumentStore, FileStore, InMemoryStore

__version__ = "0.1.0"

__all__ = [
    "AgentRosterService",
    "ChatMessage",
    "CompletionRequest",
    "DocumentStore",
    "FileStore",
    "ImageArtifact",
    "InMemoryStore",
    "MockChatProvider",
    "MockImageRevisionProvider",
    "MockSceneProvider",
    "PromptItem",
    "PromptService",
    "PromptSet",
    "RoomDocument",
    "RoomService",
    "RoundtableError",
    "SceneService",
    "SceneSnapshot",
    "ServiceConfig",
    "Services",
    "agent_config",
    "apply_edits",
    "build_bundle",
    "build_services",
    "content_hash",
    "export_session",
    "load_config",
    "read_archive",
    "render_system_prompt",
    "validate_prompt",
    "validate_view_params",
    "write_archive",
    "__version__",
]

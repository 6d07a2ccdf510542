"""Configuration from environment variables and CLI overrides.

CLI flags take precedence over environment variables, which take precedence
over defaults. Misconfiguration fails at startup with a ConfigError naming the
offending variable, never at first use.
"""
from __future__ import annotations

import logging
import os
import uuid
from dataclasses import dataclass, field
from typing import Mapping, Optional

from .agents import AgentRosterService
from .errors import ConfigError
from .imaging import (
    LiveImageRevisionProvider,
    LiveSceneProvider,
    MockImageRevisionProvider,
    MockSceneProvider,
)
from .prompts import PromptService
from .providers import LiveChatProvider, MockChatProvider
from .rooms import RoomService
from .scenes import SceneService
from .store import DocumentStore, FileStore, InMemoryStore
from .util import Clock, wall_clock

log = logging.getLogger(__name__)

ENV_PREFIX = "ROUNDTABLE_"
DEFAULT_PORT = 8321
DEFAULT_SCENE_ENDPOINT = "https://maps.googleapis.com/maps/api/streetview"

_PROVIDER_MODES = ("mock", "live")
_STORE_MODES = ("memory", "file")


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = DEFAULT_PORT
    store_mode: str = "memory"
    store_path: Optional[str] = None
    chat_provider: str = "mock"
    scene_provider: str = "mock"
    image_provider: str = "mock"
    chat_endpoint: Optional[str] = None
    chat_api_key: Optional[str] = None
    scene_endpoint: str = DEFAULT_SCENE_ENDPOINT
    scene_api_key: Optional[str] = None
    image_endpoint: Optional[str] = None
    image_api_key: Optional[str] = None
    max_participants: int = 16
    history_max_messages: int = 200
    history_max_chars: int = 60_000
    txn_retry_limit: int = 16
    cors_origins: list[str] = field(default_factory=lambda: ["*"])
    scene_size: tuple[int, int] = (640, 640)
    static_dir: Optional[str] = None


def _env_name(key: str) -> str:
    return ENV_PREFIX + key.upper()


def _parse_int(name: str, raw: str) -> int:
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"{name} must be an integer, got {raw!r}") from exc


def _parse_size(name: str, raw: str) -> tuple[int, int]:
    parts = raw.lower().split("x")
    if len(parts) != 2:
        raise ConfigError(f"{name} must look like 640x640, got {raw!r}")
    try:
        width, height = int(parts[0]), int(parts[1])
    except ValueError as exc:
        raise ConfigError(f"{name} must look like 640x640, got {raw!r}") from exc
    if width <= 0 or height <= 0:
        raise ConfigError(f"{name} must be positive, got {raw!r}")
    return width, height


def load_config(env: Optional[Mapping[str, str]] = None,
                overrides: Optional[dict] = None) -> ServiceConfig:
    """Resolve configuration and validate it. ``overrides`` holds CLI values
    keyed by config field name; None values are ignored."""
    env = os.environ if env is None else env
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    config = ServiceConfig()

    def pick(field_name: str, env_key: str, parse=None):
        if field_name in overrides:
            return overrides[field_name]
        raw = env.get(_env_name(env_key))
        if raw is None:
            return getattr(config, field_name)
        return parse(_env_name(env_key), raw) if parse else raw

    config.host = pick("host", "host")
    config.port = pick("port", "port", _parse_int)
    config.store_mode = pick("store_mode", "store")
    config.store_path = pick("store_path", "store_path")
    config.chat_provider = pick("chat_provider", "chat_provider")
    config.scene_provider = pick("scene_provider", "scene_provider")
    config.image_provider = pick("image_provider", "image_provider")
    config.chat_endpoint = pick("chat_endpoint", "chat_endpoint")
    config.chat_api_key = pick("chat_api_key", "chat_api_key")
    config.scene_endpoint = pick("scene_endpoint", "scene_endpoint")
    config.scene_api_key = pick("scene_api_key", "scene_api_key")
    config.image_endpoint = pick("image_endpoint", "image_endpoint")
    config.image_api_key = pick("image_api_key", "image_api_key")
    config.max_participants = pick("max_participants", "max_participants", _parse_int)
    config.history_max_messages = pick("history_max_messages", "history_max_messages", _parse_int)
    config.history_max_chars = pick("history_max_chars", "history_max_chars", _parse_int)
    config.txn_retry_limit = pick("txn_retry_limit", "txn_retry_limit", _parse_int)
    config.static_dir = pick("static_dir", "static_dir")

    origins = pick("cors_origins", "cors_origins")
    if isinstance(origins, str):
        origins = [o.strip() for o in origins.split(",") if o.strip()]
    config.cors_origins = origins or ["*"]

    size = pick("scene_size", "scene_size")
    if isinstance(size, str):
        size = _parse_size(_env_name("scene_size"), size)
    config.scene_size = tuple(size)

    _validate(config)
    return config


def _validate(config: ServiceConfig) -> None:
    if config.store_mode not in _STORE_MODES:
        raise ConfigError(f"{_env_name('store')} must be one of {_STORE_MODES}, "
                          f"got {config.store_mode!r}")
    for field_name, value in (("chat_provider", config.chat_provider),
                              ("scene_provider", config.scene_provider),
                              ("image_provider", config.image_provider)):
        if value not in _PROVIDER_MODES:
            raise ConfigError(f"{_env_name(field_name)} must be one of {_PROVIDER_MODES}, "
                              f"got {value!r}")
    if not (0 < config.port < 65536):
        raise ConfigError(f"{_env_name('port')} must be in 1..65535, got {config.port}")
    if config.max_participants < 1:
        raise ConfigError(f"{_env_name('max_participants')} must be >= 1")
    if config.txn_retry_limit < 1:
        raise ConfigError(f"{_env_name('txn_retry_limit')} must be >= 1")

    if config.chat_provider == "live":
        if not config.chat_api_key:
            raise ConfigError(f"live chat provider requires {_env_name('chat_api_key')}")
        if not config.chat_endpoint:
            raise ConfigError(f"live chat provider requires {_env_name('chat_endpoint')}")
    if config.scene_provider == "live" and not config.scene_api_key:
        raise ConfigError(f"live scene provider requires {_env_name('scene_api_key')}")
    if config.image_provider == "live":
        if not config.image_api_key:
            raise ConfigError(f"live image provider requires {_env_name('image_api_key')}")
        if not config.image_endpoint:
            raise ConfigError(f"live image provider requires {_env_name('image_endpoint')}")

    if config.store_mode == "file":
        if not config.store_path:
            raise ConfigError(f"file store requires {_env_name('store_path')}")
        _probe_store_path(config.store_path)


def _probe_store_path(path: str) -> None:
    """Fail at startup, not first write, when the store path is unusable."""
    try:
        os.makedirs(path, exist_ok=True)
        probe = os.path.join(path, f".write-probe-{uuid.uuid4().hex[:8]}")
        with open(probe, "w", encoding="utf-8") as f:
            f.write("probe")
        os.remove(probe)
    except OSError as exc:
        raise ConfigError(
            f"{_env_name('store_path')} is not writable: {path!r} ({exc})") from exc


@dataclass
class Services:
    config: ServiceConfig
    store: DocumentStore
    rooms: RoomService
    roster: AgentRosterService
    prompts: PromptService
    scenes: SceneService


def build_services(config: ServiceConfig, *, clock: Clock = wall_clock) -> Services:
    """Wire the store, providers, and module services for one process."""
    if config.store_mode == "file":
        store: DocumentStore = FileStore(config.store_path, retry_limit=config.txn_retry_limit)
    else:
        store = InMemoryStore(retry_limit=config.txn_retry_limit)

    if config.chat_provider == "live":
        chat = LiveChatProvider(config.chat_endpoint, config.chat_api_key)
    else:
        chat = MockChatProvider()
    if config.scene_provider == "live":
        scene = LiveSceneProvider(config.scene_endpoint, config.scene_api_key,
                                  size=config.scene_size)
    else:
        scene = MockSceneProvider(size=config.scene_size)
    if config.image_provider == "live":
        image = LiveImageRevisionProvider(config.image_endpoint, config.image_api_key)
    else:
        image = MockImageRevisionProvider()

    rooms = RoomService(store, clock=clock, max_participants=config.max_participants)
    roster = AgentRosterService(store, rooms, chat,
                                history_max_messages=config.history_max_messages,
                                history_max_chars=config.history_max_chars)
    rooms.facilitator_fn = roster.facilitator_reply
    prompts = PromptService(store, rooms, chat)
    scenes = SceneService(store, rooms, scene, image)
    return Services(config=config, store=store, rooms=rooms, roster=roster,
                    prompts=prompts, scenes=scenes)

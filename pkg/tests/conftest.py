"""Shared fixtures: deterministic clock and pre-wired service stacks."""
from __future__ import annotations

import pytest

from roundtable.config import ServiceConfig, Services, build_services


class TickClock:
    """Monotonic fake clock; each call advances by a fixed step."""

    def __init__(self, start: float = 1_700_000_000.0, step: float = 1.0):
        self.now = start
        self.step = step

    def __call__(self) -> float:
        self.now += self.step
        return self.now


@pytest.fixture
def clock() -> TickClock:
    return TickClock()


@pytest.fixture
def services(clock) -> Services:
    return build_services(ServiceConfig(), clock=clock)


@pytest.fixture
def file_services(tmp_path, clock) -> Services:
    config = ServiceConfig(store_mode="file", store_path=str(tmp_path / "data"))
    svc = build_services(config, clock=clock)
    yield svc
    svc.store.close()


def make_services(clock=None) -> Services:
    return build_services(ServiceConfig(), clock=clock or TickClock())


def start_room(rooms, room_id: str, users: list[str]) -> None:
    """Create a room, join everyone, and mark all ready (room goes active)."""
    for user in users:
        rooms.create_or_join_room(room_id, user)
    for user in users:
        rooms.set_ready(room_id, user, True)


VIEW = {
    "panorama_id": "pano_fixture_0123456789",
    "heading": 135.0,
    "pitch": -2.0,
    "fov": 85.0,
    "latitude": 40.741893,
    "longitude": -73.989123,
}

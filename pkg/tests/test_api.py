"""HTTP gateway behavior: routing, error envelope, idempotency, restarts."""
from __future__ import annotations

import io
import zipfile

import pytest
from fastapi.testclient import TestClient

from roundtable.api import create_app
from roundtable.config import ServiceConfig, build_services

from conftest import TickClock, VIEW


@pytest.fixture
def client():
    svc = build_services(ServiceConfig(), clock=TickClock())
    with TestClient(create_app(svc), raise_server_exceptions=False) as c:
        c.services = svc
        yield c


def _post(client, path, body):
    return client.post(path, json=body)


def _start_room(client, room="plaza", users=("ana", "ben")):
    for user in users:
        _post(client, f"/v1/rooms/{room}/participants", {"username": user})
    for user in users:
        _post(client, f"/v1/rooms/{room}/ready", {"username": user})


def test_healthz(client):
    r = client.get("/v1/healthz")
    assert r.status_code == 200
    assert r.json() == {"status": "ok"}


def test_join_and_state_flow(client):
    r = _post(client, "/v1/rooms/plaza/participants", {"username": "ana"})
    assert r.status_code == 200
    body = r.json()
    assert body["status"] == "lobby"
    assert body["participants"] == ["ana"]

    r = client.get("/v1/rooms/plaza/state")
    assert r.status_code == 200
    assert r.json()["room"]["status"] == "lobby"
    assert r.json()["messages"] == []


def test_error_envelope_shape(client):
    r = client.get("/v1/rooms/missing/state")
    assert r.status_code == 404
    err = r.json()["error"]
    assert err["code"] == "unknown_room"
    assert err["retryable"] is False
    assert isinstance(err["message"], str)


def test_domain_errors_map_to_status(client):
    _start_room(client)
    cases = [
        ("/v1/rooms/plaza/participants", {"username": "zoe"}, 409, "room_closed"),
        ("/v1/rooms/plaza/messages", {"username": "ghost", "content": "x"},
         404, "unknown_user"),
        ("/v1/rooms/plaza/messages", {"username": "ana", "content": "  "},
         422, "empty_content"),
        ("/v1/rooms/plaza/experts", {"agent_role": "mayor", "phase": "at_creation"},
         422, "invalid_role"),
        ("/v1/rooms/plaza/experts", {"agent_role": "designer", "phase": "at_creation"},
         409, "invalid_phase"),
    ]
    for path, body, status, code in cases:
        r = _post(client, path, body)
        assert (r.status_code, r.json()["error"]["code"]) == (status, code), path


def test_pydantic_validation_uses_same_envelope(client):
    r = _post(client, "/v1/rooms/plaza/participants", {})
    assert r.status_code == 422
    assert r.json()["error"]["code"] == "invalid_request"


def test_impossible_ids_are_not_found_not_server_errors(client):
    """Ids the store could never hold must surface as 404, never 5xx."""
    _start_room(client)
    r = _post(client, "/v1/rooms/plaza/images",
              {"username": "ana", "prompt_set_id": ""})
    assert (r.status_code, r.json()["error"]["code"]) == (404, "unknown_prompt_set")

    r = client.get("/v1/snapshots/a%20b")
    assert (r.status_code, r.json()["error"]["code"]) == (404, "unknown_snapshot")

    r = client.get("/v1/artifacts/a%20b/meta")
    assert (r.status_code, r.json()["error"]["code"]) == (404, "unknown_artifact")

    r = _post(client, "/v1/rooms/no%20room/messages",
              {"username": "ana", "content": "x", "request_id": "req-1"})
    assert (r.status_code, r.json()["error"]["code"]) == (404, "unknown_room")


def test_full_flow_matches_service_layer(client):
    """The gateway is a thin shell: responses equal direct service output."""
    _start_room(client)
    svc = client.services

    r = _post(client, "/v1/rooms/plaza/messages",
              {"username": "ana", "content": "more shade please"})
    posted = r.json()
    assert posted["round_completed"] is False
    direct = svc.rooms.get_room_state("plaza", since_seq=0)["messages"][0]
    assert posted["stored_message"] == direct

    r = client.get("/v1/rooms/plaza/state")
    assert r.json() == svc.rooms.get_room_state("plaza", since_seq=0)


def test_round_completion_over_http(client):
    _start_room(client)
    r = _post(client, "/v1/rooms/plaza/messages",
              {"username": "ana", "content": "more shade please"})
    assert r.json()["round_completed"] is False
    r = _post(client, "/v1/rooms/plaza/messages",
              {"username": "ben", "content": "and slower traffic"})
    body = r.json()
    assert body["round_completed"] is True
    assert body["facilitator_reply"]["role"] == "facilitator"
    assert body["new_round"] == 2


def test_snapshot_prompts_image_export_over_http(client):
    _start_room(client)
    r = _post(client, "/v1/rooms/plaza/snapshots", dict(VIEW, username="ana"))
    assert r.status_code == 200
    art_id = r.json()["artifact"]["artifact_id"]

    _post(client, "/v1/rooms/plaza/messages",
          {"username": "ana", "content": "more shade and seating please"})
    _post(client, "/v1/rooms/plaza/messages",
          {"username": "ben", "content": "safer crossings near the school"})

    r = _post(client, "/v1/rooms/plaza/prompt-sets", {"username": "ana"})
    ps = r.json()
    assert 4 <= len(ps["items"]) <= 6

    r = _post(client, f"/v1/prompt-sets/{ps['prompt_set_id']}/edits",
              {"edits": [{"op": "append",
                          "text": "Add sustainable wooden benches and planters "
                                  "along the sidewalk"}]})
    assert r.status_code == 200
    assert r.json()["items"][-1]["origin"] == "user_added"

    r = _post(client, "/v1/rooms/plaza/images",
              {"prompt_set_id": ps["prompt_set_id"]})
    assert r.status_code == 200
    revision = r.json()
    assert revision["generation_index"] == 1
    assert revision["parent_artifact"] == art_id

    r = client.get(f"/v1/artifacts/{revision['artifact_id']}")
    assert r.status_code == 200
    assert r.headers["content-type"] == "image/png"
    assert r.content[:8] == b"\x89PNG\r\n\x1a\n"

    r = client.get(f"/v1/artifacts/{revision['artifact_id']}/meta")
    assert r.json() == revision

    r = client.get("/v1/rooms/plaza/artifacts")
    assert [a["artifact_id"] for a in r.json()["artifacts"]] == \
        [art_id, revision["artifact_id"]]

    r = client.get("/v1/rooms/plaza/export")
    assert r.status_code == 200
    assert r.headers["content-type"] == "application/zip"
    with zipfile.ZipFile(io.BytesIO(r.content)) as zf:
        assert "manifest.json" in zf.namelist()


def test_expert_flow_over_http(client):
    _start_room(client)
    r = _post(client, "/v1/rooms/plaza/experts",
              {"agent_role": "planner", "phase": "mid_session"})
    assert r.json() == {"agent_role": "planner", "activation_round": 2}

    r = _post(client, "/v1/rooms/plaza/experts/planner/query", {})
    assert r.status_code == 409
    assert r.json()["error"]["code"] == "agent_not_active"

    _post(client, "/v1/rooms/plaza/messages", {"username": "ana", "content": "a"})
    _post(client, "/v1/rooms/plaza/messages", {"username": "ben", "content": "b"})
    r = _post(client, "/v1/rooms/plaza/experts/planner/query", {})
    assert r.status_code == 200
    assert r.json()["role"] == "planner"


def test_rounds_endpoint_with_concurrency_token(client):
    _start_room(client)
    r = _post(client, "/v1/rooms/plaza/rounds",
              {"username": "ana", "expected_round": 1})
    assert r.json()["advanced"] is True
    r = _post(client, "/v1/rooms/plaza/rounds",
              {"username": "ben", "expected_round": 1})
    assert r.json()["advanced"] is False
    assert r.json()["current_round"] == 2


# ---- idempotency ----


def test_duplicate_request_id_replays_response(client):
    _start_room(client)
    body = {"username": "ana", "content": "hello hello", "request_id": "msg-1"}
    first = _post(client, "/v1/rooms/plaza/messages", body)
    second = _post(client, "/v1/rooms/plaza/messages", body)
    assert first.json() == second.json()
    state = client.get("/v1/rooms/plaza/state").json()
    user_msgs = [m for m in state["messages"] if m["role"] == "user"]
    assert len(user_msgs) == 1, "retry must not store a second message"


def test_distinct_request_ids_both_execute(client):
    _start_room(client)
    _post(client, "/v1/rooms/plaza/messages",
          {"username": "ana", "content": "one", "request_id": "m1"})
    _post(client, "/v1/rooms/plaza/messages",
          {"username": "ana", "content": "two", "request_id": "m2"})
    state = client.get("/v1/rooms/plaza/state").json()
    assert len([m for m in state["messages"] if m["role"] == "user"]) == 2


def test_failed_request_id_can_be_retried(client):
    _start_room(client)
    bad = {"username": "ghost", "content": "x", "request_id": "r1"}
    r = _post(client, "/v1/rooms/plaza/messages", bad)
    assert r.status_code == 404
    good = {"username": "ana", "content": "hello again", "request_id": "r1"}
    r = _post(client, "/v1/rooms/plaza/messages", good)
    assert r.status_code == 200


def test_request_id_validation(client):
    _start_room(client)
    r = _post(client, "/v1/rooms/plaza/messages",
              {"username": "ana", "content": "x", "request_id": "bad id!"})
    assert r.status_code == 422
    r = _post(client, "/v1/rooms/plaza/messages",
              {"username": "ana", "content": "x", "request_id": "y" * 65})
    assert r.status_code == 422


def test_idempotent_join_with_retry(client):
    body = {"username": "ana", "request_id": "join-1"}
    a = _post(client, "/v1/rooms/plaza/participants", body)
    b = _post(client, "/v1/rooms/plaza/participants", body)
    assert a.json() == b.json()
    assert a.json()["participants"] == ["ana"]


# ---- persistence across restarts ----


def test_state_survives_gateway_restart(tmp_path):
    config = ServiceConfig(store_mode="file", store_path=str(tmp_path / "d"))
    svc = build_services(config, clock=TickClock())
    with TestClient(create_app(svc), raise_server_exceptions=False) as c:
        _start_room(c)
        _post(c, "/v1/rooms/plaza/snapshots", dict(VIEW, username="ana"))
        _post(c, "/v1/rooms/plaza/messages",
              {"username": "ana", "content": "before the restart"})
    svc.store.close()

    svc2 = build_services(config, clock=TickClock(start=1_800_000_000.0))
    with TestClient(create_app(svc2), raise_server_exceptions=False) as c:
        state = c.get("/v1/rooms/plaza/state").json()
        assert state["room"]["status"] == "active"
        contents = [m["content"] for m in state["messages"]]
        assert "before the restart" in contents
        r = c.get("/v1/artifacts/plaza-art-2")
        assert r.status_code == 200 and r.content[:4] == b"\x89PNG"
        # sequence numbering continues without gaps
        r = _post(c, "/v1/rooms/plaza/messages",
                  {"username": "ben", "content": "after the restart"})
        seqs = [m["seq"]
                for m in c.get("/v1/rooms/plaza/state").json()["messages"]]
        assert seqs == list(range(1, len(seqs) + 1))
    svc2.store.close()


def test_idempotency_record_survives_restart(tmp_path):
    config = ServiceConfig(store_mode="file", store_path=str(tmp_path / "d"))
    svc = build_services(config, clock=TickClock())
    with TestClient(create_app(svc), raise_server_exceptions=False) as c:
        _start_room(c)
        first = _post(c, "/v1/rooms/plaza/messages",
                      {"username": "ana", "content": "once", "request_id": "m1"})
    svc.store.close()

    svc2 = build_services(config, clock=TickClock(start=1_800_000_000.0))
    with TestClient(create_app(svc2), raise_server_exceptions=False) as c:
        second = _post(c, "/v1/rooms/plaza/messages",
                       {"username": "ana", "content": "once", "request_id": "m1"})
        assert second.json() == first.json()
        state = c.get("/v1/rooms/plaza/state").json()
        assert len([m for m in state["messages"] if m["role"] == "user"]) == 1
    svc2.store.close()

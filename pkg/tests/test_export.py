"""Session export: archive layout, determinism, and round-tripping."""
from __future__ import annotations

import io
import json
import zipfile

import pytest

from roundtable.errors import UnknownRoom
from roundtable.export import build_bundle, export_session, read_archive, write_archive

from conftest import TickClock, VIEW, make_services, start_room


def _run_session(svc):
    rooms, scenes, prompts = svc.rooms, svc.scenes, svc.prompts
    start_room(rooms, "plaza", ["ana", "ben"])
    scenes.save_snapshot("plaza", "ana", dict(VIEW))
    rooms.post_message("plaza", "ana", "we need shade and more seating")
    rooms.post_message("plaza", "ben", "and safer crossings near the school")
    ps = prompts.extract_prompts("plaza", "ana")
    scenes.revise_image("plaza", ps.prompt_set_id)
    rooms.end_session("plaza", "ben")


@pytest.fixture
def exported():
    svc = make_services()
    _run_session(svc)
    return svc, export_session(svc.store, "plaza")


def test_archive_entry_names_and_order(exported):
    _, data = exported
    with zipfile.ZipFile(io.BytesIO(data)) as zf:
        names = zf.namelist()
    assert names[0] == "manifest.json"
    assert names[1] == "prompts.json"
    assert names[2] == "transcript.jsonl"
    image_names = names[3:]
    assert image_names == sorted(image_names)
    assert all(n.startswith("images/") and n.endswith(".png") for n in image_names)
    assert len(image_names) == 2


def test_archive_is_deterministic(exported):
    svc, data = exported
    again = export_session(svc.store, "plaza")
    assert data == again


def test_identical_sessions_export_identical_bytes():
    a = make_services(TickClock())
    b = make_services(TickClock())
    _run_session(a)
    _run_session(b)
    assert export_session(a.store, "plaza") == export_session(b.store, "plaza")


def test_manifest_contents(exported):
    svc, data = exported
    with zipfile.ZipFile(io.BytesIO(data)) as zf:
        manifest = json.loads(zf.read("manifest.json"))
    room = svc.rooms.get_room("plaza")
    assert manifest["room_id"] == "plaza"
    assert manifest["participants"] == ["ana", "ben"]
    assert manifest["message_count"] == room.next_seq - 1
    assert manifest["round_count"] == room.current_round
    assert manifest["created_at"] and manifest["ended_at"]
    assert [a["agent_role"] for a in manifest["agent_roster"]] == ["facilitator"]
    assert len(manifest["artifacts"]) == 2
    assert len(manifest["snapshots"]) == 1
    kinds = [a["kind"] for a in manifest["artifacts"]]
    assert kinds == ["source_scene", "revised_design"]


def test_transcript_is_ordered_jsonl(exported):
    _, data = exported
    with zipfile.ZipFile(io.BytesIO(data)) as zf:
        lines = zf.read("transcript.jsonl").decode("utf-8").splitlines()
    records = [json.loads(line) for line in lines]
    assert [r["seq"] for r in records] == list(range(1, len(records) + 1))
    roles = {r["role"] for r in records}
    assert {"user", "facilitator", "system"} <= roles
    assert records[-1]["content"].endswith("ended the session.")


def test_prompts_json_contains_sets(exported):
    _, data = exported
    with zipfile.ZipFile(io.BytesIO(data)) as zf:
        sets = json.loads(zf.read("prompts.json"))
    assert len(sets) == 1
    assert 4 <= len(sets[0]["items"]) <= 6
    assert sets[0]["source_segment"]["user_id"] == "ana"


def test_images_match_store_bytes(exported):
    svc, data = exported
    with zipfile.ZipFile(io.BytesIO(data)) as zf:
        for name in zf.namelist():
            if not name.startswith("images/"):
                continue
            artifact_id = name[len("images/"):-len(".png")]
            assert zf.read(name) == svc.scenes.get_artifact_bytes(artifact_id)


def test_zip_metadata_is_fixed(exported):
    _, data = exported
    with zipfile.ZipFile(io.BytesIO(data)) as zf:
        for info in zf.infolist():
            assert info.date_time == (1980, 1, 1, 0, 0, 0), info.filename
            assert info.external_attr == (0o644 << 16), info.filename


def test_round_trip_read_write(exported):
    _, data = exported
    bundle = read_archive(data)
    assert write_archive(bundle) == data


def test_bundle_from_live_room_without_end(exported):
    svc, _ = exported
    start_room(svc.rooms, "open", ["zoe"])
    svc.rooms.post_message("open", "zoe", "quick thought before export")
    bundle = build_bundle(svc.store, "open")
    assert bundle.manifest["ended_at"] is None
    assert bundle.manifest["message_count"] >= 1


def test_export_unknown_room():
    svc = make_services()
    with pytest.raises(UnknownRoom):
        export_session(svc.store, "missing")

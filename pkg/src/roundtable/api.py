"""HTTP gateway: stateless /v1/ endpoints over the module services.

Every mutation accepts an optional client-generated request_id; duplicates
replay the stored response instead of re-executing, which makes client retries
safe across poll cycles and reconnects.
"""
from __future__ import annotations

import logging
import os
import time
import uuid
from typing import Optional

from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .config import ServiceConfig, Services, build_services
from .errors import InvalidRequest, RoundtableError, StorageError
from .export import export_session
from .models import request_key, safe_key_segment
from .store import DocumentStore

log = logging.getLogger(__name__)

_REQUEST_ID_MAX_LEN = 64
_DUPLICATE_WAIT_SECONDS = 5.0


class JoinBody(BaseModel):
    username: str
    request_id: Optional[str] = None


class ReadyBody(BaseModel):
    username: str
    ready: bool = True
    request_id: Optional[str] = None


class PostMessageBody(BaseModel):
    username: str
    content: str
    request_id: Optional[str] = None


class NewRoundBody(BaseModel):
    username: str
    expected_round: Optional[int] = None
    request_id: Optional[str] = None


class RegisterExpertBody(BaseModel):
    agent_role: str
    phase: str
    request_id: Optional[str] = None


class QueryExpertBody(BaseModel):
    request_id: Optional[str] = None


class FacilitatorRetryBody(BaseModel):
    round_index: int
    request_id: Optional[str] = None


class SnapshotBody(BaseModel):
    username: str
    panorama_id: str
    heading: float
    pitch: float
    fov: float
    latitude: float
    longitude: float
    request_id: Optional[str] = None


class GeneratePromptsBody(BaseModel):
    username: str
    request_id: Optional[str] = None


class EditPromptsBody(BaseModel):
    edits: list[dict]
    request_id: Optional[str] = None


class GenerateImageBody(BaseModel):
    prompt_set_id: str
    source_artifact_id: Optional[str] = None
    request_id: Optional[str] = None


class EndSessionBody(BaseModel):
    username: str
    request_id: Optional[str] = None


class _IdempotencyGuard:
    """Deduplicates mutations by (room_id, request_id) through the store, so
    it survives restarts with the file backend."""

    def __init__(self, store: DocumentStore):
        self.store = store

    def run(self, room_id: str, request_id: Optional[str], fn):
        if not request_id:
            return fn()
        if (len(request_id) > _REQUEST_ID_MAX_LEN
                or not all(c.isalnum() or c in "._-" for c in request_id)):
            raise InvalidRequest("request_id must be 1-64 chars of [A-Za-z0-9._-]")
        if not safe_key_segment(room_id):
            # An impossible room id cannot have prior requests; let the
            # service raise its unknown-room error.
            return fn()
        key = request_key(room_id, request_id)
        nonce = uuid.uuid4().hex

        def reserve(doc):
            if doc is None or doc.get("state") == "failed":
                return {"state": "pending", "owner": nonce, "response": None}
            return None

        record = self.store.transact(key, reserve)
        if record.value.get("owner") == nonce and record.value["state"] == "pending":
            try:
                response = fn()
            except Exception:
                self._mark_failed(key, nonce)
                raise
            self.store.transact(key, lambda doc: {
                "state": "done", "owner": None, "response": response})
            return response

        # Another call with the same id ran (or is running); replay its result.
        deadline = time.monotonic() + _DUPLICATE_WAIT_SECONDS
        while time.monotonic() < deadline:
            current = self.store.get(key)
            if current is not None:
                if current.value["state"] == "done":
                    return current.value["response"]
                if current.value["state"] == "failed":
                    raise InvalidRequest(
                        "a request with this id failed; retry with the same id to re-run")
            time.sleep(0.02)
        raise StorageError("duplicate request is still in flight; retry later")

    def _mark_failed(self, key: str, nonce: str) -> None:
        def fail(doc):
            if doc is not None and doc.get("owner") == nonce:
                return {"state": "failed", "owner": None, "response": None}
            return None

        try:
            self.store.transact(key, fail)
        except Exception:
            log.exception("could not record failed request %s", key)


def create_app(services: Optional[Services] = None,
               config: Optional[ServiceConfig] = None) -> FastAPI:
    if services is None:
        services = build_services(config or ServiceConfig())
    cfg = services.config

    app = FastAPI(title="roundtable", docs_url=None, redoc_url=None)
    app.state.services = services
    guard = _IdempotencyGuard(services.store)

    app.add_middleware(
        CORSMiddleware,
        allow_origins=cfg.cors_origins,
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(RoundtableError)
    def _domain_error(_request: Request, exc: RoundtableError):
        return JSONResponse(
            status_code=exc.http_status,
            content={"error": {"code": exc.code, "message": exc.message,
                               "retryable": exc.retryable}})

    @app.exception_handler(RequestValidationError)
    def _validation_error(_request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=422,
            content={"error": {"code": "invalid_request",
                               "message": str(exc.errors()[:3]),
                               "retryable": False}})

    rooms, roster = services.rooms, services.roster
    prompts, scenes = services.prompts, services.scenes

    @app.get("/v1/healthz")
    def healthz():
        return {"status": "ok"}

    # ---- session ----

    @app.post("/v1/rooms/{room_id}/participants")
    def join(room_id: str, body: JoinBody):
        return guard.run(room_id, body.request_id,
                         lambda: rooms.create_or_join_room(room_id, body.username))

    @app.post("/v1/rooms/{room_id}/ready")
    def ready(room_id: str, body: ReadyBody):
        return guard.run(room_id, body.request_id,
                         lambda: rooms.set_ready(room_id, body.username, body.ready))

    @app.post("/v1/rooms/{room_id}/messages")
    def post_message(room_id: str, body: PostMessageBody):
        return guard.run(
            room_id, body.request_id,
            lambda: rooms.post_message(room_id, body.username, body.content).to_dict())

    @app.post("/v1/rooms/{room_id}/rounds")
    def new_round(room_id: str, body: NewRoundBody):
        return guard.run(
            room_id, body.request_id,
            lambda: rooms.start_new_round(room_id, body.username, body.expected_round))

    @app.get("/v1/rooms/{room_id}/state")
    def state(room_id: str, since_seq: int = 0):
        return rooms.get_room_state(room_id, since_seq)

    @app.post("/v1/rooms/{room_id}/end")
    def end_session(room_id: str, body: EndSessionBody):
        return guard.run(room_id, body.request_id,
                         lambda: rooms.end_session(room_id, body.username))

    # ---- agents ----

    @app.post("/v1/rooms/{room_id}/experts")
    def register_expert(room_id: str, body: RegisterExpertBody):
        return guard.run(
            room_id, body.request_id,
            lambda: roster.register_expert(room_id, body.agent_role, body.phase))

    @app.post("/v1/rooms/{room_id}/experts/{agent_role}/query")
    def query_expert(room_id: str, agent_role: str, body: QueryExpertBody):
        return guard.run(
            room_id, body.request_id,
            lambda: roster.query_expert(room_id, agent_role).to_dict())

    @app.post("/v1/rooms/{room_id}/facilitator/retry")
    def facilitator_retry(room_id: str, body: FacilitatorRetryBody):
        return guard.run(
            room_id, body.request_id,
            lambda: rooms.retry_facilitator(room_id, body.round_index).to_dict())

    # ---- scenes / prompts / images ----

    @app.post("/v1/rooms/{room_id}/snapshots")
    def save_snapshot(room_id: str, body: SnapshotBody):
        view = {"panorama_id": body.panorama_id, "heading": body.heading,
                "pitch": body.pitch, "fov": body.fov,
                "latitude": body.latitude, "longitude": body.longitude}
        return guard.run(room_id, body.request_id,
                         lambda: scenes.save_snapshot(room_id, body.username, view))

    @app.get("/v1/snapshots/{snapshot_id}")
    def get_snapshot(snapshot_id: str):
        return scenes.get_snapshot(snapshot_id)

    @app.post("/v1/rooms/{room_id}/prompt-sets")
    def generate_prompts(room_id: str, body: GeneratePromptsBody):
        return guard.run(
            room_id, body.request_id,
            lambda: prompts.extract_prompts(room_id, body.username).to_dict())

    @app.get("/v1/prompt-sets/{prompt_set_id}")
    def get_prompt_set(prompt_set_id: str):
        return prompts.get_prompt_set(prompt_set_id).to_dict()

    @app.post("/v1/prompt-sets/{prompt_set_id}/edits")
    def edit_prompt_set(prompt_set_id: str, body: EditPromptsBody):
        prompt_set = prompts.get_prompt_set(prompt_set_id)
        return guard.run(
            prompt_set.room_id, body.request_id,
            lambda: prompts.edit_prompt_set(prompt_set_id, body.edits).to_dict())

    @app.post("/v1/rooms/{room_id}/images")
    def generate_image(room_id: str, body: GenerateImageBody):
        return guard.run(
            room_id, body.request_id,
            lambda: scenes.revise_image(room_id, body.prompt_set_id,
                                        body.source_artifact_id))

    @app.get("/v1/rooms/{room_id}/artifacts")
    def list_artifacts(room_id: str):
        return {"artifacts": scenes.list_artifacts(room_id)}

    @app.get("/v1/artifacts/{artifact_id}/meta")
    def artifact_meta(artifact_id: str):
        return scenes.get_artifact(artifact_id)

    @app.get("/v1/artifacts/{artifact_id}")
    def artifact_bytes(artifact_id: str):
        data = scenes.get_artifact_bytes(artifact_id)
        return Response(content=data, media_type="image/png")

    # ---- export ----

    @app.get("/v1/rooms/{room_id}/export")
    def export_room(room_id: str):
        data = export_session(services.store, room_id)
        return Response(
            content=data, media_type="application/zip",
            headers={"Content-Disposition": f'attachment; filename="{room_id}-session.zip"'})

    if cfg.static_dir and os.path.isdir(cfg.static_dir):
        app.mount("/", StaticFiles(directory=cfg.static_dir, html=True), name="workspace")

    return app

"""HTTP + websocket server exposing the document service.

REST handlers are synchronous (FastAPI runs them on worker threads; the
per-document lock serializes mutations). The websocket fans broadcasts out
through a thread-safe queue per connection, so one sender coroutine owns
each socket.
"""

from __future__ import annotations

import asyncio
import logging
import os
import queue
import threading
from contextlib import asynccontextmanager

import anyio
from fastapi import FastAPI, Header, Request, WebSocket, WebSocketDisconnect
from fastapi.responses import FileResponse, JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from ..clock import SystemClock
from ..errors import (
    AlreadyConsumedError,
    AnnotationClosedError,
    CoscribeError,
    DanglingAnchorError,
    DocumentNotFoundError,
    GatewayError,
    HandleTakenError,
    MockScriptError,
    ProtocolViolation,
    SchemaParseError,
    SpanVanishedError,
    SuggestionUnavailableError,
    ThreadResolvedError,
    UnknownAgentError,
    UnknownDocumentError,
    UnknownTaskError,
    UnknownThreadError,
    ValidationError,
)
from ..gateway import Gateway, HttpProvider, MockScript
from ..service import BackgroundExecutor, Hub, ServiceConfig
from ..store import DocumentStore
from . import protocol

log = logging.getLogger(__name__)

_STATUS = {
    UnknownDocumentError: 404,
    DocumentNotFoundError: 404,
    UnknownAgentError: 404,
    UnknownTaskError: 404,
    UnknownThreadError: 404,
    DanglingAnchorError: 404,
    ValidationError: 422,
    ProtocolViolation: 400,
    HandleTakenError: 409,
    ThreadResolvedError: 409,
    AlreadyConsumedError: 409,
    SpanVanishedError: 409,
    AnnotationClosedError: 409,
    GatewayError: 502,
    SchemaParseError: 502,
    SuggestionUnavailableError: 502,
    MockScriptError: 502,
}


class CreateDocument(BaseModel):
    goal_text: str = ""


class JoinRequest(BaseModel):
    user: str


class LeaveRequest(BaseModel):
    session: str


class SaveRequest(BaseModel):
    user: str | None = None


class AgentCreate(BaseModel):
    user: str
    name: str = ""
    role: str = ""
    sections: dict[str, list[str]] | None = None
    notes: list[str] | None = None
    strip_filler: bool = False
    preset: str | None = None


class AgentUpdate(BaseModel):
    user: str
    name: str | None = None
    role: str | None = None
    sections: dict[str, list[str]] | None = None
    notes: list[str] | None = None
    strip_filler: bool | None = None


class SuggestRequest(BaseModel):
    section: str
    current: list[str] = []


class TaskCreate(BaseModel):
    user: str
    description: str
    assignee: str | None = None
    interaction: str = "manual"
    trigger: str | None = None
    shortcut: bool = False


class TaskUpdate(BaseModel):
    user: str
    description: str | None = None
    assignee: str | None = None
    interaction: str | None = None
    trigger: str | None = None
    shortcut: bool | None = None


class RunRequest(BaseModel):
    selection: tuple[int, int] | None = None


class CommentCreate(BaseModel):
    user: str
    body: str
    anchor: tuple[int, int] | None = None
    thread: str | None = None


class ConsumeRequest(BaseModel):
    message: str
    action: str
    user: str


class ApproveRequest(BaseModel):
    user: str


def build_hub(mock_script_path: str | None = None, data_dir: str | None = None,
              config: ServiceConfig | None = None) -> Hub:
    config = config or ServiceConfig.from_env()
    if mock_script_path:
        provider = MockScript.from_file(mock_script_path)
    elif os.environ.get("MODEL_ENDPOINT"):
        provider = HttpProvider()
    else:
        log.warning("MODEL_ENDPOINT not set and no mock script: agent features will error")
        provider = MockScript([])
    gateway = Gateway(provider=provider, model_id=os.environ.get("MODEL_NAME", ""), backoff_s=0.5)
    return Hub(
        config=config,
        clock=SystemClock(),
        gateway=gateway,
        store=DocumentStore(data_dir),
        executor=BackgroundExecutor(),
    )


def build_app(hub: Hub | None = None, mock_script_path: str | None = None,
              data_dir: str | None = None, config: ServiceConfig | None = None,
              tick_interval_s: float = 1.0, static_dir: str | None = None) -> FastAPI:
    hub = hub or build_hub(mock_script_path=mock_script_path, data_dir=data_dir, config=config)
    stop = threading.Event()

    def ticker():
        while not stop.wait(tick_interval_s):
            for service in list(hub.docs.values()):
                try:
                    service.tick()
                except Exception:
                    log.exception("tick failed for %s", service.doc_id)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        thread = threading.Thread(target=ticker, daemon=True, name="coscribe-ticker")
        thread.start()
        yield
        stop.set()

    app = FastAPI(title="coscribe", lifespan=lifespan)
    app.state.hub = hub

    @app.exception_handler(CoscribeError)
    async def coscribe_error_handler(request: Request, exc: CoscribeError):
        status = next((code for cls, code in _STATUS.items() if isinstance(exc, cls)), 500)
        return JSONResponse(status_code=status, content={"error": str(exc)})

    def require_admin(token: str | None) -> None:
        expected = hub.config.admin_token
        if expected and token != expected:
            raise ValidationError("admin token required")

    # ------------------------------------------------------------------
    # Documents
    # ------------------------------------------------------------------

    @app.post("/documents")
    def create_document(body: CreateDocument, x_admin_token: str | None = Header(default=None)):
        require_admin(x_admin_token)
        service = hub.create_document(goal_text=body.goal_text)
        return {"doc": service.doc_id, "join_code": service.join_code}

    @app.get("/documents")
    def list_documents(x_admin_token: str | None = Header(default=None)):
        require_admin(x_admin_token)
        return hub.list_documents()

    @app.post("/documents/{ref}/join")
    def join_document(ref: str, body: JoinRequest):
        return hub.resolve(ref).join(body.user)

    @app.post("/documents/{ref}/leave")
    def leave_document(ref: str, body: LeaveRequest):
        hub.resolve(ref).leave(body.session)
        return {"ok": True}

    @app.get("/documents/{ref}/snapshot")
    def get_snapshot(ref: str):
        return hub.resolve(ref).snapshot_payload()

    @app.post("/documents/{ref}/save")
    def save_document(ref: str, body: SaveRequest):
        service = hub.resolve(ref)
        version = service.save(body.user)
        return {"version": version, "save_counter": service.doc.save_counter}

    # ------------------------------------------------------------------
    # Agents
    # ------------------------------------------------------------------

    @app.get("/documents/{ref}/agents")
    def list_agents(ref: str):
        return [a.to_dict() for a in hub.resolve(ref).registry.all()]

    @app.get("/documents/{ref}/presets")
    def list_presets(ref: str):
        from ..agents import load_presets

        hub.resolve(ref)
        return load_presets()

    @app.post("/documents/{ref}/agents")
    def create_agent(ref: str, body: AgentCreate):
        service = hub.resolve(ref)
        if body.preset:
            return service.instantiate_preset(body.user, body.preset)
        return service.create_agent(
            body.user, body.name, body.role, body.sections, body.notes, body.strip_filler
        )

    @app.put("/documents/{ref}/agents/{agent_id}")
    def update_agent(ref: str, agent_id: str, body: AgentUpdate):
        fields = {k: v for k, v in body.model_dump().items() if k != "user" and v is not None}
        return hub.resolve(ref).update_agent(body.user, agent_id, **fields)

    @app.delete("/documents/{ref}/agents/{agent_id}")
    def delete_agent(ref: str, agent_id: str, user: str = "admin"):
        return hub.resolve(ref).delete_agent(user, agent_id)

    @app.post("/agents/{agent_id}/suggest")
    def suggest(agent_id: str, body: SuggestRequest):
        service, _ = hub.find_agent(agent_id)
        return {"suggestions": service.suggest_section_values(agent_id, body.section, body.current)}

    @app.get("/agents/{agent_id}/history")
    def agent_history(agent_id: str):
        service, _ = hub.find_agent(agent_id)
        return service.agent_history(agent_id)

    # ------------------------------------------------------------------
    # Tasks
    # ------------------------------------------------------------------

    @app.get("/documents/{ref}/tasks")
    def list_tasks(ref: str):
        return [t.to_dict() for t in hub.resolve(ref).tasks.all()]

    @app.post("/documents/{ref}/tasks")
    def create_task(ref: str, body: TaskCreate):
        return hub.resolve(ref).create_task(
            body.user, body.description, body.assignee, body.interaction, body.trigger, body.shortcut
        )

    @app.put("/documents/{ref}/tasks/{task_id}")
    def update_task(ref: str, task_id: str, body: TaskUpdate):
        fields = {k: v for k, v in body.model_dump().items() if k != "user" and v is not None}
        return hub.resolve(ref).update_task(body.user, task_id, **fields)

    @app.delete("/documents/{ref}/tasks/{task_id}")
    def delete_task(ref: str, task_id: str, user: str = "admin"):
        return hub.resolve(ref).delete_task(user, task_id)

    @app.get("/documents/{ref}/shortcuts")
    def shortcuts(ref: str):
        return hub.resolve(ref).tasks.shortcuts()

    @app.post("/tasks/{task_id}/run")
    def run_task(task_id: str, body: RunRequest | None = None):
        service, _ = hub.find_task(task_id)
        selection = body.selection if body else None
        run = service.run_task(task_id, selection=selection)
        if run is None:
            return {"coalesced": True}
        return run.to_dict()

    @app.get("/tasks/{task_id}/runs")
    def task_runs(task_id: str):
        service, _ = hub.find_task(task_id)
        return [r.to_dict() for r in service.tasks.runs_for(task_id)]

    # ------------------------------------------------------------------
    # Comments
    # ------------------------------------------------------------------

    @app.get("/documents/{ref}/threads")
    def list_threads(ref: str):
        return [t.to_dict() for t in hub.resolve(ref).comments.threads.values()]

    @app.post("/documents/{ref}/comments")
    def post_comment(ref: str, body: CommentCreate):
        return hub.resolve(ref).post_comment(
            body.user, body.body, anchor_range=body.anchor, thread_id=body.thread
        )

    @app.post("/threads/{thread_id}/consume")
    def consume(thread_id: str, body: ConsumeRequest):
        service, _ = hub.find_thread(thread_id)
        return service.consume_suggestion(body.user, thread_id, body.message, body.action)

    @app.get("/threads/{thread_id}/preview/{message_id}")
    def preview(thread_id: str, message_id: str):
        service, _ = hub.find_thread(thread_id)
        return service.preview_suggestion(thread_id, message_id)

    @app.post("/documents/{ref}/annotations/{annotation_id}/approve")
    def approve(ref: str, annotation_id: str, body: ApproveRequest):
        return hub.resolve(ref).approve_annotation(body.user, annotation_id)

    @app.post("/documents/{ref}/annotations/{annotation_id}/close")
    def close(ref: str, annotation_id: str, body: ApproveRequest):
        return hub.resolve(ref).close_annotation(body.user, annotation_id)

    # ------------------------------------------------------------------
    # Websocket session
    # ------------------------------------------------------------------

    @app.websocket("/documents/{ref}/ws")
    async def ws_endpoint(websocket: WebSocket, ref: str, session: str):
        try:
            service = hub.resolve(ref)
            service._session(session)
        except CoscribeError as e:
            await websocket.close(code=4404, reason=str(e))
            return
        await websocket.accept()
        outbox: queue.Queue = queue.Queue()
        sub_id = service.subscribe(outbox.put)

        async def sender():
            while True:
                message = await anyio.to_thread.run_sync(outbox.get)
                if message is None:
                    return
                await websocket.send_json(message)

        async def receiver():
            while True:
                data = await websocket.receive_json()
                try:
                    frame = protocol.validate_client_frame(data)
                    if frame["kind"] == "edit_update":
                        await anyio.to_thread.run_sync(
                            service.apply_edit, session, frame["payload"]["ops"], frame["seq"]
                        )
                    # presence frames only refresh the session's activity
                    elif frame["kind"] == "presence":
                        with service.lock:
                            service._touch(service._session(session))
                except CoscribeError as e:
                    outbox.put(protocol.error_message(service.doc_id, str(e)))

        send_task = asyncio.create_task(sender())
        try:
            await receiver()
        except WebSocketDisconnect:
            pass
        finally:
            service.unsubscribe(sub_id)
            outbox.put(None)
            send_task.cancel()
            service.leave(session)

    # ------------------------------------------------------------------
    # Static frontend (when built)
    # ------------------------------------------------------------------

    static_root = static_dir or os.environ.get("STATIC_DIR")
    if static_root and os.path.isdir(static_root):
        app.mount("/app", StaticFiles(directory=static_root, html=True), name="app")

        @app.get("/")
        def index():
            return FileResponse(os.path.join(static_root, "index.html"))

    return app

"""HTTP surface: skill listing, task upload, sequencing, approval, gates,
and a resumable newline-delimited JSON event stream.

All mutation goes through a single lock so every endpoint is atomic: a
request that fails mid-way leaves the application state untouched.
Session execution is synchronous — each approving or confirming request
advances the session until it blocks on a human gate or terminates — so
results are deterministic and the event log never races its readers.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, field
from typing import Iterator, Optional

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, StreamingResponse

from . import executor as ex
from .bim import MissingParameter, SchemaViolation, TaskModel, load_task_model, serialize_task_payload
from .chaining import (
    ChainingBackend,
    MaxLenExceeded,
    NoContinuousSuccessor,
    chain_task,
)
from .skill_kb import SkillLibrary, UnknownSkillId, canonicalize, skill_to_json

DEFAULT_ACK_STATUS = "Data sent to ROS 2"


@dataclass
class AppState:
    library: SkillLibrary
    task: Optional[TaskModel] = None
    models: dict[str, ChainingBackend] = field(default_factory=dict)
    pending_plan: Optional[ex.Plan] = None
    session: Optional[ex.ExecutionSession] = None
    lock: threading.Lock = field(default_factory=threading.Lock)

    def session_live(self) -> bool:
        return self.session is not None and self.session.status in (
            ex.Status.RUNNING,
            ex.Status.AWAITING_HUMAN,
        )


def _error(status_code: int, message: str, **extra) -> JSONResponse:
    return JSONResponse({"error": message, **extra}, status_code=status_code)


def create_app(
    library: SkillLibrary,
    task: Optional[TaskModel] = None,
    models: Optional[dict[str, ChainingBackend]] = None,
    ack_status: str = DEFAULT_ACK_STATUS,
) -> FastAPI:
    state = AppState(library=library, task=task, models=models or {})
    app = FastAPI(title="skillchain")
    app.state.engine = state
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.get("/skills")
    def skills():
        return {
            "version": state.library.version,
            "skills": [skill_to_json(s) for s in state.library.skills],
        }

    @app.post("/send_data")
    async def send_data(request: Request):
        body = await request.body()
        try:
            task_model = load_task_model(body)
        except SchemaViolation as exc:
            return _error(400, str(exc), path=exc.path)
        with state.lock:
            state.task = task_model
        return {"status": ack_status}

    @app.post("/sequence")
    async def sequence(request: Request):
        body = await request.json()
        names = body.get("skills") if isinstance(body, dict) else body
        if not isinstance(names, list) or not names:
            return _error(422, "body must be a non-empty list of skill names")
        tokens = []
        for name in names:
            token = canonicalize(str(name), state.library)
            if token is None:
                return _error(422, f"unknown skill {name!r}", unknown=name)
            tokens.append(token)
        with state.lock:
            try:
                plan = ex.build_plan(
                    state.library,
                    state.task,
                    tokens,
                    task_label=str(body.get("task_label", "")) if isinstance(body, dict) else "",
                    source=ex.PlanSource.MANUAL_SELECTION,
                )
            except ex.DiscontinuousPlan as exc:
                return _error(422, "sequence breaks object-state continuity", first_break=exc.first_break)
            except MissingParameter as exc:
                return _error(409, str(exc))
            state.pending_plan = plan
        return {"status": "pending", "chain": plan.token_chain()}

    @app.post("/chain")
    async def chain(request: Request):
        body = await request.json()
        backend_name = body.get("backend")
        start_token = body.get("start", "start")
        max_len = int(body.get("max_len", 16))
        backend = state.models.get(backend_name)
        if backend is None:
            return _error(404, f"unknown backend {backend_name!r}", known=sorted(state.models))
        with state.lock:
            if state.session_live():
                return _error(409, "a session is live; confirm or finish it first")
            try:
                tokens = chain_task(backend, state.library, start_token, max_len)
            except UnknownSkillId as exc:
                return _error(422, f"unknown start token {exc.args[0]!r}")
            except NoContinuousSuccessor as exc:
                return _error(422, str(exc))
            except MaxLenExceeded as exc:
                return _error(422, str(exc), partial=exc.partial)
            try:
                plan = ex.build_plan(
                    state.library,
                    state.task,
                    tokens,
                    task_label=str(body.get("task_label", "")),
                    source=ex.PlanSource.AUTO_CHAINED,
                )
            except MissingParameter as exc:
                return _error(409, str(exc))
            state.pending_plan = plan
        return {"status": "pending", "chain": plan.token_chain(), "backend": backend_name}

    @app.post("/approve")
    async def approve_plan(request: Request):
        body = await request.json() if await request.body() else {}
        supervisor = str(body.get("supervisor_id", "")) if isinstance(body, dict) else ""
        if not supervisor:
            return _error(422, "supervisor_id is required")
        with state.lock:
            if state.pending_plan is None:
                return _error(409, "no pending plan to approve")
            if state.session_live():
                return _error(409, "a session is already live")
            plan = ex.approve(state.pending_plan, supervisor)
            if state.task is not None:
                world = ex.initial_world_from_task(state.task)
            else:
                world = ex.WorldState()
            try:
                session = ex.start(plan, world)
            except ex.DiscontinuousPlan as exc:
                return _error(409, str(exc), first_break=exc.first_break)
            state.pending_plan = None
            state.session = session
            ex.run_until_blocked(session)
        return session.snapshot()

    @app.post("/confirm")
    async def confirm(request: Request):
        body = await request.json() if await request.body() else {}
        supervisor = str(body.get("supervisor_id", "supervisor")) if isinstance(body, dict) else "supervisor"
        with state.lock:
            session = state.session
            if session is None or session.status is not ex.Status.AWAITING_HUMAN:
                return _error(409, "no gate awaiting confirmation")
            ex.confirm_gate(session, supervisor)
            ex.run_until_blocked(session)
        return session.snapshot()

    @app.get("/session")
    def session_snapshot():
        session = state.session
        if session is None:
            return {"status": "no_session"}
        return session.snapshot()

    @app.get("/events")
    def events(from_seq: int = 0, follow: bool = True, poll_s: float = 0.05):
        """Newline-delimited JSON event stream, resumable via ``from_seq``."""

        def stream() -> Iterator[bytes]:
            cursor = max(0, from_seq)
            while True:
                session = state.session
                if session is None:
                    return
                log = session.events
                while cursor < len(log):
                    yield (json.dumps(log[cursor].to_json()) + "\n").encode()
                    cursor += 1
                if not follow or session.status in (ex.Status.COMPLETED, ex.Status.FAILED):
                    return
                time.sleep(poll_s)

        return StreamingResponse(stream(), media_type="application/x-ndjson")

    @app.get("/task")
    def task_snapshot():
        if state.task is None:
            return {"status": "no_task"}
        return Response(content=serialize_task_payload(state.task), media_type="application/json")

    return app

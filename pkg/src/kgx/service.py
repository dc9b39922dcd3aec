"""HTTP exploration service over one loaded snapshot.

Read-only by construction: every endpoint works off the frozen graph and
immutable indexes.  Non-success responses always carry the ApiError
triple (code, message, correlation_id); the correlation id is also echoed
in the X-Correlation-Id header of every response.
"""

from __future__ import annotations

import threading
import uuid
from typing import Any

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse
from starlette.concurrency import run_in_threadpool

from .agent import Policy, Session, render_answer, serialize_session
from .config import Config
from .engine import Engine
from .errors import KgxError
from .snapshot import FORMAT_VERSION
from .tools import ToolCall, node_display_name

# Error codes whose cause is the request, not the engine.
_STATUS_BY_CODE = {
    "ARG_SCHEMA": 400,
    "SYNTAX": 400,
    "UNBOUND": 400,
    "SCHEMA": 400,
    "BUDGET": 400,
    "DEPTH_EXCEEDED": 400,
    "UNKNOWN_EDGE_TYPE": 400,
    "VALIDATION": 400,
    "CONFIG": 400,
    "UNKNOWN_TOOL": 404,
    "UNKNOWN_NODE": 404,
    "UNKNOWN_SESSION": 404,
    "SESSION_BUSY": 409,
    "ALREADY_ASKED": 409,
    "NO_POLICY": 409,
}


class _HttpApiError(Exception):
    def __init__(self, code: str, message: str):
        self.code = code
        self.message = message


class _SessionSlot:
    def __init__(self, session: Session, policy: Policy | None):
        self.session = session
        self.policy = policy
        self.lock = threading.Lock()
        self.asked = False


def _error_response(code: str, message: str, correlation_id: str) -> JSONResponse:
    return JSONResponse(
        status_code=_STATUS_BY_CODE.get(code, 500),
        content={"code": code, "message": message, "correlation_id": correlation_id},
        headers={"X-Correlation-Id": correlation_id},
    )


def create_app(engine: Engine, config: Config | None = None) -> FastAPI:
    config = config or engine.config
    app = FastAPI(title="knowledge-graph exploration service", docs_url=None)
    slots: dict[str, _SessionSlot] = {}
    registry_lock = threading.Lock()

    default_policy: Policy | None = None
    if config.policy is not None:
        default_policy = engine.make_policy(config.policy)

    @app.middleware("http")
    async def correlation(request: Request, call_next):
        correlation_id = uuid.uuid4().hex[:12]
        request.state.correlation_id = correlation_id
        try:
            response: Response = await call_next(request)
        except _HttpApiError as exc:
            return _error_response(exc.code, exc.message, correlation_id)
        except KgxError as exc:
            return _error_response(exc.code, exc.message, correlation_id)
        except Exception as exc:  # pragma: no cover - last-resort guard
            return _error_response("INTERNAL", str(exc), correlation_id)
        response.headers["X-Correlation-Id"] = correlation_id
        return response

    def get_slot(session_id: str) -> _SessionSlot:
        with registry_lock:
            slot = slots.get(session_id)
        if slot is None:
            raise _HttpApiError("UNKNOWN_SESSION", f"no session {session_id!r}")
        return slot

    def session_view(slot: _SessionSlot) -> dict[str, Any]:
        with slot.lock:
            session = slot.session
            view = {
                "session_id": session.session_id,
                "status": session.status,
                "step_count": session.step_count,
                "max_steps": session.max_steps,
                "user_query": session.user_query,
                "events": serialize_session(session)["events"],
                "answer": (
                    render_answer(session) if session.status != "running" else None
                ),
            }
        return view

    @app.get("/healthz")
    def healthz() -> dict[str, Any]:
        return {
            "status": "ok",
            "snapshot_format": FORMAT_VERSION,
            "nodes": engine.graph.node_count(),
            "edges": engine.graph.edge_count(),
            "chunks": len(engine.chunks),
        }

    @app.get("/graph/stats")
    def graph_stats() -> dict[str, Any]:
        rows = engine.graph.label_distribution()
        return {
            "total_nodes": engine.graph.node_count(),
            "total_edges": engine.graph.edge_count(),
            "labels": [
                {"label": label, "count": count, "percentage": pct}
                for label, count, pct in rows
            ],
            "edge_types": engine.graph.edge_type_counts(),
        }

    @app.get("/graph/nodes/{node_id}/neighborhood")
    def neighborhood(node_id: str, depth: int = 1, etypes: str | None = None):
        if depth < 1:
            raise _HttpApiError("VALIDATION", "depth must be >= 1")
        etype_filter = etypes.split(",") if etypes else None
        subgraph = engine.graph.neighborhood(node_id, depth, etype_filter)
        return {
            "center": node_id,
            "depth": depth,
            "nodes": [
                {
                    "id": node.id,
                    "label": node.label,
                    "name": node_display_name(node),
                    "props": node.props,
                }
                for node in subgraph.nodes
            ],
            "edges": [
                {"source": edge.src, "etype": edge.etype, "target": edge.dst}
                for edge in subgraph.edges
            ],
        }

    @app.post("/tools/{tool_name}")
    async def invoke_tool(tool_name: str, request: Request):
        body = await request.json() if await request.body() else {}
        args = body.get("args", body) if isinstance(body, dict) else {}
        call = ToolCall(
            tool_name=tool_name,
            args=args if isinstance(args, dict) else {},
            call_id=f"http-{uuid.uuid4().hex[:8]}",
        )
        result = await run_in_threadpool(engine.runner.dispatch, call)
        if result.error is not None and result.error["code"] in (
            "ARG_SCHEMA",
            "UNKNOWN_TOOL",
        ):
            raise _HttpApiError(result.error["code"], result.error["message"])
        return result.to_dict()

    @app.post("/sessions")
    async def create_session(request: Request):
        body = await request.json() if await request.body() else {}
        if not isinstance(body, dict):
            raise _HttpApiError("VALIDATION", "body must be a JSON object")
        policy = default_policy
        if "policy" in body:
            try:
                policy = engine.make_policy(str(body["policy"]))
            except (ValueError, OSError) as exc:
                raise _HttpApiError("VALIDATION", f"bad policy: {exc}") from exc
        session = Session(
            session_id=uuid.uuid4().hex[:12],
            user_query="",
            max_steps=config.max_steps,
        )
        slot = _SessionSlot(session, policy)
        with registry_lock:
            slots[session.session_id] = slot
        return {"session_id": session.session_id, "status": session.status}

    @app.post("/sessions/{session_id}/ask")
    async def ask(session_id: str, request: Request):
        body = await request.json() if await request.body() else {}
        if not isinstance(body, dict) or not isinstance(body.get("query"), str):
            raise _HttpApiError("VALIDATION", "body must carry a 'query' string")
        query = body["query"]
        if not query.strip():
            raise _HttpApiError("VALIDATION", "query must be non-empty")
        wait = bool(body.get("wait", True))

        slot = get_slot(session_id)
        if slot.policy is None:
            raise _HttpApiError(
                "NO_POLICY", "no policy configured for this session or service"
            )
        if not slot.lock.acquire(blocking=False):
            raise _HttpApiError("SESSION_BUSY", "session is already advancing")
        try:
            if slot.asked:
                raise _HttpApiError(
                    "ALREADY_ASKED", "session already carries a query; create a new one"
                )
            slot.asked = True
            slot.session.user_query = query
        finally:
            slot.lock.release()

        def advance() -> None:
            # Lock per step, not per run, so polling reads interleave.
            while True:
                with slot.lock:
                    if slot.session.status != "running":
                        return
                    engine.loop.step(slot.session, slot.policy)

        if wait:
            await run_in_threadpool(advance)
            return session_view(slot)
        thread = threading.Thread(target=advance, daemon=True)
        thread.start()
        return {"session_id": session_id, "status": "running"}

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        return session_view(get_slot(session_id))

    return app


def serve(engine: Engine, config: Config | None = None) -> None:
    """Blocking entry point: bind the configured port and run until killed."""
    import uvicorn

    config = config or engine.config
    app = create_app(engine, config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")

"""HTTP session service for human-in-the-loop steering.

One synthesis session per id, operations on a session serialized by a
per-session lock.  The human picks a control input from the served
feasible set; environment nondeterminism is resolved server-side by the
session's resolver (the ``external`` resolver hands successor choice to
the client as a debugging mode).
"""

from __future__ import annotations

import secrets
import threading
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import HTMLResponse, JSONResponse
from fastapi.staticfiles import StaticFiles

from .. import ltl
from ..abstraction import GridSpec, LinearSystemSpec, abstract_linear
from ..synth import (
    InputNotFeasible,
    PrefixInfeasibleUnderNewSpec,
    Resolver,
    SessionNotActive,
    SessionStatus,
    SynthesisSession,
    make_resolver,
)
from ..systems import ControlledTransitionSystem, system_from_dict
from ..tlt import iter_set_nodes, tree_to_json
from .models import (
    CreateSessionRequest,
    FeasibleInput,
    HistoryEntry,
    ParseRequest,
    ParseResponse,
    SessionCreated,
    SpecUpdateRequest,
    StateView,
    StepRequest,
    StepView,
    TltSnapshot,
)


class ApiException(Exception):
    def __init__(self, status: int, code: str, message: str, field: str | None = None):
        self.status = status
        self.code = code
        self.message = message
        self.field = field


class _ExternalResolver(Resolver):
    """Successor supplied by the client per step; rejects unresolved steps."""

    def resolve(self, session, successors):
        raise ApiException(
            422, "successor-required", "external resolver needs an explicit successor"
        )


class _Entry:
    def __init__(self, session: SynthesisSession):
        self.session = session
        self.lock = threading.Lock()


def create_app(frontend_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="tlt-synth steering service")
    sessions: dict[str, _Entry] = {}

    @app.exception_handler(ApiException)
    async def _api_error(_req: Request, exc: ApiException):
        body = {"code": exc.code, "message": exc.message}
        if exc.field:
            body["field"] = exc.field
        return JSONResponse(status_code=exc.status, content=body)

    @app.exception_handler(RequestValidationError)
    async def _validation_error(_req: Request, exc: RequestValidationError):
        first = exc.errors()[0]
        field = ".".join(str(p) for p in first.get("loc", []) if p != "body")
        return JSONResponse(
            status_code=422,
            content={"code": "validation", "message": first.get("msg", "invalid"),
                     "field": field or None},
        )

    def entry_of(session_id: str) -> _Entry:
        entry = sessions.get(session_id)
        if entry is None:
            raise ApiException(404, "unknown-session", f"no session {session_id}")
        return entry

    def build_view(session_id: str, session: SynthesisSession) -> StepView:
        cts = session.cts
        x = session.prefix[-1]
        if session.status is SessionStatus.ACTIVE:
            feasible = session.synth_step()
        else:
            feasible = frozenset()
        suggested = (
            sorted(session.progress_filter(feasible)) if feasible else []
        )
        geometry = cts.cell_geometry
        coords = None
        vectors = [None] * cts.n_inputs
        if geometry is not None:
            coords = list(geometry.cell_center(x)) if x != geometry.out_state else None
            vectors = [list(v) for v in geometry.input_vectors]
        active = session._last_control.active if session._last_control else frozenset()
        return StepView(
            session_id=session_id,
            k=len(session.prefix) - 1,
            status=session.status.value,
            formula=ltl.format_ltl(session.formula),
            state=StateView(id=x, labels=sorted(cts.labels[x]), coords=coords),
            inputs=[
                FeasibleInput(index=u, name=cts.input_names[u], vector=vectors[u])
                for u in range(cts.n_inputs)
            ],
            feasible=[
                FeasibleInput(index=u, name=cts.input_names[u], vector=vectors[u])
                for u in sorted(feasible)
            ],
            suggested=suggested,
            tlt=TltSnapshot(
                active=sorted(active),
                membership={n.id: (x in n.set_) for n in iter_set_nodes(session.root)},
            ),
            history=[HistoryEntry(**r.to_json()) for r in session.history],
        )

    @app.post("/parse", response_model=ParseResponse)
    def parse(req: ParseRequest):
        try:
            f = ltl.parse_ltl(req.formula)
        except ltl.LtlSyntaxError as exc:
            return ParseResponse(ok=False, offset=exc.offset, expected=exc.expected)
        return ParseResponse(ok=True, formula=ltl.format_ltl(f))

    @app.post("/sessions", response_model=SessionCreated, status_code=201)
    def create_session(req: CreateSessionRequest):
        try:
            formula = ltl.parse_ltl(req.formula)
        except ltl.LtlSyntaxError as exc:
            raise ApiException(422, "parse-error", str(exc), field="formula")
        if req.system is not None:
            try:
                cts = system_from_dict(req.system)
            except (KeyError, ValueError) as exc:
                raise ApiException(422, "bad-system", str(exc), field="system")
            if not isinstance(cts, ControlledTransitionSystem):
                raise ApiException(
                    422, "bad-system", "sessions need a controlled system", field="system"
                )
        else:
            try:
                spec = LinearSystemSpec.from_dict(req.linear)
                samples = req.input_samples or [3] * len(spec.b[0])
                cts = abstract_linear(spec, GridSpec(tuple(req.grid), tuple(samples)))
            except (KeyError, ValueError) as exc:
                raise ApiException(422, "bad-system", str(exc), field="linear")
        x0 = _resolve_x0(cts, req.x0)
        if req.resolver.kind == "external":
            resolver: Resolver = _ExternalResolver()
        else:
            resolver = make_resolver(
                req.resolver.kind, seed=req.resolver.seed, script=req.resolver.script
            )
        session = SynthesisSession(cts, formula, resolver, x0)
        if session.prefix[0] not in session.root.set_:
            raise ApiException(
                409, "infeasible-initial-state",
                "the initial state lies outside the tree root (no feasible input exists)",
            )
        session_id = secrets.token_hex(8)
        sessions[session_id] = _Entry(session)
        return SessionCreated(session_id=session_id, step=build_view(session_id, session))

    def _resolve_x0(cts: ControlledTransitionSystem, x0) -> int:
        if x0 is None:
            if cts.initial.is_empty():
                raise ApiException(422, "validation", "x0 required", field="x0")
            return next(iter(cts.initial))
        if isinstance(x0, int):
            if not 0 <= x0 < cts.n_states:
                raise ApiException(422, "validation", "x0 out of range", field="x0")
            return x0
        if cts.cell_geometry is None:
            raise ApiException(
                422, "validation", "coordinate x0 needs a grid system", field="x0"
            )
        cell = cts.cell_geometry.cell_of_point(list(x0))
        if cell == cts.cell_geometry.out_state:
            raise ApiException(422, "validation", "x0 outside the domain", field="x0")
        return cell

    @app.get("/sessions/{session_id}", response_model=StepView)
    def get_session(session_id: str):
        entry = entry_of(session_id)
        with entry.lock:
            return build_view(session_id, entry.session)

    @app.post("/sessions/{session_id}/step", response_model=StepView)
    def step(session_id: str, req: StepRequest):
        entry = entry_of(session_id)
        with entry.lock:
            session = entry.session
            successor = req.successor
            if successor is not None and not isinstance(session.resolver, _ExternalResolver):
                successor = None  # only the external debug resolver honors it
            try:
                session.apply_input(req.input, successor=successor)
            except InputNotFeasible as exc:
                raise ApiException(409, "input-not-feasible", str(exc), field="input")
            except SessionNotActive as exc:
                raise ApiException(409, "session-terminal", str(exc))
            except ValueError as exc:
                raise ApiException(422, "validation", str(exc), field="successor")
            return build_view(session_id, session)

    @app.post("/sessions/{session_id}/fork", response_model=SessionCreated)
    def fork(session_id: str):
        entry = entry_of(session_id)
        with entry.lock:
            clone = entry.session.fork()
        new_id = secrets.token_hex(8)
        sessions[new_id] = _Entry(clone)
        return SessionCreated(session_id=new_id, step=build_view(new_id, clone))

    @app.post("/sessions/{session_id}/spec", response_model=StepView)
    def update_spec(session_id: str, req: SpecUpdateRequest):
        entry = entry_of(session_id)
        with entry.lock:
            session = entry.session
            try:
                formula = ltl.parse_ltl(req.formula)
            except ltl.LtlSyntaxError as exc:
                raise ApiException(422, "parse-error", str(exc), field="formula")
            try:
                session.update_spec(formula)
            except PrefixInfeasibleUnderNewSpec as exc:
                raise ApiException(409, "prefix-infeasible", str(exc))
            except SessionNotActive as exc:
                raise ApiException(409, "session-terminal", str(exc))
            return build_view(session_id, session)

    @app.get("/sessions/{session_id}/tlt")
    def get_tlt(session_id: str):
        entry = entry_of(session_id)
        with entry.lock:
            session = entry.session
            x = session.prefix[-1]
            dump = tree_to_json(session.root)
            dump["membership"] = {
                n.id: (x in n.set_) for n in iter_set_nodes(session.root)
            }
            return dump

    @app.get("/sessions/{session_id}/trace")
    def get_trace(session_id: str):
        entry = entry_of(session_id)
        with entry.lock:
            return {"records": [r.to_json() for r in entry.session.history]}

    _mount_frontend(app, frontend_dir)
    return app


def _mount_frontend(app: FastAPI, frontend_dir: str | None) -> None:
    root = Path(frontend_dir) if frontend_dir else Path(__file__).resolve().parents[3] / "frontend" / "dist"
    if root.is_dir():
        app.mount("/ui", StaticFiles(directory=str(root), html=True), name="ui")

        @app.get("/", include_in_schema=False)
        def index():
            return HTMLResponse('<meta http-equiv="refresh" content="0; url=/ui/">')
    else:

        @app.get("/", include_in_schema=False)
        def index_missing():
            return HTMLResponse(
                "<h1>tlt-synth steering service</h1><p>API is up; the cockpit UI "
                "bundle is not built (see frontend/README).</p>"
            )

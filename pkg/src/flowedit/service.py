"""HTTP service: sessions, edits, metrics, and smoke-simulation previews.

Sessions hold one vector field each and an edit history. Mutating
endpoints are serialized per session and protected by an optimistic
version token: a request carrying a stale version gets 409. Binary
payloads (.vf2 fields, PGM sketches) travel base64-encoded inside JSON
envelopes; density frames are served as raw PGM.

With a persistence directory configured, the initial field and the edit
log are written through, and sessions are recovered on restart by
replaying the log (edits are deterministic, so replay reproduces the
current field bitwise).
"""

from __future__ import annotations

import base64
import hashlib
import json
import threading
import time
import uuid
from concurrent.futures import ThreadPoolExecutor
from concurrent.futures import TimeoutError as FutureTimeout
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import metrics as metrics_mod
from .fields import (
    DegenerateField,
    DimensionMismatch,
    FieldError,
    InvalidField,
    Rect,
    RegionTooSmall,
    ScalarField,
    VectorField,
)
from .hhd import COMPONENT_NAMES, ComponentMask, EditRequest, edit_region
from .io import field_from_bytes, field_to_bytes, pgm_from_bytes, pgm_to_bytes
from .poisson import NotConverged, SolveOptions
from .sim import Inflow, SmokeState, step_smoke
from .sketch import EmptySketch, SketchImage, sketch_to_field_baseline

MAX_SIM_STEPS = 2000


def baseline_provider(sketch: SketchImage | None, strokes) -> VectorField:
    return sketch_to_field_baseline(sketch, strokes=strokes)


PROVIDERS = {"baseline": baseline_provider}


def register_provider(name: str, fn) -> None:
    """Register a sketch -> field generator under a provider name."""
    PROVIDERS[name] = fn


@dataclass(frozen=True)
class ServiceConfig:
    persist_dir: Path | None = None
    session_ttl: float | None = None
    provider: str = "baseline"
    provider_timeout: float = 60.0
    tolerance: float = 1e-10

    def solve_options(self) -> SolveOptions:
        return SolveOptions(tolerance=self.tolerance)


class Session:
    def __init__(self, sid: str, initial: VectorField, sketch: SketchImage | None = None):
        self.id = sid
        self.initial = initial
        self.current = initial
        self.sketch = sketch
        self.version = 0
        self.history: list[tuple[EditRequest | None, str]] = []
        self.snapshots: list[VectorField] = []
        self.frames: list[ScalarField] = []
        self.frame_cs: list[float] = []
        self.lock = threading.Lock()
        self.last_access = time.monotonic()

    def touch(self) -> None:
        self.last_access = time.monotonic()


def field_hash(f: VectorField) -> str:
    return hashlib.sha256(field_to_bytes(f)).hexdigest()


class SessionStore:
    """In-memory session registry with optional directory persistence."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self.sessions: dict[str, Session] = {}
        self._lock = threading.Lock()
        if config.persist_dir is not None:
            self.root = Path(config.persist_dir) / "sessions"
            self.root.mkdir(parents=True, exist_ok=True)
            self._recover()
        else:
            self.root = None

    # -- persistence ---------------------------------------------------
    def _session_dir(self, sid: str) -> Path | None:
        return None if self.root is None else self.root / sid

    def _recover(self) -> None:
        for sdir in sorted(self.root.iterdir()):
            initial_path = sdir / "initial.vf2"
            if not initial_path.is_file():
                continue
            session = Session(sdir.name, field_from_bytes(initial_path.read_bytes()))
            log_path = sdir / "log.ndjson"
            if log_path.is_file():
                for line in log_path.read_text(encoding="utf-8").splitlines():
                    entry = json.loads(line)
                    if entry["op"] == "edit":
                        rect = Rect(*entry["rect"])
                        mask = ComponentMask.from_names(entry["keep"])
                        self.apply_edit(session, EditRequest(rect, mask), persist=False)
                    elif entry["op"] == "undo":
                        self.apply_undo(session, persist=False)
            self.sessions[session.id] = session

    def _append_log(self, session: Session, entry: dict) -> None:
        sdir = self._session_dir(session.id)
        if sdir is None:
            return
        with (sdir / "log.ndjson").open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(entry) + "\n")

    # -- lifecycle -----------------------------------------------------
    def create(self, initial: VectorField, sketch: SketchImage | None = None) -> Session:
        session = Session(uuid.uuid4().hex, initial, sketch)
        with self._lock:
            self.sessions[session.id] = session
        sdir = self._session_dir(session.id)
        if sdir is not None:
            sdir.mkdir(parents=True, exist_ok=True)
            (sdir / "initial.vf2").write_bytes(field_to_bytes(initial))
        return session

    def get(self, sid: str) -> Session:
        with self._lock:
            session = self.sessions.get(sid)
            if session is not None and self.config.session_ttl is not None:
                if time.monotonic() - session.last_access > self.config.session_ttl:
                    del self.sessions[sid]
                    session = None
            if session is None:
                raise HTTPException(404, f"unknown session {sid!r}")
            session.touch()
            return session

    # -- operations (call with session.lock held) ----------------------
    def apply_edit(self, session: Session, request: EditRequest, persist: bool = True) -> None:
        edited = edit_region(session.current, request.region, request.mask,
                             self.config.solve_options())
        session.snapshots.append(session.current)
        session.current = edited
        session.history.append((request, field_hash(edited)))
        session.version += 1
        if persist:
            r = request.region
            self._append_log(session, {"op": "edit",
                                       "rect": [r.x0, r.y0, r.x1, r.y1],
                                       "keep": list(request.mask.names())})

    def apply_undo(self, session: Session, persist: bool = True) -> None:
        if not session.snapshots:
            raise HTTPException(409, "nothing to undo")
        session.current = session.snapshots.pop()
        session.history.pop()
        session.version += 1
        if persist:
            self._append_log(session, {"op": "undo"})

    def replay(self, session: Session) -> VectorField:
        """Re-run the session's history from its initial field."""
        current = session.initial
        opts = self.config.solve_options()
        for request, _ in session.history:
            current = edit_region(current, request.region, request.mask, opts)
        return current


# -- request/response bodies -------------------------------------------

class RectBody(BaseModel):
    x0: int
    y0: int
    x1: int
    y1: int


class CreateSessionBody(BaseModel):
    field_b64: str | None = None
    sketch_pgm_b64: str | None = None
    strokes: list[list[tuple[float, float]]] | None = None


class EditBody(BaseModel):
    rect: RectBody
    keep: list[str]
    version: int


class MetricsBody(BaseModel):
    a_b64: str
    b_b64: str
    metrics: list[str] | None = None


class InflowBody(BaseModel):
    cx: float
    cy: float
    radius: float
    angle: float
    speed: float
    density: float = 1.0


class SimulateBody(BaseModel):
    steps: int
    dt: float = 0.5
    inflows: list[InflowBody] = Field(default_factory=list)


def _b64_field(f: VectorField) -> str:
    return base64.b64encode(field_to_bytes(f)).decode("ascii")


def _decode_field(b64: str) -> VectorField:
    try:
        return field_from_bytes(base64.b64decode(b64, validate=True))
    except FieldError:
        raise
    except Exception as exc:
        raise HTTPException(400, f"undecodable field payload: {exc}") from exc


def _field_payload(session: Session) -> dict:
    return {
        "session_id": session.id,
        "version": session.version,
        "width": session.current.width,
        "height": session.current.height,
        "field_b64": _b64_field(session.current),
        "field_sha256": field_hash(session.current),
    }


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig()
    app = FastAPI(title="flowedit service")
    # the browser editor is served from its own origin during development
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"])
    store = SessionStore(config)
    app.state.store = store
    executor = ThreadPoolExecutor(max_workers=4)

    @app.exception_handler(FieldError)
    def _field_error(request, exc: FieldError):  # noqa: ANN001
        status = 422
        if isinstance(exc, (RegionTooSmall, EmptySketch, DimensionMismatch,
                            InvalidField, DegenerateField)):
            status = 422
        elif isinstance(exc, NotConverged):
            status = 500
        else:
            status = 400  # file-format errors on upload
        return JSONResponse(status_code=status,
                            content={"error": type(exc).__name__, "detail": str(exc)})

    @app.post("/sessions")
    def create_session(body: CreateSessionBody):
        given = [x is not None for x in (body.field_b64, body.sketch_pgm_b64, body.strokes)]
        if sum(given) != 1:
            raise HTTPException(400, "provide exactly one of field_b64, sketch_pgm_b64, strokes")
        sketch = None
        if body.field_b64 is not None:
            initial = _decode_field(body.field_b64)
        else:
            strokes = None
            if body.sketch_pgm_b64 is not None:
                try:
                    raw = base64.b64decode(body.sketch_pgm_b64, validate=True)
                except Exception as exc:
                    raise HTTPException(400, f"undecodable sketch payload: {exc}") from exc
                sketch = SketchImage(pgm_from_bytes(raw))
            else:
                strokes = [np.asarray(s, dtype=np.float64) for s in body.strokes]
                if any(len(s) < 2 for s in strokes):
                    raise HTTPException(400, "each stroke needs at least two points")
                from .sketch import strokes_to_sketch
                sketch = strokes_to_sketch(strokes)
            provider = PROVIDERS.get(config.provider)
            if provider is None:
                raise HTTPException(500, f"unknown provider {config.provider!r}")
            future = executor.submit(provider, sketch, strokes)
            try:
                initial = future.result(timeout=config.provider_timeout)
            except FutureTimeout:
                raise HTTPException(504, "field generation timed out") from None
        session = store.create(initial, sketch)
        return _field_payload(session)

    @app.get("/sessions/{sid}/field")
    def get_field(sid: str):
        session = store.get(sid)
        with session.lock:
            return _field_payload(session)

    @app.post("/sessions/{sid}/edits")
    def post_edit(sid: str, body: EditBody):
        session = store.get(sid)
        unknown = set(body.keep) - set(COMPONENT_NAMES)
        if unknown or not body.keep:
            raise HTTPException(422, f"keep must be a non-empty subset of {COMPONENT_NAMES}")
        with session.lock:
            if body.version != session.version:
                raise HTTPException(
                    409, f"stale version {body.version}, current is {session.version}")
            rect = Rect(body.rect.x0, body.rect.y0, body.rect.x1, body.rect.y1)
            request = EditRequest(rect, ComponentMask.from_names(body.keep))
            store.apply_edit(session, request)
            region_data = session.current.data[rect.y0:rect.y1, rect.x0:rect.x1]
            region = VectorField(region_data)
            payload = _field_payload(session)
            payload["metrics"] = {"cme": metrics_mod.cme(region),
                                  "cs": metrics_mod.cs(region)}
            return payload

    @app.post("/sessions/{sid}/undo")
    def post_undo(sid: str):
        session = store.get(sid)
        with session.lock:
            store.apply_undo(session)
            return _field_payload(session)

    @app.post("/metrics")
    def post_metrics(body: MetricsBody):
        a = _decode_field(body.a_b64)
        b = _decode_field(body.b_b64)
        which = tuple(body.metrics) if body.metrics else None
        try:
            report = metrics_mod.evaluate(a, b, which, config.solve_options())
        except ValueError as exc:
            raise HTTPException(422, str(exc)) from exc
        return report.as_dict()

    @app.post("/sessions/{sid}/simulate")
    def post_simulate(sid: str, body: SimulateBody):
        session = store.get(sid)
        if body.steps < 0 or body.steps > MAX_SIM_STEPS:
            raise HTTPException(422, f"steps must be in [0, {MAX_SIM_STEPS}]")
        if body.dt <= 0:
            raise HTTPException(422, "dt must be positive")
        try:
            inflows = [Inflow(center=(i.cx, i.cy), radius=i.radius, angle=i.angle,
                              speed=i.speed, density=i.density) for i in body.inflows]
        except ValueError as exc:
            raise HTTPException(422, str(exc)) from exc
        with session.lock:
            force = session.current
            state = SmokeState.zeros(force.width, force.height)
            frames: list[ScalarField] = []
            frame_cs: list[float] = []
            opts = config.solve_options()
            for _ in range(body.steps):
                state = step_smoke(state, force, body.dt, inflows, opts)
                frames.append(state.density)
                frame_cs.append(metrics_mod.cs(state.velocity))
            session.frames = frames
            session.frame_cs = frame_cs
            return {"session_id": session.id, "frames": len(frames), "cs": frame_cs}

    @app.get("/sessions/{sid}/frames/{index}")
    def get_frame(sid: str, index: int):
        session = store.get(sid)
        with session.lock:
            if not (0 <= index < len(session.frames)):
                raise HTTPException(404, f"no frame {index}")
            density = session.frames[index].data
        img = np.clip(density, 0.0, 1.0)
        img = np.round(img * 255.0).astype(np.uint8)
        return Response(content=pgm_to_bytes(img),
                        media_type="image/x-portable-graymap")

    return app

"""Session-oriented HTTP API over the simulation engine.

Each session owns one Simulation plus an append-only frame log; every
tick or mutation on a session serializes through the session lock, so the
log is always consistent with some serial order of operations. Mutations
are logged with the tick they precede, which makes a session's history
replayable headlessly.

Configuration (flags on ``modalsim serve`` or environment variables):
  MODALSIM_HOST / MODALSIM_PORT    listen address (default 127.0.0.1:8477)
  MODALSIM_BUNDLE_DIR              directory of extra bundle JSON files
  MODALSIM_UI_DIR                  static dashboard directory for /ui
  MODALSIM_SESSION_TIMEOUT         idle expiry in seconds (default 1800)
"""

from __future__ import annotations

import json
import os
import threading
import time
import uuid
from importlib import resources
from pathlib import Path
from typing import Literal

from fastapi import FastAPI, HTTPException, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .calibration import CalibrationBundle, CalibrationError
from .engine import Simulation, SimulationConfig
from .metrics import MetricsFrame
from .model import Criterion, Mode

DEFAULT_IDLE_TIMEOUT_S = 1800.0
MAX_TICKS_PER_SECOND = 100.0
MAX_STEP = 100_000


def _error(status: int, code: str, message: str, field: str | None = None):
    detail = {"code": code, "message": message}
    if field is not None:
        detail["field"] = field
    return HTTPException(status_code=status, detail=detail)


class ConfigOverrides(BaseModel):
    n_agents: int | None = Field(default=None, ge=1)
    seed: int | None = Field(default=None, ge=0)
    history_capacity: int | None = Field(default=None, ge=1)
    disruption_prob: float | None = Field(default=None, ge=0.0, le=1.0)
    priority_noise: float | None = Field(default=None, ge=0.0)
    biases_on: bool | None = None
    habits_on: bool | None = None

    def build(self) -> SimulationConfig:
        base = SimulationConfig()
        values = {k: v for k, v in self.model_dump().items() if v is not None}
        return SimulationConfig(**{**base.to_dict(), **values})


class CreateSessionRequest(BaseModel):
    bundle: str | dict = "default"
    config: ConfigOverrides = Field(default_factory=ConfigOverrides)
    client_token: str | None = None


class StepRequest(BaseModel):
    n: int = Field(default=1, ge=1)


class MutationRequest(BaseModel):
    command: Literal["set-env", "set-priority", "reset-habits", "set-flags"]
    mode: str | None = None
    criterion: str | None = None
    value: float | None = None
    target_mean: float | None = None
    biases: bool | None = None
    habits: bool | None = None


class AutoRunRequest(BaseModel):
    running: bool
    ticks_per_second: float = Field(default=10.0)


class Session:
    def __init__(self, session_id: str, sim: Simulation):
        self.id = session_id
        self.sim = sim
        self.frames: list[MetricsFrame] = []
        self.mutation_log: list[dict] = []
        self.lock = threading.RLock()
        self.created_at = time.time()
        self.last_active = self.created_at
        self.auto_running = False
        self.ticks_per_second = 10.0
        self._auto_thread: threading.Thread | None = None

    def touch(self) -> None:
        self.last_active = time.time()

    def tick_n(self, n: int) -> list[MetricsFrame]:
        with self.lock:
            new = [self.sim.tick() for _ in range(n)]
            self.frames.extend(new)
        return new

    # -- auto-run -----------------------------------------------------------

    def set_auto(self, running: bool, tps: float) -> None:
        with self.lock:
            self.ticks_per_second = tps
            if running and not self.auto_running:
                self.auto_running = True
                self._auto_thread = threading.Thread(target=self._auto_loop, daemon=True)
                self._auto_thread.start()
            elif not running:
                self.auto_running = False

    def _auto_loop(self) -> None:
        next_at = time.monotonic()
        while self.auto_running:
            with self.lock:
                if not self.auto_running:
                    break
                self.frames.append(self.sim.tick())
                period = 1.0 / self.ticks_per_second
            next_at += period
            delay = next_at - time.monotonic()
            if delay > 0:
                time.sleep(delay)
            else:
                next_at = time.monotonic()

    def stop(self) -> None:
        self.auto_running = False


class BundleRegistry:
    def __init__(self, bundle_dir: str | None):
        self.bundle_dir = Path(bundle_dir) if bundle_dir else None

    def ids(self) -> list[str]:
        names = ["default"]
        if self.bundle_dir and self.bundle_dir.is_dir():
            names.extend(sorted(p.stem for p in self.bundle_dir.glob("*.json")))
        return names

    def load(self, ref: str | dict) -> CalibrationBundle:
        if isinstance(ref, dict):
            bundle = CalibrationBundle.from_dict(ref)
            bundle.validate()
            return bundle
        if ref == "default":
            with resources.files("modalsim").joinpath("data", "default_bundle.json").open(
                    "r", encoding="utf-8") as fh:
                bundle = CalibrationBundle.from_dict(json.load(fh))
            bundle.validate()
            return bundle
        if self.bundle_dir:
            path = self.bundle_dir / f"{ref}.json"
            if path.is_file():
                return CalibrationBundle.load(path)
        raise _error(404, "bundle_not_found", f"no bundle named {ref!r}", field="bundle")


class SessionManager:
    def __init__(self, idle_timeout_s: float = DEFAULT_IDLE_TIMEOUT_S):
        self.sessions: dict[str, Session] = {}
        self.by_token: dict[str, str] = {}
        self.idle_timeout_s = idle_timeout_s
        self.lock = threading.Lock()

    def create(self, sim: Simulation, client_token: str | None) -> tuple[Session, bool]:
        with self.lock:
            if client_token and client_token in self.by_token:
                existing = self.sessions.get(self.by_token[client_token])
                if existing is not None:
                    return existing, False
            session = Session(uuid.uuid4().hex, sim)
            self.sessions[session.id] = session
            if client_token:
                self.by_token[client_token] = session.id
            return session, True

    def get(self, session_id: str) -> Session:
        with self.lock:
            session = self.sessions.get(session_id)
            if session is not None and time.time() - session.last_active > self.idle_timeout_s:
                self._drop(session)
                session = None
        if session is None:
            raise _error(404, "session_not_found", f"no session {session_id!r}")
        session.touch()
        return session

    def delete(self, session_id: str) -> None:
        with self.lock:
            session = self.sessions.get(session_id)
            if session is None:
                raise _error(404, "session_not_found", f"no session {session_id!r}")
            self._drop(session)

    def _drop(self, session: Session) -> None:
        session.stop()
        self.sessions.pop(session.id, None)
        self.by_token = {t: s for t, s in self.by_token.items() if s != session.id}

    def sweep_expired(self) -> None:
        now = time.time()
        with self.lock:
            for session in list(self.sessions.values()):
                if now - session.last_active > self.idle_timeout_s:
                    self._drop(session)


def _parse_mode(label: str | None) -> Mode:
    if label is None:
        raise _error(422, "missing_field", "mode is required for this command", "mode")
    try:
        return Mode.from_label(label)
    except ValueError as exc:
        raise _error(422, "invalid_value", str(exc), "mode") from None


def _parse_criterion(label: str | None) -> Criterion:
    if label is None:
        raise _error(422, "missing_field", "criterion is required for this command", "criterion")
    try:
        return Criterion.from_label(label)
    except ValueError as exc:
        raise _error(422, "invalid_value", str(exc), "criterion") from None


def create_app(bundle_dir: str | None = None, ui_dir: str | None = None,
               idle_timeout_s: float | None = None) -> FastAPI:
    app = FastAPI(title="modalsim", version="0.1.0")
    timeout = idle_timeout_s if idle_timeout_s is not None else float(
        os.environ.get("MODALSIM_SESSION_TIMEOUT", DEFAULT_IDLE_TIMEOUT_S))
    manager = SessionManager(idle_timeout_s=timeout)
    registry = BundleRegistry(bundle_dir or os.environ.get("MODALSIM_BUNDLE_DIR"))
    app.state.manager = manager
    app.state.registry = registry

    @app.exception_handler(RequestValidationError)
    async def on_validation_error(request: Request, exc: RequestValidationError):
        first = exc.errors()[0] if exc.errors() else {}
        field = ".".join(str(p) for p in first.get("loc", []) if p != "body")
        return JSONResponse(status_code=422, content={
            "code": "validation_error",
            "message": first.get("msg", "invalid request"),
            "field": field or None,
        })

    @app.exception_handler(HTTPException)
    async def on_http_error(request: Request, exc: HTTPException):
        detail = exc.detail if isinstance(exc.detail, dict) else {
            "code": "error", "message": str(exc.detail)}
        return JSONResponse(status_code=exc.status_code, content=detail)

    @app.get("/health")
    def health():
        return {"status": "ok", "sessions": len(manager.sessions)}

    @app.get("/bundles")
    def list_bundles():
        return {"bundles": registry.ids()}

    @app.post("/sessions", status_code=201)
    def create_session(req: CreateSessionRequest):
        manager.sweep_expired()
        bundle = registry.load(req.bundle)
        try:
            config = req.config.build()
            sim = Simulation(bundle, config)
        except (ValueError, CalibrationError) as exc:
            raise _error(422, "invalid_config", str(exc), "config") from None
        session, created = manager.create(sim, req.client_token)
        with session.lock:
            snapshot = session.sim.snapshot()
        return {
            "session_id": session.id,
            "created": created,
            "tick": snapshot["tick"],
            "snapshot": snapshot,
        }

    @app.post("/sessions/{session_id}/step")
    def step(session_id: str, req: StepRequest):
        session = manager.get(session_id)
        if req.n > MAX_STEP:
            raise _error(422, "invalid_value", f"n must be <= {MAX_STEP}", "n")
        frames = session.tick_n(req.n)
        return {"frames": [f.to_dict() for f in frames], "tick": session.sim.tick_count}

    @app.post("/sessions/{session_id}/mutations")
    def mutate(session_id: str, req: MutationRequest):
        session = manager.get(session_id)
        with session.lock:
            sim = session.sim
            applied: dict
            if req.command == "set-env":
                mode = _parse_mode(req.mode)
                criterion = _parse_criterion(req.criterion)
                if req.value is None:
                    raise _error(422, "missing_field", "value is required", "value")
                try:
                    sim.set_objective(mode, criterion, req.value)
                except ValueError as exc:
                    raise _error(422, "invalid_value", str(exc), "value") from None
                applied = {"mode": mode.label, "criterion": criterion.label,
                           "value": req.value}
            elif req.command == "set-priority":
                criterion = _parse_criterion(req.criterion)
                if req.target_mean is None:
                    raise _error(422, "missing_field", "target_mean is required",
                                 "target_mean")
                try:
                    sim.shift_priority(criterion, req.target_mean)
                except ValueError as exc:
                    raise _error(422, "invalid_value", str(exc), "target_mean") from None
                applied = {"criterion": criterion.label, "target_mean": req.target_mean}
            elif req.command == "reset-habits":
                sim.reset_habits()
                applied = {}
            else:  # set-flags
                if req.biases is None or req.habits is None:
                    raise _error(422, "missing_field",
                                 "set-flags requires biases and habits", "biases")
                sim.set_flags(req.biases, req.habits)
                applied = {"biases": sim.biases_on, "habits": sim.habits_on}
            entry = {"tick": sim.tick_count, "command": req.command, "applied": applied}
            session.mutation_log.append(entry)
        return {"ok": True, **entry}

    @app.get("/sessions/{session_id}/metrics")
    def get_metrics(session_id: str,
                    from_tick: int = Query(0, alias="from"),
                    to_tick: int | None = Query(None, alias="to")):
        session = manager.get(session_id)
        if from_tick < 0:
            raise _error(422, "invalid_value", "from_tick must be >= 0", "from_tick")
        frames = session.frames
        hi = session.sim.tick_count if to_tick is None else to_tick
        if hi < from_tick:
            return {"frames": [], "tick": session.sim.tick_count}
        lo_idx = max(from_tick - 1, 0)
        selected = [f for f in frames[lo_idx:hi] if from_tick <= f.tick <= hi]
        return {"frames": [f.to_dict() for f in selected], "tick": session.sim.tick_count}

    @app.get("/sessions/{session_id}/mutations")
    def list_mutations(session_id: str):
        session = manager.get(session_id)
        return {"mutations": list(session.mutation_log)}

    @app.get("/sessions/{session_id}/snapshot")
    def get_snapshot(session_id: str):
        session = manager.get(session_id)
        with session.lock:
            return session.sim.snapshot()

    @app.post("/sessions/{session_id}/run")
    def auto_run(session_id: str, req: AutoRunRequest):
        session = manager.get(session_id)
        if req.running and not (0.0 < req.ticks_per_second <= MAX_TICKS_PER_SECOND):
            raise _error(422, "invalid_value",
                         f"ticks_per_second must lie in (0, {MAX_TICKS_PER_SECOND}]",
                         "ticks_per_second")
        session.set_auto(req.running, req.ticks_per_second)
        return {"running": session.auto_running,
                "ticks_per_second": session.ticks_per_second}

    @app.delete("/sessions/{session_id}", status_code=204)
    def delete_session(session_id: str):
        manager.delete(session_id)

    ui = ui_dir or os.environ.get("MODALSIM_UI_DIR")
    if ui and Path(ui).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=ui, html=True), name="ui")

    return app

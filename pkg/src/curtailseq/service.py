"""Live trial monitoring: sessions, per-patient decisions, persistence, HTTP API.

Each session is an append-only log of events (created, outcome recorded,
outcome undone, finalized) stored one JSON line at a time; replaying the
log reconstructs the session exactly.  Mutations carry an optional
expected sequence number for optimistic concurrency, and mutations on a
given session are serialized by a per-session lock.
"""

import json
import os
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from pydantic import BaseModel

from .design import (
    Design,
    DesignSearchError,
    Hypotheses,
    StageDecision,
    classify_state,
    search_design,
)
from .distribution import build_distribution
from .estimation import AdjustMode, Ordering, bias_adjusted_estimate, estimate_report
from .intervals import METHODS, interval_for

STATUS_ENROLLING = "enrolling"
STATUS_STOPPED_EFFICACY = "stopped_efficacy"
STATUS_STOPPED_FUTILITY = "stopped_futility"
STATUS_FINALIZED = "finalized"


class UnknownSessionError(KeyError):
    """No session with the requested id."""


class ConflictError(RuntimeError):
    """Mutation conflicts with the session's current state or version."""


@dataclass(frozen=True)
class EventRecord:
    seq: int
    kind: str  # created | outcome_recorded | outcome_undone | finalized
    payload: dict
    timestamp: str

    def to_dict(self) -> dict:
        return {"seq": self.seq, "kind": self.kind,
                "payload": self.payload, "timestamp": self.timestamp}

    @classmethod
    def from_dict(cls, doc: dict) -> "EventRecord":
        return cls(seq=int(doc["seq"]), kind=doc["kind"],
                   payload=doc["payload"], timestamp=doc["timestamp"])


@dataclass
class TrialSession:
    id: str
    hypotheses: Hypotheses
    design: Design
    outcomes: list[bool] = field(default_factory=list)
    status: str = STATUS_ENROLLING
    seq: int = 0
    created_at: str = ""
    updated_at: str = ""
    final_report: dict | None = None

    @property
    def responders(self) -> int:
        return sum(self.outcomes)

    @property
    def enrolled(self) -> int:
        return len(self.outcomes)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "hypotheses": self.hypotheses.to_dict(),
            "design": self.design.to_dict(),
            "outcomes": list(self.outcomes),
            "status": self.status,
            "seq": self.seq,
            "m": self.enrolled,
            "s": self.responders,
            "responders_needed": max(self.design.u - self.responders, 0),
            "created_at": self.created_at,
            "updated_at": self.updated_at,
            "final_report": self.final_report,
        }


def derive_status(design: Design, outcomes: list[bool]) -> str:
    """Status implied by the outcome sequence alone."""
    s = 0
    for k, responder in enumerate(outcomes, start=1):
        s += bool(responder)
        decision = classify_state(design, k, s)
        if decision is StageDecision.STOP_EFFICACY:
            if k != len(outcomes):
                raise ConflictError("outcome sequence extends past an efficacy stop")
            return STATUS_STOPPED_EFFICACY
        if decision is StageDecision.STOP_FUTILITY:
            if k != len(outcomes):
                raise ConflictError("outcome sequence extends past a futility stop")
            return STATUS_STOPPED_FUTILITY
    return STATUS_ENROLLING


def final_report(design: Design, m: int, s: int, alpha: float) -> dict:
    """Estimates and all five intervals at the terminal state (m, s)."""
    dist = build_distribution(design)
    report = estimate_report(dist, m, s, Ordering.STAGE_WISE, AdjustMode.PLUG_IN)
    estimates = report.to_dict()
    estimates["bias_adjusted_rootsolve"] = bias_adjusted_estimate(
        dist, m, s, AdjustMode.ROOT_SOLVE)
    intervals = {
        mth: interval_for(dist, mth, m, s, alpha).to_dict() for mth in METHODS
    }
    return {"m": m, "s": s, "estimates": estimates, "intervals": intervals}


def _utcnow() -> str:
    return datetime.now(timezone.utc).isoformat()


def _apply_event(session: TrialSession | None, event: EventRecord) -> TrialSession:
    """Fold one event into the session state; shared by live path and replay."""
    if event.kind == "created":
        payload = event.payload
        return TrialSession(
            id=payload["id"],
            hypotheses=Hypotheses(**{
                "p0": payload["hypotheses"]["p0"],
                "p1": payload["hypotheses"]["p1"],
                "alpha_nom": payload["hypotheses"]["alpha"],
                "beta_nom": payload["hypotheses"]["beta"],
            }),
            design=Design.from_dict(payload["design"]),
            seq=event.seq,
            created_at=event.timestamp,
            updated_at=event.timestamp,
        )
    if session is None:
        raise ValueError("event log does not start with a created event")
    if event.kind == "outcome_recorded":
        session.outcomes.append(bool(event.payload["responder"]))
    elif event.kind == "outcome_undone":
        session.outcomes.pop()
    elif event.kind == "finalized":
        session.final_report = event.payload["report"]
    else:
        raise ValueError(f"unknown event kind {event.kind!r}")
    if event.kind == "finalized":
        session.status = STATUS_FINALIZED
    else:
        session.status = derive_status(session.design, session.outcomes)
        if event.kind == "outcome_undone":
            session.final_report = None
    session.seq = event.seq
    session.updated_at = event.timestamp
    return session


def replay_events(events: list[EventRecord]) -> TrialSession:
    """Rebuild a session from its event log."""
    session: TrialSession | None = None
    for event in events:
        session = _apply_event(session, event)
    if session is None:
        raise ValueError("empty event log")
    return session


class SessionStore:
    """Persistent registry of monitored trials.

    Logs live under ``data_dir/sessions/<id>.jsonl``; a snapshot index at
    ``data_dir/index.json`` caches current states for quick listing.  With
    ``index_sync='eager'`` the index is rewritten on every mutation, with
    ``'lazy'`` only on :meth:`sync_index` (bulk workloads).
    """

    def __init__(self, data_dir: str | Path, index_sync: str = "eager"):
        if index_sync not in ("eager", "lazy"):
            raise ValueError("index_sync must be 'eager' or 'lazy'")
        self.data_dir = Path(data_dir)
        self.sessions_dir = self.data_dir / "sessions"
        self.sessions_dir.mkdir(parents=True, exist_ok=True)
        self.index_path = self.data_dir / "index.json"
        self.index_sync = index_sync
        self._sessions: dict[str, TrialSession] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()
        self._load()

    # -- loading / persistence ------------------------------------------

    def _load(self) -> None:
        for log_path in sorted(self.sessions_dir.glob("*.jsonl")):
            events = self._read_log(log_path)
            if not events:
                continue
            session = replay_events(events)
            self._sessions[session.id] = session
            self._locks[session.id] = threading.Lock()

    def _read_log(self, path: Path) -> list[EventRecord]:
        events = []
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if line:
                    events.append(EventRecord.from_dict(json.loads(line)))
        return events

    def _log_path(self, session_id: str) -> Path:
        return self.sessions_dir / f"{session_id}.jsonl"

    def _append_event(self, session_id: str, event: EventRecord) -> None:
        with open(self._log_path(session_id), "a") as fh:
            fh.write(json.dumps(event.to_dict()) + "\n")

    def sync_index(self) -> None:
        snapshot = {sid: s.to_dict() for sid, s in sorted(self._sessions.items())}
        tmp = self.index_path.with_suffix(".json.tmp")
        with open(tmp, "w") as fh:
            json.dump(snapshot, fh)
        os.replace(tmp, self.index_path)

    def _after_mutation(self) -> None:
        if self.index_sync == "eager":
            self.sync_index()

    # -- queries ---------------------------------------------------------

    def list_sessions(self) -> list[TrialSession]:
        with self._registry_lock:
            return sorted(self._sessions.values(), key=lambda s: s.created_at)

    def get(self, session_id: str) -> TrialSession:
        try:
            return self._sessions[session_id]
        except KeyError:
            raise UnknownSessionError(session_id) from None

    def events(self, session_id: str) -> list[EventRecord]:
        self.get(session_id)
        return self._read_log(self._log_path(session_id))

    def replay(self, session_id: str) -> TrialSession:
        """Rebuild the session from its on-disk log (ignores memory state)."""
        return replay_events(self.events(session_id))

    # -- mutations --------------------------------------------------------

    def create_session(self, hyp: Hypotheses) -> TrialSession:
        design = search_design(hyp).design
        session_id = uuid.uuid4().hex
        event = EventRecord(
            seq=1,
            kind="created",
            payload={"id": session_id, "hypotheses": hyp.to_dict(),
                     "design": design.to_dict()},
            timestamp=_utcnow(),
        )
        session = _apply_event(None, event)
        with self._registry_lock:
            self._sessions[session_id] = session
            self._locks[session_id] = threading.Lock()
        self._append_event(session_id, event)
        self._after_mutation()
        return session

    def _locked(self, session_id: str) -> threading.Lock:
        try:
            return self._locks[session_id]
        except KeyError:
            raise UnknownSessionError(session_id) from None

    def _check_seq(self, session: TrialSession, expected_seq: int | None) -> None:
        if expected_seq is not None and expected_seq != session.seq:
            raise ConflictError(
                f"version conflict: expected seq {expected_seq}, session at {session.seq}")

    def record_outcome(self, session_id: str, responder: bool,
                       expected_seq: int | None = None) -> tuple[dict, TrialSession]:
        """Append one patient outcome; returns the decision and the session.

        The decision message carries how many further responders the trial
        still needs for success.
        """
        with self._locked(session_id):
            session = self.get(session_id)
            self._check_seq(session, expected_seq)
            if session.status != STATUS_ENROLLING:
                raise ConflictError(f"session is {session.status}; undo before recording")
            k = session.enrolled + 1
            s = session.responders + bool(responder)
            decision = classify_state(session.design, k, s)
            event = EventRecord(
                seq=session.seq + 1,
                kind="outcome_recorded",
                payload={"responder": bool(responder), "decision": decision.value,
                         "m": k, "s": s,
                         "responders_needed": max(session.design.u - s, 0)},
                timestamp=_utcnow(),
            )
            _apply_event(session, event)
            self._append_event(session_id, event)
            self._after_mutation()
            return dict(event.payload), session

    def undo_outcome(self, session_id: str,
                     expected_seq: int | None = None) -> TrialSession:
        """Remove the last recorded outcome, possibly reopening a stop."""
        with self._locked(session_id):
            session = self.get(session_id)
            self._check_seq(session, expected_seq)
            if not session.outcomes:
                raise ConflictError("no outcomes to undo")
            event = EventRecord(seq=session.seq + 1, kind="outcome_undone",
                                payload={}, timestamp=_utcnow())
            _apply_event(session, event)
            self._append_event(session_id, event)
            self._after_mutation()
            return session

    def finalize(self, session_id: str,
                 expected_seq: int | None = None) -> dict:
        """Compute and persist the final report; idempotent once stopped."""
        with self._locked(session_id):
            session = self.get(session_id)
            if session.status == STATUS_FINALIZED:
                return session.final_report
            self._check_seq(session, expected_seq)
            if session.status == STATUS_ENROLLING:
                raise ConflictError("session is still enrolling; cannot finalize")
            report = final_report(session.design, session.enrolled,
                                  session.responders, session.hypotheses.alpha_nom)
            event = EventRecord(seq=session.seq + 1, kind="finalized",
                                payload={"report": report}, timestamp=_utcnow())
            _apply_event(session, event)
            self._append_event(session_id, event)
            self._after_mutation()
            return report


def boundaries_payload(design: Design) -> dict:
    """Threshold series for charting: stage axis, efficacy line, futility steps."""
    stages = list(range(1, design.K + 1))
    futility = [design.futility_bound(k) if design.futility_bound(k) >= 0 else None
                for k in stages]
    return {
        "u": design.u,
        "K": design.K,
        "k": stages,
        "efficacy": [design.u] * design.K,
        "futility": futility,
        "first_efficacy_stage": design.u,
        "first_futility_stage": design.first_futility_stage(),
    }


class CreateSessionBody(BaseModel):
    p0: float
    p1: float
    alpha: float = 0.025
    beta: float = 0.2


class OutcomeBody(BaseModel):
    responder: bool
    expected_seq: int | None = None


class FinalizeBody(BaseModel):
    expected_seq: int | None = None


def build_app(store: SessionStore):
    """FastAPI application over a session store."""
    from fastapi import FastAPI, Request
    from fastapi.exceptions import RequestValidationError
    from fastapi.middleware.cors import CORSMiddleware
    from fastapi.responses import JSONResponse

    app = FastAPI(title="curtailseq monitor")
    app.state.store = store
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"],
    )

    @app.exception_handler(RequestValidationError)
    async def malformed_body(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    @app.exception_handler(ValueError)
    async def invalid_value(request: Request, exc: ValueError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(DesignSearchError)
    async def infeasible_design(request: Request, exc: DesignSearchError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(UnknownSessionError)
    async def unknown_session(request: Request, exc: UnknownSessionError):
        return JSONResponse(status_code=404, content={"detail": f"unknown session {exc}"})

    @app.exception_handler(ConflictError)
    async def conflict(request: Request, exc: ConflictError):
        return JSONResponse(status_code=409, content={"detail": str(exc)})

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionBody):
        hyp = Hypotheses(body.p0, body.p1, body.alpha, body.beta)
        return store.create_session(hyp).to_dict()

    @app.get("/sessions")
    def list_sessions():
        return [s.to_dict() for s in store.list_sessions()]

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        return store.get(session_id).to_dict()

    @app.post("/sessions/{session_id}/outcomes")
    def record_outcome(session_id: str, body: OutcomeBody):
        decision, session = store.record_outcome(
            session_id, body.responder, body.expected_seq)
        return {"decision": decision, "session": session.to_dict()}

    @app.delete("/sessions/{session_id}/outcomes/last")
    def undo_outcome(session_id: str, expected_seq: int | None = None):
        return store.undo_outcome(session_id, expected_seq).to_dict()

    @app.post("/sessions/{session_id}/finalize")
    def finalize(session_id: str, body: FinalizeBody | None = None):
        expected = body.expected_seq if body else None
        report = store.finalize(session_id, expected)
        return {"report": report, "session": store.get(session_id).to_dict()}

    @app.get("/sessions/{session_id}/boundaries")
    def boundaries(session_id: str):
        return boundaries_payload(store.get(session_id).design)

    static_dir = os.environ.get("CURTAILSEQ_STATIC_DIR", "")
    if static_dir and Path(static_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="dashboard")
    return app


def run_server(host: str | None = None, port: int | None = None,
               data_dir: str | None = None) -> None:
    """Start the HTTP service; falls back to environment configuration."""
    import uvicorn

    host = host or os.environ.get("CURTAILSEQ_HOST", "127.0.0.1")
    port = port if port is not None else int(os.environ.get("CURTAILSEQ_PORT", "8000"))
    data_dir = data_dir or os.environ.get("CURTAILSEQ_DATA_DIR", "./trial-data")
    store = SessionStore(data_dir)
    uvicorn.run(build_app(store), host=host, port=port, log_level="info")

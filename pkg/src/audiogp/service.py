"""HTTP facade over the session engine with durable event-log persistence.

Sessions are event-sourced: every created/proposed/recorded/stopped event
is appended as one JSON line to a per-session log under the data directory,
plus one line in an index file. Replaying a log reconstructs the session
exactly (the engine is deterministic), which is how the store recovers
after a restart.

Mutating requests for one session are serialized by a per-session lock;
distinct sessions are independent.
"""

import json
import os
import threading
import uuid
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .errors import ConfigError, SessionStateError
from .session import Session, SessionConfig, Stimulus, replay_events

__all__ = ["SessionStore", "create_app", "main"]


class SessionStore:
    """Event-sourced session registry backed by append-only JSONL files."""

    def __init__(self, data_dir):
        self.root = Path(data_dir)
        self.sessions_dir = self.root / "sessions"
        self.sessions_dir.mkdir(parents=True, exist_ok=True)
        self.index_path = self.root / "index.jsonl"
        self._sessions = {}  # id -> Session
        self._locks = {}  # id -> Lock
        self._written = {}  # id -> number of events already on disk
        self._registry_lock = threading.Lock()
        self._recover()

    def _log_path(self, session_id):
        return self.sessions_dir / f"{session_id}.jsonl"

    def _recover(self):
        if not self.index_path.exists():
            return
        with open(self.index_path) as fh:
            ids = [json.loads(line)["id"] for line in fh if line.strip()]
        for session_id in ids:
            path = self._log_path(session_id)
            if not path.exists():
                continue
            with open(path) as fh:
                events = [json.loads(line) for line in fh if line.strip()]
            session = replay_events(events, session_id=session_id)
            self._sessions[session_id] = session
            self._locks[session_id] = threading.Lock()
            # replay regenerates events; persist nothing, disk is the truth
            self._written[session_id] = len(session.events)

    def create(self, config):
        session_id = uuid.uuid4().hex
        session = Session(config, session_id=session_id)
        with self._registry_lock:
            self._sessions[session_id] = session
            self._locks[session_id] = threading.Lock()
            self._written[session_id] = 0
            with open(self.index_path, "a") as fh:
                fh.write(json.dumps({"id": session_id}) + "\n")
        self._flush(session)
        return session

    def get(self, session_id):
        return self._sessions.get(session_id)

    def lock(self, session_id):
        return self._locks[session_id]

    def _flush(self, session):
        """Append any not-yet-persisted events of the session to its log."""
        done = self._written.get(session.id, 0)
        new = session.events[done:]
        if not new:
            return
        with open(self._log_path(session.id), "a") as fh:
            for ev in new:
                fh.write(json.dumps(ev) + "\n")
            fh.flush()
            os.fsync(fh.fileno())
        self._written[session.id] = len(session.events)

    def flush(self, session):
        self._flush(session)


def _estimate_payload(session, n_points):
    est = session.threshold_estimate(n_points)
    return {
        "frequency_hz": [float(v) for v in est.frequencies_hz],
        "mean_dbhl": [float(v) for v in est.means_dbhl],
        "std_dbhl": [float(v) for v in est.stds_dbhl],
        "status": session.status,
        "mean_bald_history": [float(v) for v in session.mean_bald_history],
    }


def create_app(data_dir):
    app = FastAPI(title="audiogp session service")
    store = SessionStore(data_dir)
    app.state.store = store

    def error(status_code, message, **extra):
        return JSONResponse({"error": message, **extra}, status_code=status_code)

    @app.post("/sessions", status_code=201)
    async def create_session(request: Request):
        try:
            body = await request.json()
        except Exception:
            return error(400, "body must be a JSON object")
        if not isinstance(body, dict):
            return error(400, "body must be a JSON object")
        try:
            config = SessionConfig.from_dict(body)
        except ConfigError as exc:
            return error(400, str(exc), fields=list(exc.fields))
        session = store.create(config)
        return JSONResponse(
            {"id": session.id, "status": session.status,
             "estimate": _estimate_payload(session, 64)},
            status_code=201,
        )

    @app.get("/sessions/{session_id}/next-trial")
    def next_trial(session_id: str):
        session = store.get(session_id)
        if session is None:
            return error(404, "unknown session")
        with store.lock(session_id):
            try:
                stim = session.propose_trial()
            except SessionStateError:
                return error(409, "session stopped", status=session.status)
            store.flush(session)
        return {"frequency_hz": stim.frequency_hz, "level_dbhl": stim.level_dbhl}

    @app.post("/sessions/{session_id}/responses")
    async def post_response(session_id: str, request: Request):
        session = store.get(session_id)
        if session is None:
            return error(404, "unknown session")
        try:
            body = await request.json()
        except Exception:
            return error(400, "body must be a JSON object")
        if not isinstance(body, dict):
            return error(400, "body must be a JSON object")
        bad = [k for k in ("frequency_hz", "level_dbhl", "label")
               if not isinstance(body.get(k), (int, float)) or isinstance(body.get(k), bool)]
        if not bad and body["label"] not in (-1, 1):
            bad = ["label"]
        if bad:
            return error(400, f"missing or invalid fields: {', '.join(bad)}", fields=bad)
        with store.lock(session_id):
            try:
                session.record_response(
                    Stimulus(float(body["frequency_hz"]), float(body["level_dbhl"])),
                    int(body["label"]),
                )
            except ConfigError as exc:
                return error(400, str(exc), fields=list(exc.fields))
            except SessionStateError:
                return error(409, "session stopped", status=session.status)
            store.flush(session)
            return {"status": session.status, "max_std": session.max_grid_std(),
                    "n_trials": session.n_trials}

    @app.get("/sessions/{session_id}/estimate")
    def get_estimate(session_id: str, points: int = 64):
        session = store.get(session_id)
        if session is None:
            return error(404, "unknown session")
        if points < 2:
            return error(400, "points must be >= 2", fields=["points"])
        return _estimate_payload(session, points)

    return app


def main():
    """Run the service; bind address and data directory come from env vars
    AUDIOGP_HOST / AUDIOGP_PORT / AUDIOGP_DATA_DIR."""
    import uvicorn

    host = os.environ.get("AUDIOGP_HOST", "127.0.0.1")
    port = int(os.environ.get("AUDIOGP_PORT", "8000"))
    data_dir = os.environ.get("AUDIOGP_DATA_DIR", "./audiogp-data")
    uvicorn.run(create_app(data_dir), host=host, port=port)


if __name__ == "__main__":
    main()

"""HTTP study host.

Sessions are created per study and driven entirely through small JSON
requests; all judging happens server-side and every state-changing
operation is appended to one newline-delimited JSON log file per session
(see ``docs/log-format.md``). Replaying a log through the engine
reconstructs the exact session state, which is how crash recovery works:
on access to an unknown pseudonym the server rebuilds the session from its
log, truncating a corrupt trailing record with an operator warning.

Requests for one session are serialized by a per-session lock; distinct
sessions proceed in parallel. All timing uses the server clock.
"""

from __future__ import annotations

import json
import logging
import os
import secrets
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml
from fastapi import Body, FastAPI, HTTPException

from . import engine
from .engine import Phase, SessionState, StudyConfig
from .tasks import Library, TaskGroup, load_library
from .tutorial import TutorialPage, load_tutorial
from .zvt import ZvtMatrix, load_run

log = logging.getLogger(__name__)

DATA_DIR_ENV = "STUDY_DATA_DIR"

#: Root of the data files bundled with the package.
BUNDLED_DATA = Path(__file__).parent / "data"


@dataclass(frozen=True)
class StudyDefinition:
    """One configured study: its library, optional tutorial/test data, settings."""

    study_id: str
    config: StudyConfig
    library: Library
    tutorial_pages: tuple[TutorialPage, ...]
    zvt_matrices: tuple[ZvtMatrix, ...] | None


def _config_from_settings(settings: dict[str, Any]) -> StudyConfig:
    kwargs: dict[str, Any] = {}
    for key in ("global_time_limit", "qualification_attempt_cap", "skip_attempt_limit",
                "score_start", "score_penalty", "zvt_enabled"):
        if key in settings:
            kwargs[key] = settings[key]
    if "delay_schedule" in settings:
        kwargs["delay_schedule"] = tuple(float(d) for d in settings["delay_schedule"])
    if "skip_time_limits" in settings:
        kwargs["skip_time_limits"] = {
            TaskGroup(g): float(v) for g, v in settings["skip_time_limits"].items()}
    return StudyConfig(**kwargs)


def load_study_definition(study_id: str, spec: dict[str, Any],
                          base_dir: Path) -> StudyDefinition:
    """Resolve one study entry of the config file into loaded resources."""

    def resolve(value, default: Path) -> Path:
        if value is None:
            return default
        path = Path(value)
        return path if path.is_absolute() else base_dir / path

    config = _config_from_settings(spec.get("settings") or {})
    library = load_library(resolve(spec.get("library"), BUNDLED_DATA / "library"))
    tutorial_path = resolve(spec.get("tutorial"), BUNDLED_DATA / "tutorial" / "tutorial.yaml")
    pages = tuple(load_tutorial(tutorial_path))
    matrices = None
    if config.zvt_enabled:
        matrices = load_run(resolve(spec.get("zvt"), BUNDLED_DATA / "zvt"))
    return StudyDefinition(study_id=study_id, config=config, library=library,
                           tutorial_pages=pages, zvt_matrices=matrices)


def load_studies(config_path: Path | str) -> dict[str, StudyDefinition]:
    config_path = Path(config_path)
    doc = yaml.safe_load(config_path.read_text())
    if not isinstance(doc, dict) or not isinstance(doc.get("studies"), dict):
        raise ValueError(f"{config_path}: expected a mapping with a 'studies' table")
    return {sid: load_study_definition(sid, spec or {}, config_path.parent)
            for sid, spec in doc["studies"].items()}


def default_studies() -> dict[str, StudyDefinition]:
    """A single study named 'default' built from the bundled data files."""
    return {"default": load_study_definition("default", {}, BUNDLED_DATA)}


# --- event log --------------------------------------------------------------

#: Event kind recorded for each operation (confirm is special-cased).
_OP_KINDS = {
    "toggle_switch": "switch_toggled",
    "skip_task": "task_skipped",
    "zvt_click": "zvt_click",
    "zvt_start_matrix": "task_shown",
    "tutorial_goto": "task_shown",
    "complete_tutorial": "phase_changed",
    "revisit_tutorial": "phase_changed",
    "advance_task": "task_shown",
    "draw_action": "draw_action",
    "draw_cleared": "draw_cleared",
    "tick": "timeout",
}


@dataclass
class SessionRuntime:
    study: StudyDefinition
    state: SessionState
    log_path: Path
    lock: threading.Lock = field(default_factory=threading.Lock)
    seq: int = 0
    last_time_ms: int = 0
    last_batch: str | None = None
    last_batch_response: dict[str, Any] | None = None

    def append(self, kind: str, payload: dict[str, Any],
               replay: dict[str, Any] | None, time_ms: int) -> None:
        """Write one record; seq is server-assigned, times never go backwards."""
        self.seq += 1
        self.last_time_ms = max(self.last_time_ms, time_ms)
        record = {
            "pseudonym": self.state.pseudonym,
            "seq": self.seq,
            "server_time": self.last_time_ms,
            "kind": kind,
            "payload": payload,
            "replay": replay,
        }
        with self.log_path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(record, separators=(",", ":")) + "\n")


def read_log(path: Path) -> list[dict[str, Any]]:
    """Read a session log, truncating a corrupt tail with a warning."""
    raw = path.read_bytes()
    records: list[dict[str, Any]] = []
    valid_bytes = 0
    for line in raw.splitlines(keepends=True):
        try:
            record = json.loads(line)
        except json.JSONDecodeError:
            log.warning("%s: corrupt record after %d good records; truncating",
                        path, len(records))
            path.write_bytes(raw[:valid_bytes])
            break
        records.append(record)
        valid_bytes += len(line)
    return records


class StudyHost:
    """All live sessions plus the persistent store behind them."""

    def __init__(self, studies: dict[str, StudyDefinition], data_dir: Path,
                 clock=time.time):
        self.studies = studies
        self.data_dir = Path(data_dir)
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.clock = clock
        self.sessions: dict[str, SessionRuntime] = {}
        self._registry_lock = threading.Lock()

    def now_ms(self) -> int:
        return int(self.clock() * 1000)

    # -- lifecycle ----------------------------------------------------------

    def create_session(self, study_id: str) -> SessionRuntime:
        study = self.studies.get(study_id)
        if study is None:
            raise KeyError(study_id)
        pseudonym = secrets.token_hex(16)  # 128-bit, unlinkable
        seed = secrets.randbits(63)
        time_ms = self.now_ms()
        state = engine.create_session(
            study.config, study.library, seed,
            timestamp=time_ms / 1000.0,
            zvt_matrices=study.zvt_matrices,
            tutorial_pages=study.tutorial_pages,
            pseudonym=pseudonym,
        )
        runtime = SessionRuntime(study=study, state=state,
                                 log_path=self.data_dir / f"{pseudonym}.ndjson")
        runtime.append(
            "session_created",
            {"study_id": study_id, "phase": state.phase.value},
            {"op": "create_session",
             "args": {"study_id": study_id, "seed": seed, "pseudonym": pseudonym}},
            time_ms,
        )
        with self._registry_lock:
            self.sessions[pseudonym] = runtime
        return runtime

    def get_session(self, pseudonym: str) -> SessionRuntime:
        with self._registry_lock:
            runtime = self.sessions.get(pseudonym)
        if runtime is None:
            runtime = self._recover(pseudonym)
            with self._registry_lock:
                self.sessions.setdefault(pseudonym, runtime)
                runtime = self.sessions[pseudonym]
        return runtime

    def _recover(self, pseudonym: str) -> SessionRuntime:
        path = self.data_dir / f"{pseudonym}.ndjson"
        if not path.exists():
            raise KeyError(pseudonym)
        records = read_log(path)
        if not records or records[0].get("kind") != "session_created":
            raise KeyError(pseudonym)
        state = replay_session(records, self.studies)
        runtime = SessionRuntime(study=self.studies[records[0]["payload"]["study_id"]],
                                 state=state, log_path=path,
                                 seq=records[-1]["seq"],
                                 last_time_ms=records[-1]["server_time"])
        # A session past the global cap recovers as ended-by-timeout.
        self._apply(runtime, "tick", {}, self.now_ms())
        return runtime

    # -- operations ---------------------------------------------------------

    def _apply(self, runtime: SessionRuntime, op: str, args: dict[str, Any],
               time_ms: int) -> Any:
        """Apply one engine op under no lock (caller holds it), log the record
        plus any derived phase-change records."""
        state = runtime.state
        phase_before = state.phase
        task_before = state.current_task()
        result = engine.apply_op(state, op, args, time_ms / 1000.0)

        kind = _OP_KINDS.get(op, op)
        payload: dict[str, Any] = {"phase": state.phase.value}
        if op == "submit_confirm":
            kind = ("confirm_rejected" if result.kind == "rejected"
                    else "confirm_submitted")
            payload.update({"task_id": task_before.id if task_before else None,
                            "result": result.kind, "score": result.score})
            if result.retry_at is not None:
                payload["retry_at"] = result.retry_at
            # The back-edge to the tutorial is reported under the phase the
            # confirm happened in so metrics attribute it to the right task.
            payload["phase"] = phase_before.value
        elif op == "toggle_switch":
            payload["switch_id"] = args.get("switch_id")
            if task_before is not None:
                payload["task_id"] = task_before.id
        elif op == "skip_task":
            payload["phase"] = phase_before.value
            payload["task_id"] = task_before.id if task_before else None
        elif op == "zvt_click":
            payload.update({"number": args.get("number"),
                            "correct": result.value != "misclick"})
        elif op == "zvt_start_matrix":
            matrix = state.zvt.active_matrix
            payload["zvt_matrix_id"] = matrix.id if matrix else None
        elif op == "tutorial_goto":
            payload["tutorial_page"] = args.get("page_index")
        elif op == "draw_action":
            payload["tool"] = args.get("tool")
            if task_before is not None:
                payload["task_id"] = task_before.id
        elif op in ("advance_task", "complete_tutorial"):
            task_now = state.current_task()
            payload["task_id"] = task_now.id if task_now else None
        elif op == "tick":
            if state.phase is phase_before:
                return result  # nothing happened; nothing to log
        runtime.append(kind, payload, {"op": op, "args": args}, time_ms)

        if state.phase is not phase_before:
            if state.phase is Phase.ENDED:
                reason = state.end_reason.value if state.end_reason else None
                runtime.append("session_ended", {"reason": reason}, None, time_ms)
            else:
                derived = {"phase": state.phase.value}
                task_now = state.current_task()
                if task_now is not None:
                    derived["task_id"] = task_now.id
                runtime.append("phase_changed", derived, None, time_ms)
        task_now = state.current_task()
        if (task_now is not None and task_now is not task_before
                and op not in ("advance_task", "complete_tutorial")):
            runtime.append("task_shown",
                           {"phase": state.phase.value, "task_id": task_now.id},
                           None, time_ms)
        return result

    def apply(self, runtime: SessionRuntime, op: str,
              args: dict[str, Any]) -> Any:
        time_ms = self.now_ms()
        # Enforce the global time cap before anything else; the tick record
        # (with its replay field) keeps the log self-contained.
        state = runtime.state
        if (state.phase is not Phase.ENDED
                and state.elapsed(time_ms / 1000.0) >= state.config.global_time_limit):
            self._apply(runtime, "tick", {}, time_ms)
        return self._apply(runtime, op, args, time_ms)


def replay_session(records: list[dict[str, Any]],
                   studies: dict[str, StudyDefinition]) -> SessionState:
    """Rebuild a session state by re-applying the logged operations.

    Records with a null ``replay`` field are derived annotations and are
    skipped; everything else replays through the same engine entry point
    the live server used, at the logged server time.
    """
    created = records[0]
    study = studies[created["payload"]["study_id"]]
    args = created["replay"]["args"]
    state = engine.create_session(
        study.config, study.library, args["seed"],
        timestamp=created["server_time"] / 1000.0,
        zvt_matrices=study.zvt_matrices,
        tutorial_pages=study.tutorial_pages,
        pseudonym=args["pseudonym"],
    )
    for record in records[1:]:
        replay = record.get("replay")
        if not replay:
            continue
        engine.apply_op(state, replay["op"], replay["args"],
                        record["server_time"] / 1000.0)
    return state


# --- FastAPI app ------------------------------------------------------------

def create_app(studies: dict[str, StudyDefinition] | None = None,
               data_dir: Path | str | None = None,
               clock=time.time) -> FastAPI:
    if studies is None:
        studies = default_studies()
    if data_dir is None:
        data_dir = os.environ.get(DATA_DIR_ENV, "./study-data")
    host = StudyHost(studies, Path(data_dir), clock=clock)
    app = FastAPI(title="circuit study host")
    app.state.host = host

    def runtime_or_404(pseudonym: str) -> SessionRuntime:
        try:
            return host.get_session(pseudonym)
        except KeyError:
            raise HTTPException(status_code=404, detail="unknown session")

    def view(runtime: SessionRuntime) -> dict[str, Any]:
        return engine.participant_view(runtime.state, host.now_ms() / 1000.0)

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "studies": sorted(studies)}

    @app.post("/study/{study_id}/session")
    def create_session(study_id: str):
        try:
            runtime = host.create_session(study_id)
        except KeyError:
            raise HTTPException(status_code=404, detail="unknown study")
        with runtime.lock:
            return {"pseudonym": runtime.state.pseudonym, "view": view(runtime)}

    @app.get("/session/{pseudonym}/view")
    def get_view(pseudonym: str):
        runtime = runtime_or_404(pseudonym)
        with runtime.lock:
            state = runtime.state
            now = host.now_ms()
            if (state.phase is not Phase.ENDED
                    and state.elapsed(now / 1000.0) >= state.config.global_time_limit):
                host._apply(runtime, "tick", {}, now)
            return {"view": view(runtime)}

    @app.post("/session/{pseudonym}/events")
    def post_events(pseudonym: str, body: dict[str, Any] = Body(...)):
        runtime = runtime_or_404(pseudonym)
        batch_id = body.get("batch_id")
        events = body.get("events") or []
        with runtime.lock:
            if batch_id is not None and batch_id == runtime.last_batch:
                return runtime.last_batch_response
            results = []
            for event in events:
                op = event.get("op")
                args = event.get("args") or {}
                try:
                    outcome = host.apply(runtime, op, args)
                except engine.EngineError as exc:
                    results.append({"op": op, "error": str(exc)})
                else:
                    results.append({"op": op, "result": _jsonable(outcome)})
            response = {"results": results, "view": view(runtime)}
            if batch_id is not None:
                runtime.last_batch = batch_id
                runtime.last_batch_response = response
            return response

    @app.post("/session/{pseudonym}/confirm")
    def post_confirm(pseudonym: str):
        runtime = runtime_or_404(pseudonym)
        with runtime.lock:
            try:
                outcome = host.apply(runtime, "submit_confirm", {})
            except engine.EngineError as exc:
                raise HTTPException(status_code=409, detail=str(exc))
            return {"outcome": _jsonable(outcome), "view": view(runtime)}

    @app.post("/session/{pseudonym}/skip")
    def post_skip(pseudonym: str):
        runtime = runtime_or_404(pseudonym)
        with runtime.lock:
            try:
                host.apply(runtime, "skip_task", {})
            except engine.EngineError as exc:
                raise HTTPException(status_code=409, detail=str(exc))
            return {"view": view(runtime)}

    return app


def _jsonable(value: Any) -> Any:
    if isinstance(value, engine.AttemptOutcome):
        return {"kind": value.kind, "outputs": value.outputs,
                "retry_at": value.retry_at, "score": value.score}
    if hasattr(value, "value"):  # enums
        return value.value
    return value

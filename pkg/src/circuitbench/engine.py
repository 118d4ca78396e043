"""Per-session study state machine.

A session walks through four phases: an optional psychometric
number-connection test, a freely navigable tutorial, a qualification round
(four tasks, at most two attempts each, failure routes back to the
tutorial), and the experiment round (twelve tasks in fixed group order with
the order inside each group shuffled per session). Sessions end on
completion or when the global time cap runs out.

All correctness judgments happen here, on the server side; participants
only ever receive the redacted payload built by :func:`participant_view`,
which strips the hidden function of obfuscated gates.

Every state-changing entry point is registered in :data:`OPS` so a logged
operation stream can be re-applied verbatim — replaying a session log
through :func:`apply_op` reproduces the exact final state.
"""

from __future__ import annotations

import enum
import random
import secrets
from dataclasses import dataclass, field
from typing import Any, Callable

from .circuit import CircuitState, check_solution, evaluate
from .tasks import RANDOM_INITIAL, Library, Task, TaskGroup
from .tutorial import TutorialPage
from .zvt import ClickOutcome, ZvtState
from . import zvt as zvt_ops


class EngineError(Exception):
    """An operation was rejected (wrong phase, unknown id, precondition)."""


class Phase(enum.Enum):
    PSYCHOMETRIC_TEST = "psychometric_test"
    TUTORIAL = "tutorial"
    QUALIFICATION = "qualification"
    EXPERIMENT = "experiment"
    ENDED = "ended"


class EndReason(enum.Enum):
    COMPLETED = "completed"
    TIMEOUT = "timeout"


#: Legal phase transitions (plus self-loops, which are always allowed).
_TRANSITIONS = {
    Phase.PSYCHOMETRIC_TEST: {Phase.TUTORIAL, Phase.ENDED},
    Phase.TUTORIAL: {Phase.QUALIFICATION, Phase.ENDED},
    Phase.QUALIFICATION: {Phase.TUTORIAL, Phase.EXPERIMENT, Phase.ENDED},
    Phase.EXPERIMENT: {Phase.ENDED},
    Phase.ENDED: set(),
}

#: Fixed ordering of the experiment groups; shuffling happens only inside.
EXPERIMENT_GROUP_ORDER = (TaskGroup.A, TaskGroup.B, TaskGroup.C, TaskGroup.D)


@dataclass(frozen=True)
class StudyConfig:
    global_time_limit: float = 4500.0
    qualification_attempt_cap: int = 2
    skip_attempt_limit: int = 4
    skip_time_limits: dict[TaskGroup, float] = field(
        default_factory=lambda: {TaskGroup.A: 180.0, TaskGroup.B: 600.0,
                                 TaskGroup.C: 720.0, TaskGroup.D: 900.0})
    score_start: int = 100
    score_penalty: int = 10
    delay_schedule: tuple[float, ...] = (2.0, 4.0, 8.0, 16.0, 30.0)
    zvt_enabled: bool = True
    live_highlighting_phases: frozenset[Phase] = frozenset(
        {Phase.TUTORIAL, Phase.QUALIFICATION})

    def __post_init__(self):
        durations = [self.global_time_limit, *self.skip_time_limits.values(),
                     *self.delay_schedule]
        if any(d <= 0 for d in durations):
            raise ValueError("all durations must be positive")
        if list(self.delay_schedule) != sorted(self.delay_schedule):
            raise ValueError("delay_schedule must be non-decreasing")

    def delay_for_attempt(self, failed_attempts: int) -> float:
        """Delay imposed after the n-th failed attempt (1-based), capped."""
        index = min(failed_attempts, len(self.delay_schedule)) - 1
        return self.delay_schedule[index]


@dataclass
class TaskProgress:
    """Mutable per-task bookkeeping while a task is on screen."""

    first_view: float
    switches: list[int]
    score: int
    attempts: int = 0  # failed confirm submissions
    confirm_times: list[float] = field(default_factory=list)
    switch_clicks: int = 0
    confirm_clicks: int = 0
    next_confirm_allowed: float = 0.0
    skip_offered: bool = False
    solved: bool = False
    skipped: bool = False
    last_outputs: dict[str, int] | None = None  # outputs shown after last confirm
    draw_summary: dict[str, int] = field(default_factory=dict)  # strokes per tool


@dataclass
class SessionState:
    pseudonym: str
    config: StudyConfig
    library: Library
    rng_seed: int
    session_start: float
    phase: Phase
    quali_queue: tuple[str, ...]
    experiment_queue: tuple[str, ...]
    zvt: ZvtState | None = None
    tutorial_pages: tuple[TutorialPage, ...] = ()
    tutorial_page_index: int = 0
    tutorial_switches: dict[str, list[int]] = field(default_factory=dict)
    task_index: int = 0
    progress: dict[str, TaskProgress] = field(default_factory=dict)
    qualification_rounds: int = 0  # times the qualification phase was entered
    end_reason: EndReason | None = None

    @property
    def current_queue(self) -> tuple[str, ...]:
        if self.phase is Phase.QUALIFICATION:
            return self.quali_queue
        if self.phase is Phase.EXPERIMENT:
            return self.experiment_queue
        return ()

    def current_task(self) -> Task | None:
        queue = self.current_queue
        if queue and self.task_index < len(queue):
            return self.library.by_id()[queue[self.task_index]]
        return None

    def current_progress(self) -> TaskProgress | None:
        task = self.current_task()
        return self.progress.get(task.id) if task else None

    def elapsed(self, timestamp: float) -> float:
        return timestamp - self.session_start


@dataclass(frozen=True)
class AttemptOutcome:
    kind: str  # "correct" | "incorrect" | "rejected"
    outputs: dict[str, int] | None = None
    retry_at: float | None = None
    score: int | None = None


def create_session(config: StudyConfig, library: Library, seed: int, *,
                   timestamp: float = 0.0,
                   zvt_matrices: tuple[zvt_ops.ZvtMatrix, ...] | None = None,
                   tutorial_pages: tuple[TutorialPage, ...] = (),
                   pseudonym: str | None = None) -> SessionState:
    """Create a fresh session with a seeded task order.

    Qualification order is fixed; experiment groups keep their A,B,C,D
    ordering but tasks are shuffled inside each group by the seed.
    """
    if not library.tasks():
        raise EngineError("cannot create a session from an empty library")
    quali = tuple(t.id for t in library.qualification())
    experiment: list[str] = []
    for group in EXPERIMENT_GROUP_ORDER:
        ids = [t.id for t in library.groups.get(group, ())]
        random.Random(f"{seed}:{group.value}").shuffle(ids)
        experiment.extend(ids)
    if not experiment:
        raise EngineError("library has no experiment tasks")

    if config.zvt_enabled:
        if zvt_matrices is None:
            raise EngineError("zvt_enabled requires matrices")
        phase = Phase.PSYCHOMETRIC_TEST
        zvt_state = ZvtState(matrices=zvt_matrices)
    else:
        phase, zvt_state = Phase.TUTORIAL, None

    return SessionState(
        pseudonym=pseudonym if pseudonym is not None else secrets.token_hex(16),
        config=config,
        library=library,
        rng_seed=seed,
        session_start=timestamp,
        phase=phase,
        quali_queue=quali,
        experiment_queue=tuple(experiment),
        zvt=zvt_state,
        tutorial_pages=tuple(tutorial_pages),
    )


def _require_phase(state: SessionState, *phases: Phase) -> None:
    if state.phase not in phases:
        allowed = ", ".join(p.value for p in phases)
        raise EngineError(f"operation requires phase {allowed}, not {state.phase.value}")


def _transition(state: SessionState, new_phase: Phase) -> None:
    if new_phase is not state.phase and new_phase not in _TRANSITIONS[state.phase]:
        raise EngineError(f"illegal transition {state.phase.value} -> {new_phase.value}")
    state.phase = new_phase


def _initial_switches(state: SessionState, task: Task) -> list[int]:
    if task.initial_switches == RANDOM_INITIAL:
        rng = random.Random(f"{state.rng_seed}:initial:{task.id}")
        return [rng.randint(0, 1) for _ in task.netlist.inputs]
    return list(task.initial_switches)


def _enter_task(state: SessionState, timestamp: float) -> None:
    task = state.current_task()
    if task is None:
        raise EngineError("no task to enter")
    state.progress[task.id] = TaskProgress(
        first_view=timestamp,
        switches=_initial_switches(state, task),
        score=state.config.score_start,
    )


def _circuit_state(state: SessionState, task: Task,
                   switches: list[int]) -> CircuitState:
    return evaluate(task.netlist, tuple(switches))


# --- psychometric test ------------------------------------------------------

def zvt_start_matrix(state: SessionState, timestamp: float) -> None:
    _require_phase(state, Phase.PSYCHOMETRIC_TEST)
    try:
        zvt_ops.start_matrix(state.zvt, timestamp)
    except zvt_ops.ZvtError as exc:
        raise EngineError(str(exc)) from exc


def zvt_click(state: SessionState, number: int, timestamp: float) -> ClickOutcome:
    """Register one test click; finishing the last matrix moves to the tutorial."""
    _require_phase(state, Phase.PSYCHOMETRIC_TEST)
    try:
        outcome = zvt_ops.register_click(state.zvt, number, timestamp)
    except zvt_ops.ZvtError as exc:
        raise EngineError(str(exc)) from exc
    if outcome is ClickOutcome.MATRIX_COMPLETE and state.zvt.complete:
        _transition(state, Phase.TUTORIAL)
    return outcome


# --- tutorial ---------------------------------------------------------------

def tutorial_goto(state: SessionState, page_index: int, timestamp: float) -> None:
    """Free navigation between tutorial pages, in any order."""
    _require_phase(state, Phase.TUTORIAL)
    if not 0 <= page_index < max(len(state.tutorial_pages), 1):
        raise EngineError(f"no tutorial page {page_index}")
    state.tutorial_page_index = page_index


def complete_tutorial(state: SessionState, timestamp: float) -> None:
    """Leave the tutorial and (re)start qualification at the first task."""
    _require_phase(state, Phase.TUTORIAL)
    for task_id in state.quali_queue:
        state.progress.pop(task_id, None)
    _transition(state, Phase.QUALIFICATION)
    state.task_index = 0
    state.qualification_rounds += 1
    _enter_task(state, timestamp)


def revisit_tutorial(state: SessionState, timestamp: float) -> None:
    """Voluntary return to the tutorial; qualification progress is reset."""
    _require_phase(state, Phase.QUALIFICATION)
    _transition(state, Phase.TUTORIAL)


# --- task interaction -------------------------------------------------------

def toggle_switch(state: SessionState, switch_id: str, timestamp: float) -> None:
    if state.phase is Phase.TUTORIAL:
        page = (state.tutorial_pages[state.tutorial_page_index]
                if state.tutorial_pages else None)
        if page is None or page.task is None:
            raise EngineError("current tutorial page has no circuit")
        inputs = page.task.netlist.inputs
        switches = state.tutorial_switches.setdefault(
            page.id, [0] * len(inputs))
        if switch_id not in inputs:
            raise EngineError(f"unknown switch {switch_id!r}")
        idx = inputs.index(switch_id)
        switches[idx] ^= 1
        return
    _require_phase(state, Phase.QUALIFICATION, Phase.EXPERIMENT)
    task = state.current_task()
    progress = state.current_progress()
    if progress.solved or progress.skipped:
        raise EngineError("task already closed")
    if switch_id not in task.netlist.inputs:
        raise EngineError(f"unknown switch {switch_id!r}")
    idx = task.netlist.inputs.index(switch_id)
    progress.switches[idx] ^= 1
    progress.switch_clicks += 1


def submit_confirm(state: SessionState, timestamp: float) -> AttemptOutcome:
    """Judge the current switch assignment against the task's outputs."""
    _require_phase(state, Phase.QUALIFICATION, Phase.EXPERIMENT)
    task = state.current_task()
    progress = state.current_progress()
    if progress.solved or progress.skipped:
        raise EngineError("task already closed")
    if timestamp < progress.next_confirm_allowed:
        # Too early: not an attempt, not penalized.
        return AttemptOutcome(kind="rejected",
                              retry_at=progress.next_confirm_allowed,
                              score=progress.score)

    progress.confirm_clicks += 1
    progress.confirm_times.append(timestamp)
    verdict = check_solution(task.netlist, tuple(progress.switches))
    progress.last_outputs = {oid: v.level for oid, v in verdict.outputs.items()}
    if verdict.correct:
        progress.solved = True
        return AttemptOutcome(kind="correct", outputs=progress.last_outputs,
                              score=progress.score)

    progress.attempts += 1
    progress.score = max(0, progress.score - state.config.score_penalty)
    delay = state.config.delay_for_attempt(progress.attempts)
    progress.next_confirm_allowed = max(progress.next_confirm_allowed,
                                        timestamp + delay)
    outcome = AttemptOutcome(kind="incorrect", outputs=progress.last_outputs,
                             retry_at=progress.next_confirm_allowed,
                             score=progress.score)
    if (state.phase is Phase.QUALIFICATION
            and progress.attempts >= state.config.qualification_attempt_cap):
        # Not qualified on this round: back to the tutorial; qualification
        # restarts from the first task with fresh counters on return.
        _transition(state, Phase.TUTORIAL)
    return outcome


def advance_task(state: SessionState, timestamp: float) -> None:
    """The Next button: move past a solved (or skipped) task."""
    _require_phase(state, Phase.QUALIFICATION, Phase.EXPERIMENT)
    progress = state.current_progress()
    if not (progress.solved or progress.skipped):
        raise EngineError("current task is not closed")
    if state.task_index + 1 < len(state.current_queue):
        state.task_index += 1
        _enter_task(state, timestamp)
    elif state.phase is Phase.QUALIFICATION:
        _transition(state, Phase.EXPERIMENT)
        state.task_index = 0
        _enter_task(state, timestamp)
    else:
        _transition(state, Phase.ENDED)
        state.end_reason = EndReason.COMPLETED


def skip_eligibility(state: SessionState, timestamp: float) -> bool:
    """Skipping unlocks after enough failed attempts or enough time; it latches."""
    if state.phase is not Phase.EXPERIMENT:
        return False
    task = state.current_task()
    progress = state.current_progress()
    if progress is None or progress.solved or progress.skipped:
        return False
    if not progress.skip_offered:
        limit = state.config.skip_time_limits.get(task.group, task.skip_time_limit)
        if (progress.attempts >= state.config.skip_attempt_limit
                or timestamp - progress.first_view >= limit):
            progress.skip_offered = True
    return progress.skip_offered


def skip_task(state: SessionState, timestamp: float) -> None:
    _require_phase(state, Phase.EXPERIMENT)
    if not skip_eligibility(state, timestamp):
        raise EngineError("skip not available for this task")
    progress = state.current_progress()
    progress.skipped = True
    advance_task(state, timestamp)


def draw_action(state: SessionState, tool: str, timestamp: float) -> None:
    """Record one annotation stroke with the given pen or eraser."""
    _require_phase(state, Phase.QUALIFICATION, Phase.EXPERIMENT)
    if not tool:
        raise EngineError("draw_action needs a tool name")
    progress = state.current_progress()
    progress.draw_summary[tool] = progress.draw_summary.get(tool, 0) + 1


def draw_cleared(state: SessionState, timestamp: float) -> None:
    """The trash can: wipe all annotations on the current task."""
    _require_phase(state, Phase.QUALIFICATION, Phase.EXPERIMENT)
    state.current_progress().draw_summary.clear()


def tick(state: SessionState, timestamp: float) -> None:
    """Enforce the global time cap; safe to call at any time, idempotent."""
    if state.phase is Phase.ENDED:
        return
    if state.elapsed(timestamp) >= state.config.global_time_limit:
        _transition(state, Phase.ENDED)
        state.end_reason = EndReason.TIMEOUT


# --- participant view -------------------------------------------------------

def _redacted_netlist(task: Task) -> dict[str, Any]:
    """Serialize the circuit for the participant: obfuscated gates keep only
    their displayed kind; hidden function and effective inputs are stripped."""
    elements = []
    for element in task.netlist.elements:
        displayed = (element.truth.displayed_kind if element.truth is not None
                     else element.kind)
        elements.append({"id": element.id, "kind": displayed.value,
                         "x": element.x, "y": element.y})
    wires = [{"source": w.source, "source_port": w.source_port,
              "sink": w.sink, "sink_port": w.sink_port}
             for w in task.netlist.wires]
    return {"elements": elements, "wires": wires,
            "inputs": list(task.netlist.inputs),
            "outputs": list(task.netlist.outputs)}


def participant_view(state: SessionState, timestamp: float | None = None) -> dict[str, Any]:
    """The full redacted payload the client renders."""
    view: dict[str, Any] = {
        "pseudonym": state.pseudonym,
        "phase": state.phase.value,
    }
    if state.phase is Phase.ENDED:
        view["end_reason"] = state.end_reason.value if state.end_reason else None
        return view

    if state.phase is Phase.PSYCHOMETRIC_TEST:
        zvt_state = state.zvt
        matrix = zvt_state.active_matrix
        view["zvt"] = {
            "matrix_id": matrix.id if matrix else None,
            "matrices_done": len(zvt_state.end_times),
            "visible_numbers": sorted(zvt_state.visible_numbers()),
            "positions": ({str(n): list(matrix.positions[n])
                           for n in sorted(zvt_state.visible_numbers())}
                          if matrix else {}),
        }
        return view

    if state.phase is Phase.TUTORIAL:
        page = (state.tutorial_pages[state.tutorial_page_index]
                if state.tutorial_pages else None)
        view["tutorial"] = {
            "page_index": state.tutorial_page_index,
            "page_count": len(state.tutorial_pages),
            "page_id": page.id if page else None,
            "title": page.title if page else None,
            "body": page.body if page else None,
        }
        if page is not None and page.task is not None:
            switches = state.tutorial_switches.get(
                page.id, [0] * len(page.task.netlist.inputs))
            view["task"] = _redacted_netlist(page.task)
            view["switches"] = dict(zip(page.task.netlist.inputs, switches))
            circuit = evaluate(page.task.netlist, tuple(switches))
            view["wire_levels"] = {f"{w.source}:{w.sink}": lvl
                                   for w, lvl in circuit.wire_levels.items()}
            view["output_levels"] = dict(circuit.output_levels)
        return view

    task = state.current_task()
    progress = state.current_progress()
    view["task"] = _redacted_netlist(task)
    view["task_id"] = task.id
    view["task_index"] = state.task_index
    view["task_count"] = len(state.current_queue)
    view["switches"] = dict(zip(task.netlist.inputs, progress.switches))
    view["score"] = progress.score
    view["switch_clicks"] = progress.switch_clicks
    view["confirm_clicks"] = progress.confirm_clicks
    view["solved"] = progress.solved
    view["next_confirm_allowed"] = progress.next_confirm_allowed
    view["skip_offered"] = (skip_eligibility(state, timestamp)
                            if timestamp is not None else progress.skip_offered)
    if state.phase in state.config.live_highlighting_phases:
        circuit = _circuit_state(state, task, progress.switches)
        view["wire_levels"] = {f"{w.source}:{w.sink}": lvl
                               for w, lvl in circuit.wire_levels.items()}
        view["output_levels"] = dict(circuit.output_levels)
    elif progress.last_outputs is not None:
        # Experiment phase: output states only as of the last confirm.
        view["output_levels"] = dict(progress.last_outputs)
    return view


# --- operation dispatch (used by the service layer and by replay) -----------

OPS: dict[str, Callable[..., Any]] = {
    "zvt_start_matrix": zvt_start_matrix,
    "zvt_click": zvt_click,
    "tutorial_goto": tutorial_goto,
    "complete_tutorial": complete_tutorial,
    "revisit_tutorial": revisit_tutorial,
    "toggle_switch": toggle_switch,
    "submit_confirm": submit_confirm,
    "advance_task": advance_task,
    "skip_task": skip_task,
    "draw_action": draw_action,
    "draw_cleared": draw_cleared,
    "tick": tick,
}


def apply_op(state: SessionState, op: str, args: dict[str, Any],
             timestamp: float) -> Any:
    """Apply one named operation; the single entry point used for replay."""
    try:
        fn = OPS[op]
    except KeyError:
        raise EngineError(f"unknown operation {op!r}") from None
    return fn(state, **args, timestamp=timestamp)

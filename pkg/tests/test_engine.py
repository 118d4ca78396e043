from __future__ import annotations

import itertools
import json
import random

import pytest

from circuitbench import engine
from circuitbench.engine import (
    EndReason,
    EngineError,
    Phase,
    StudyConfig,
    apply_op,
    create_session,
    participant_view,
)
from circuitbench.tasks import TaskGroup


@pytest.fixture
def config():
    return StudyConfig(zvt_enabled=False)


@pytest.fixture
def session(config, library, tutorial_pages):
    return create_session(config, library, seed=7, timestamp=0.0,
                          tutorial_pages=tutorial_pages)


def enter_qualification(state, t=0.0):
    apply_op(state, "complete_tutorial", {}, t)
    return state


def wrong_assignment(task):
    return next(c for c in itertools.product((0, 1), repeat=3)
                if c not in task.declared_solutions)


def set_switches(state, bits, t):
    task = state.current_task()
    progress = state.current_progress()
    for i, bit in enumerate(bits):
        if progress.switches[i] != bit:
            apply_op(state, "toggle_switch",
                     {"switch_id": task.netlist.inputs[i]}, t)


def solve_current(state, t):
    task = state.current_task()
    set_switches(state, sorted(task.declared_solutions)[0], t)
    outcome = apply_op(state, "submit_confirm", {}, t)
    assert outcome.kind == "correct"
    apply_op(state, "advance_task", {}, t)
    return t + 1.0


def fail_current(state, t):
    set_switches(state, wrong_assignment(state.current_task()), t)
    return apply_op(state, "submit_confirm", {}, t)


class TestSessionCreation:
    def test_same_seed_same_order(self, config, library, tutorial_pages):
        a = create_session(config, library, seed=3, tutorial_pages=tutorial_pages)
        b = create_session(config, library, seed=3, tutorial_pages=tutorial_pages)
        assert a.experiment_queue == b.experiment_queue

    def test_group_boundaries_preserved(self, config, library, tutorial_pages):
        by_id = library.by_id()
        for seed in range(25):
            state = create_session(config, library, seed=seed,
                                   tutorial_pages=tutorial_pages)
            groups = [by_id[tid].group for tid in state.experiment_queue]
            order = [TaskGroup.A, TaskGroup.B, TaskGroup.C, TaskGroup.D]
            assert groups == sorted(groups, key=order.index)
            assert len(state.experiment_queue) == 12

    def test_zvt_disabled_starts_in_tutorial(self, session):
        assert session.phase is Phase.TUTORIAL

    def test_zvt_enabled_starts_in_psychometric_test(self, library, zvt_matrices):
        state = create_session(StudyConfig(), library, seed=1,
                               zvt_matrices=zvt_matrices)
        assert state.phase is Phase.PSYCHOMETRIC_TEST

    def test_pseudonyms_fresh(self, config, library):
        a = create_session(config, library, seed=1)
        b = create_session(config, library, seed=1)
        assert a.pseudonym != b.pseudonym
        assert len(a.pseudonym) == 32  # 128-bit hex token

    def test_config_validation(self):
        with pytest.raises(ValueError):
            StudyConfig(delay_schedule=(4.0, 2.0))
        with pytest.raises(ValueError):
            StudyConfig(global_time_limit=0)


class TestQualification:
    def test_two_failures_route_back_to_tutorial(self, session):
        enter_qualification(session)
        out1 = fail_current(session, 1.0)
        assert out1.kind == "incorrect"
        assert session.phase is Phase.QUALIFICATION
        out2 = fail_current(session, out1.retry_at + 1.0)
        assert out2.kind == "incorrect"
        assert session.phase is Phase.TUTORIAL

    def test_qualification_restarts_at_first_task(self, session):
        enter_qualification(session)
        t = solve_current(session, 1.0)  # pass task 1
        out = fail_current(session, t)
        fail_current(session, out.retry_at + 1.0)
        assert session.phase is Phase.TUTORIAL
        apply_op(session, "complete_tutorial", {}, 100.0)
        assert session.task_index == 0
        assert session.current_progress().attempts == 0

    def test_voluntary_revisit(self, session):
        enter_qualification(session)
        apply_op(session, "revisit_tutorial", {}, 5.0)
        assert session.phase is Phase.TUTORIAL
        apply_op(session, "complete_tutorial", {}, 6.0)
        assert session.phase is Phase.QUALIFICATION and session.task_index == 0

    def test_all_four_solved_enters_experiment(self, session):
        enter_qualification(session)
        t = 1.0
        for _ in range(4):
            t = solve_current(session, t)
        assert session.phase is Phase.EXPERIMENT


class TestScoringAndDelay:
    def test_correct_first_attempt_keeps_full_score(self, session):
        enter_qualification(session)
        task = session.current_task()
        set_switches(session, sorted(task.declared_solutions)[0], 1.0)
        outcome = apply_op(session, "submit_confirm", {}, 1.0)
        assert outcome.kind == "correct"
        assert outcome.score == session.config.score_start

    def test_score_decreases_and_floors_at_zero(self, config, library, tutorial_pages):
        state = create_session(config, library, seed=7, tutorial_pages=tutorial_pages)
        enter_qualification(state)
        t = solve_current(state, 1.0)
        for _ in range(3):
            t = solve_current(state, t)
        assert state.phase is Phase.EXPERIMENT
        t0 = t
        scores = []
        for k in range(12):
            out = fail_current(state, t)
            scores.append(out.score)
            t = out.retry_at + 0.5
        assert scores[0] == state.config.score_start - state.config.score_penalty
        assert scores[-1] == 0
        assert all(a >= b for a, b in zip(scores, scores[1:]))

    def test_early_confirm_rejected_and_not_counted(self, session):
        enter_qualification(session)
        out = fail_current(session, 1.0)
        attempts = session.current_progress().attempts
        rejected = apply_op(session, "submit_confirm", {}, out.retry_at - 0.5)
        assert rejected.kind == "rejected"
        assert rejected.retry_at == out.retry_at
        assert session.current_progress().attempts == attempts
        assert session.phase is Phase.QUALIFICATION

    def test_delay_windows_never_shrink(self, config, library, tutorial_pages):
        state = create_session(config, library, seed=9, tutorial_pages=tutorial_pages)
        enter_qualification(state)
        t = 1.0
        for _ in range(4):
            t = solve_current(state, t)
        delays = []
        for _ in range(7):
            out = fail_current(state, t)
            delays.append(out.retry_at - t)
            t = out.retry_at + 0.1
        assert all(b >= a - 1e-9 for a, b in zip(delays, delays[1:]))
        assert delays[-1] == pytest.approx(state.config.delay_schedule[-1])


class TestSkip:
    def setup_experiment(self, library, tutorial_pages, seed=5):
        state = create_session(StudyConfig(zvt_enabled=False), library,
                               seed=seed, tutorial_pages=tutorial_pages)
        enter_qualification(state)
        t = 1.0
        for _ in range(4):
            t = solve_current(state, t)
        assert state.phase is Phase.EXPERIMENT
        return state, t

    def test_not_eligible_before_thresholds(self, library, tutorial_pages):
        state, t = self.setup_experiment(library, tutorial_pages)
        assert not engine.skip_eligibility(state, t + 10.0)
        with pytest.raises(EngineError):
            apply_op(state, "skip_task", {}, t + 10.0)

    def test_eligible_after_four_failed_attempts(self, library, tutorial_pages):
        state, t = self.setup_experiment(library, tutorial_pages)
        for _ in range(4):
            out = fail_current(state, t)
            t = out.retry_at + 0.1
        assert engine.skip_eligibility(state, t)
        apply_op(state, "skip_task", {}, t)
        assert state.current_progress().skipped is False  # new task
        assert state.task_index == 1

    def test_eligible_after_group_time_limit(self, library, tutorial_pages):
        state, t = self.setup_experiment(library, tutorial_pages)
        first_view = state.current_progress().first_view
        group = state.current_task().group
        limit = state.config.skip_time_limits[group]
        assert not engine.skip_eligibility(state, first_view + limit - 1)
        assert engine.skip_eligibility(state, first_view + limit)

    def test_eligibility_latches(self, library, tutorial_pages):
        state, t = self.setup_experiment(library, tutorial_pages)
        first_view = state.current_progress().first_view
        limit = state.config.skip_time_limits[state.current_task().group]
        assert engine.skip_eligibility(state, first_view + limit)
        # Later queries at earlier effective elapsed time stay eligible.
        assert engine.skip_eligibility(state, first_view + 1.0)

    def test_group_time_limits_match_reference(self, config):
        assert config.skip_time_limits == {TaskGroup.A: 180.0, TaskGroup.B: 600.0,
                                           TaskGroup.C: 720.0, TaskGroup.D: 900.0}


class TestGlobalTimeout:
    def test_tick_past_limit_ends_session(self, session):
        apply_op(session, "tick", {}, 4500.0)
        assert session.phase is Phase.ENDED
        assert session.end_reason is EndReason.TIMEOUT

    def test_tick_before_limit_is_noop(self, session):
        apply_op(session, "tick", {}, 4440.0)
        assert session.phase is Phase.TUTORIAL

    def test_tick_idempotent_after_end(self, session):
        apply_op(session, "tick", {}, 5000.0)
        apply_op(session, "tick", {}, 6000.0)
        assert session.phase is Phase.ENDED
        assert session.end_reason is EndReason.TIMEOUT

    def test_no_interaction_after_end(self, session):
        apply_op(session, "tick", {}, 5000.0)
        with pytest.raises(EngineError):
            apply_op(session, "complete_tutorial", {}, 5001.0)


class TestRedaction:
    def seeded_experiment_view(self, library, tutorial_pages, seed):
        state = create_session(StudyConfig(zvt_enabled=False), library,
                               seed=seed, tutorial_pages=tutorial_pages)
        enter_qualification(state)
        t = 1.0
        for _ in range(4):
            t = solve_current(state, t)
        while state.current_task().group is not TaskGroup.D:
            t = solve_current(state, t)
        return participant_view(state, t)

    def test_group_d_view_shows_ink_blot_only(self, library, tutorial_pages):
        view = self.seeded_experiment_view(library, tutorial_pages, seed=11)
        kinds = [e["kind"] for e in view["task"]["elements"]]
        assert "camouflaged" in kinds
        blob = json.dumps(view)
        assert "actual" not in blob
        assert "effective" not in blob

    def test_live_levels_only_in_tutorial_and_qualification(self, session):
        enter_qualification(session)
        assert "wire_levels" in participant_view(session, 1.0)
        t = 1.0
        for _ in range(4):
            t = solve_current(session, t)
        assert session.phase is Phase.EXPERIMENT
        view = participant_view(session, t)
        assert "wire_levels" not in view
        assert "output_levels" not in view  # no confirm yet on this task

    def test_experiment_outputs_appear_after_confirm(self, session):
        enter_qualification(session)
        t = 1.0
        for _ in range(4):
            t = solve_current(session, t)
        fail_current(session, t)
        view = participant_view(session, t)
        assert "output_levels" in view
        assert "wire_levels" not in view

    def test_counters_in_view(self, session):
        enter_qualification(session)
        task = session.current_task()
        apply_op(session, "toggle_switch", {"switch_id": task.netlist.inputs[0]}, 1.0)
        view = participant_view(session, 1.0)
        assert view["switch_clicks"] == 1
        assert view["confirm_clicks"] == 0
        assert view["score"] == session.config.score_start


class TestDrawing:
    def test_draw_and_clear(self, session):
        enter_qualification(session)
        apply_op(session, "draw_action", {"tool": "pen_red"}, 1.0)
        apply_op(session, "draw_action", {"tool": "pen_red"}, 2.0)
        apply_op(session, "draw_action", {"tool": "eraser"}, 3.0)
        assert session.current_progress().draw_summary == {"pen_red": 2, "eraser": 1}
        apply_op(session, "draw_cleared", {}, 4.0)
        assert session.current_progress().draw_summary == {}


class TestRandomWalks:
    """Model-check the phase machine with random operation sequences."""

    OPS = ("zvt_start_matrix", "zvt_click", "tutorial_goto", "complete_tutorial",
           "revisit_tutorial", "toggle_switch", "submit_confirm", "advance_task",
           "skip_task", "draw_action", "draw_cleared", "tick")

    def random_args(self, rng, op):
        if op == "zvt_click":
            return {"number": rng.randint(1, 90)}
        if op == "tutorial_goto":
            return {"page_index": rng.randint(0, 12)}
        if op == "toggle_switch":
            return {"switch_id": rng.choice(["s0", "s1", "s2", "nope"])}
        if op == "draw_action":
            return {"tool": rng.choice(["pen_red", "pen_green", "pen_blue", "eraser"])}
        return {}

    def test_no_illegal_transitions(self, library, tutorial_pages, zvt_matrices):
        legal = {
            Phase.PSYCHOMETRIC_TEST: {Phase.PSYCHOMETRIC_TEST, Phase.TUTORIAL, Phase.ENDED},
            Phase.TUTORIAL: {Phase.TUTORIAL, Phase.QUALIFICATION, Phase.ENDED},
            Phase.QUALIFICATION: {Phase.QUALIFICATION, Phase.TUTORIAL,
                                  Phase.EXPERIMENT, Phase.ENDED},
            Phase.EXPERIMENT: {Phase.EXPERIMENT, Phase.ENDED},
            Phase.ENDED: {Phase.ENDED},
        }
        rng = random.Random(20240824)
        for walk in range(500):
            zvt = rng.random() < 0.5
            config = StudyConfig(zvt_enabled=zvt)
            state = create_session(config, library, seed=rng.randrange(2**32),
                                   timestamp=0.0,
                                   zvt_matrices=zvt_matrices if zvt else None,
                                   tutorial_pages=tutorial_pages)
            t = 0.0
            for _ in range(rng.randint(1, 200)):
                t += rng.random() * 40
                op = rng.choice(self.OPS)
                before = state.phase
                try:
                    apply_op(state, op, self.random_args(rng, op), t)
                except EngineError:
                    assert state.phase is before  # rejected ops leave phase alone
                    continue
                assert state.phase in legal[before], (walk, op, before, state.phase)
                progress = state.current_progress()
                if progress is not None:
                    assert progress.score >= 0

from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from circuitbench.zvt import (
    INITIAL_REVEAL,
    MATRIX_SHAPE,
    ClickOutcome,
    MatrixKind,
    ScorePolicy,
    ZvtError,
    ZvtMatrix,
    ZvtState,
    parse_matrix,
    register_click,
    score,
    serialize_matrix,
    start_matrix,
)


def complete_matrix(state, start_at, per_click=1.0, misclicks=0):
    """Click through the active matrix; returns the completion time."""
    matrix = state.matrices[state.current]
    t = start_at
    for n in range(1, matrix.max_number + 1):
        for _ in range(misclicks if n == 2 else 0):
            assert register_click(state, matrix.max_number, t) is ClickOutcome.MISCLICK
        outcome = register_click(state, n, t)
        t += per_click
    assert outcome is ClickOutcome.MATRIX_COMPLETE
    return t - per_click


def run_with_times(matrices, test_times):
    """Complete a full run where test matrix i takes test_times[i] seconds."""
    state = ZvtState(matrices=matrices)
    t = 0.0
    for index in range(2):
        start_matrix(state, t)
        t = complete_matrix(state, t, per_click=0.5) + 5.0
    for duration in test_times:
        start_matrix(state, t)
        per_click = duration / 89  # 89 intervals between clicking 1 and 90
        t = complete_matrix(state, t, per_click=per_click) + 5.0
    return state


class TestRevealRule:
    def test_only_three_numbers_before_first_click(self, zvt_matrices):
        state = ZvtState(matrices=zvt_matrices)
        start_matrix(state, 0.0)
        assert state.visible_numbers() == INITIAL_REVEAL

    def test_all_revealed_after_clicking_one(self, zvt_matrices):
        state = ZvtState(matrices=zvt_matrices)
        start_matrix(state, 0.0)
        register_click(state, 1, 1.0)
        assert state.visible_numbers() == frozenset(range(1, 21))

    def test_misclick_does_not_reveal(self, zvt_matrices):
        state = ZvtState(matrices=zvt_matrices)
        start_matrix(state, 0.0)
        assert register_click(state, 5, 1.0) is ClickOutcome.MISCLICK
        assert state.visible_numbers() == INITIAL_REVEAL

    def test_start_twice_errors(self, zvt_matrices):
        state = ZvtState(matrices=zvt_matrices)
        start_matrix(state, 0.0)
        with pytest.raises(ZvtError):
            start_matrix(state, 1.0)


class TestTiming:
    def test_matrix_time_is_end_minus_start(self, zvt_matrices):
        state = ZvtState(matrices=zvt_matrices)
        t = 0.0
        for _ in range(2):
            start_matrix(state, t)
            t = complete_matrix(state, t) + 1.0
        start_matrix(state, t)
        register_click(state, 1, 12.0 + t)
        clock = 12.0 + t
        for n in range(2, 91):
            clock = 12.0 + t + (n - 1) * (66.0 / 89)
            register_click(state, n, clock)
        assert state.end_times[2] - state.start_times[2] == pytest.approx(66.0)

    def test_misclicks_never_alter_timing(self, zvt_matrices):
        clean = run_with_times(zvt_matrices, [60, 60, 60, 60])
        state = ZvtState(matrices=zvt_matrices)
        t = 0.0
        for index in range(2):
            start_matrix(state, t)
            t = complete_matrix(state, t, per_click=0.5) + 5.0
        for _ in range(4):
            start_matrix(state, t)
            t = complete_matrix(state, t, per_click=60 / 89, misclicks=3) + 5.0
        assert score(state).matrix_times == pytest.approx(score(clean).matrix_times)

    def test_millisecond_resolution(self, zvt_matrices):
        state = run_with_times(zvt_matrices, [66.001 * 89 / 89] * 4)
        times = score(state).matrix_times
        assert all(abs(x - 66.001) < 1e-9 for x in times)


class TestScoring:
    def test_processing_speed_is_mean_over_first_three(self, zvt_matrices):
        state = run_with_times(zvt_matrices, [66, 66, 72, 100])
        result = score(state)
        assert result.processing_speed == pytest.approx((66 + 66 + 72) / 3)
        assert not result.excluded

    def test_all_four_policy(self, zvt_matrices):
        state = run_with_times(zvt_matrices, [57, 57, 57, 66])
        result = score(state, ScorePolicy(included_matrices=(1, 2, 3, 4)))
        assert result.processing_speed == pytest.approx(59.25)

    def test_exclusion_over_ten_minutes(self, zvt_matrices):
        state = run_with_times(zvt_matrices, [151, 150, 150, 150.5])
        result = score(state)
        assert result.excluded
        assert result.processing_speed is None

    def test_exactly_six_hundred_not_excluded(self, zvt_matrices):
        # Exact boundary: force the per-matrix times to sum to exactly 600 s.
        state = run_with_times(zvt_matrices, [150, 150, 150, 150])
        for offset, index in enumerate(i for i, m in enumerate(state.matrices)
                                       if m.kind is MatrixKind.TEST):
            state.start_times[index] = 1000.0 * offset
            state.end_times[index] = 1000.0 * offset + 150.0
        result = score(state)
        assert result.matrix_times == (150.0, 150.0, 150.0, 150.0)
        assert not result.excluded

    def test_incomplete_run_cannot_be_scored(self, zvt_matrices):
        state = ZvtState(matrices=zvt_matrices)
        start_matrix(state, 0.0)
        with pytest.raises(ZvtError):
            score(state)


class TestClickLaw:
    @settings(max_examples=50, deadline=None)
    @given(st.integers(min_value=0, max_value=2**31 - 1))
    def test_accepted_sequence_is_contiguous(self, zvt_matrices, seed):
        rng = random.Random(seed)
        state = ZvtState(matrices=zvt_matrices)
        t = 0.0
        start_matrix(state, t)
        matrix = state.matrices[0]
        expected = 1
        for _ in range(300):
            t += rng.random()
            number = rng.randint(1, matrix.max_number)
            outcome = register_click(state, number, t)
            if outcome is ClickOutcome.MISCLICK:
                assert number != expected
            else:
                assert number == expected
                expected += 1
            if outcome is ClickOutcome.MATRIX_COMPLETE:
                break
        accepted = [c.number for c in state.clicks
                    if c.outcome is not ClickOutcome.MISCLICK]
        assert accepted == list(range(1, len(accepted) + 1))

    def test_replay_reproduces_identical_score(self, zvt_matrices):
        state = run_with_times(zvt_matrices, [66, 70, 59, 88])
        replayed = ZvtState(matrices=zvt_matrices)
        current = -1
        for click in state.clicks:
            if click.matrix_index != current:
                start_matrix(replayed, click.timestamp)
                current = click.matrix_index
            register_click(replayed, click.number, click.timestamp)
        assert score(replayed) == score(state)


class TestMatrixData:
    def test_shipped_run_shape(self, zvt_matrices):
        kinds = [m.kind for m in zvt_matrices]
        assert kinds == [MatrixKind.EXAMPLE] * 2 + [MatrixKind.TEST] * 4

    def test_serialization_roundtrip(self, zvt_matrices):
        for matrix in zvt_matrices:
            text = serialize_matrix(matrix)
            assert parse_matrix(text) == matrix

    def test_rejects_gap_in_numbers(self):
        positions = {n: (n % 5, n // 5) for n in range(1, 20)}  # missing 20
        with pytest.raises(ZvtError):
            ZvtMatrix(id="x", kind=MatrixKind.EXAMPLE, positions=positions)

    def test_rejects_shared_cells(self):
        positions = {n: ((n - 1) % 5, (n - 1) // 5) for n in range(1, 21)}
        positions[20] = positions[1]
        with pytest.raises(ZvtError):
            ZvtMatrix(id="x", kind=MatrixKind.EXAMPLE, positions=positions)

    def test_grid_bounds_enforced(self):
        max_number, (cols, rows) = MATRIX_SHAPE[MatrixKind.EXAMPLE]
        positions = {n: ((n - 1) % 5, (n - 1) // 5) for n in range(1, 21)}
        positions[20] = (cols, 0)
        with pytest.raises(ZvtError):
            ZvtMatrix(id="x", kind=MatrixKind.EXAMPLE, positions=positions)

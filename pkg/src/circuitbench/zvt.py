"""Digital number-connection test.

Participants click numbers in ascending order on a grid of shuffled numbers.
A run consists of two example matrices (numbers 1..20) followed by four test
matrices (numbers 1..90). Before the first click on a matrix only the numbers
1, 2 and 3 are visible; the first correct click reveals the rest. The timer
for a matrix starts when '1' is clicked and stops when the final number is
clicked, so misclicks cost the participant time but add no extra penalty.

Matrix layouts are loaded from data files (see ``docs/zvt-format.md``); the
bundled layouts are seeded pseudo-random placements and can be replaced with
licensed layouts of the same shape.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path
from statistics import mean


class ZvtError(Exception):
    pass


class MatrixKind(enum.Enum):
    EXAMPLE = "example"
    TEST = "test"


#: Highest number and fixed grid bounds (columns, rows) per matrix kind.
MATRIX_SHAPE = {
    MatrixKind.EXAMPLE: (20, (5, 4)),
    MatrixKind.TEST: (90, (10, 9)),
}

#: Numbers visible before the first click on a matrix.
INITIAL_REVEAL = frozenset({1, 2, 3})

#: Canonical run composition: two examples, then four test matrices.
RUN_KINDS = (MatrixKind.EXAMPLE, MatrixKind.EXAMPLE,
             MatrixKind.TEST, MatrixKind.TEST, MatrixKind.TEST, MatrixKind.TEST)


@dataclass(frozen=True)
class ZvtMatrix:
    """One matrix layout: an injective placement of 1..max_number on a grid."""

    id: str
    kind: MatrixKind
    positions: dict[int, tuple[int, int]]

    def __post_init__(self):
        max_number, (cols, rows) = MATRIX_SHAPE[self.kind]
        if sorted(self.positions) != list(range(1, max_number + 1)):
            raise ZvtError(f"matrix {self.id}: numbers must be contiguous 1..{max_number}")
        cells = set(self.positions.values())
        if len(cells) != len(self.positions):
            raise ZvtError(f"matrix {self.id}: positions must be injective")
        for number, (c, r) in self.positions.items():
            if not (0 <= c < cols and 0 <= r < rows):
                raise ZvtError(f"matrix {self.id}: number {number} outside the {cols}x{rows} grid")

    @property
    def max_number(self) -> int:
        return MATRIX_SHAPE[self.kind][0]


class ClickOutcome(enum.Enum):
    ADVANCE = "advance"
    MISCLICK = "misclick"
    MATRIX_COMPLETE = "matrix_complete"


@dataclass
class ZvtClick:
    matrix_index: int
    number: int
    timestamp: float
    outcome: ClickOutcome


@dataclass
class ZvtState:
    """Progress through one participant's run of matrices."""

    matrices: tuple[ZvtMatrix, ...]
    current: int = -1  # index into matrices; -1 before the first start_matrix
    next_expected: int = 1
    all_revealed: bool = False
    start_times: dict[int, float] = field(default_factory=dict)
    end_times: dict[int, float] = field(default_factory=dict)
    clicks: list[ZvtClick] = field(default_factory=list)

    def __post_init__(self):
        if tuple(m.kind for m in self.matrices) != RUN_KINDS:
            raise ZvtError("a run needs 2 example matrices followed by 4 test matrices")

    @property
    def active_matrix(self) -> ZvtMatrix | None:
        if 0 <= self.current < len(self.matrices) and self.current not in self.end_times:
            return self.matrices[self.current]
        return None

    @property
    def complete(self) -> bool:
        return len(self.end_times) == len(self.matrices)

    def visible_numbers(self) -> frozenset[int]:
        """Numbers currently shown on the active matrix."""
        matrix = self.active_matrix
        if matrix is None:
            return frozenset()
        if self.all_revealed:
            return frozenset(range(1, matrix.max_number + 1))
        return INITIAL_REVEAL


@dataclass(frozen=True)
class ZvtScore:
    matrix_times: tuple[float, ...]  # seconds per test matrix, in order
    included_matrices: tuple[int, ...]  # 1-based test-matrix indices
    processing_speed: float | None
    excluded: bool


def start_matrix(state: ZvtState, timestamp: float) -> None:
    """Begin the next matrix; only numbers 1-3 are revealed until '1' is clicked."""
    if state.active_matrix is not None:
        raise ZvtError("current matrix is still in progress")
    if state.current + 1 >= len(state.matrices):
        raise ZvtError("no matrices left to start")
    state.current += 1
    state.next_expected = 1
    state.all_revealed = False


def register_click(state: ZvtState, number: int, timestamp: float) -> ClickOutcome:
    """Validate one click against the expected sequence and record it."""
    matrix = state.active_matrix
    if matrix is None:
        raise ZvtError("no matrix in progress")
    if not 1 <= number <= matrix.max_number:
        raise ZvtError(f"unknown number {number} for matrix {matrix.id}")

    if number != state.next_expected:
        outcome = ClickOutcome.MISCLICK
    elif number == matrix.max_number:
        outcome = ClickOutcome.MATRIX_COMPLETE
        state.end_times[state.current] = timestamp
    else:
        outcome = ClickOutcome.ADVANCE
        if number == 1:
            state.start_times[state.current] = timestamp
            state.all_revealed = True
        state.next_expected += 1
    state.clicks.append(ZvtClick(state.current, number, timestamp, outcome))
    return outcome


@dataclass(frozen=True)
class ScorePolicy:
    """Which test matrices feed the processing-speed mean, and the exclusion cap."""

    included_matrices: tuple[int, ...] = (1, 2, 3)
    exclusion_limit_seconds: float = 600.0


def score(state: ZvtState, policy: ScorePolicy = ScorePolicy()) -> ZvtScore:
    """Per-matrix times and processing speed over the four completed test matrices."""
    if not state.complete:
        raise ZvtError("cannot score: matrices are incomplete")
    test_indices = [i for i, m in enumerate(state.matrices) if m.kind == MatrixKind.TEST]
    times = tuple(state.end_times[i] - state.start_times[i] for i in test_indices)
    excluded = sum(times) > policy.exclusion_limit_seconds
    speed = None
    if not excluded and policy.included_matrices:
        speed = mean(times[i - 1] for i in policy.included_matrices)
    return ZvtScore(
        matrix_times=times,
        included_matrices=tuple(policy.included_matrices),
        processing_speed=speed,
        excluded=excluded,
    )


def parse_matrix(text: str, *, source: str = "<string>") -> ZvtMatrix:
    """Parse a matrix data file (see docs/zvt-format.md)."""
    matrix_id = kind = grid = None
    positions: dict[int, tuple[int, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "id":
                matrix_id = parts[1]
            elif parts[0] == "kind":
                kind = MatrixKind(parts[1])
            elif parts[0] == "grid":
                grid = (int(parts[1]), int(parts[2]))
            else:
                number = int(parts[0])
                if number in positions:
                    raise ValueError(f"duplicate number {number}")
                positions[number] = (int(parts[1]), int(parts[2]))
        except (IndexError, ValueError) as exc:
            raise ZvtError(f"{source}:{lineno}: {exc}") from exc
    if matrix_id is None or kind is None:
        raise ZvtError(f"{source}: missing 'id' or 'kind' header")
    if grid is not None and grid != MATRIX_SHAPE[kind][1]:
        raise ZvtError(f"{source}: grid {grid} does not match the fixed {kind.value} shape")
    return ZvtMatrix(id=matrix_id, kind=kind, positions=positions)


def serialize_matrix(matrix: ZvtMatrix) -> str:
    cols, rows = MATRIX_SHAPE[matrix.kind][1]
    lines = [f"id {matrix.id}", f"kind {matrix.kind.value}", f"grid {cols} {rows}"]
    for number in range(1, matrix.max_number + 1):
        c, r = matrix.positions[number]
        lines.append(f"{number} {c} {r}")
    return "\n".join(lines) + "\n"


#: Filenames of the bundled run, in presentation order.
RUN_FILES = ("example1.zvt", "example2.zvt", "test1.zvt", "test2.zvt", "test3.zvt", "test4.zvt")


def load_run(directory: Path | str) -> tuple[ZvtMatrix, ...]:
    """Load the six matrices of a run from a directory of data files."""
    directory = Path(directory)
    matrices = tuple(
        parse_matrix((directory / name).read_text(), source=str(directory / name))
        for name in RUN_FILES
    )
    if tuple(m.kind for m in matrices) != RUN_KINDS:
        raise ZvtError(f"{directory}: run files do not form 2 example + 4 test matrices")
    return matrices

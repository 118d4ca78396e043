"""Task file format, library loader, and task-design validation.

Tasks are stored in a line-oriented UTF-8 text format with three sections
(ELEMENTS / WIRES / META), documented in ``docs/task-format.md``. The
validator checks the declared solution set against exhaustive enumeration,
Boolean nonlinearity of every output, pairwise output independence, and --
for the bundled library -- the reference gate counts per task id.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .circuit import (
    Element,
    ElementKind,
    GateFunction,
    GateTruth,
    Netlist,
    SwitchAssignment,
    Violation,
    Wire,
    assignment_from_string,
    assignment_to_string,
    enumerate_solutions,
    truth_table,
    validate_netlist,
)


class TaskGroup(str, Enum):
    QUALIFICATION = "Qualification"
    A = "A"
    B = "B"
    C = "C"
    D = "D"
    TUTORIAL = "Tutorial"


class TaskParseError(Exception):
    def __init__(self, message: str, line: int | None = None):
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)
        self.line = line


RANDOM_INITIAL = "random"


@dataclass(frozen=True)
class Task:
    """A netlist plus study metadata.

    ``target_outputs`` encodes output kinds top-to-bottom: '1' for a lamp
    (must be powered) and '0' for a danger sign (must stay off).
    ``initial_switches`` is either a fixed assignment or the literal
    ``"random"``.
    """

    id: str
    group: TaskGroup
    netlist: Netlist
    target_outputs: str
    declared_solutions: frozenset[SwitchAssignment]
    initial_switches: SwitchAssignment | str
    skip_time_limit: float
    skip_attempt_limit: int


@dataclass(frozen=True)
class DesignConstraints:
    min_io_nonlinearity: int = 1
    min_output_pair_distance: int = 1
    required_switch_count: int = 3
    outputs_per_group: dict = None

    def __post_init__(self):
        if self.outputs_per_group is None:
            object.__setattr__(
                self,
                "outputs_per_group",
                {TaskGroup.A: 1, TaskGroup.B: 2, TaskGroup.C: 3, TaskGroup.D: 2},
            )


#: Reference parameters for the bundled task library: per task id the gate
#: counts (AND, OR, inverters, camouflaged), target-output string and the
#: exact solution set. ``validate_task`` checks these whenever a task uses
#: one of the bundled ids.
REFERENCE_TASKS: dict[str, dict] = {
    "Q1": {"gates": (2, 0, 0, 0), "targets": "1", "solutions": {"111"}},
    "Q2": {"gates": (1, 1, 1, 0), "targets": "1", "solutions": {"010"}},
    "Q3": {"gates": (0, 2, 2, 0), "targets": "0", "solutions": {"110"}},
    "Q4": {"gates": (1, 2, 0, 0), "targets": "0", "solutions": {"000", "100"}},
    "A1": {"gates": (1, 1, 1, 0), "targets": "1", "solutions": {"001", "100", "101"}},
    "A2": {"gates": (1, 1, 1, 0), "targets": "1", "solutions": {"000", "100", "010"}},
    "B1": {"gates": (3, 3, 3, 0), "targets": "00", "solutions": {"000"}},
    "B2": {"gates": (1, 4, 4, 0), "targets": "00", "solutions": {"101"}},
    "B3": {"gates": (2, 3, 2, 0), "targets": "11", "solutions": {"011"}},
    "B4": {"gates": (3, 3, 2, 0), "targets": "10", "solutions": {"110"}},
    "C1": {"gates": (3, 5, 4, 0), "targets": "001", "solutions": {"011"}},
    "C2": {"gates": (2, 5, 5, 0), "targets": "100", "solutions": {"100"}},
    "C3": {"gates": (7, 3, 8, 0), "targets": "100", "solutions": {"110"}},
    "C4": {"gates": (7, 3, 6, 0), "targets": "011", "solutions": {"100"}},
    "D1": {"gates": (2, 3, 2, 1), "targets": "01", "solutions": {"111"}},
    "D2": {"gates": (2, 3, 2, 1), "targets": "01", "solutions": {"010"}},
}

#: Skip time limits per group in seconds, used by the bundled library.
GROUP_SKIP_TIME_LIMITS = {
    TaskGroup.A: 180.0,
    TaskGroup.B: 600.0,
    TaskGroup.C: 720.0,
    TaskGroup.D: 900.0,
}


def nonlinearity(table) -> int:
    """Minimum Hamming distance of a Boolean function to any affine function.

    Computed via the Walsh-Hadamard transform: nl = 2^(n-1) - max|W|/2.
    ``table`` is a 0/1 vector of length 2^n, n <= 20.
    """
    m = len(table)
    if m < 2 or m & (m - 1):
        raise ValueError(f"table length {m} is not a power of two >= 2")
    if m > (1 << 20):
        raise ValueError("table too large (n > 20)")
    if any(b not in (0, 1) for b in table):
        raise ValueError("table entries must be 0 or 1")
    spectrum = [1 - 2 * b for b in table]
    h = 1
    while h < m:
        for start in range(0, m, 2 * h):
            for i in range(start, start + h):
                a, b = spectrum[i], spectrum[i + h]
                spectrum[i], spectrum[i + h] = a + b, a - b
        h *= 2
    return m // 2 - max(abs(v) for v in spectrum) // 2


def hamming_distance(a, b) -> int:
    if len(a) != len(b):
        raise ValueError("tables differ in length")
    return sum(x != y for x, y in zip(a, b))


# ---------------------------------------------------------------------------
# Task document format


_KIND_TOKENS = {k.value: k for k in ElementKind if k != ElementKind.WIRE}


def parse_task(document: bytes) -> Task:
    """Parse a task document. Syntax errors carry a line number; semantic
    validation (solution sets, nonlinearity, ...) is left to ``validate_task``."""
    try:
        text = document.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise TaskParseError(f"not valid UTF-8: {exc}") from None

    elements: list[Element] = []
    wires: list[Wire] = []
    meta: dict[str, str] = {}
    seen_ids: set[str] = set()
    section = None
    seen_sections: set[str] = set()

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line in ("ELEMENTS", "WIRES", "META"):
            if line in seen_sections:
                raise TaskParseError(f"duplicate section {line}", lineno)
            seen_sections.add(line)
            section = line
            continue
        if section is None:
            raise TaskParseError(f"content before any section header: {line!r}", lineno)
        if section == "ELEMENTS":
            elements.append(_parse_element(line, lineno, seen_ids))
        elif section == "WIRES":
            wires.append(_parse_wire(line, lineno))
        else:
            key, _, value = line.partition(" ")
            if not value:
                raise TaskParseError(f"META line needs a key and a value: {line!r}", lineno)
            if key in meta:
                raise TaskParseError(f"duplicate META key {key!r}", lineno)
            meta[key] = value.strip()

    missing = {"ELEMENTS", "WIRES", "META"} - seen_sections
    if missing:
        raise TaskParseError(f"missing sections: {sorted(missing)}")
    return _task_from_parts(elements, wires, meta)


def _parse_element(line: str, lineno: int, seen_ids: set[str]) -> Element:
    parts = line.split()
    if len(parts) < 4:
        raise TaskParseError(f"element needs 'id kind x y [options]': {line!r}", lineno)
    eid, kind_token, xs, ys, *options = parts
    if eid in seen_ids:
        raise TaskParseError(f"duplicate element id {eid!r}", lineno)
    seen_ids.add(eid)
    kind = _KIND_TOKENS.get(kind_token)
    if kind is None:
        raise TaskParseError(f"unknown element kind {kind_token!r}", lineno)
    try:
        x, y = float(xs), float(ys)
    except ValueError:
        raise TaskParseError(f"bad coordinates in {line!r}", lineno) from None

    opts: dict[str, str] = {}
    for opt in options:
        key, sep, value = opt.partition("=")
        if not sep:
            raise TaskParseError(f"bad element option {opt!r}", lineno)
        opts[key] = value

    truth = None
    if kind in (ElementKind.CAMOUFLAGED_GATE, ElementKind.COVERT_GATE):
        if "actual" not in opts:
            raise TaskParseError(f"obfuscated gate {eid!r} needs actual=<and|or|not>", lineno)
        try:
            actual = GateFunction(opts.pop("actual"))
        except ValueError:
            raise TaskParseError(f"bad actual function for {eid!r}", lineno) from None
        if kind == ElementKind.COVERT_GATE:
            display_token = opts.pop("display", None)
            if display_token is None:
                raise TaskParseError(f"covert gate {eid!r} needs display=<and|or|not>", lineno)
            displayed = _KIND_TOKENS.get(display_token)
            if displayed not in (ElementKind.AND_GATE, ElementKind.OR_GATE, ElementKind.NOT_GATE):
                raise TaskParseError(f"bad display kind for {eid!r}", lineno)
            effective_token = opts.pop("effective", None)
            if effective_token is None:
                raise TaskParseError(f"covert gate {eid!r} needs effective=<ports>", lineno)
            try:
                effective = tuple(int(p) for p in effective_token.split(","))
            except ValueError:
                raise TaskParseError(f"bad effective ports for {eid!r}", lineno) from None
        else:
            displayed = ElementKind.CAMOUFLAGED_GATE
            arity = 1 if actual == GateFunction.NOT else 2
            effective = tuple(range(arity))
        try:
            truth = GateTruth(actual_kind=actual, effective_inputs=effective, displayed_kind=displayed)
        except ValueError as exc:
            raise TaskParseError(str(exc), lineno) from None
    if opts:
        raise TaskParseError(f"unknown element options {sorted(opts)} for {eid!r}", lineno)
    return Element(id=eid, kind=kind, x=x, y=y, truth=truth)


def _parse_wire(line: str, lineno: int) -> Wire:
    parts = line.split()
    if len(parts) != 3 or parts[1] != "->":
        raise TaskParseError(f"wire needs 'src:port -> sink:port': {line!r}", lineno)
    try:
        src, src_port = parts[0].rsplit(":", 1)
        sink, sink_port = parts[2].rsplit(":", 1)
        return Wire(source=src, source_port=int(src_port), sink=sink, sink_port=int(sink_port))
    except ValueError:
        raise TaskParseError(f"bad wire endpoints in {line!r}", lineno) from None


_REQUIRED_META = ("id", "group", "inputs", "outputs", "targets", "solutions", "initial", "skip_time", "skip_attempts")


def _task_from_parts(elements: list[Element], wires: list[Wire], meta: dict[str, str]) -> Task:
    unknown = set(meta) - set(_REQUIRED_META)
    if unknown:
        raise TaskParseError(f"unknown META keys: {sorted(unknown)}")
    missing = [k for k in _REQUIRED_META if k not in meta]
    if missing:
        raise TaskParseError(f"missing META keys: {missing}")
    try:
        group = TaskGroup(meta["group"])
    except ValueError:
        raise TaskParseError(f"unknown group {meta['group']!r}") from None

    netlist = Netlist(
        elements=tuple(elements),
        wires=tuple(wires),
        inputs=tuple(meta["inputs"].split()),
        outputs=tuple(meta["outputs"].split()),
    )
    targets = meta["targets"]
    if any(c not in "01" for c in targets):
        raise TaskParseError(f"targets must be a 0/1 string, got {targets!r}")
    try:
        solutions = frozenset(assignment_from_string(s) for s in meta["solutions"].split())
    except ValueError as exc:
        raise TaskParseError(str(exc)) from None
    if meta["initial"] == RANDOM_INITIAL:
        initial: SwitchAssignment | str = RANDOM_INITIAL
    else:
        try:
            initial = assignment_from_string(meta["initial"])
        except ValueError:
            raise TaskParseError(f"initial must be 'random' or a bit string, got {meta['initial']!r}") from None
    try:
        skip_time = float(meta["skip_time"])
        skip_attempts = int(meta["skip_attempts"])
    except ValueError:
        raise TaskParseError("skip_time/skip_attempts must be numeric") from None
    if skip_time <= 0 or skip_attempts <= 0:
        raise TaskParseError("skip limits must be positive")

    return Task(
        id=meta["id"],
        group=group,
        netlist=netlist,
        target_outputs=targets,
        declared_solutions=solutions,
        initial_switches=initial,
        skip_time_limit=skip_time,
        skip_attempt_limit=skip_attempts,
    )


def serialize_task(task: Task) -> bytes:
    """Canonical inverse of ``parse_task``: parse(serialize(t)) == t and the
    bytes round-trip exactly for documents written by this serializer."""
    lines = ["ELEMENTS"]
    for e in task.netlist.elements:
        opts = ""
        if e.truth is not None:
            opts = f" actual={e.truth.actual_kind.value}"
            if e.kind == ElementKind.COVERT_GATE:
                ports = ",".join(str(p) for p in e.truth.effective_inputs)
                opts = f" display={e.truth.displayed_kind.value}{opts} effective={ports}"
        lines.append(f"{e.id} {e.kind.value} {e.x:g} {e.y:g}{opts}")
    lines.append("WIRES")
    for w in task.netlist.wires:
        lines.append(f"{w.source}:{w.source_port} -> {w.sink}:{w.sink_port}")
    lines.append("META")
    lines.append(f"id {task.id}")
    lines.append(f"group {task.group.value}")
    lines.append("inputs " + " ".join(task.netlist.inputs))
    lines.append("outputs " + " ".join(task.netlist.outputs))
    lines.append(f"targets {task.target_outputs}")
    solutions = " ".join(sorted(assignment_to_string(s) for s in task.declared_solutions))
    lines.append(f"solutions {solutions}")
    if task.initial_switches == RANDOM_INITIAL:
        lines.append("initial random")
    else:
        lines.append(f"initial {assignment_to_string(task.initial_switches)}")
    lines.append(f"skip_time {task.skip_time_limit:g}")
    lines.append(f"skip_attempts {task.skip_attempt_limit}")
    return ("\n".join(lines) + "\n").encode("utf-8")


# ---------------------------------------------------------------------------
# Task-design validation


@dataclass
class TaskValidationReport:
    task_id: str
    violations: list[Violation] = field(default_factory=list)
    notes: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def gate_counts(netlist: Netlist) -> tuple[int, int, int, int]:
    """(AND, OR, inverter, camouflaged) counts. Covert gates count as their
    displayed kind, matching what a participant would tally on screen."""
    counts = {k: 0 for k in ElementKind}
    for e in netlist.elements:
        if e.kind == ElementKind.COVERT_GATE:
            counts[e.truth.displayed_kind] += 1
        else:
            counts[e.kind] += 1
    return (
        counts[ElementKind.AND_GATE],
        counts[ElementKind.OR_GATE],
        counts[ElementKind.NOT_GATE],
        counts[ElementKind.CAMOUFLAGED_GATE],
    )


def validate_task(task: Task, constraints: DesignConstraints = DesignConstraints()) -> TaskValidationReport:
    """Design checks on top of structural netlist validation."""
    report = TaskValidationReport(task_id=task.id)
    netlist_report = validate_netlist(task.netlist)
    report.violations.extend(netlist_report.violations)
    report.notes.extend(netlist_report.notes)
    if not netlist_report.ok:
        return report

    outputs = task.netlist.outputs
    if len(task.target_outputs) != len(outputs):
        report.violations.append(
            Violation("target-length", f"targets {task.target_outputs!r} vs {len(outputs)} outputs")
        )
        return report
    for i, oid in enumerate(outputs):
        kind = task.netlist.element(oid).kind
        expected = ElementKind.LAMP if task.target_outputs[i] == "1" else ElementKind.DANGER_SIGN
        if kind != expected:
            report.violations.append(
                Violation("target-kind", f"output {oid!r} is a {kind.value}, targets say {expected.value}", (oid,))
            )

    n_switches = len(task.netlist.inputs)
    if task.group != TaskGroup.TUTORIAL and n_switches != constraints.required_switch_count:
        report.violations.append(
            Violation("switch-count", f"{n_switches} switches, expected {constraints.required_switch_count}")
        )
    if task.initial_switches != RANDOM_INITIAL and len(task.initial_switches) != n_switches:
        report.violations.append(Violation("initial-length", "initial switch string length mismatch"))

    enumerated = enumerate_solutions(task.netlist)
    if enumerated != set(task.declared_solutions):
        diff = sorted(
            assignment_to_string(a) for a in enumerated.symmetric_difference(task.declared_solutions)
        )
        report.violations.append(
            Violation("solutions-mismatch", f"declared solutions differ from enumeration at {diff}")
        )

    if task.group == TaskGroup.TUTORIAL:
        # Training circuits are deliberately trivial; design constraints on
        # nonlinearity and output independence apply to experiment tasks only.
        return report

    tables = truth_table(task.netlist)
    for oid in outputs:
        nl = nonlinearity(tables[oid])
        if nl < constraints.min_io_nonlinearity:
            report.violations.append(
                Violation("low-nonlinearity", f"output {oid!r} nonlinearity {nl} < {constraints.min_io_nonlinearity}", (oid,))
            )
    for i in range(len(outputs)):
        for j in range(i + 1, len(outputs)):
            ti, tj = tables[outputs[i]], tables[outputs[j]]
            direct = hamming_distance(ti, tj)
            complement = hamming_distance(ti, [1 - b for b in tj])
            if min(direct, complement) < constraints.min_output_pair_distance:
                report.violations.append(
                    Violation(
                        "output-follows-trivially",
                        f"outputs {outputs[i]!r} and {outputs[j]!r} are distance {direct} apart "
                        f"({complement} to complement)",
                        (outputs[i], outputs[j]),
                    )
                )

    reference = REFERENCE_TASKS.get(task.id)
    if reference is not None:
        counts = gate_counts(task.netlist)
        if counts != reference["gates"]:
            report.violations.append(
                Violation("gate-counts", f"gate counts {counts} differ from reference {reference['gates']}")
            )
        if task.target_outputs != reference["targets"]:
            report.violations.append(
                Violation("reference-targets", f"targets {task.target_outputs!r} != reference {reference['targets']!r}")
            )
        declared = {assignment_to_string(s) for s in task.declared_solutions}
        if declared != reference["solutions"]:
            report.violations.append(
                Violation("reference-solutions", f"solutions {sorted(declared)} != reference {sorted(reference['solutions'])}")
            )
    group_outputs = constraints.outputs_per_group.get(task.group)
    if group_outputs is not None and len(outputs) != group_outputs:
        report.violations.append(
            Violation("group-outputs", f"group {task.group.value} tasks need {group_outputs} outputs, found {len(outputs)}")
        )
    return report


# ---------------------------------------------------------------------------
# Library loading


class LibraryError(Exception):
    pass


@dataclass(frozen=True)
class Library:
    """Shipped task set: manifest-ordered groups of validated tasks."""

    groups: dict[TaskGroup, tuple[Task, ...]]

    def tasks(self) -> list[Task]:
        return [t for group in self.groups.values() for t in group]

    def by_id(self) -> dict[str, Task]:
        return {t.id: t for t in self.tasks()}

    def experiment_groups(self) -> dict[TaskGroup, tuple[Task, ...]]:
        return {g: ts for g, ts in self.groups.items() if g in (TaskGroup.A, TaskGroup.B, TaskGroup.C, TaskGroup.D)}

    def qualification(self) -> tuple[Task, ...]:
        return self.groups.get(TaskGroup.QUALIFICATION, ())


MANIFEST_NAME = "manifest.txt"


def load_library(root: Path | str, constraints: DesignConstraints = DesignConstraints()) -> Library:
    """Load and validate every task listed in ``root``'s manifest.

    The manifest has one ``<group> <filename>`` pair per line; groups are
    returned in manifest order. Any validation failure aborts loading.
    """
    root = Path(root)
    manifest = root / MANIFEST_NAME
    if not manifest.is_file():
        raise LibraryError(f"missing manifest: {manifest}")
    groups: dict[TaskGroup, list[Task]] = {}
    for lineno, raw in enumerate(manifest.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            group_token, filename = line.split()
        except ValueError:
            raise LibraryError(f"{manifest}:{lineno}: expected '<group> <filename>'") from None
        try:
            group = TaskGroup(group_token)
        except ValueError:
            raise LibraryError(f"{manifest}:{lineno}: unknown group {group_token!r}") from None
        path = root / filename
        if not path.is_file():
            raise LibraryError(f"{manifest}:{lineno}: missing task file {path}")
        task = parse_task(path.read_bytes())
        report = validate_task(task, constraints)
        if not report.ok:
            details = "; ".join(v.message for v in report.violations)
            raise LibraryError(f"task {task.id} ({filename}) failed validation: {details}")
        groups.setdefault(group, []).append(task)
    return Library(groups={g: tuple(ts) for g, ts in groups.items()})

"""Pure, deterministic model and evaluator for combinational netlists.

A netlist is a DAG of the eight basic elements (battery, switch, AND, OR,
NOT, wire, lamp, danger sign) plus two obfuscated gate kinds: camouflaged
gates (drawn as an ink blot, hiding their function) and covert gates (drawn
as a standard gate that may differ from their actual function, with possibly
dangling input ports).

All operations here are pure functions over immutable values; there is no
shared mutable state, so everything is safe to call concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property


class ElementKind(str, Enum):
    BATTERY = "battery"
    SWITCH = "switch"
    AND_GATE = "and"
    OR_GATE = "or"
    NOT_GATE = "not"
    WIRE = "wire"
    LAMP = "lamp"
    DANGER_SIGN = "danger"
    CAMOUFLAGED_GATE = "camouflaged"
    COVERT_GATE = "covert"


class GateFunction(str, Enum):
    """Actual Boolean function hidden inside an obfuscated gate."""

    AND = "and"
    OR = "or"
    NOT = "not"


#: Number of input ports for each element kind. Obfuscated gates are handled
#: separately: their declared port count follows the displayed symbol.
_FAN_IN = {
    ElementKind.BATTERY: 0,
    ElementKind.SWITCH: 1,
    ElementKind.AND_GATE: 2,
    ElementKind.OR_GATE: 2,
    ElementKind.NOT_GATE: 1,
    ElementKind.LAMP: 1,
    ElementKind.DANGER_SIGN: 1,
}

_FUNCTION_ARITY = {GateFunction.AND: 2, GateFunction.OR: 2, GateFunction.NOT: 1}

OUTPUT_KINDS = (ElementKind.LAMP, ElementKind.DANGER_SIGN)


class CircuitError(Exception):
    """Base class for circuit-model errors."""


class InvalidNetlistError(CircuitError):
    """Raised when an operation is applied to a structurally invalid netlist."""

    def __init__(self, report: "ValidationReport"):
        super().__init__("invalid netlist: " + "; ".join(v.message for v in report.violations))
        self.report = report


class EnumerationCapError(CircuitError):
    """Raised when exhaustive enumeration would exceed the switch-count cap."""


@dataclass(frozen=True)
class GateTruth:
    """Hidden functionality of an obfuscated gate.

    ``effective_inputs`` lists the declared port indices that actually feed
    the function; for covert gates the remaining ports are dangling and
    ignored during evaluation.
    """

    actual_kind: GateFunction
    effective_inputs: tuple[int, ...]
    displayed_kind: ElementKind

    def __post_init__(self):
        if len(self.effective_inputs) != _FUNCTION_ARITY[self.actual_kind]:
            raise ValueError(
                f"{self.actual_kind.value} takes {_FUNCTION_ARITY[self.actual_kind]} "
                f"effective inputs, got {len(self.effective_inputs)}"
            )


@dataclass(frozen=True)
class Element:
    id: str
    kind: ElementKind
    x: float = 0.0
    y: float = 0.0
    truth: GateTruth | None = None

    def __post_init__(self):
        obfuscated = self.kind in (ElementKind.CAMOUFLAGED_GATE, ElementKind.COVERT_GATE)
        if obfuscated and self.truth is None:
            raise ValueError(f"obfuscated gate {self.id!r} needs a GateTruth")
        if not obfuscated and self.truth is not None:
            raise ValueError(f"plain element {self.id!r} must not carry a GateTruth")

    @property
    def fan_in(self) -> int:
        if self.kind == ElementKind.CAMOUFLAGED_GATE:
            return _FUNCTION_ARITY[self.truth.actual_kind]
        if self.kind == ElementKind.COVERT_GATE:
            displayed = self.truth.displayed_kind
            return _FAN_IN.get(displayed, 2)
        return _FAN_IN[self.kind]


@dataclass(frozen=True)
class Wire:
    """Directed edge (source element, source port) -> (sink element, sink port)."""

    source: str
    source_port: int
    sink: str
    sink_port: int


@dataclass(frozen=True)
class Netlist:
    """Circuit graph of a task: elements, wires, and ordered I/O lists.

    ``inputs`` holds switch ids top-to-bottom; ``outputs`` holds lamp and
    danger-sign ids top-to-bottom. Assignment bit 0 refers to ``inputs[0]``.
    """

    elements: tuple[Element, ...]
    wires: tuple[Wire, ...]
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]

    def element(self, element_id: str) -> Element:
        return self.by_id[element_id]

    @cached_property
    def by_id(self) -> dict[str, Element]:
        return {e.id: e for e in self.elements}


SwitchAssignment = tuple[int, ...]


def assignment_from_string(bits: str) -> SwitchAssignment:
    """Parse an assignment string like ``"010"`` (bit 0 = topmost switch)."""
    if not bits or any(c not in "01" for c in bits):
        raise ValueError(f"bad assignment string {bits!r}")
    return tuple(int(c) for c in bits)


def assignment_to_string(assignment: SwitchAssignment) -> str:
    return "".join(str(b) for b in assignment)


@dataclass(frozen=True)
class CircuitState:
    """Result of forward evaluation: one bit per wire and per output."""

    wire_levels: dict[Wire, int]
    output_levels: dict[str, int]


@dataclass(frozen=True)
class OutputVerdict:
    kind: ElementKind
    level: int
    satisfied: bool


@dataclass(frozen=True)
class SolutionVerdict:
    correct: bool
    outputs: dict[str, OutputVerdict]


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    element_ids: tuple[str, ...] = ()


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)
    notes: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_netlist(netlist: Netlist) -> ValidationReport:
    """Structural checks: acyclicity, arity, single drivers, battery-switch
    pairing, and output reachability. Failures are reported, never raised."""
    report = ValidationReport()
    seen: set[str] = set()
    for e in netlist.elements:
        if e.id in seen:
            report.violations.append(Violation("duplicate-id", f"duplicate element id {e.id!r}", (e.id,)))
        seen.add(e.id)
    by_id = {e.id: e for e in netlist.elements}

    drivers: dict[tuple[str, int], list[Wire]] = {}
    fan_out: dict[str, int] = {e.id: 0 for e in netlist.elements}
    for w in netlist.wires:
        if w.source not in by_id or w.sink not in by_id:
            report.violations.append(
                Violation("unknown-endpoint", f"wire references unknown element {w.source!r} or {w.sink!r}")
            )
            continue
        drivers.setdefault((w.sink, w.sink_port), []).append(w)
        fan_out[w.source] += 1

    for e in netlist.elements:
        if e.kind == ElementKind.WIRE:
            report.violations.append(
                Violation("bad-kind", f"{e.id!r}: wire segments are edges, not elements", (e.id,))
            )
            continue
        covert = e.kind == ElementKind.COVERT_GATE
        effective = set(e.truth.effective_inputs) if e.truth else set()
        for port in range(e.fan_in):
            feeding = drivers.get((e.id, port), [])
            if len(feeding) > 1:
                report.violations.append(
                    Violation("multiple-drivers", f"{e.id!r} port {port} has {len(feeding)} drivers", (e.id,))
                )
            elif not feeding and not (covert and port not in effective):
                report.violations.append(
                    Violation("undriven-port", f"{e.id!r} port {port} has no driver", (e.id,))
                )
        for (sink, port), feeding in drivers.items():
            if sink == e.id and port >= e.fan_in:
                report.violations.append(
                    Violation("bad-port", f"{e.id!r} has no input port {port}", (e.id,))
                )
        if covert and effective:
            bad = [p for p in effective if p >= e.fan_in]
            if bad:
                report.violations.append(
                    Violation("bad-effective-port", f"{e.id!r}: effective ports {bad} out of range", (e.id,))
                )
        if e.kind == ElementKind.COVERT_GATE:
            displayed_arity = _FAN_IN.get(e.truth.displayed_kind, 2)
            if displayed_arity != _FUNCTION_ARITY[e.truth.actual_kind]:
                report.notes.append(
                    Violation(
                        "covert-arity-masquerade",
                        f"{e.id!r} displays arity {displayed_arity} but computes arity "
                        f"{_FUNCTION_ARITY[e.truth.actual_kind]}",
                        (e.id,),
                    )
                )

    # Battery-switch pairing: every switch fed by exactly one battery, every
    # battery feeding only switches.
    for e in netlist.elements:
        if e.kind == ElementKind.SWITCH:
            feeding = drivers.get((e.id, 0), [])
            if feeding and any(by_id[w.source].kind != ElementKind.BATTERY for w in feeding):
                report.violations.append(
                    Violation("switch-without-battery", f"switch {e.id!r} is not fed by a battery", (e.id,))
                )
        if e.kind == ElementKind.BATTERY:
            sinks = [w.sink for w in netlist.wires if w.source == e.id]
            if any(by_id[s].kind != ElementKind.SWITCH for s in sinks if s in by_id):
                report.violations.append(
                    Violation("battery-to-non-switch", f"battery {e.id!r} feeds a non-switch element", (e.id,))
                )

    for sid in netlist.inputs:
        if sid not in by_id or by_id[sid].kind != ElementKind.SWITCH:
            report.violations.append(Violation("bad-input", f"input {sid!r} is not a switch", (sid,)))
    if not netlist.outputs:
        report.violations.append(Violation("no-outputs", "netlist declares no outputs"))
    for oid in netlist.outputs:
        if oid not in by_id or by_id[oid].kind not in OUTPUT_KINDS:
            report.violations.append(Violation("bad-output", f"output {oid!r} is not a lamp or danger sign", (oid,)))
        elif fan_out.get(oid, 0) != 0:
            report.violations.append(Violation("output-fan-out", f"output {oid!r} drives other elements", (oid,)))

    order = _topological_order(netlist, by_id)
    if order is None:
        report.violations.append(Violation("cycle", "netlist contains a cycle"))
    else:
        # Output reachability: every element must lie on a path to an output.
        reaches: set[str] = set(oid for oid in netlist.outputs if oid in by_id)
        for eid in reversed(order):
            if eid in reaches:
                for w in netlist.wires:
                    if w.sink == eid:
                        reaches.add(w.source)
        dead = [e.id for e in netlist.elements if e.id not in reaches]
        if dead:
            report.violations.append(
                Violation("unreachable-element", f"elements {dead} cannot reach any output", tuple(dead))
            )
    return report


def _topological_order(netlist: Netlist, by_id: dict[str, Element]) -> list[str] | None:
    """Kahn's algorithm; returns None when the graph has a cycle."""
    indeg = {e.id: 0 for e in netlist.elements}
    succ: dict[str, list[str]] = {e.id: [] for e in netlist.elements}
    for w in netlist.wires:
        if w.source in indeg and w.sink in indeg:
            indeg[w.sink] += 1
            succ[w.source].append(w.sink)
    ready = [eid for eid, d in indeg.items() if d == 0]
    order: list[str] = []
    while ready:
        eid = ready.pop()
        order.append(eid)
        for nxt in succ[eid]:
            indeg[nxt] -= 1
            if indeg[nxt] == 0:
                ready.append(nxt)
    return order if len(order) == len(indeg) else None


def _apply_function(fn: GateFunction, values: list[int]) -> int:
    if fn == GateFunction.AND:
        return values[0] & values[1]
    if fn == GateFunction.OR:
        return values[0] | values[1]
    return 1 - values[0]


def evaluate(netlist: Netlist, assignment: SwitchAssignment) -> CircuitState:
    """Forward-evaluate the netlist under the given switch assignment.

    Obfuscated gates are computed from their hidden ``GateTruth`` over the
    effective inputs only; dangling covert ports are ignored.
    """
    report = validate_netlist(netlist)
    if not report.ok:
        raise InvalidNetlistError(report)
    if len(assignment) != len(netlist.inputs):
        raise ValueError(
            f"assignment length {len(assignment)} does not match switch count {len(netlist.inputs)}"
        )
    by_id = {e.id: e for e in netlist.elements}
    closed = {sid: bool(assignment[i]) for i, sid in enumerate(netlist.inputs)}
    order = _topological_order(netlist, by_id)
    assert order is not None  # validation guarantees acyclicity

    in_wires: dict[tuple[str, int], Wire] = {(w.sink, w.sink_port): w for w in netlist.wires}
    levels: dict[str, int] = {}

    def port_level(eid: str, port: int) -> int:
        wire = in_wires.get((eid, port))
        return levels[wire.source] if wire is not None else 0

    for eid in order:
        e = by_id[eid]
        if e.kind == ElementKind.BATTERY:
            levels[eid] = 1
        elif e.kind == ElementKind.SWITCH:
            levels[eid] = port_level(eid, 0) if closed[eid] else 0
        elif e.kind == ElementKind.AND_GATE:
            levels[eid] = port_level(eid, 0) & port_level(eid, 1)
        elif e.kind == ElementKind.OR_GATE:
            levels[eid] = port_level(eid, 0) | port_level(eid, 1)
        elif e.kind == ElementKind.NOT_GATE:
            levels[eid] = 1 - port_level(eid, 0)
        elif e.kind in (ElementKind.CAMOUFLAGED_GATE, ElementKind.COVERT_GATE):
            values = [port_level(eid, p) for p in e.truth.effective_inputs]
            levels[eid] = _apply_function(e.truth.actual_kind, values)
        else:  # lamp / danger sign
            levels[eid] = port_level(eid, 0)

    wire_levels = {w: levels[w.source] for w in netlist.wires}
    output_levels = {oid: levels[oid] for oid in netlist.outputs}
    return CircuitState(wire_levels=wire_levels, output_levels=output_levels)


def check_solution(netlist: Netlist, assignment: SwitchAssignment) -> SolutionVerdict:
    """A solution is correct iff every lamp is powered and no danger sign is."""
    state = evaluate(netlist, assignment)
    outputs: dict[str, OutputVerdict] = {}
    for oid in netlist.outputs:
        kind = netlist.element(oid).kind
        level = state.output_levels[oid]
        satisfied = level == 1 if kind == ElementKind.LAMP else level == 0
        outputs[oid] = OutputVerdict(kind=kind, level=level, satisfied=satisfied)
    return SolutionVerdict(correct=all(v.satisfied for v in outputs.values()), outputs=outputs)


def all_assignments(switch_count: int) -> list[SwitchAssignment]:
    """All assignments in table order: index i has switch 0 as most significant bit."""
    return [
        tuple((i >> (switch_count - 1 - b)) & 1 for b in range(switch_count))
        for i in range(1 << switch_count)
    ]


def truth_table(netlist: Netlist) -> dict[str, list[int]]:
    """Per-output bit vectors of length 2^(#switches); entry i corresponds to
    the assignment with switch 0 as the most significant bit of i."""
    tables: dict[str, list[int]] = {oid: [] for oid in netlist.outputs}
    for assignment in all_assignments(len(netlist.inputs)):
        state = evaluate(netlist, assignment)
        for oid in netlist.outputs:
            tables[oid].append(state.output_levels[oid])
    return tables


def enumerate_solutions(netlist: Netlist, cap: int = 20) -> set[SwitchAssignment]:
    """Exhaustively enumerate correct assignments. Refuses above ``cap`` switches."""
    n = len(netlist.inputs)
    if n > cap:
        raise EnumerationCapError(f"{n} switches exceeds the exhaustive-search cap of {cap}")
    return {a for a in all_assignments(n) if check_solution(netlist, a).correct}

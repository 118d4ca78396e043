"""Generate the bundled task library.

For every task id in ``REFERENCE_TASKS`` this script searches (with a fixed
seed) for per-output expression trees over AND/OR/NOT whose combined gate
counts match the reference exactly, whose joint solution set matches the
reference solution set, and whose outputs are non-affine and pairwise
independent. The found circuits are laid out, serialized through the
canonical task serializer, and written to ``src/circuitbench/data/library``.

The library files are frozen; re-running this script reproduces them
byte-for-byte.
"""

from __future__ import annotations

import random
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from circuitbench.circuit import (  # noqa: E402
    Element,
    ElementKind,
    GateFunction,
    GateTruth,
    Netlist,
    Wire,
    assignment_from_string,
)
from circuitbench.tasks import (  # noqa: E402
    GROUP_SKIP_TIME_LIMITS,
    REFERENCE_TASKS,
    Task,
    TaskGroup,
    serialize_task,
    validate_task,
)

OUT_DIR = Path(__file__).resolve().parents[1] / "src" / "circuitbench" / "data" / "library"

# 8-entry truth tables packed with assignment index i at bit (7 - i);
# switch 0 is the most significant bit of the index.
SWITCH_TABLES = {0: 0x0F, 1: 0x33, 2: 0x55}
AFFINE_TABLES = frozenset(
    (0x0F * a0) ^ (0x33 * a1) ^ (0x55 * a2) ^ (0xFF * c) & 0xFF
    for a0 in (0, 1)
    for a1 in (0, 1)
    for a2 in (0, 1)
    for c in (0, 1)
)

# Fixed initial switch positions for qualification tasks (never a solution);
# experiment tasks start from a session-seeded random position.
INITIAL = {"Q1": "000", "Q2": "000", "Q3": "000", "Q4": "010"}

GROUP_OF = {
    "Q": TaskGroup.QUALIFICATION,
    "A": TaskGroup.A,
    "B": TaskGroup.B,
    "C": TaskGroup.C,
    "D": TaskGroup.D,
}


class Node:
    __slots__ = ("op", "children", "switch", "table")

    def __init__(self, op, children=(), switch=None):
        self.op = op  # "and" | "or" | "not" | None for a switch leaf
        self.children = children
        self.switch = switch
        if op is None:
            self.table = SWITCH_TABLES[switch]
        elif op == "not":
            self.table = self.children[0].table ^ 0xFF
        elif op == "and":
            self.table = self.children[0].table & self.children[1].table
        else:
            self.table = self.children[0].table | self.children[1].table

    def leaves(self):
        if self.op is None:
            return {self.switch}
        return set().union(*(c.leaves() for c in self.children))


def random_tree(rng: random.Random, a: int, o: int, n: int) -> Node:
    """Random expression tree using exactly a ANDs, o ORs and n NOTs."""
    total = a + o + n
    if total == 0:
        return Node(None, switch=rng.randrange(3))
    pick = rng.randrange(total)
    if pick < a:
        a1 = rng.randint(0, a - 1)
        o1 = rng.randint(0, o)
        n1 = rng.randint(0, n)
        left = random_tree(rng, a1, o1, n1)
        right = random_tree(rng, a - 1 - a1, o - o1, n - n1)
        return Node("and", _desame(rng, left, right))
    if pick < a + o:
        a1 = rng.randint(0, a)
        o1 = rng.randint(0, o - 1)
        n1 = rng.randint(0, n)
        left = random_tree(rng, a1, o1, n1)
        right = random_tree(rng, a - a1, o - 1 - o1, n - n1)
        return Node("or", _desame(rng, left, right))
    return Node("not", (random_tree(rng, a, o, n - 1),))


def _desame(rng: random.Random, left: Node, right: Node) -> tuple[Node, Node]:
    """Avoid the degenerate AND(s,s) / OR(s,s) shape when both sides are leaves."""
    if left.op is None and right.op is None and left.switch == right.switch:
        right = Node(None, switch=rng.choice([s for s in range(3) if s != left.switch]))
    return left, right


def random_partition(rng: random.Random, total: int, parts: int) -> list[int]:
    cuts = sorted(rng.randint(0, total) for _ in range(parts - 1))
    return [b - a for a, b in zip([0] + cuts, cuts + [total])]


def solution_mask(solutions: set[str]) -> int:
    mask = 0
    for s in solutions:
        mask |= 1 << (7 - int(s, 2))
    return mask


def table_bit(table: int, index: int) -> int:
    return (table >> (7 - index)) & 1


def search_task(task_id: str, rng: random.Random) -> list[Node]:
    ref = REFERENCE_TASKS[task_id]
    a_total, o_total, n_total, camo = ref["gates"]
    if camo:
        # The camouflaged gate hides one extra binary gate on top of the
        # visible counts; alternate between hiding an AND and an OR.
        hidden = rng.choice(["and", "or"])
        if hidden == "and":
            a_total += 1
        else:
            o_total += 1
    targets = ref["targets"]
    k = len(targets)
    want = solution_mask(ref["solutions"])

    for _ in range(2_000_000):
        pa = random_partition(rng, a_total, k)
        po = random_partition(rng, o_total, k)
        pn = random_partition(rng, n_total, k)
        if any(pa[i] + po[i] == 0 for i in range(k)):
            continue  # NOT-only outputs are affine
        trees = [random_tree(rng, pa[i], po[i], pn[i]) for i in range(k)]
        tables = [t.table for t in trees]
        if any(t in AFFINE_TABLES for t in tables):
            continue
        distinct = True
        for i in range(k):
            for j in range(i + 1, k):
                if tables[i] == tables[j] or tables[i] == tables[j] ^ 0xFF:
                    distinct = False
        if not distinct:
            continue
        sat = 0xFF
        for i in range(k):
            sat &= tables[i] if targets[i] == "1" else tables[i] ^ 0xFF
        if sat != want:
            continue
        if set().union(*(t.leaves() for t in trees)) != {0, 1, 2}:
            continue
        return trees
    raise RuntimeError(f"no circuit found for {task_id}")


def build_netlist(task_id: str, trees: list[Node], targets: str, rng: random.Random) -> Netlist:
    elements: list[Element] = []
    wires: list[Wire] = []
    for i in range(3):
        y = 120 + 140 * i
        elements.append(Element(id=f"b{i}", kind=ElementKind.BATTERY, x=40, y=y))
        elements.append(Element(id=f"s{i}", kind=ElementKind.SWITCH, x=120, y=y))
        wires.append(Wire(f"b{i}", 0, f"s{i}", 0))

    camo_gate = [None]
    ref = REFERENCE_TASKS[task_id]
    if ref["gates"][3]:
        # Pick which binary gate to disguise once all gates are emitted.
        camo_gate[0] = "pending"

    counter = [0]
    gate_rows: list[tuple[str, int]] = []  # (gate id, depth) for layout

    def emit(node: Node, depth: int) -> str:
        if node.op is None:
            return f"s{node.switch}"
        gid = f"g{counter[0]}"
        counter[0] += 1
        child_ids = [emit(c, depth + 1) for c in node.children]
        kind = {"and": ElementKind.AND_GATE, "or": ElementKind.OR_GATE, "not": ElementKind.NOT_GATE}[node.op]
        elements.append(Element(id=gid, kind=kind, x=0, y=0))
        gate_rows.append((gid, depth))
        for port, cid in enumerate(child_ids):
            wires.append(Wire(cid, 0, gid, port))
        return gid

    outputs = []
    for i, tree in enumerate(trees):
        oid = f"o{i}"
        okind = ElementKind.LAMP if targets[i] == "1" else ElementKind.DANGER_SIGN
        root = emit(tree, 1)
        elements.append(Element(id=oid, kind=okind, x=860, y=140 + 140 * i))
        wires.append(Wire(root, 0, oid, 0))
        outputs.append(oid)

    if camo_gate[0] == "pending":
        # Disguise one binary gate matching the hidden extra count.
        visible_a, visible_o = ref["gates"][0], ref["gates"][1]
        by_kind = {ElementKind.AND_GATE: [], ElementKind.OR_GATE: []}
        for e in elements:
            if e.kind in by_kind:
                by_kind[e.kind].append(e)
        if len(by_kind[ElementKind.AND_GATE]) > visible_a:
            victim = rng.choice(by_kind[ElementKind.AND_GATE])
            fn = GateFunction.AND
        else:
            victim = rng.choice(by_kind[ElementKind.OR_GATE])
            fn = GateFunction.OR
        disguised = Element(
            id=victim.id,
            kind=ElementKind.CAMOUFLAGED_GATE,
            x=victim.x,
            y=victim.y,
            truth=GateTruth(actual_kind=fn, effective_inputs=(0, 1), displayed_kind=ElementKind.CAMOUFLAGED_GATE),
        )
        elements[elements.index(victim)] = disguised

    # Simple layered layout: deeper gates (closer to the switches) further left.
    max_depth = max((d for _, d in gate_rows), default=1)
    lane: dict[int, int] = {}
    positioned = []
    for e in elements:
        match = next(((gid, d) for gid, d in gate_rows if gid == e.id), None)
        if match is None:
            positioned.append(e)
            continue
        _, depth = match
        x = 200 + (max_depth - depth) * (620 // max(max_depth, 1))
        row = lane.get(depth, 0)
        lane[depth] = row + 1
        positioned.append(Element(id=e.id, kind=e.kind, x=x, y=100 + 60 * row, truth=e.truth))
    return Netlist(
        elements=tuple(positioned),
        wires=tuple(wires),
        inputs=("s0", "s1", "s2"),
        outputs=tuple(outputs),
    )


def build_task(task_id: str, rng: random.Random) -> Task:
    ref = REFERENCE_TASKS[task_id]
    group = GROUP_OF[task_id[0]]
    trees = search_task(task_id, rng)
    netlist = build_netlist(task_id, trees, ref["targets"], rng)
    initial = INITIAL.get(task_id, "random")
    skip_time = GROUP_SKIP_TIME_LIMITS.get(group, 180.0)
    return Task(
        id=task_id,
        group=group,
        netlist=netlist,
        target_outputs=ref["targets"],
        declared_solutions=frozenset(assignment_from_string(s) for s in ref["solutions"]),
        initial_switches=initial if initial == "random" else assignment_from_string(initial),
        skip_time_limit=skip_time,
        skip_attempt_limit=4,
    )


def main():
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    manifest_lines = []
    for task_id in REFERENCE_TASKS:
        rng = random.Random(f"library-v1:{task_id}")
        task = build_task(task_id, rng)
        report = validate_task(task)
        if not report.ok:
            raise SystemExit(f"{task_id}: generated task fails validation: "
                             + "; ".join(v.message for v in report.violations))
        filename = task_id.lower() + ".task"
        (OUT_DIR / filename).write_bytes(serialize_task(task))
        manifest_lines.append(f"{task.group.value} {filename}")
        print(f"{task_id}: ok ({filename})")
    (OUT_DIR / "manifest.txt").write_text("\n".join(manifest_lines) + "\n")


if __name__ == "__main__":
    main()

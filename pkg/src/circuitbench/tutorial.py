"""Data-driven tutorial content.

The tutorial is an ordered sequence of pages defined in a YAML file. Each
page carries body text and optionally a minimal training circuit (a task
file with group ``Tutorial``) whose gate inputs are all wired directly to a
battery-and-switch pair, so the participant can manipulate every input and
watch live wire highlighting.

Tutorial text must stay strategy-neutral: it explains elements and the
objective but never solution approaches, and it never mentions the
obfuscated gate kinds. ``load_tutorial`` enforces both with a banned-phrase
lint.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import yaml

from .circuit import ElementKind
from .tasks import Task, TaskGroup, parse_task


class TutorialError(Exception):
    pass


@dataclass(frozen=True)
class TutorialPage:
    id: str
    title: str
    body: str
    task: Task | None = None


#: Lowercased fragments that would leak solution strategies or reveal the
#: existence of obfuscated gates.
BANNED_PHRASES = (
    "work backwards",
    "work backward",
    "backwards from the output",
    "start from the output",
    "start at the output",
    "trace back",
    "rule out",
    "process of elimination",
    "try every",
    "try all",
    "brute force",
    "brute-force",
    "strategy",
    "camouflage",
    "covert",
    "obfuscat",
    "ink blot",
)


def lint_strategy_neutrality(pages: list[TutorialPage]) -> list[str]:
    """Return one finding per banned phrase occurrence across all pages."""
    findings = []
    for page in pages:
        text = (page.title + " " + page.body).lower()
        for phrase in BANNED_PHRASES:
            if phrase in text:
                findings.append(f"page {page.id!r} contains banned phrase {phrase!r}")
    return findings


def load_tutorial(definition: Path | str) -> list[TutorialPage]:
    """Load the ordered page list; training circuits are resolved relative to
    the definition file. Raises on parse errors or lint findings."""
    path = Path(definition)
    try:
        doc = yaml.safe_load(path.read_text())
    except (OSError, yaml.YAMLError) as exc:
        raise TutorialError(f"cannot load tutorial definition {path}: {exc}") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("pages"), list):
        raise TutorialError(f"{path}: expected a mapping with a 'pages' list")

    pages: list[TutorialPage] = []
    seen: set[str] = set()
    for entry in doc["pages"]:
        missing = {"id", "title", "body"} - set(entry)
        if missing:
            raise TutorialError(f"{path}: page missing keys {sorted(missing)}")
        if entry["id"] in seen:
            raise TutorialError(f"{path}: duplicate page id {entry['id']!r}")
        seen.add(entry["id"])
        task = None
        if "circuit" in entry:
            task = parse_task((path.parent / entry["circuit"]).read_bytes())
            if task.group != TaskGroup.TUTORIAL:
                raise TutorialError(f"training circuit {entry['circuit']} must use group Tutorial")
            _check_training_circuit(task)
        pages.append(TutorialPage(id=entry["id"], title=entry["title"], body=str(entry["body"]).strip(), task=task))

    findings = lint_strategy_neutrality(pages)
    if findings:
        raise TutorialError("tutorial text failed the neutrality lint: " + "; ".join(findings))
    return pages


def _check_training_circuit(task: Task) -> None:
    """Every gate input in a training circuit must come straight from a switch."""
    by_id = task.netlist.by_id
    gate_kinds = (ElementKind.AND_GATE, ElementKind.OR_GATE, ElementKind.NOT_GATE)
    for wire in task.netlist.wires:
        sink = by_id[wire.sink]
        if sink.kind in gate_kinds and by_id[wire.source].kind != ElementKind.SWITCH:
            raise TutorialError(
                f"training circuit {task.id}: gate {sink.id!r} input not wired directly to a switch"
            )

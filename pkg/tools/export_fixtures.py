"""Export redacted task payloads as JSON fixtures for the browser client tests.

Writes frontend/fixtures/tasks.json: one redacted-netlist payload per shipped
task, exactly as the view endpoint would serve it. Rerun after changing the
task library.
"""

from __future__ import annotations

import json
from pathlib import Path

from circuitbench.engine import _redacted_netlist
from circuitbench.tasks import load_library

ROOT = Path(__file__).resolve().parent.parent
DATA = ROOT / "src" / "circuitbench" / "data"
OUT = ROOT / "frontend" / "fixtures" / "tasks.json"


def main() -> None:
    library = load_library(DATA / "library")
    payloads = {}
    for task in library.tasks():
        payloads[task.id] = _redacted_netlist(task)
    OUT.write_text(json.dumps(payloads, indent=2, sort_keys=True) + "\n")
    print(f"wrote {OUT} ({len(payloads)} tasks)")


if __name__ == "__main__":
    main()

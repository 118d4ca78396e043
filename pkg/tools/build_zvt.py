"""Generate the bundled number-connection matrices.

Placements are seeded pseudo-random shuffles of the full grid, so re-running
this script reproduces the data files byte-for-byte. Licensed standardized
layouts can replace these files without code changes.
"""

from __future__ import annotations

import random
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from circuitbench.zvt import MATRIX_SHAPE, MatrixKind, ZvtMatrix, serialize_matrix  # noqa: E402

OUT_DIR = Path(__file__).resolve().parents[1] / "src" / "circuitbench" / "data" / "zvt"

PLAN = [
    ("example1", MatrixKind.EXAMPLE),
    ("example2", MatrixKind.EXAMPLE),
    ("test1", MatrixKind.TEST),
    ("test2", MatrixKind.TEST),
    ("test3", MatrixKind.TEST),
    ("test4", MatrixKind.TEST),
]


def main():
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    for name, kind in PLAN:
        rng = random.Random(f"zvt-v1:{name}")
        max_number, (cols, rows) = MATRIX_SHAPE[kind]
        cells = [(c, r) for r in range(rows) for c in range(cols)]
        rng.shuffle(cells)
        matrix = ZvtMatrix(id=name, kind=kind,
                           positions={n: cells[n - 1] for n in range(1, max_number + 1)})
        (OUT_DIR / f"{name}.zvt").write_text(serialize_matrix(matrix))
        print(f"{name}: ok")


if __name__ == "__main__":
    main()

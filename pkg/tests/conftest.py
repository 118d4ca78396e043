from __future__ import annotations

from pathlib import Path

import pytest

from circuitbench.tasks import Library, load_library
from circuitbench.tutorial import TutorialPage, load_tutorial
from circuitbench.zvt import ZvtMatrix, load_run

DATA_DIR = Path(__file__).resolve().parents[1] / "src" / "circuitbench" / "data"


@pytest.fixture(scope="session")
def library() -> Library:
    return load_library(DATA_DIR / "library")


@pytest.fixture(scope="session")
def tutorial_pages() -> tuple[TutorialPage, ...]:
    return tuple(load_tutorial(DATA_DIR / "tutorial" / "tutorial.yaml"))


@pytest.fixture(scope="session")
def zvt_matrices() -> tuple[ZvtMatrix, ...]:
    return load_run(DATA_DIR / "zvt")

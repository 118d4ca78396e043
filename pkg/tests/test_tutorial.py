from __future__ import annotations

import pytest

from circuitbench.circuit import ElementKind
from circuitbench.tutorial import (
    BANNED_PHRASES,
    TutorialError,
    TutorialPage,
    lint_strategy_neutrality,
    load_tutorial,
)

from conftest import DATA_DIR

TUTORIAL_YAML = DATA_DIR / "tutorial" / "tutorial.yaml"


class TestShippedTutorial:
    def test_loads(self, tutorial_pages):
        assert len(tutorial_pages) >= 8
        assert len({p.id for p in tutorial_pages}) == len(tutorial_pages)

    def test_covers_every_basic_element(self, tutorial_pages):
        text = " ".join(p.title + " " + p.body for p in tutorial_pages).lower()
        for topic in ("battery", "switch", "wire", "and", "or", "not",
                      "lamp", "danger"):
            assert topic in text, topic

    def test_training_circuits_are_switch_fed(self, tutorial_pages):
        gate_kinds = {ElementKind.AND_GATE, ElementKind.OR_GATE, ElementKind.NOT_GATE}
        circuits = [p.task for p in tutorial_pages if p.task is not None]
        assert circuits
        for task in circuits:
            by_id = {e.id: e for e in task.netlist.elements}
            for wire in task.netlist.wires:
                if by_id[wire.sink].kind in gate_kinds:
                    assert by_id[wire.source].kind is ElementKind.SWITCH

    def test_no_obfuscation_mentions(self, tutorial_pages):
        text = " ".join(p.title + " " + p.body for p in tutorial_pages).lower()
        for phrase in ("camouflage", "covert", "ink blot", "obfuscat"):
            assert phrase not in text

    def test_passes_neutrality_lint(self, tutorial_pages):
        assert lint_strategy_neutrality(list(tutorial_pages)) == []


class TestLint:
    def test_banned_phrase_detected(self):
        page = TutorialPage(id="x", title="Hints", body="Just work backwards from the output.")
        findings = lint_strategy_neutrality([page])
        assert findings and "work backwards" in findings[0]

    def test_lint_failure_blocks_load(self, tmp_path):
        bad = tmp_path / "tutorial.yaml"
        bad.write_text("pages:\n  - id: a\n    title: T\n    body: Use brute force.\n")
        with pytest.raises(TutorialError):
            load_tutorial(bad)

    def test_banned_list_includes_strategy_and_obfuscation_terms(self):
        assert "start from the output" in BANNED_PHRASES
        assert "camouflage" in BANNED_PHRASES


class TestDefinitionErrors:
    def test_missing_keys(self, tmp_path):
        bad = tmp_path / "t.yaml"
        bad.write_text("pages:\n  - id: a\n    title: T\n")
        with pytest.raises(TutorialError):
            load_tutorial(bad)

    def test_duplicate_page_id(self, tmp_path):
        bad = tmp_path / "t.yaml"
        bad.write_text("pages:\n"
                       "  - {id: a, title: T, body: one}\n"
                       "  - {id: a, title: U, body: two}\n")
        with pytest.raises(TutorialError):
            load_tutorial(bad)

    def test_shipped_definition_is_the_loaded_one(self, tutorial_pages):
        assert tuple(load_tutorial(TUTORIAL_YAML)) == tutorial_pages

"""Workspace execution against the built-in fixture language."""

from __future__ import annotations

from pathlib import Path

import pytest

from docdrift._fsutil import fingerprint_tree
from docdrift.corpus import extract_functions, filter_eligible, get_adapter
from docdrift.execution import (
    ExecutionLimits,
    ExecutionOutcome,
    TestStatus,
    execute_suite,
)
from docdrift.execution.types import RawRunArtifacts
from docdrift.generation.types import (
    BehaviorItem,
    GeneratedTestSuite,
    SynthesizedImpl,
    TestCase,
)

LIMITS = ExecutionLimits(per_test_timeout=1.0, build_timeout=30.0)


def _suite(*sources: str) -> GeneratedTestSuite:
    tests = tuple(
        TestCase(f"test_{i:03d}", BehaviorItem(i, f"case {i}"), src)
        for i, src in enumerate(sources, start=1)
    )
    return GeneratedTestSuite(tests=tests)


@pytest.fixture()
def subject(tmp_path: Path) -> Path:
    root = tmp_path / "subject"
    root.mkdir()
    (root / "calc.mini").write_text(
        "#doc Returns the given number increased by one.\n"
        "fn inc(x) = x + 1\n"
        "\n"
        "#doc Loops forever, counting.\n"
        "fn spin(x) = spin(x + 1)\n",
        encoding="utf-8",
    )
    return root


def _target(root: Path, name: str = "inc"):
    fns = filter_eligible(extract_functions(root, get_adapter("minilang")))
    return next(fn for fn in fns if fn.qualified_name == name)


def test_passing_suite_on_correct_body(subject):
    outcome = execute_suite(
        subject, _target(subject), _suite("test test_001: inc(1) == 2"),
        get_adapter("minilang"), limits=LIMITS,
    )
    assert outcome.compiled
    assert outcome.results == {"test_001": TestStatus.PASS}


def test_failing_suite_on_wrong_body(subject):
    (subject / "calc.mini").write_text(
        "#doc Returns the given number increased by one.\nfn inc(x) = x - 1\n",
        encoding="utf-8",
    )
    outcome = execute_suite(
        subject, _target(subject), _suite("test test_001: inc(1) == 2"),
        get_adapter("minilang"), limits=LIMITS,
    )
    assert outcome.results == {"test_001": TestStatus.FAIL}


def test_syntax_error_in_suite_means_not_compiled(subject):
    outcome = execute_suite(
        subject, _target(subject), _suite("test test_001: inc(1 == 2"),
        get_adapter("minilang"), limits=LIMITS,
    )
    assert not outcome.compiled
    assert outcome.results == {}
    assert outcome.compile_errors


def test_timeout_hits_only_the_looping_test(subject):
    outcome = execute_suite(
        subject, _target(subject),
        _suite("test test_001: spin(0) == 0", "test test_002: inc(1) == 2"),
        get_adapter("minilang"), limits=LIMITS,
    )
    assert outcome.results["test_001"] is TestStatus.TIMEOUT
    assert outcome.results["test_002"] is TestStatus.PASS


def test_crash_is_distinct_from_fail(subject):
    outcome = execute_suite(
        subject, _target(subject),
        _suite("test test_001: inc(1) / 0 == 1", "test test_002: inc(1) == 99"),
        get_adapter("minilang"), limits=LIMITS,
    )
    assert outcome.results["test_001"] is TestStatus.CRASH
    assert outcome.results["test_002"] is TestStatus.FAIL


def test_impl_override_changes_results_in_workspace_only(subject):
    fn = _target(subject)
    before = fingerprint_tree(subject)
    outcome = execute_suite(
        subject, fn, _suite("test test_001: inc(1) == 0"),
        get_adapter("minilang"),
        SynthesizedImpl(source_text="fn inc(x) = x - 1", signature="fn inc(x)"),
        limits=LIMITS,
    )
    assert outcome.results == {"test_001": TestStatus.PASS}
    assert fingerprint_tree(subject) == before


def test_subject_fingerprint_unchanged_by_runs(subject):
    before = fingerprint_tree(subject)
    for _ in range(2):
        execute_suite(
            subject, _target(subject), _suite("test test_001: inc(1) == 2"),
            get_adapter("minilang"), limits=LIMITS,
        )
    assert fingerprint_tree(subject) == before


def test_results_cover_every_test_when_compiled(subject):
    class LossyAdapter(type(get_adapter("minilang"))):
        def parse_run(self, raw: RawRunArtifacts) -> ExecutionOutcome:
            outcome = super().parse_run(raw)
            if not outcome.compiled:
                return outcome
            trimmed = dict(list(sorted(outcome.results.items()))[:1])
            return ExecutionOutcome(compiled=True, results=trimmed)

    outcome = execute_suite(
        subject, _target(subject),
        _suite("test test_001: inc(1) == 2", "test test_002: inc(2) == 3"),
        LossyAdapter(), limits=LIMITS,
    )
    assert set(outcome.results) == {"test_001", "test_002"}
    assert outcome.results["test_002"] is TestStatus.CRASH  # filled in, not dropped


def test_determinism_on_fixture_adapter(subject):
    suite = _suite("test test_001: inc(1) == 2", "test test_002: inc(2) == 4")
    runs = [
        execute_suite(subject, _target(subject), suite, get_adapter("minilang"), limits=LIMITS)
        for _ in range(2)
    ]
    assert runs[0] == runs[1]


def test_empty_test_body_is_rejected(subject):
    suite = GeneratedTestSuite(
        tests=(TestCase("test_001", BehaviorItem(1, "b"), "   "),)
    )
    with pytest.raises(ValueError):
        execute_suite(subject, _target(subject), suite, get_adapter("minilang"), limits=LIMITS)


def test_outcome_invariant_uncompiled_cannot_have_results():
    with pytest.raises(ValueError):
        ExecutionOutcome(compiled=False, results={"t": TestStatus.PASS})

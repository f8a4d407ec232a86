"""Workspace orchestration: materialize, run, normalize.

The subject tree is treated as read-only; every run happens in a scratch
copy. Whatever the toolchain reports is normalized so that a compiled run
always carries exactly one status per suite test (tests that produced no
verdict line are recorded as crashes).
"""

from __future__ import annotations

import shutil
import tempfile
from pathlib import Path
from typing import TYPE_CHECKING

from ..errors import SandboxError
from ..generation.types import GeneratedTestSuite, SynthesizedImpl
from .types import (
    ExecutionLimits,
    ExecutionOutcome,
    RawRunArtifacts,
    TestStatus,
    Workspace,
)

if TYPE_CHECKING:  # avoids a circular import at runtime
    from ..corpus.adapter import SubjectAdapter
    from ..corpus.types import DocumentedFunction


def run_with_timeout(
    workspace: Workspace,
    adapter: "SubjectAdapter",
    per_test_timeout: float,
    build_timeout: float | None = None,
) -> RawRunArtifacts:
    """One toolchain invocation with the per-test limit applied.

    A test over its limit is reported as Timeout; the rest of the suite still
    runs. The optional whole-run budget guards against a wedged toolchain.
    """
    return adapter.run(
        workspace, per_test_timeout=per_test_timeout, build_timeout=build_timeout
    )


def _persist_artifacts(artifacts_dir: Path, label: str, raw: RawRunArtifacts) -> None:
    artifacts_dir.mkdir(parents=True, exist_ok=True)
    (artifacts_dir / f"{label}.stdout.txt").write_text(raw.stdout, encoding="utf-8")
    (artifacts_dir / f"{label}.stderr.txt").write_text(raw.stderr, encoding="utf-8")
    (artifacts_dir / f"{label}.exit").write_text(str(raw.exit_code) + "\n", encoding="utf-8")


def execute_suite(
    subject_root: Path,
    fn: "DocumentedFunction",
    suite: GeneratedTestSuite,
    adapter: "SubjectAdapter",
    impl_override: SynthesizedImpl | None = None,
    *,
    limits: ExecutionLimits | None = None,
    artifacts_dir: Path | None = None,
    artifact_label: str = "run",
    keep_workspace: bool = False,
) -> ExecutionOutcome:
    """Run ``suite`` against the subject (optionally with the regenerated
    implementation swapped in) and return a normalized outcome."""
    limits = limits or ExecutionLimits()
    for test in suite.tests:
        if not test.source_text.strip():
            raise ValueError(f"test {test.name} has an empty body; complete the suite first")
    if impl_override is not None and impl_override.signature != fn.signature:
        raise SandboxError(
            f"implementation override signature {impl_override.signature!r} "
            f"does not match {fn.signature!r}"
        )

    scratch = Path(tempfile.mkdtemp(prefix="docdrift-ws-"))
    try:
        workspace = adapter.materialize_test_workspace(
            Path(subject_root), fn, suite, impl_override, scratch
        )
        raw = run_with_timeout(
            workspace, adapter, limits.per_test_timeout, limits.build_timeout
        )
        if artifacts_dir is not None:
            _persist_artifacts(Path(artifacts_dir), artifact_label, raw)
        outcome = adapter.parse_run(raw)
        return _normalize(outcome, suite)
    finally:
        if not keep_workspace:
            shutil.rmtree(scratch, ignore_errors=True)


def _normalize(outcome: ExecutionOutcome, suite: GeneratedTestSuite) -> ExecutionOutcome:
    if not outcome.compiled:
        return outcome
    results: dict[str, TestStatus] = {}
    for name in suite.names:
        results[name] = outcome.results.get(name, TestStatus.CRASH)
    return ExecutionOutcome(
        compiled=True, diagnostics=outcome.diagnostics, results=results
    )

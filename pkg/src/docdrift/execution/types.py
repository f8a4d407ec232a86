"""Value types describing workspaces, toolchain runs, and their outcomes."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path


class InjectedKind(enum.Enum):
    TESTS_ONLY = "tests_only"
    TESTS_WITH_IMPL_OVERRIDE = "tests_with_impl_override"


class DiagnosticKind(enum.Enum):
    COMPILE_ERROR = "compile_error"
    WARNING = "warning"


class TestStatus(enum.Enum):
    __test__ = False

    PASS = "pass"
    FAIL = "fail"
    TIMEOUT = "timeout"
    CRASH = "crash"

    @property
    def counts_as_failure(self) -> bool:
        """Timeout and Crash collapse onto Fail for transition purposes."""
        return self is not TestStatus.PASS


@dataclass(frozen=True)
class Diagnostic:
    kind: DiagnosticKind
    message: str
    location: tuple[str, int] | None = None

    def __post_init__(self) -> None:
        if self.kind is DiagnosticKind.COMPILE_ERROR and not self.message.strip():
            raise ValueError("compile errors must carry a message")

    def render(self) -> str:
        prefix = "error" if self.kind is DiagnosticKind.COMPILE_ERROR else "warning"
        if self.location is not None:
            file, line = self.location
            return f"{prefix}: {file}:{line}: {self.message}"
        return f"{prefix}: {self.message}"


@dataclass(frozen=True)
class Workspace:
    """A scratch copy of the subject with generated material injected.

    The scratch root is always disjoint from the subject root; the subject is
    never written to.
    """

    root: Path
    subject_fingerprint: str
    injected: InjectedKind
    test_file: str = ""


@dataclass(frozen=True)
class RawRunArtifacts:
    """Unparsed output of one toolchain invocation, persisted for audit."""

    stdout: str
    stderr: str
    exit_code: int
    command: tuple[str, ...] = ()


@dataclass(frozen=True)
class ExecutionOutcome:
    """Normalized result of running one suite: did it build, and what passed."""

    compiled: bool
    diagnostics: tuple[Diagnostic, ...] = ()
    results: dict[str, TestStatus] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.compiled and self.results:
            raise ValueError("an uncompiled run cannot carry per-test results")

    @property
    def compile_errors(self) -> tuple[Diagnostic, ...]:
        return tuple(d for d in self.diagnostics if d.kind is DiagnosticKind.COMPILE_ERROR)

    @property
    def failed(self) -> tuple[str, ...]:
        return tuple(
            name for name, status in sorted(self.results.items()) if status.counts_as_failure
        )

    @property
    def passed(self) -> tuple[str, ...]:
        return tuple(
            name for name, status in sorted(self.results.items()) if status is TestStatus.PASS
        )


@dataclass(frozen=True)
class ExecutionLimits:
    """Timeouts for one suite run. Zero or negative timeouts are rejected at
    configuration load, not here."""

    per_test_timeout: float = 30.0
    build_timeout: float = 300.0

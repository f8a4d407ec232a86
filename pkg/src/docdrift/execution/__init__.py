from .runner import execute_suite, run_with_timeout
from .types import (
    Diagnostic,
    DiagnosticKind,
    ExecutionLimits,
    ExecutionOutcome,
    InjectedKind,
    RawRunArtifacts,
    TestStatus,
    Workspace,
)

__all__ = [
    "Diagnostic",
    "DiagnosticKind",
    "ExecutionLimits",
    "ExecutionOutcome",
    "InjectedKind",
    "RawRunArtifacts",
    "TestStatus",
    "Workspace",
    "execute_suite",
    "run_with_timeout",
]

"""Pluggable subject adapters: one per subject-code ecosystem.

An adapter knows how to pull documented functions out of a source tree, drop
generated tests (and optionally a regenerated implementation) into a scratch
copy, run the ecosystem's toolchain, and read its per-test output back.
"""

from __future__ import annotations

import abc
from pathlib import Path

from ..errors import ConfigError
from ..execution.types import (
    Diagnostic,
    ExecutionOutcome,
    RawRunArtifacts,
    Workspace,
)
from ..generation.types import GeneratedTestSuite, SynthesizedImpl, TestSyntax
from .types import DocumentedFunction, ExtractionWarning


class SubjectAdapter(abc.ABC):
    """Contract every subject-language driver fulfils."""

    #: registry key, e.g. "minilang" or "python"
    name: str = ""
    #: how this ecosystem spells a test stub / declaration line
    test_syntax: TestSyntax
    #: whether several toolchain invocations may run at once
    parallel_safe_toolchain: bool = True
    #: cap on simultaneous toolchain invocations; None means one per processor
    max_toolchain_parallelism: int | None = None

    @abc.abstractmethod
    def list_documented_functions(
        self, root: Path
    ) -> tuple[list[DocumentedFunction], list[ExtractionWarning]]:
        """Every parsable function under ``root`` that carries documentation."""

    @abc.abstractmethod
    def materialize_test_workspace(
        self,
        subject_root: Path,
        fn: DocumentedFunction,
        suite: GeneratedTestSuite,
        impl_override: SynthesizedImpl | None = None,
        scratch_dir: Path | None = None,
    ) -> Workspace:
        """Copy the subject into a scratch dir and inject the suite (and override).

        Never mutates the subject root.
        """

    @abc.abstractmethod
    def run(
        self,
        workspace: Workspace,
        *,
        per_test_timeout: float | None = None,
        build_timeout: float | None = None,
    ) -> RawRunArtifacts:
        """Invoke the toolchain on the workspace and capture its raw output."""

    @abc.abstractmethod
    def parse_run(self, raw: RawRunArtifacts) -> ExecutionOutcome:
        """Decode the toolchain's output into per-test statuses or diagnostics."""

    def check_subject(self, root: Path) -> list[Diagnostic]:
        """Compile-level health check of the subject itself. Empty means healthy."""
        return []


_REGISTRY: dict[str, type[SubjectAdapter]] = {}


def register_adapter(cls: type[SubjectAdapter]) -> type[SubjectAdapter]:
    if not cls.name:
        raise ValueError("adapter classes must set a non-empty name")
    _REGISTRY[cls.name] = cls
    return cls


def get_adapter(name: str) -> SubjectAdapter:
    """Instantiate the adapter registered under ``name`` (a config key)."""
    # Built-in adapters register on import.
    from . import minilang  # noqa: F401
    from . import python_adapter  # noqa: F401

    try:
        cls = _REGISTRY[name]
    except KeyError:
        known = ", ".join(sorted(_REGISTRY))
        raise ConfigError(f"unknown subject_language {name!r} (known: {known})") from None
    return cls()


def known_adapters() -> list[str]:
    from . import minilang  # noqa: F401
    from . import python_adapter  # noqa: F401

    return sorted(_REGISTRY)

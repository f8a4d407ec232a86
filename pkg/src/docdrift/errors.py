"""Exception types shared across the package."""

from __future__ import annotations


class DocdriftError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(DocdriftError):
    """Configuration file missing, unreadable, or invalid."""


class IoError(DocdriftError):
    """A subject tree or input file could not be read."""


class ProviderError(DocdriftError):
    """The text-generation provider failed (transport, HTTP, or scripting)."""


class EmptyGenerationError(DocdriftError):
    """The provider returned no parsable content for a generation stage."""


class MalformedCompletionError(DocdriftError):
    """A provider response could not be split back into the named test stubs."""


class SignatureMismatchError(DocdriftError):
    """Regenerated code does not carry the original declaration head."""


class ToolchainError(DocdriftError):
    """The subject build/test toolchain is missing or could not be launched."""


class SandboxError(DocdriftError):
    """A scratch workspace could not be materialized."""


class SubjectBrokenError(DocdriftError):
    """The subject tree itself does not build, independent of injected tests."""


class SchemaError(DocdriftError):
    """A dataset manifest record violates the documented schema."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DanglingPairError(DocdriftError):
    """A manifest pair_id references an id that does not exist."""


class MissingPredictionError(DocdriftError):
    """Scoring was asked about an entry that has no prediction."""


class MissingPairError(DocdriftError):
    """A true positive has no pair link, so pair-wise precision is undefined."""


class InsufficientPoolError(DocdriftError):
    """The consistent-entry pool is too small to reach a requested ratio."""


class MissingReportError(DocdriftError):
    """A run directory does not contain a readable run report."""

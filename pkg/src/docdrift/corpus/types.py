"""Domain types for extracted subject functions."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field


class Visibility(enum.Enum):
    PUBLIC = "public"
    NON_PUBLIC = "non_public"


class FunctionKind(enum.Enum):
    ORDINARY = "ordinary"
    CONSTRUCTOR = "constructor"
    ABSTRACT = "abstract"


@dataclass(frozen=True)
class DeclarationContext:
    """Surroundings of a function: its container's member signatures and fields,
    the file's imports, and the container's own documentation (possibly empty)."""

    enclosing_declaration: str
    imports: tuple[str, ...] = ()
    enclosing_doc: str = ""


@dataclass(frozen=True)
class DocumentedFunction:
    """One subject function paired with its documentation; the unit of analysis.

    Immutable after construction and safe to share across workers.
    """

    id: str
    file_path: str
    qualified_name: str
    signature: str
    doc_text: str
    body_text: str
    visibility: Visibility
    kind: FunctionKind
    context: DeclarationContext = field(default_factory=lambda: DeclarationContext(""))

    def __post_init__(self) -> None:
        if not self.doc_text.strip():
            raise ValueError(f"{self.id}: documentation must be non-empty once markers are stripped")
        is_abstract = self.kind is FunctionKind.ABSTRACT
        if is_abstract != (not self.body_text.strip()):
            raise ValueError(f"{self.id}: body must be empty exactly when the function is abstract")
        if self.context.enclosing_declaration:
            hits = self.context.enclosing_declaration.count(self.signature)
            if hits != 1:
                raise ValueError(
                    f"{self.id}: enclosing declaration must contain the signature exactly once"
                    f" (found {hits})"
                )

    @property
    def is_eligible(self) -> bool:
        return (
            self.visibility is Visibility.PUBLIC
            and self.kind is FunctionKind.ORDINARY
            and bool(self.doc_text.strip())
        )


@dataclass(frozen=True)
class ExtractionWarning:
    """A per-file parse problem. Extraction records these and keeps going."""

    file_path: str
    message: str

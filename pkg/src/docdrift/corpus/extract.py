"""Extraction and eligibility filtering of documented functions."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import TYPE_CHECKING

from ..errors import IoError
from .types import DocumentedFunction, ExtractionWarning, FunctionKind, Visibility

if TYPE_CHECKING:  # import cycle guard: stages -> extract -> adapter -> ...
    from .adapter import SubjectAdapter

logger = logging.getLogger(__name__)


def extract_functions(
    root: Path,
    adapter: "SubjectAdapter",
    *,
    warnings_out: list[ExtractionWarning] | None = None,
) -> list[DocumentedFunction]:
    """All documented functions the adapter can parse under ``root``.

    Deterministic: results are ordered lexicographically by id. Per-file parse
    problems are logged (and appended to ``warnings_out`` when given); they
    never abort the run. An unreadable root does.
    """
    root = Path(root)
    if not root.exists() or not root.is_dir():
        raise IoError(f"subject root {root} does not exist or is not a directory")
    try:
        functions, warnings = adapter.list_documented_functions(root)
    except OSError as exc:
        raise IoError(f"could not read subject tree {root}: {exc}") from exc
    for warning in warnings:
        logger.warning("extraction: %s: %s", warning.file_path, warning.message)
        if warnings_out is not None:
            warnings_out.append(warning)

    functions.sort(key=lambda fn: fn.id)
    seen: set[str] = set()
    unique: list[DocumentedFunction] = []
    for fn in functions:
        if fn.id in seen:
            note = ExtractionWarning(fn.file_path, f"duplicate id {fn.id!r} skipped")
            logger.warning("extraction: %s: %s", note.file_path, note.message)
            if warnings_out is not None:
                warnings_out.append(note)
            continue
        seen.add(fn.id)
        unique.append(fn)
    return unique


def filter_eligible(fns: list[DocumentedFunction]) -> list[DocumentedFunction]:
    """Keep public, ordinary (non-constructor, non-abstract), documented
    functions; order is preserved. Idempotent."""
    return [
        fn
        for fn in fns
        if fn.visibility is Visibility.PUBLIC
        and fn.kind is FunctionKind.ORDINARY
        and fn.doc_text.strip()
    ]


def build_prompt_context(fn: DocumentedFunction) -> str:
    """One text block describing the function's surroundings for prompts.

    Contains the imports, the enclosing declaration with sibling signatures,
    and the target's signature plus documentation. Never contains the
    target's body. Byte-stable for identical input.
    """
    sections: list[str] = []
    if fn.context.imports:
        sections.append("Imports:\n" + "\n".join(fn.context.imports))
    if fn.context.enclosing_doc.strip():
        sections.append("Container documentation:\n" + fn.context.enclosing_doc.strip())
    if fn.context.enclosing_declaration.strip():
        sections.append("Enclosing declaration:\n" + fn.context.enclosing_declaration.rstrip())
    sections.append(
        "Target function:\n"
        + fn.signature
        + "\n\nDocumentation of the target function:\n"
        + fn.doc_text.rstrip()
    )
    return "\n\n".join(sections)


_BODY_REMOVED_MARK = "(body removed; reimplement from the documentation)"


def build_hollowed_container(fn: DocumentedFunction) -> str:
    """The enclosing declaration with the target's body absent and its
    documentation attached: the input for regenerating the implementation."""
    doc_lines = "\n".join(f"  doc: {line}" for line in fn.doc_text.rstrip().splitlines())
    hole = f"{doc_lines}\n{fn.signature}   {_BODY_REMOVED_MARK}"
    container = fn.context.enclosing_declaration
    if container.strip() and fn.signature in container:
        return container.replace(fn.signature, hole, 1)
    return hole

from .adapter import SubjectAdapter, get_adapter, known_adapters, register_adapter
from .extract import (
    build_hollowed_container,
    build_prompt_context,
    extract_functions,
    filter_eligible,
)
from .types import (
    DeclarationContext,
    DocumentedFunction,
    ExtractionWarning,
    FunctionKind,
    Visibility,
)

__all__ = [
    "DeclarationContext",
    "DocumentedFunction",
    "ExtractionWarning",
    "FunctionKind",
    "SubjectAdapter",
    "Visibility",
    "build_hollowed_container",
    "build_prompt_context",
    "extract_functions",
    "filter_eligible",
    "get_adapter",
    "known_adapters",
    "register_adapter",
]

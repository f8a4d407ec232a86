from .cache import CachingProvider, ResponseCache
from .prompts import TEMPLATE_VERSION, render_template
from .provider import (
    CountingProvider,
    HttpProvider,
    Provider,
    ScriptedProvider,
    prompt_key,
    write_scripted_response,
)
from .stages import (
    DEFAULT_MAX_TESTS,
    build_test_skeleton,
    complete_tests,
    extract_behaviors,
    repair_tests,
    stub_name,
    synthesize_code,
)
from .types import (
    BehaviorItem,
    GeneratedTestSuite,
    PLAIN_TEST_SYNTAX,
    PYTEST_TEST_SYNTAX,
    PromptLog,
    ProviderParams,
    SynthesizedImpl,
    TestCase,
    TestSyntax,
)

__all__ = [
    "BehaviorItem",
    "CachingProvider",
    "CountingProvider",
    "DEFAULT_MAX_TESTS",
    "GeneratedTestSuite",
    "HttpProvider",
    "PLAIN_TEST_SYNTAX",
    "PYTEST_TEST_SYNTAX",
    "PromptLog",
    "Provider",
    "ProviderParams",
    "ResponseCache",
    "ScriptedProvider",
    "SynthesizedImpl",
    "TEMPLATE_VERSION",
    "TestCase",
    "TestSyntax",
    "build_test_skeleton",
    "complete_tests",
    "extract_behaviors",
    "prompt_key",
    "render_template",
    "repair_tests",
    "stub_name",
    "synthesize_code",
    "write_scripted_response",
]

"""The multi-stage generation pipeline.

Stage 1 turns documentation into a list of testable behaviors. Stage 2 builds
a deterministic skeleton with one named stub per behavior. Stage 3 asks the
provider to fill the stubs in; repairs rerun stage 3 with compiler
diagnostics attached. Independently of the tests, one more stage regenerates
the target implementation from its documentation alone.

None of these prompts ever embeds the original body of the function under
analysis; the whole method rests on the tests and the regenerated code being
derived from the documentation and nothing else.
"""

from __future__ import annotations

import re

from ..corpus.extract import build_hollowed_container, build_prompt_context
from ..corpus.types import DocumentedFunction
from ..errors import (
    EmptyGenerationError,
    MalformedCompletionError,
    SignatureMismatchError,
)
from ..execution.types import Diagnostic
from .prompts import render_template
from .provider import Provider
from .types import (
    BehaviorItem,
    GeneratedTestSuite,
    PLAIN_TEST_SYNTAX,
    PromptLog,
    ProviderParams,
    SynthesizedImpl,
    TestCase,
    TestSyntax,
)

DEFAULT_MAX_TESTS = 20

_BULLET_RE = re.compile(r"^\s*(?:[-*•]|\d+[.)])\s*(.+)$")
_FENCE_RE = re.compile(r"```[^\n]*\n(.*?)```", re.DOTALL)


def _log(log: PromptLog | None, stage: str, fn: DocumentedFunction, prompt: str, response: str) -> None:
    if log is not None:
        log.record(stage, fn.id, prompt, response)


def extract_behaviors(
    fn: DocumentedFunction,
    provider: Provider,
    params: ProviderParams,
    *,
    max_items: int = DEFAULT_MAX_TESTS,
    log: PromptLog | None = None,
) -> list[BehaviorItem]:
    """Distill the documentation into one behavior per response line.

    Bullet and numbering markers are stripped; anything left on a non-empty
    line counts as one behavior. Items beyond ``max_items`` are dropped.
    """
    prompt = render_template("behaviors", signature=fn.signature, doc=fn.doc_text)
    response = provider.generate(prompt, params)
    _log(log, "behaviors", fn, prompt, response)

    items: list[BehaviorItem] = []
    for line in response.splitlines():
        stripped = line.strip()
        if not stripped or stripped.startswith("```"):
            continue
        m = _BULLET_RE.match(stripped)
        text = (m.group(1) if m else stripped).strip()
        if text:
            items.append(BehaviorItem(index=len(items) + 1, description=text))
        if len(items) >= max_items:
            break
    if not items:
        raise EmptyGenerationError(f"{fn.id}: provider returned no parsable behaviors")
    return items


def stub_name(index: int) -> str:
    return f"test_{index:03d}"


def build_test_skeleton(
    behaviors: list[BehaviorItem],
    fn: DocumentedFunction,
    syntax: TestSyntax = PLAIN_TEST_SYNTAX,
) -> GeneratedTestSuite:
    """One named stub per behavior, each carrying its description as a comment.

    Names are purely positional (test_001, test_002, ...) and never change
    again: they are the join key between the two execution runs.
    """
    if not behaviors:
        raise ValueError("cannot build a skeleton from an empty behavior list")
    tests = tuple(
        TestCase(
            name=stub_name(item.index),
            behavior=item,
            source_text=syntax.render_stub(stub_name(item.index), item),
        )
        for item in behaviors
    )
    return GeneratedTestSuite(tests=tests, revision=0)


def _code_from_response(response: str) -> str:
    """Prefer fenced code blocks; with none, the whole response is the code."""
    blocks = _FENCE_RE.findall(response)
    if blocks:
        return "\n".join(block.rstrip("\n") for block in blocks)
    return response


def _split_into_tests(
    code: str, suite: GeneratedTestSuite, syntax: TestSyntax
) -> tuple[dict[str, str], str]:
    """Match the response back onto the suite's stub names.

    Returns (name -> source, preamble). Any missing, renamed, or duplicated
    name makes the completion unusable.
    """
    declared = syntax.declared_names(code)
    expected = set(suite.names)
    found = [name for _, name in declared]
    unknown = [name for name in found if name not in expected]
    if unknown:
        raise MalformedCompletionError(
            f"response declares unexpected test(s) {sorted(set(unknown))}; "
            "tests must keep their original names"
        )
    missing = [name for name in suite.names if name not in found]
    if missing:
        raise MalformedCompletionError(f"response is missing test(s) {missing}")
    if len(found) != len(set(found)):
        dupes = sorted({name for name in found if found.count(name) > 1})
        raise MalformedCompletionError(f"response declares test(s) {dupes} more than once")

    declared.sort(key=lambda pair: pair[0])
    preamble = code[: declared[0][0]].strip("\n")
    sources: dict[str, str] = {}
    for i, (offset, name) in enumerate(declared):
        end = declared[i + 1][0] if i + 1 < len(declared) else len(code)
        segment = code[offset:end].rstrip()
        if not segment.strip():
            raise MalformedCompletionError(f"test {name} came back empty")
        sources[name] = segment
    return sources, preamble


def complete_tests(
    skeleton: GeneratedTestSuite,
    fn: DocumentedFunction,
    provider: Provider,
    params: ProviderParams,
    *,
    syntax: TestSyntax = PLAIN_TEST_SYNTAX,
    log: PromptLog | None = None,
) -> GeneratedTestSuite:
    """Fill every stub body. Names and revision (0) are preserved."""
    prompt = render_template(
        "completion",
        context=build_prompt_context(fn),
        language=syntax.language,
        skeleton=skeleton.render(),
    )
    response = provider.generate(prompt, params)
    _log(log, "completion", fn, prompt, response)
    sources, preamble = _split_into_tests(_code_from_response(response), skeleton, syntax)
    return skeleton.with_sources(sources, preamble=preamble)


def repair_tests(
    suite: GeneratedTestSuite,
    diagnostics: list[Diagnostic],
    fn: DocumentedFunction,
    provider: Provider,
    params: ProviderParams,
    *,
    syntax: TestSyntax = PLAIN_TEST_SYNTAX,
    log: PromptLog | None = None,
) -> GeneratedTestSuite:
    """One repair round: provider sees the suite plus verbatim diagnostics.

    The result carries the same test names and ``revision + 1``.
    """
    if not diagnostics:
        raise ValueError("repair requires at least one diagnostic")
    prompt = render_template(
        "repair",
        context=build_prompt_context(fn),
        language=syntax.language,
        tests=suite.render(),
        diagnostics="\n".join(d.render() for d in diagnostics),
    )
    response = provider.generate(prompt, params)
    _log(log, "repair", fn, prompt, response)
    sources, preamble = _split_into_tests(_code_from_response(response), suite, syntax)
    repaired = suite.with_sources(sources, preamble=preamble)
    return GeneratedTestSuite(
        tests=repaired.tests, revision=suite.revision + 1, preamble=repaired.preamble
    )


def synthesize_code(
    fn: DocumentedFunction,
    provider: Provider,
    params: ProviderParams,
    *,
    log: PromptLog | None = None,
) -> SynthesizedImpl:
    """Regenerate the implementation from signature and documentation alone.

    The prompt shows the hollowed container, never the original body. The
    returned code must contain the original declaration head verbatim.
    """
    prompt = render_template(
        "synthesis",
        hollowed=build_hollowed_container(fn),
        signature=fn.signature,
        doc=fn.doc_text,
    )
    response = provider.generate(prompt, params)
    _log(log, "synthesis", fn, prompt, response)
    code = _code_from_response(response).strip("\n")
    if fn.signature not in code:
        raise SignatureMismatchError(
            f"{fn.id}: regenerated code does not keep the declaration head {fn.signature!r}"
        )
    return SynthesizedImpl(source_text=code, signature=fn.signature)

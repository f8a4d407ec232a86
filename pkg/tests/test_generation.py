"""Generation stages, scripted/remote providers, and the response cache."""

from __future__ import annotations

import json
from pathlib import Path

import httpx
import pytest

from docdrift.corpus import DeclarationContext, DocumentedFunction, FunctionKind, Visibility
from docdrift.errors import (
    EmptyGenerationError,
    MalformedCompletionError,
    ProviderError,
    SignatureMismatchError,
)
from docdrift.generation import (
    CachingProvider,
    CountingProvider,
    HttpProvider,
    PLAIN_TEST_SYNTAX,
    PromptLog,
    ProviderParams,
    ResponseCache,
    ScriptedProvider,
    build_test_skeleton,
    complete_tests,
    extract_behaviors,
    repair_tests,
    synthesize_code,
    write_scripted_response,
)
from docdrift.generation.types import BehaviorItem
from docdrift.execution.types import Diagnostic, DiagnosticKind

PARAMS = ProviderParams(model="scripted", temperature=0.0)


def _fn(doc="returns x plus one"):
    return DocumentedFunction(
        id="lib.mini::inc",
        file_path="lib.mini",
        qualified_name="inc",
        signature="fn inc(x)",
        doc_text=doc,
        body_text="x - 1",
        visibility=Visibility.PUBLIC,
        kind=FunctionKind.ORDINARY,
        context=DeclarationContext(enclosing_declaration="fn inc(x)\nfn dec(y)"),
    )


# --- behavior extraction ------------------------------------------------------

def test_extract_behaviors_from_bullets():
    provider = ScriptedProvider(["- if given x then returns x plus one"])
    items = extract_behaviors(_fn(), provider, PARAMS)
    assert items == [BehaviorItem(1, "if given x then returns x plus one")]


def test_extract_behaviors_counts_and_indices():
    provider = ScriptedProvider(["\n".join(f"{i}. behavior {i}" for i in range(1, 6))])
    items = extract_behaviors(_fn(), provider, PARAMS)
    assert [item.index for item in items] == [1, 2, 3, 4, 5]
    assert items[2].description == "behavior 3"


def test_extract_behaviors_empty_response_is_an_error():
    with pytest.raises(EmptyGenerationError):
        extract_behaviors(_fn(), ScriptedProvider(["\n\n  \n"]), PARAMS)


def test_extract_behaviors_truncates_at_cap():
    provider = ScriptedProvider(["\n".join(f"- b{i}" for i in range(40))])
    items = extract_behaviors(_fn(), provider, PARAMS, max_items=20)
    assert len(items) == 20


def test_behaviors_prompt_contains_doc_not_body():
    log = PromptLog()
    provider = ScriptedProvider(["- something"])
    extract_behaviors(_fn(), provider, PARAMS, log=log)
    (record,) = log.records
    assert "returns x plus one" in record["prompt"]
    assert "x - 1" not in record["prompt"]


# --- skeleton -----------------------------------------------------------------

def test_skeleton_names_and_comments():
    behaviors = [BehaviorItem(1, "first"), BehaviorItem(2, "second"), BehaviorItem(3, "third")]
    suite = build_test_skeleton(behaviors, _fn(), PLAIN_TEST_SYNTAX)
    assert suite.names == ("test_001", "test_002", "test_003")
    assert suite.revision == 0
    for test, behavior in zip(suite.tests, behaviors):
        assert behavior.description in test.source_text


def test_skeleton_is_deterministic():
    behaviors = [BehaviorItem(1, "only")]
    a = build_test_skeleton(behaviors, _fn())
    b = build_test_skeleton(behaviors, _fn())
    assert a.render() == b.render()


# --- completion ---------------------------------------------------------------

def _skeleton(n=2):
    return build_test_skeleton([BehaviorItem(i, f"behavior {i}") for i in range(1, n + 1)], _fn())


def test_complete_tests_fills_bodies_and_keeps_names():
    response = "```\ntest test_001: inc(1) == 2\ntest test_002: inc(5) == 6\n```"
    suite = complete_tests(_skeleton(), _fn(), ScriptedProvider([response]), PARAMS)
    assert suite.names == ("test_001", "test_002")
    assert suite.revision == 0
    assert "inc(1) == 2" in suite.tests[0].source_text


def test_complete_tests_missing_stub_is_malformed():
    response = "test test_001: inc(1) == 2"
    with pytest.raises(MalformedCompletionError):
        complete_tests(_skeleton(2), _fn(), ScriptedProvider([response]), PARAMS)


def test_complete_tests_renamed_stub_is_malformed():
    response = "test test_001: inc(1) == 2\ntest test_other: inc(5) == 6"
    with pytest.raises(MalformedCompletionError):
        complete_tests(_skeleton(2), _fn(), ScriptedProvider([response]), PARAMS)


def test_completion_prompt_embeds_context_and_doc():
    log = PromptLog()
    response = "test test_001: inc(1) == 2"
    complete_tests(_skeleton(1), _fn(), ScriptedProvider([response]), PARAMS, log=log)
    (record,) = log.records
    assert "returns x plus one" in record["prompt"]
    assert "fn dec(y)" in record["prompt"]
    assert "x - 1" not in record["prompt"]


def test_unfenced_response_is_taken_whole():
    response = "test test_001: inc(1) == 2\ntest test_002: inc(2) == 3"
    suite = complete_tests(_skeleton(2), _fn(), ScriptedProvider([response]), PARAMS)
    assert "inc(2) == 3" in suite.tests[1].source_text


# --- repair -------------------------------------------------------------------

def _diagnostic(msg="unknown function 'incc'"):
    return Diagnostic(DiagnosticKind.COMPILE_ERROR, msg, ("generated_suite.minitest", 1))


def test_repair_increments_revision_and_keeps_names():
    suite = complete_tests(
        _skeleton(1), _fn(), ScriptedProvider(["test test_001: incc(1) == 2"]), PARAMS
    )
    repaired = repair_tests(
        suite, [_diagnostic()], _fn(), ScriptedProvider(["test test_001: inc(1) == 2"]), PARAMS
    )
    assert repaired.revision == 1
    assert repaired.names == suite.names
    assert "incc" not in repaired.tests[0].source_text


def test_repair_prompt_contains_diagnostics_verbatim():
    log = PromptLog()
    suite = complete_tests(
        _skeleton(1), _fn(), ScriptedProvider(["test test_001: incc(1) == 2"]), PARAMS
    )
    repair_tests(
        suite, [_diagnostic()], _fn(),
        ScriptedProvider(["test test_001: inc(1) == 2"]), PARAMS, log=log,
    )
    record = log.records[-1]
    assert "unknown function 'incc'" in record["prompt"]


def test_repair_that_renames_is_rejected():
    suite = complete_tests(
        _skeleton(1), _fn(), ScriptedProvider(["test test_001: incc(1) == 2"]), PARAMS
    )
    with pytest.raises(MalformedCompletionError):
        repair_tests(
            suite, [_diagnostic()], _fn(), ScriptedProvider(["test test_999: inc(1) == 2"]), PARAMS
        )


def test_repair_requires_diagnostics():
    with pytest.raises(ValueError):
        repair_tests(_skeleton(1), [], _fn(), ScriptedProvider(["x"]), PARAMS)


# --- code synthesis -----------------------------------------------------------

def test_synthesize_code_keeps_signature():
    impl = synthesize_code(_fn(), ScriptedProvider(["```\nfn inc(x) = x + 1\n```"]), PARAMS)
    assert impl.signature == "fn inc(x)"
    assert "x + 1" in impl.source_text


def test_synthesize_code_rejects_changed_parameter_list():
    with pytest.raises(SignatureMismatchError):
        synthesize_code(_fn(), ScriptedProvider(["fn inc(x, y) = x + y"]), PARAMS)


def test_synthesis_prompt_is_hollow():
    log = PromptLog()
    synthesize_code(_fn(), ScriptedProvider(["fn inc(x) = x + 1"]), PARAMS, log=log)
    (record,) = log.records
    assert "fn inc(x)" in record["prompt"]
    assert "returns x plus one" in record["prompt"]
    assert "x - 1" not in record["prompt"]


# --- scripted providers ---------------------------------------------------------

def test_playbook_exhaustion_is_a_provider_error():
    provider = ScriptedProvider(["only one"])
    assert provider.generate("a", PARAMS) == "only one"
    with pytest.raises(ProviderError):
        provider.generate("b", PARAMS)


def test_playbook_dir_replays_in_sorted_order(tmp_path):
    (tmp_path / "0001.txt").write_text("second", encoding="utf-8")
    (tmp_path / "0000.txt").write_text("first", encoding="utf-8")
    provider = ScriptedProvider.from_playbook_dir(tmp_path)
    assert provider.generate("x", PARAMS) == "first"
    assert provider.generate("y", PARAMS) == "second"


def test_hash_dir_matches_exact_prompt(tmp_path):
    write_scripted_response(tmp_path, "the prompt", "the answer")
    provider = ScriptedProvider.from_hash_dir(tmp_path)
    assert provider.generate("the prompt", PARAMS) == "the answer"
    with pytest.raises(ProviderError):
        provider.generate("another prompt", PARAMS)


# --- http provider ---------------------------------------------------------------

def _http_provider(handler, **kwargs):
    return HttpProvider(
        "https://provider.test/v1/chat",
        transport=httpx.MockTransport(handler),
        backoff_seconds=0.0,
        **kwargs,
    )


def test_http_provider_posts_chat_body_and_bearer(monkeypatch):
    seen = {}

    def handler(request: httpx.Request) -> httpx.Response:
        seen["json"] = json.loads(request.content)
        seen["auth"] = request.headers.get("Authorization")
        return httpx.Response(
            200, json={"choices": [{"message": {"content": "generated text"}}]}
        )

    monkeypatch.setenv("TOKEN_VAR", "sekrit")
    provider = _http_provider(handler, auth_env_var="TOKEN_VAR")
    out = provider.generate("hello", ProviderParams(model="m-1", temperature=0.0))
    assert out == "generated text"
    assert seen["json"]["model"] == "m-1"
    assert seen["json"]["temperature"] == 0.0
    assert seen["json"]["messages"] == [{"role": "user", "content": "hello"}]
    assert seen["auth"] == "Bearer sekrit"


def test_http_provider_retries_5xx_then_succeeds():
    calls = {"n": 0}

    def handler(request: httpx.Request) -> httpx.Response:
        calls["n"] += 1
        if calls["n"] < 3:
            return httpx.Response(502, text="bad gateway")
        return httpx.Response(200, json={"choices": [{"message": {"content": "ok"}}]})

    assert _http_provider(handler).generate("p", PARAMS) == "ok"
    assert calls["n"] == 3


def test_http_provider_gives_up_after_retries():
    def handler(request: httpx.Request) -> httpx.Response:
        return httpx.Response(500, text="boom")

    with pytest.raises(ProviderError):
        _http_provider(handler, max_retries=2).generate("p", PARAMS)


def test_http_provider_4xx_fails_fast():
    calls = {"n": 0}

    def handler(request: httpx.Request) -> httpx.Response:
        calls["n"] += 1
        return httpx.Response(401, text="no")

    with pytest.raises(ProviderError):
        _http_provider(handler).generate("p", PARAMS)
    assert calls["n"] == 1


# --- cache ------------------------------------------------------------------------

def test_cache_short_circuits_inner_provider(tmp_path):
    counting = CountingProvider(ScriptedProvider(["resp"]))
    cached = CachingProvider(counting, ResponseCache(tmp_path), "tpl-test")
    assert cached.generate("p", PARAMS) == "resp"
    assert cached.generate("p", PARAMS) == "resp"
    assert counting.calls == 1


def test_cache_keys_differ_by_template_prompt_and_params(tmp_path):
    cache = ResponseCache(tmp_path)
    base = ResponseCache.key("t1", "p", PARAMS)
    assert ResponseCache.key("t2", "p", PARAMS) != base
    assert ResponseCache.key("t1", "q", PARAMS) != base
    assert ResponseCache.key("t1", "p", ProviderParams("other", 0.0)) != base
    assert ResponseCache.key("t1", "p", ProviderParams("scripted", 0.5)) != base
    cache.put(base, "value")
    assert cache.get(base) == "value"
    assert cache.get(ResponseCache.key("t2", "p", PARAMS)) is None


def test_warm_cache_reproduces_outputs_across_provider_instances(tmp_path):
    cache_dir = tmp_path / "cache"
    first = CachingProvider(
        CountingProvider(ScriptedProvider(["answer"])), ResponseCache(cache_dir), "tpl-x"
    )
    assert first.generate("prompt", PARAMS) == "answer"
    exhausted = CountingProvider(ScriptedProvider([]))
    second = CachingProvider(exhausted, ResponseCache(cache_dir), "tpl-x")
    assert second.generate("prompt", PARAMS) == "answer"
    assert exhausted.calls == 0

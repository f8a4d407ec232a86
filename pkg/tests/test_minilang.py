"""Unit tests for the fixture language itself: it is the oracle the
execution tests lean on, so it gets hand-computed expectations here."""

from __future__ import annotations

import pytest

from docdrift.corpus.minilang import lang


def _eval(source: str, expr: str, timeout: float | None = None):
    functions = {d.name: d for d in lang.parse_source(source).functions}
    return lang.evaluate_expression(functions, lang.parse_expression(expr), timeout=timeout)


LIB = """
fn inc(x) = x + 1
fn fact(n) = if n <= 1 then 1 else n * fact(n - 1)
fn spin(x) = spin(x + 1)
fn pick(flag, a, b) = if flag then a else b
"""


@pytest.mark.parametrize(
    "expr,expected",
    [
        ("2 + 3 * 4", 14),
        ("(2 + 3) * 4", 20),
        ("-7 / 2", -4),
        ("7 % 3", 1),
        ("10 - 2 - 3", 5),
        ("1 < 2", True),
        ("2 <= 2", True),
        ("3 != 4", True),
        ("true and false", False),
        ("true or false", True),
        ("not (1 == 2)", True),
        ("if 1 < 2 then 10 else 20", 10),
        ("if 2 < 1 then 10 else 20", 20),
        ("inc(41)", 42),
        ("fact(5)", 120),
        ("pick(false, 1, 2)", 2),
        ("inc(inc(0)) == 2", True),
    ],
)
def test_evaluation_matches_hand_computation(expr, expected):
    assert _eval(LIB, expr) == expected


def test_division_is_floor_division():
    assert _eval(LIB, "7 / 2") == 3
    assert _eval(LIB, "-1 / 2") == -1


@pytest.mark.parametrize("expr", ["1 / 0", "1 % 0", "1 + true", "not 3", "1 == true"])
def test_bad_operations_raise_runtime_errors(expr):
    with pytest.raises(lang.MiniRuntimeError):
        _eval(LIB, expr)


def test_tail_recursion_times_out_instead_of_overflowing():
    with pytest.raises(lang.MiniTimeout):
        _eval(LIB, "spin(0)", timeout=0.2)


def test_short_circuit_avoids_crash():
    assert _eval(LIB, "false and (1 / 0 == 1)") is False
    assert _eval(LIB, "true or (1 / 0 == 1)") is True


def test_parse_errors_are_reported_with_lines():
    parsed = lang.parse_source("fn ok(x) = x + 1\nfn broken(x) = +\n")
    assert [f.name for f in parsed.functions] == ["ok"]
    assert len(parsed.issues) == 1
    assert parsed.issues[0].line == 2


def test_doc_block_attaches_across_blank_and_comment_lines():
    parsed = lang.parse_source(
        "#doc first line\n#doc second line\n\n# ordinary comment\nfn target(x) = x + 1\n"
    )
    (decl,) = parsed.functions
    assert decl.doc == "first line\nsecond line"


def test_later_doc_block_supersedes_an_unattached_one():
    parsed = lang.parse_source("#doc stale\n\n#doc fresh\nfn target(x) = x + 1\n")
    (decl,) = parsed.functions
    assert decl.doc == "fresh"


def test_undocumented_and_abstract_declarations():
    parsed = lang.parse_source("fn plain(x) = x + 1\n#doc has no body\nfn ghost(x)\n")
    plain, ghost = parsed.functions
    assert plain.doc is None
    assert ghost.body is None and ghost.body_text == ""
    assert ghost.signature == "fn ghost(x)"


def test_inline_comments_are_stripped():
    parsed = lang.parse_source("fn f(x) = x + 1  # trailing words\n")
    (decl,) = parsed.functions
    assert decl.body_text == "x + 1"


def test_test_lines_parse_with_sources():
    parsed = lang.parse_source("test test_001: 1 + 1 == 2\n")
    (test,) = parsed.tests
    assert test.name == "test_001"
    assert test.source == "test test_001: 1 + 1 == 2"


def test_name_resolution_flags_unknown_and_bodyless_calls():
    functions = {d.name: d for d in lang.parse_source("fn f(x) = x\nfn ghost(y)").functions}
    expr = lang.parse_expression("f(1) == 1 and missing(2) == 2 and ghost(3) == 3 and f(1, 2) == 1")
    issues = lang.resolve_names(functions, expr, (), "t.mini", 1)
    messages = " | ".join(issue.message for issue in issues)
    assert "unknown function 'missing'" in messages
    assert "'ghost' has no body" in messages
    assert "takes 1 argument(s), got 2" in messages


def test_free_variables_in_tests_are_compile_errors():
    functions = {}
    issues = lang.resolve_names(functions, lang.parse_expression("x + 1 == 2"), (), "t", 1)
    assert any("unknown name 'x'" in issue.message for issue in issues)

"""Canned provider responses for the fixture corpora.

Each entry maps a function name to the behavior list, the completed tests,
and (where phase 2 can be reached) the regenerated implementation the
scripted provider should hand back. The playbook builder below turns these
into the exact ordered response sequence one scan or evaluation will consume:
it evaluates each function's tests against the subject to know whether the
pipeline will ask for a regenerated implementation.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from docdrift.corpus import extract_functions, filter_eligible, get_adapter
from docdrift.corpus.minilang import lang


@dataclass(frozen=True)
class FnResponses:
    behaviors: tuple[str, ...]
    tests: tuple[str, ...]
    impl: str | None = None

    def behaviors_response(self) -> str:
        return "\n".join(f"- {item}" for item in self.behaviors)

    def tests_response(self) -> str:
        return "\n".join(self.tests)


PAIR_RESPONSES: dict[str, FnResponses] = {
    "inc": FnResponses(
        behaviors=("if given a number then the result is one larger",
                   "if given five then the result is six"),
        tests=("test test_001: inc(1) == 2", "test test_002: inc(5) == 6"),
        impl="fn inc(x) = x + 1",
    ),
    "double_of": FnResponses(
        behaviors=("if given two then the result is four",
                   "if given zero then the result is zero"),
        tests=("test test_001: double_of(2) == 4", "test test_002: double_of(0) == 0"),
        impl="fn double_of(x) = x * 2",
    ),
    "abs_value": FnResponses(
        behaviors=("if given a negative number then the result is its negation",
                   "if given a non-negative number then the result is unchanged"),
        tests=("test test_001: abs_value(-3) == 3", "test test_002: abs_value(4) == 4"),
        impl="fn abs_value(x) = if x < 0 then -x else x",
    ),
    "max_of": FnResponses(
        behaviors=("if the second number is larger then it is returned",
                   "if the first number is larger then it is returned"),
        tests=("test test_001: max_of(2, 7) == 7", "test test_002: max_of(9, 1) == 9"),
        impl="fn max_of(a, b) = if a < b then b else a",
    ),
    "clamp_low": FnResponses(
        behaviors=("if the number is below the floor then the floor is returned",
                   "if the number is at or above the floor then it is unchanged"),
        tests=("test test_001: clamp_low(1, 5) == 5", "test test_002: clamp_low(9, 5) == 9"),
        impl="fn clamp_low(x, floor) = if x < floor then floor else x",
    ),
    "is_even": FnResponses(
        behaviors=("if the number is divisible by two then true",
                   "if the number is odd then false"),
        tests=("test test_001: is_even(4)", "test test_002: not is_even(3)"),
        impl="fn is_even(x) = x % 2 == 0",
    ),
    "is_positive": FnResponses(
        behaviors=("if the number is zero then false",
                   "if the number is above zero then true"),
        tests=("test test_001: not is_positive(0)", "test test_002: is_positive(3)"),
        impl="fn is_positive(x) = x > 0",
    ),
    "sign_of": FnResponses(
        behaviors=("if given zero then the result is zero",
                   "if given a positive number then the result is one",
                   "if given a negative number then the result is negative one"),
        tests=(
            "test test_001: sign_of(0) == 0",
            "test test_002: sign_of(8) == 1",
            "test test_003: sign_of(-2) == -1",
        ),
        impl="fn sign_of(x) = if x > 0 then 1 else if x < 0 then -1 else 0",
    ),
    "within_bounds": FnResponses(
        behaviors=("if the number equals a bound then false",
                   "if the number is strictly inside the bounds then true"),
        tests=(
            "test test_001: not within_bounds(1, 1, 9)",
            "test test_002: within_bounds(5, 1, 9)",
        ),
        impl="fn within_bounds(x, low, high) = low < x and x < high",
    ),
    "smallest_of": FnResponses(
        behaviors=("if the third number is smallest then it is returned",
                   "if the first number is smallest then it is returned"),
        tests=(
            "test test_001: smallest_of(5, 4, 2) == 2",
            "test test_002: smallest_of(1, 4, 9) == 1",
        ),
        impl="fn smallest_of(a, b, c) = if a < b and a < c then a else if b < c then b else c",
    ),
}

_ZOO_EXTRA: dict[str, FnResponses] = {
    "triple_of": FnResponses(
        behaviors=("if given two then the result is six",),
        tests=("test test_001: triple_of(2) == 6",),
    ),
    "negate": FnResponses(
        behaviors=("if given three then the result is negative three",),
        tests=("test test_001: negate(3) == -3",),
    ),
    "is_zero": FnResponses(
        behaviors=("if given zero then true", "if given one then false"),
        tests=("test test_001: is_zero(0)", "test test_002: not is_zero(1)"),
    ),
    "square_of": FnResponses(
        behaviors=("if given four then the result is sixteen",),
        tests=("test test_001: square_of(4) == 16",),
    ),
    "add_of": FnResponses(
        behaviors=("if given two and three then the result is five",),
        tests=("test test_001: add_of(2, 3) == 5",),
    ),
    # The next three get deliberately wrong tests: they fail on the original
    # and keep failing on the (correct) regenerated code.
    "half_of": FnResponses(
        behaviors=("if given six then the result is four",
                   "if given eight then the result is four"),
        tests=("test test_001: half_of(6) == 4", "test test_002: half_of(8) == 4"),
        impl="fn half_of(x) = x / 2",
    ),
    "parity_of": FnResponses(
        behaviors=("if given three then the result is zero",
                   "if given two then the result is zero"),
        tests=("test test_001: parity_of(3) == 0", "test test_002: parity_of(2) == 0"),
        impl="fn parity_of(x) = x % 2",
    ),
    "dec_of": FnResponses(
        behaviors=("if given nine then the result is nine",
                   "if given five then the result is four"),
        tests=("test test_001: dec_of(9) == 9", "test test_002: dec_of(5) == 4"),
        impl="fn dec_of(x) = x - 1",
    ),
    # The next two mix one documentation-true test with one test that only
    # passes on the original body: the regenerated code flips it to failing.
    "plus_two": FnResponses(
        behaviors=("if given one then the result is three",
                   "if given zero then the result is three"),
        tests=("test test_001: plus_two(1) == 3", "test test_002: plus_two(0) == 3"),
        impl="fn plus_two(x) = x + 2",
    ),
    "minus_two": FnResponses(
        behaviors=("if given ten then the result is eight",
                   "if given six then the result is two"),
        tests=("test test_001: minus_two(10) == 8", "test test_002: minus_two(6) == 2"),
        impl="fn minus_two(x) = x - 2",
    ),
}

ZOO_RESPONSES: dict[str, FnResponses] = {**PAIR_RESPONSES, **_ZOO_EXTRA}

ZOO_FULL_POSITIVES = set(PAIR_RESPONSES)
ZOO_NO_GATE_POSITIVES = ZOO_FULL_POSITIVES | {"plus_two", "minus_two"}
ZOO_PHASE1_POSITIVES = ZOO_NO_GATE_POSITIVES | {"half_of", "parity_of", "dec_of"}


def _suite_would_fail(root: Path, responses: FnResponses) -> bool:
    """Evaluate the canned tests directly against the subject tree; any
    non-true outcome means the pipeline will go on to regenerate code."""
    declared: dict[str, lang.FunctionDecl] = {}
    for path in sorted(Path(root).rglob("*.mini")):
        for decl in lang.parse_source(path.read_text(encoding="utf-8")).functions:
            declared[decl.name] = decl
    for line in responses.tests:
        expr_src = line.split(":", 1)[1]
        try:
            value = lang.evaluate_expression(declared, lang.parse_expression(expr_src), timeout=5.0)
        except (lang.MiniRuntimeError, lang.MiniTimeout):
            return True
        if value is not True:
            return True
    return False


def build_playbook(
    root: Path,
    responses: dict[str, FnResponses],
    mode: str = "full",
    *,
    function_order: list[str] | None = None,
) -> list[str]:
    """Ordered provider responses for one sequential run over ``root``.

    ``function_order`` overrides the scan order (evaluations process entries
    in manifest order; scans go in function-id order).
    """
    adapter = get_adapter("minilang")
    if function_order is None:
        fns = filter_eligible(extract_functions(Path(root), adapter))
        function_order = [fn.qualified_name for fn in fns]
    playbook: list[str] = []
    for name in function_order:
        spec = responses[name]
        playbook.append(spec.behaviors_response())
        playbook.append(spec.tests_response())
        if mode != "phase1_only" and _suite_would_fail(root, spec):
            if spec.impl is None:
                raise AssertionError(f"fixture bug: {name} needs an impl response")
            playbook.append(spec.impl)
    return playbook


def write_playbook_dir(directory: Path, playbook: list[str]) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for index, response in enumerate(playbook):
        (directory / f"{index:04d}.txt").write_text(response, encoding="utf-8")
    return directory

"""Value types for the generation stages."""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace


@dataclass(frozen=True)
class ProviderParams:
    """Knobs sent with every provider call and recorded in run reports."""

    model: str
    temperature: float = 0.0


@dataclass(frozen=True)
class BehaviorItem:
    """One testable behavior distilled from a documentation block."""

    index: int
    description: str

    def __post_init__(self) -> None:
        if self.index < 1:
            raise ValueError("behavior index must be >= 1")
        if not self.description.strip():
            raise ValueError("behavior description must be non-empty")


@dataclass(frozen=True)
class TestCase:
    __test__ = False  # domain object, not a pytest class

    name: str
    behavior: BehaviorItem
    source_text: str


@dataclass(frozen=True)
class GeneratedTestSuite:
    """A named set of tests plus any suite-level preamble (imports and the like).

    Test names are the join key between the two execution runs, so repairs may
    rewrite bodies but must never rename a test.
    """

    tests: tuple[TestCase, ...]
    revision: int = 0
    preamble: str = ""

    def __post_init__(self) -> None:
        if self.revision < 0:
            raise ValueError("revision must be >= 0")
        names = [t.name for t in self.tests]
        if len(names) != len(set(names)):
            raise ValueError("test names must be unique within a suite")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(t.name for t in self.tests)

    def render(self) -> str:
        """Full suite source: preamble, then each test separated by a blank line."""
        parts = []
        if self.preamble.strip():
            parts.append(self.preamble.rstrip())
        parts.extend(t.source_text.rstrip() for t in self.tests)
        return "\n\n".join(parts) + "\n"

    def with_sources(self, sources: dict[str, str], preamble: str | None = None) -> GeneratedTestSuite:
        """Same names and behaviors, new bodies, revision unchanged."""
        tests = tuple(replace(t, source_text=sources[t.name]) for t in self.tests)
        return replace(
            self,
            tests=tests,
            preamble=self.preamble if preamble is None else preamble,
        )


@dataclass(frozen=True)
class SynthesizedImpl:
    """A re-implementation of the target function written from its documentation."""

    source_text: str
    signature: str


@dataclass(frozen=True)
class TestSyntax:
    """How the subject ecosystem spells a test: stub shape and declaration lines.

    ``decl_pattern`` must be a multiline pattern whose group 1 captures the
    test name at the start of a declaration line; it is what lets a provider
    response be split back into the original named stubs.
    """

    __test__ = False

    language: str
    decl_pattern: re.Pattern[str]
    stub_template: str
    comment_prefix: str = "#"

    def render_stub(self, name: str, behavior: BehaviorItem) -> str:
        description = " ".join(behavior.description.split())
        return self.stub_template.format(name=name, behavior=description)

    def declared_names(self, code: str) -> list[tuple[int, str]]:
        """(line-start offset, name) for every test declaration in ``code``."""
        hits = []
        for m in self.decl_pattern.finditer(code):
            start = code.rfind("\n", 0, m.start()) + 1
            hits.append((start, m.group(1)))
        return hits


# Line-oriented syntax shared by the built-in fixture language; also the
# default when no adapter is in play.
PLAIN_TEST_SYNTAX = TestSyntax(
    language="expression test (one `test NAME: EXPR` line per test)",
    decl_pattern=re.compile(r"^[ \t]*test\s+([A-Za-z_]\w*)\s*:", re.MULTILINE),
    stub_template="test {name}: 0  # {behavior}",
)

PYTEST_TEST_SYNTAX = TestSyntax(
    language="pytest (one `def NAME():` function per test)",
    decl_pattern=re.compile(r"^[ \t]*def\s+(test_\w+)\s*\(", re.MULTILINE),
    stub_template="def {name}():\n    # {behavior}\n    pass",
)


@dataclass
class PromptLog:
    """Append-only record of every prompt/response pair for one analysis.

    Kept per function so concurrent detections never share a file handle.
    """

    path: object = None  # pathlib.Path | None; None keeps records in memory only
    records: list[dict] = field(default_factory=list)

    def record(self, stage: str, function_id: str, prompt: str, response: str) -> None:
        entry = {
            "stage": stage,
            "function_id": function_id,
            "prompt": prompt,
            "response": response,
        }
        self.records.append(entry)
        if self.path is not None:
            import json
            from pathlib import Path

            path = Path(self.path)
            path.parent.mkdir(parents=True, exist_ok=True)
            with path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(entry, sort_keys=True) + "\n")

"""Subject adapter for the built-in expression language.

Everything runs in-process: "compilation" is parsing plus name resolution,
and the per-test report format is one ``NAME (STATUS)`` line per test.
"""

from __future__ import annotations

import re
import tempfile
from pathlib import Path

from ..._fsutil import copy_tree, fingerprint_tree
from ...errors import SandboxError
from ...execution.types import (
    Diagnostic,
    DiagnosticKind,
    ExecutionOutcome,
    InjectedKind,
    RawRunArtifacts,
    TestStatus,
    Workspace,
)
from ...generation.types import (
    GeneratedTestSuite,
    PLAIN_TEST_SYNTAX,
    SynthesizedImpl,
)
from ..adapter import SubjectAdapter, register_adapter
from ..types import (
    DeclarationContext,
    DocumentedFunction,
    ExtractionWarning,
    FunctionKind,
    Visibility,
)
from . import lang

SOURCE_SUFFIX = ".mini"
TEST_FILE_NAME = "generated_suite.minitest"

_EXIT_OK = 0
_EXIT_TEST_FAILURES = 1
_EXIT_COMPILE_ERROR = 2


def _subject_files(root: Path) -> list[Path]:
    return sorted(p for p in Path(root).rglob(f"*{SOURCE_SUFFIX}") if p.is_file())


@register_adapter
class MiniLangAdapter(SubjectAdapter):
    name = "minilang"
    test_syntax = PLAIN_TEST_SYNTAX
    parallel_safe_toolchain = True

    # -- extraction ----------------------------------------------------------

    def list_documented_functions(
        self, root: Path
    ) -> tuple[list[DocumentedFunction], list[ExtractionWarning]]:
        root = Path(root)
        functions: list[DocumentedFunction] = []
        warnings: list[ExtractionWarning] = []
        for path in _subject_files(root):
            rel = path.relative_to(root).as_posix()
            try:
                parsed = lang.parse_source(path.read_text(encoding="utf-8"))
            except OSError as exc:
                warnings.append(ExtractionWarning(rel, f"unreadable: {exc}"))
                continue
            for issue in parsed.issues:
                warnings.append(ExtractionWarning(rel, f"line {issue.line}: {issue.message}"))

            names = [decl.name for decl in parsed.functions]
            duplicated = {n for n in names if names.count(n) > 1}
            for dup in sorted(duplicated):
                warnings.append(ExtractionWarning(rel, f"duplicate function {dup!r} skipped"))

            container = "\n".join(decl.signature for decl in parsed.functions)
            for decl in parsed.functions:
                if decl.doc is None or decl.name in duplicated:
                    continue
                try:
                    functions.append(
                        DocumentedFunction(
                            id=f"{rel}::{decl.name}",
                            file_path=rel,
                            qualified_name=decl.name,
                            signature=decl.signature,
                            doc_text=decl.doc,
                            body_text=decl.body_text,
                            visibility=(
                                Visibility.NON_PUBLIC
                                if decl.name.startswith("_")
                                else Visibility.PUBLIC
                            ),
                            kind=(
                                FunctionKind.ABSTRACT
                                if decl.body is None
                                else FunctionKind.ORDINARY
                            ),
                            context=DeclarationContext(enclosing_declaration=container),
                        )
                    )
                except ValueError as exc:
                    warnings.append(ExtractionWarning(rel, str(exc)))
        return functions, warnings

    def check_subject(self, root: Path) -> list[Diagnostic]:
        diagnostics: list[Diagnostic] = []
        declared: dict[str, lang.FunctionDecl] = {}
        per_file: list[tuple[str, lang.ParsedFile]] = []
        for path in _subject_files(root):
            rel = path.relative_to(root).as_posix()
            parsed = lang.parse_source(path.read_text(encoding="utf-8"))
            per_file.append((rel, parsed))
            for issue in parsed.issues:
                diagnostics.append(
                    Diagnostic(DiagnosticKind.COMPILE_ERROR, issue.message, (rel, issue.line))
                )
            for decl in parsed.functions:
                if decl.name in declared:
                    diagnostics.append(
                        Diagnostic(
                            DiagnosticKind.COMPILE_ERROR,
                            f"function {decl.name!r} declared more than once",
                            (rel, decl.line),
                        )
                    )
                declared[decl.name] = decl
        for rel, parsed in per_file:
            for decl in parsed.functions:
                if decl.body is None:
                    continue
                for issue in lang.resolve_names(declared, decl.body, decl.params, rel, decl.line):
                    diagnostics.append(
                        Diagnostic(DiagnosticKind.COMPILE_ERROR, issue.message, (issue.file, issue.line))
                    )
        return diagnostics

    # -- workspaces ----------------------------------------------------------

    def materialize_test_workspace(
        self,
        subject_root: Path,
        fn: DocumentedFunction,
        suite: GeneratedTestSuite,
        impl_override: SynthesizedImpl | None = None,
        scratch_dir: Path | None = None,
    ) -> Workspace:
        subject_root = Path(subject_root)
        if scratch_dir is None:
            scratch_dir = Path(tempfile.mkdtemp(prefix="docdrift-ws-"))
        scratch_dir = Path(scratch_dir)
        if scratch_dir.resolve() == subject_root.resolve():
            raise SandboxError("scratch directory must be disjoint from the subject root")

        fingerprint = fingerprint_tree(subject_root)
        try:
            copy_tree(subject_root, scratch_dir, suffixes=(SOURCE_SUFFIX,))
            if impl_override is not None:
                self._apply_override(scratch_dir, fn, impl_override)
            (scratch_dir / TEST_FILE_NAME).write_text(suite.render(), encoding="utf-8")
        except OSError as exc:
            raise SandboxError(f"could not materialize workspace: {exc}") from exc

        return Workspace(
            root=scratch_dir,
            subject_fingerprint=fingerprint,
            injected=(
                InjectedKind.TESTS_ONLY
                if impl_override is None
                else InjectedKind.TESTS_WITH_IMPL_OVERRIDE
            ),
            test_file=TEST_FILE_NAME,
        )

    def _apply_override(
        self, scratch_root: Path, fn: DocumentedFunction, impl: SynthesizedImpl
    ) -> None:
        replacement = lang.parse_source(impl.source_text)
        decl = next((d for d in replacement.functions if d.name == fn.qualified_name), None)
        if decl is None or decl.body is None:
            raise SandboxError(
                f"synthesized code does not declare {fn.qualified_name!r} with a body"
            )
        target = scratch_root / fn.file_path
        lines = target.read_text(encoding="utf-8").splitlines()
        original = lang.parse_source("\n".join(lines))
        existing = next(
            (d for d in original.functions if d.name == fn.qualified_name), None
        )
        if existing is None:
            raise SandboxError(f"{fn.file_path} no longer declares {fn.qualified_name!r}")
        lines[existing.line - 1] = f"{decl.signature} = {decl.body_text}"
        target.write_text("\n".join(lines) + "\n", encoding="utf-8")

    # -- toolchain -----------------------------------------------------------

    def run(
        self,
        workspace: Workspace,
        *,
        per_test_timeout: float | None = None,
        build_timeout: float | None = None,
    ) -> RawRunArtifacts:
        root = Path(workspace.root)
        stderr_lines: list[str] = []
        declared: dict[str, lang.FunctionDecl] = {}
        compile_failed = False

        def note_compile_error(file: str, line: int, message: str) -> None:
            nonlocal compile_failed
            compile_failed = True
            stderr_lines.append(f"COMPILE-ERROR {file}:{line}: {message}")

        subject_parsed: list[tuple[str, lang.ParsedFile]] = []
        for path in _subject_files(root):
            rel = path.relative_to(root).as_posix()
            parsed = lang.parse_source(path.read_text(encoding="utf-8"))
            subject_parsed.append((rel, parsed))
            for issue in parsed.issues:
                note_compile_error(rel, issue.line, issue.message)
            for decl in parsed.functions:
                if decl.name in declared:
                    note_compile_error(rel, decl.line, f"function {decl.name!r} declared more than once")
                declared[decl.name] = decl

        test_path = root / workspace.test_file
        tests_parsed = lang.parse_source(test_path.read_text(encoding="utf-8"))
        for issue in tests_parsed.issues:
            note_compile_error(workspace.test_file, issue.line, issue.message)
        for decl in tests_parsed.functions:  # suite-level helper functions
            if decl.name in declared:
                note_compile_error(
                    workspace.test_file, decl.line, f"function {decl.name!r} shadows a subject function"
                )
            declared[decl.name] = decl

        seen_tests: set[str] = set()
        for test in tests_parsed.tests:
            if test.name in seen_tests:
                note_compile_error(workspace.test_file, test.line, f"duplicate test {test.name!r}")
            seen_tests.add(test.name)

        for rel, parsed in subject_parsed + [(workspace.test_file, tests_parsed)]:
            for decl in parsed.functions:
                if decl.body is None:
                    continue
                for issue in lang.resolve_names(declared, decl.body, decl.params, rel, decl.line):
                    note_compile_error(issue.file, issue.line, issue.message)
        for test in tests_parsed.tests:
            for issue in lang.resolve_names(declared, test.expr, (), workspace.test_file, test.line):
                note_compile_error(issue.file, issue.line, issue.message)

        if compile_failed:
            return RawRunArtifacts(
                stdout="", stderr="\n".join(stderr_lines) + "\n", exit_code=_EXIT_COMPILE_ERROR
            )

        stdout_lines: list[str] = []
        any_failure = False
        for test in tests_parsed.tests:
            try:
                value = lang.evaluate_expression(declared, test.expr, timeout=per_test_timeout)
            except lang.MiniTimeout:
                status = "TIMEOUT"
            except lang.MiniRuntimeError as exc:
                status = "CRASH"
                stderr_lines.append(f"note: {test.name}: {exc}")
            else:
                if value is True:
                    status = "PASS"
                elif value is False:
                    status = "FAIL"
                else:
                    status = "FAIL"
                    stderr_lines.append(f"note: {test.name}: expected a boolean, got {value!r}")
            if status != "PASS":
                any_failure = True
            stdout_lines.append(f"{test.name} ({status})")

        return RawRunArtifacts(
            stdout="\n".join(stdout_lines) + ("\n" if stdout_lines else ""),
            stderr="\n".join(stderr_lines) + ("\n" if stderr_lines else ""),
            exit_code=_EXIT_TEST_FAILURES if any_failure else _EXIT_OK,
        )

    _RESULT_LINE = re.compile(r"^(\w+) \((PASS|FAIL|TIMEOUT|CRASH)\)$")
    _ERROR_LINE = re.compile(r"^COMPILE-ERROR ([^:]+):(\d+): (.*)$")

    def parse_run(self, raw: RawRunArtifacts) -> ExecutionOutcome:
        diagnostics: list[Diagnostic] = []
        for line in raw.stderr.splitlines():
            m = self._ERROR_LINE.match(line)
            if m:
                diagnostics.append(
                    Diagnostic(
                        DiagnosticKind.COMPILE_ERROR, m.group(3), (m.group(1), int(m.group(2)))
                    )
                )
        if raw.exit_code == _EXIT_COMPILE_ERROR:
            if not diagnostics:
                diagnostics.append(
                    Diagnostic(DiagnosticKind.COMPILE_ERROR, "compilation failed (no detail emitted)")
                )
            return ExecutionOutcome(compiled=False, diagnostics=tuple(diagnostics))

        status_map = {
            "PASS": TestStatus.PASS,
            "FAIL": TestStatus.FAIL,
            "TIMEOUT": TestStatus.TIMEOUT,
            "CRASH": TestStatus.CRASH,
        }
        results: dict[str, TestStatus] = {}
        for line in raw.stdout.splitlines():
            m = self._RESULT_LINE.match(line.strip())
            if m:
                results[m.group(1)] = status_map[m.group(2)]
        return ExecutionOutcome(compiled=True, diagnostics=tuple(diagnostics), results=results)

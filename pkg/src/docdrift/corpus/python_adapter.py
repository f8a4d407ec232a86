"""Subject adapter for Python source trees.

Documentation blocks are docstrings. Test suites are pytest modules dropped
into a scratch copy of the subject beside a conftest that enforces the
per-test timeout; results are read back from pytest's verbose per-test lines.

Conventions applied during extraction: ``__init__``/``__new__`` count as
constructors, any other leading-underscore name is non-public, and a function
is abstract when it is decorated ``abstractmethod`` or its body holds nothing
beyond the docstring and a ``pass``/``...`` stub.
"""

from __future__ import annotations

import ast
import re
import subprocess
import sys
import tempfile
from pathlib import Path

from .._fsutil import copy_tree, fingerprint_tree
from ..errors import SandboxError, ToolchainError
from ..execution.types import (
    Diagnostic,
    DiagnosticKind,
    ExecutionOutcome,
    InjectedKind,
    RawRunArtifacts,
    TestStatus,
    Workspace,
)
from ..generation.types import (
    GeneratedTestSuite,
    PYTEST_TEST_SYNTAX,
    SynthesizedImpl,
)
from .adapter import SubjectAdapter, register_adapter
from .types import (
    DeclarationContext,
    DocumentedFunction,
    ExtractionWarning,
    FunctionKind,
    Visibility,
)

TEST_FILE_NAME = "docdrift_generated_test.py"
_TIMEOUT_EXC_NAME = "GeneratedTestTimeout"

_CONFTEST_TEMPLATE = '''"""Injected by the scan harness: enforces a per-test wall-clock limit."""

import signal

import pytest

PER_TEST_TIMEOUT = {timeout}


class GeneratedTestTimeout(Exception):
    pass


def _on_alarm(signum, frame):
    raise GeneratedTestTimeout(f"test exceeded {{PER_TEST_TIMEOUT}}s")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_call(item):
    if PER_TEST_TIMEOUT is None:
        yield
        return
    previous = signal.signal(signal.SIGALRM, _on_alarm)
    signal.setitimer(signal.ITIMER_REAL, PER_TEST_TIMEOUT)
    try:
        yield
    finally:
        signal.setitimer(signal.ITIMER_REAL, 0)
        signal.signal(signal.SIGALRM, previous)
'''


def _decl_head(source: str, lineno: int, col: int) -> str | None:
    """Verbatim declaration head from (1-based line, column) through the
    first colon outside brackets. Handles multi-line parameter lists."""
    lines = source.splitlines()
    depth = 0
    collected: list[str] = []
    for index in range(lineno - 1, len(lines)):
        line = lines[index]
        begin = col if index == lineno - 1 else 0
        for i in range(begin, len(line)):
            ch = line[i]
            if ch in "([{":
                depth += 1
            elif ch in ")]}":
                depth -= 1
            elif ch == ":" and depth == 0:
                collected.append(line[begin : i + 1])
                return "\n".join(collected)
        collected.append(line[begin:])
    return None


def _is_stub_statement(stmt: ast.stmt) -> bool:
    if isinstance(stmt, ast.Pass):
        return True
    if isinstance(stmt, ast.Expr) and isinstance(stmt.value, ast.Constant):
        return stmt.value.value is Ellipsis
    if isinstance(stmt, ast.Raise):
        exc = stmt.exc
        name = ""
        if isinstance(exc, ast.Call):
            exc = exc.func
        if isinstance(exc, ast.Name):
            name = exc.id
        elif isinstance(exc, ast.Attribute):
            name = exc.attr
        return name == "NotImplementedError"
    return False


def _has_abstract_decorator(node: ast.FunctionDef | ast.AsyncFunctionDef) -> bool:
    for dec in node.decorator_list:
        target = dec.func if isinstance(dec, ast.Call) else dec
        name = ""
        if isinstance(target, ast.Name):
            name = target.id
        elif isinstance(target, ast.Attribute):
            name = target.attr
        if name in ("abstractmethod", "abstractproperty"):
            return True
    return False


def _module_name(rel_path: str) -> str:
    parts = Path(rel_path).with_suffix("").parts
    if parts and parts[-1] == "__init__":
        parts = parts[:-1]
    return ".".join(parts)


def _iter_source_files(root: Path) -> list[Path]:
    return sorted(
        p
        for p in Path(root).rglob("*.py")
        if p.is_file()
        and "__pycache__" not in p.parts
        and not any(part.startswith(".") for part in p.parts)
        and p.name != TEST_FILE_NAME
        and p.name != "conftest.py"
    )


@register_adapter
class PythonAdapter(SubjectAdapter):
    name = "python"
    test_syntax = PYTEST_TEST_SYNTAX
    parallel_safe_toolchain = True

    # -- extraction ----------------------------------------------------------

    def list_documented_functions(
        self, root: Path
    ) -> tuple[list[DocumentedFunction], list[ExtractionWarning]]:
        root = Path(root)
        functions: list[DocumentedFunction] = []
        warnings: list[ExtractionWarning] = []
        for path in _iter_source_files(root):
            rel = path.relative_to(root).as_posix()
            try:
                source = path.read_text(encoding="utf-8")
                tree = ast.parse(source)
            except (OSError, SyntaxError, ValueError) as exc:
                warnings.append(ExtractionWarning(rel, f"parse failed: {exc}"))
                continue
            functions.extend(self._extract_from_module(rel, source, tree, warnings))
        return functions, warnings

    def _extract_from_module(
        self,
        rel: str,
        source: str,
        tree: ast.Module,
        warnings: list[ExtractionWarning],
    ) -> list[DocumentedFunction]:
        module_doc = ast.get_docstring(tree) or ""
        imports = tuple(
            seg
            for node in tree.body
            if isinstance(node, (ast.Import, ast.ImportFrom))
            and (seg := ast.get_source_segment(source, node)) is not None
        )

        def head_of(node: ast.AST) -> str | None:
            return _decl_head(source, node.lineno, node.col_offset)

        def member_lines(nodes: list[ast.stmt]) -> list[str]:
            out = []
            for child in nodes:
                if isinstance(child, (ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef)):
                    head = head_of(child)
                    if head:
                        out.append(head)
                elif isinstance(child, (ast.Assign, ast.AnnAssign)):
                    seg = ast.get_source_segment(source, child)
                    if seg:
                        out.append(seg)
            return out

        module_container = "\n".join(member_lines(tree.body))
        results: list[DocumentedFunction] = []

        def convert(
            node: ast.FunctionDef | ast.AsyncFunctionDef,
            qualified: str,
            container: str,
            container_doc: str,
        ) -> None:
            doc = ast.get_docstring(node, clean=True)
            if not doc or not doc.strip():
                return
            head = head_of(node)
            if head is None:
                warnings.append(ExtractionWarning(rel, f"{qualified}: could not slice declaration head"))
                return
            rest = node.body[1:]  # body[0] is the docstring
            abstract = _has_abstract_decorator(node) or all(_is_stub_statement(s) for s in rest)
            if abstract:
                body_text = ""
                kind = FunctionKind.ABSTRACT
            else:
                lines = source.splitlines()
                body_text = "\n".join(lines[rest[0].lineno - 1 : node.end_lineno])
                kind = FunctionKind.ORDINARY
            simple_name = node.name
            if simple_name in ("__init__", "__new__"):
                kind = FunctionKind.CONSTRUCTOR if kind is not FunctionKind.ABSTRACT else kind
                visibility = Visibility.PUBLIC
            elif simple_name.startswith("_"):
                visibility = Visibility.NON_PUBLIC
            else:
                visibility = Visibility.PUBLIC
            try:
                results.append(
                    DocumentedFunction(
                        id=f"{rel}::{qualified}",
                        file_path=rel,
                        qualified_name=qualified,
                        signature=head,
                        doc_text=doc,
                        body_text=body_text,
                        visibility=visibility,
                        kind=kind,
                        context=DeclarationContext(
                            enclosing_declaration=container,
                            imports=imports,
                            enclosing_doc=container_doc,
                        ),
                    )
                )
            except ValueError as exc:
                warnings.append(ExtractionWarning(rel, str(exc)))

        for node in tree.body:
            if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef)):
                convert(node, node.name, module_container, module_doc)
            elif isinstance(node, ast.ClassDef):
                class_head = head_of(node) or f"class {node.name}:"
                class_container = "\n".join(
                    [class_head] + ["    " + line for line in member_lines(node.body)]
                )
                class_doc = ast.get_docstring(node) or ""
                for child in node.body:
                    if isinstance(child, (ast.FunctionDef, ast.AsyncFunctionDef)):
                        convert(child, f"{node.name}.{child.name}", class_container, class_doc)
        return results

    def check_subject(self, root: Path) -> list[Diagnostic]:
        diagnostics: list[Diagnostic] = []
        for path in _iter_source_files(root):
            rel = path.relative_to(root).as_posix()
            try:
                ast.parse(path.read_text(encoding="utf-8"))
            except SyntaxError as exc:
                diagnostics.append(
                    Diagnostic(
                        DiagnosticKind.COMPILE_ERROR,
                        f"syntax error: {exc.msg}",
                        (rel, exc.lineno or 0),
                    )
                )
            except (OSError, ValueError) as exc:
                diagnostics.append(
                    Diagnostic(DiagnosticKind.COMPILE_ERROR, f"unreadable: {exc}", (rel, 0))
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
            copy_tree(subject_root, scratch_dir)
            if impl_override is not None:
                self._apply_override(scratch_dir, fn, impl_override)
            header = self._test_header(fn)
            (scratch_dir / TEST_FILE_NAME).write_text(
                header + "\n\n" + suite.render(), encoding="utf-8"
            )
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

    def _test_header(self, fn: DocumentedFunction) -> str:
        module = _module_name(fn.file_path)
        return "import pytest\n\nfrom {m} import *\nimport {m} as _subject".format(m=module)

    def _apply_override(
        self, scratch_root: Path, fn: DocumentedFunction, impl: SynthesizedImpl
    ) -> None:
        try:
            replacement_tree = ast.parse(impl.source_text)
        except SyntaxError as exc:
            raise SandboxError(f"synthesized code does not parse: {exc}") from exc
        simple_name = fn.qualified_name.split(".")[-1]
        new_def = next(
            (
                node
                for node in ast.walk(replacement_tree)
                if isinstance(node, (ast.FunctionDef, ast.AsyncFunctionDef))
                and node.name == simple_name
            ),
            None,
        )
        if new_def is None:
            raise SandboxError(f"synthesized code does not declare {simple_name!r}")
        new_lines = impl.source_text.splitlines()[new_def.lineno - 1 : new_def.end_lineno]
        new_indent = new_def.col_offset

        target = scratch_root / fn.file_path
        source = target.read_text(encoding="utf-8")
        tree = ast.parse(source)
        old_def = self._find_by_qualified_name(tree, fn.qualified_name)
        if old_def is None:
            raise SandboxError(f"{fn.file_path} no longer declares {fn.qualified_name!r}")
        old_indent = old_def.col_offset

        shifted: list[str] = []
        for line in new_lines:
            body = line[new_indent:] if line[:new_indent].strip() == "" else line.lstrip()
            shifted.append(" " * old_indent + body if body else "")
        lines = source.splitlines()
        lines[old_def.lineno - 1 : old_def.end_lineno] = shifted
        target.write_text("\n".join(lines) + "\n", encoding="utf-8")

    @staticmethod
    def _find_by_qualified_name(tree: ast.Module, qualified: str):
        parts = qualified.split(".")
        scope: list[ast.stmt] = tree.body
        if len(parts) == 2:
            cls = next(
                (n for n in scope if isinstance(n, ast.ClassDef) and n.name == parts[0]), None
            )
            if cls is None:
                return None
            scope = cls.body
        name = parts[-1]
        return next(
            (
                n
                for n in scope
                if isinstance(n, (ast.FunctionDef, ast.AsyncFunctionDef)) and n.name == name
            ),
            None,
        )

    # -- toolchain -----------------------------------------------------------

    def run(
        self,
        workspace: Workspace,
        *,
        per_test_timeout: float | None = None,
        build_timeout: float | None = None,
    ) -> RawRunArtifacts:
        root = Path(workspace.root)
        timeout_literal = "None" if per_test_timeout is None else repr(float(per_test_timeout))
        (root / "conftest.py").write_text(
            _CONFTEST_TEMPLATE.format(timeout=timeout_literal), encoding="utf-8"
        )
        cmd = (
            sys.executable,
            "-m",
            "pytest",
            workspace.test_file,
            "-v",
            "-ra",
            "--tb=short",
            "--color=no",
            "-p",
            "no:cacheprovider",
        )
        env = {
            "PATH": "/usr/bin:/bin:/usr/local/bin",
            "PYTHONPATH": str(root),
            "PYTHONDONTWRITEBYTECODE": "1",
            "PYTEST_DISABLE_PLUGIN_AUTOLOAD": "1",
            "HOME": str(root),
        }
        try:
            proc = subprocess.run(
                cmd,
                cwd=root,
                env=env,
                capture_output=True,
                text=True,
                timeout=build_timeout,
            )
        except FileNotFoundError as exc:
            raise ToolchainError(f"could not launch pytest: {exc}") from exc
        except subprocess.TimeoutExpired as exc:
            raise ToolchainError(
                f"test run exceeded the whole-suite budget of {build_timeout}s"
            ) from exc
        return RawRunArtifacts(
            stdout=proc.stdout, stderr=proc.stderr, exit_code=proc.returncode, command=cmd
        )

    _VERBOSE_LINE = re.compile(
        r"::(test_\w+)(?:\[[^\]]*\])?\s+(PASSED|FAILED|ERROR|SKIPPED|XFAIL|XPASS)"
    )
    _SUMMARY_FAIL = re.compile(r"^(?:FAILED|ERROR)\s+\S*::(test_\w+)[^-]*-\s*(.*)$")
    _COLLECT_ERROR = re.compile(r"ERROR collecting (\S+)")
    _FRAME_LINE = re.compile(r"^(\S+?\.py):(\d+)")
    _E_FILE_LINE = re.compile(r'^E\s+File "(.*?)", line (\d+)')
    _E_LINE = re.compile(r"^E\s+(.*)$")
    _HARNESS_PATH_MARKERS = ("dist-packages", "site-packages", "/lib/python", "importlib")

    def parse_run(self, raw: RawRunArtifacts) -> ExecutionOutcome:
        text = raw.stdout
        collecting_failed = "ERROR collecting" in text or raw.exit_code in (2, 3, 4)
        if collecting_failed:
            return ExecutionOutcome(
                compiled=False, diagnostics=tuple(self._collection_diagnostics(text))
            )

        status_map = {
            "PASSED": TestStatus.PASS,
            "FAILED": TestStatus.FAIL,
            "ERROR": TestStatus.CRASH,
            "SKIPPED": TestStatus.FAIL,
            "XFAIL": TestStatus.FAIL,
            "XPASS": TestStatus.PASS,
        }
        results: dict[str, TestStatus] = {}
        for line in text.splitlines():
            m = self._VERBOSE_LINE.search(line)
            if m:
                results[m.group(1)] = status_map[m.group(2)]
        for line in text.splitlines():
            m = self._SUMMARY_FAIL.match(line.strip())
            if m and _TIMEOUT_EXC_NAME in m.group(2):
                results[m.group(1)] = TestStatus.TIMEOUT
        return ExecutionOutcome(compiled=True, results=results)

    def _collection_diagnostics(self, text: str) -> list[Diagnostic]:
        diagnostics: list[Diagnostic] = []
        blocks = text.split("\n_")
        for block in blocks:
            if "ERROR collecting" not in block:
                continue
            # Location priority: the `File "...", line N` inside the E-lines
            # (what actually failed to compile), then the deepest traceback
            # frame outside the test harness itself.
            e_location: tuple[str, int] | None = None
            frame_location: tuple[str, int] | None = None
            messages: list[str] = []
            for line in block.splitlines():
                stripped = line.strip()
                e_file = self._E_FILE_LINE.match(stripped)
                if e_file:
                    e_location = (e_file.group(1), int(e_file.group(2)))
                    continue
                e_match = self._E_LINE.match(stripped)
                if e_match:
                    messages.append(e_match.group(1))
                    continue
                frame = self._FRAME_LINE.match(stripped)
                if frame and not any(m in frame.group(1) for m in self._HARNESS_PATH_MARKERS):
                    frame_location = (frame.group(1), int(frame.group(2)))
            diagnostics.append(
                Diagnostic(
                    DiagnosticKind.COMPILE_ERROR,
                    "; ".join(messages) or "test module failed to import",
                    e_location or frame_location,
                )
            )
        if not diagnostics:
            diagnostics.append(
                Diagnostic(DiagnosticKind.COMPILE_ERROR, "pytest could not collect the generated suite")
            )
        return diagnostics

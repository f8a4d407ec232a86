"""The two-phase decision procedure.

Phase 1 runs documentation-derived tests against the original implementation,
repairing compile errors up to three times. Phase 2 reruns the same tests
against an implementation regenerated from the documentation, then classifies
every test by its (original, regenerated) outcome pair:

* fail-to-pass is the inconsistency signal;
* pass-to-fail marks the regenerated code as untrustworthy and vetoes a
  positive;
* pass-to-pass and fail-to-fail carry no signal.

A positive verdict requires at least one fail-to-pass and, under the full
gate, zero pass-to-fail.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from pathlib import Path

from ._fsutil import slugify
from .config import Config
from .corpus.adapter import SubjectAdapter
from .corpus.types import DocumentedFunction
from .errors import (
    EmptyGenerationError,
    MalformedCompletionError,
    ProviderError,
    SignatureMismatchError,
)
from .execution.runner import execute_suite
from .execution.types import ExecutionLimits, ExecutionOutcome, TestStatus
from .generation.provider import Provider
from .generation.stages import (
    build_test_skeleton,
    complete_tests,
    extract_behaviors,
    repair_tests,
    synthesize_code,
)
from .generation.types import GeneratedTestSuite, PromptLog, ProviderParams

logger = logging.getLogger(__name__)


class Verdict(enum.Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"


class Reason(enum.Enum):
    F2P_NO_P2F = "f2p_no_p2f"
    ALL_TESTS_PASSED = "all_tests_passed"
    UNCOMPILABLE_AFTER_REPAIRS = "uncompilable_after_repairs"
    P2F_PRESENT = "p2f_present"
    NO_F2P = "no_f2p"
    REGENERATED_CODE_UNCOMPILABLE = "regenerated_code_uncompilable"
    SUBJECT_BROKEN = "subject_broken"
    GENERATION_FAILED = "generation_failed"


class Transition(enum.Enum):
    P2P = "p2p"
    P2F = "p2f"
    F2P = "f2p"
    F2F = "f2f"


class GateMode(enum.Enum):
    FULL = "full"
    NO_P2F_GATE = "no_p2f_gate"


class AnalysisMode(enum.Enum):
    FULL = "full"
    NO_P2F_GATE = "no_p2f_gate"
    PHASE1_ONLY = "phase1_only"


@dataclass(frozen=True)
class TransitionTally:
    p2p: int = 0
    p2f: int = 0
    f2p: int = 0
    f2f: int = 0

    def __post_init__(self) -> None:
        for name in ("p2p", "p2f", "f2p", "f2f"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @property
    def total(self) -> int:
        return self.p2p + self.p2f + self.f2p + self.f2f


def classify_transition(first: TestStatus, second: TestStatus) -> Transition:
    """Outcome pair for one test across the two runs. Timeout and Crash count
    as failures."""
    first_passed = first is TestStatus.PASS
    second_passed = second is TestStatus.PASS
    if first_passed and second_passed:
        return Transition.P2P
    if first_passed and not second_passed:
        return Transition.P2F
    if not first_passed and second_passed:
        return Transition.F2P
    return Transition.F2F


def tally_transitions(
    names: tuple[str, ...], res1: ExecutionOutcome, res2: ExecutionOutcome
) -> tuple[TransitionTally, list[str]]:
    """Count transitions over the suite and collect fail-to-pass test names.

    A test missing from either result map (a harness crash before the test
    ran) counts as a failure on that side: conservative in both directions,
    since a crash on the regenerated code pushes toward pass-to-fail.
    """
    counts = {t: 0 for t in Transition}
    f2p_names: list[str] = []
    for name in names:
        s1 = res1.results.get(name, TestStatus.CRASH)
        s2 = res2.results.get(name, TestStatus.CRASH)
        transition = classify_transition(s1, s2)
        counts[transition] += 1
        if transition is Transition.F2P:
            f2p_names.append(name)
    tally = TransitionTally(
        p2p=counts[Transition.P2P],
        p2f=counts[Transition.P2F],
        f2p=counts[Transition.F2P],
        f2f=counts[Transition.F2F],
    )
    return tally, sorted(f2p_names)


def verdict_from_tally(
    tally: TransitionTally, gate: GateMode = GateMode.FULL
) -> tuple[Verdict, Reason]:
    """Positive iff f2p > 0, and (under the full gate) p2f = 0."""
    if tally.f2p > 0:
        if gate is GateMode.FULL and tally.p2f > 0:
            return Verdict.NEGATIVE, Reason.P2F_PRESENT
        return Verdict.POSITIVE, Reason.F2P_NO_P2F
    return Verdict.NEGATIVE, Reason.NO_F2P


@dataclass(frozen=True)
class Detection:
    """Final judgement for one function, with enough trail to audit it.

    ``reason`` is reporting metadata layered over the plain positive/negative
    outcome; it never feeds back into the decision. In the ablation modes the
    positive reason still names the rule branch that fired, even though the
    pass-to-fail veto was disabled (or, in phase-1-only mode, the regenerated
    run never happened and failing tests count directly as fail-to-pass).
    """

    function_id: str
    verdict: Verdict
    reason: Reason
    mode: AnalysisMode = AnalysisMode.FULL
    tally: TransitionTally | None = None
    evidence: tuple[str, ...] = ()
    artifacts: dict[str, str] = field(default_factory=dict)
    suite_revision: int | None = None
    detail: str = ""

    def __post_init__(self) -> None:
        if self.verdict is Verdict.POSITIVE:
            if self.reason is not Reason.F2P_NO_P2F:
                raise ValueError("a positive verdict must carry the fail-to-pass reason")
            if self.tally is None or self.tally.f2p <= 0 or not self.evidence:
                raise ValueError("a positive verdict needs fail-to-pass evidence")
            if self.mode is AnalysisMode.FULL and self.tally.p2f != 0:
                raise ValueError("under the full gate a positive verdict requires p2f = 0")
        else:
            if self.reason is Reason.F2P_NO_P2F:
                raise ValueError("a negative verdict cannot carry the positive reason")

    def to_dict(self) -> dict:
        return {
            "function_id": self.function_id,
            "verdict": self.verdict.value,
            "reason": self.reason.value,
            "mode": self.mode.value,
            "tally": (
                None
                if self.tally is None
                else {
                    "p2p": self.tally.p2p,
                    "p2f": self.tally.p2f,
                    "f2p": self.tally.f2p,
                    "f2f": self.tally.f2f,
                }
            ),
            "evidence": list(self.evidence),
            "artifacts": dict(sorted(self.artifacts.items())),
            "suite_revision": self.suite_revision,
            "detail": self.detail,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Detection":
        tally = data.get("tally")
        return cls(
            function_id=data["function_id"],
            verdict=Verdict(data["verdict"]),
            reason=Reason(data["reason"]),
            mode=AnalysisMode(data.get("mode", "full")),
            tally=None if tally is None else TransitionTally(**tally),
            evidence=tuple(data.get("evidence", ())),
            artifacts=dict(data.get("artifacts", {})),
            suite_revision=data.get("suite_revision"),
            detail=data.get("detail", ""),
        )


_GENERATION_ERRORS = (
    ProviderError,
    EmptyGenerationError,
    MalformedCompletionError,
    SignatureMismatchError,
)


def _injected_file_names(adapter: SubjectAdapter) -> set[str]:
    names = {"conftest.py"}
    from .corpus import minilang, python_adapter

    names.add(minilang.TEST_FILE_NAME)
    names.add(python_adapter.TEST_FILE_NAME)
    return names


def _subject_is_broken(res: ExecutionOutcome, adapter: SubjectAdapter) -> bool:
    """Compile diagnostics that point outside the injected files implicate the
    subject itself; repairing the generated tests cannot fix those."""
    injected = _injected_file_names(adapter)
    for diagnostic in res.compile_errors:
        if diagnostic.location is not None and Path(diagnostic.location[0]).name not in injected:
            return True
    return False


def detect_inconsistency(
    fn: DocumentedFunction,
    adapter: SubjectAdapter,
    provider: Provider,
    config: Config,
    *,
    subject_root: Path,
    run_dir: Path | None = None,
) -> Detection:
    """Run both phases for one function and return its Detection.

    Generation-side failures (provider transport, unparsable completions,
    signature drift in regenerated code) yield a negative with the
    generation-failed reason; they never abort a batch. Toolchain and
    sandbox failures do propagate: they are operational errors.
    """
    mode = AnalysisMode(config.mode)
    params = ProviderParams(model=config.provider.model, temperature=config.provider.temperature)
    limits = ExecutionLimits(
        per_test_timeout=config.limits.per_test_timeout,
        build_timeout=config.limits.build_timeout,
    )

    artifacts: dict[str, str] = {}
    fn_dir: Path | None = None
    if run_dir is not None:
        run_dir = Path(run_dir)
        fn_dir = run_dir / "functions" / slugify(fn.id)
        fn_dir.mkdir(parents=True, exist_ok=True)
        log = PromptLog(path=fn_dir / "prompts.jsonl")
        artifacts["dir"] = fn_dir.relative_to(run_dir).as_posix()
        artifacts["prompts"] = (fn_dir / "prompts.jsonl").relative_to(run_dir).as_posix()
    else:
        log = PromptLog()

    def save(name: str, text: str) -> None:
        if fn_dir is not None and run_dir is not None:
            path = fn_dir / name
            path.write_text(text, encoding="utf-8")
            artifacts[name] = path.relative_to(run_dir).as_posix()

    def negative(
        reason: Reason,
        *,
        tally: TransitionTally | None = None,
        revision: int | None = None,
        detail: str = "",
    ) -> Detection:
        return Detection(
            function_id=fn.id,
            verdict=Verdict.NEGATIVE,
            reason=reason,
            mode=mode,
            tally=tally,
            artifacts=artifacts,
            suite_revision=revision,
            detail=detail,
        )

    syntax = adapter.test_syntax

    # Phase 1: tests from the documentation, run on the original code.
    try:
        behaviors = extract_behaviors(
            fn, provider, params, max_items=config.limits.max_tests, log=log
        )
        skeleton = build_test_skeleton(behaviors, fn, syntax)
        suite = complete_tests(skeleton, fn, provider, params, syntax=syntax, log=log)
    except _GENERATION_ERRORS as exc:
        logger.warning("%s: generation failed: %s", fn.id, exc)
        return negative(Reason.GENERATION_FAILED, detail=str(exc))

    save(f"suite_rev{suite.revision}.txt", suite.render())
    res1 = _execute(fn, suite, adapter, None, subject_root, limits, config, fn_dir, "original_run0")

    repairs_done = 0
    while not res1.compiled and repairs_done < config.limits.max_repair_attempts:
        if _subject_is_broken(res1, adapter):
            return negative(
                Reason.SUBJECT_BROKEN,
                revision=suite.revision,
                detail="; ".join(d.render() for d in res1.compile_errors),
            )
        try:
            suite = repair_tests(
                suite, list(res1.compile_errors), fn, provider, params, syntax=syntax, log=log
            )
        except _GENERATION_ERRORS as exc:
            logger.warning("%s: repair failed: %s", fn.id, exc)
            return negative(Reason.GENERATION_FAILED, revision=suite.revision, detail=str(exc))
        repairs_done += 1
        save(f"suite_rev{suite.revision}.txt", suite.render())
        res1 = _execute(
            fn, suite, adapter, None, subject_root, limits, config, fn_dir,
            f"original_run{repairs_done}",
        )

    if not res1.compiled:
        if _subject_is_broken(res1, adapter):
            return negative(
                Reason.SUBJECT_BROKEN,
                revision=suite.revision,
                detail="; ".join(d.render() for d in res1.compile_errors),
            )
        return negative(
            Reason.UNCOMPILABLE_AFTER_REPAIRS,
            revision=suite.revision,
            detail=f"still uncompilable after {repairs_done} repair attempt(s)",
        )

    failing = res1.failed
    if mode is AnalysisMode.PHASE1_ONLY:
        if not failing:
            return negative(Reason.ALL_TESTS_PASSED, revision=suite.revision)
        # No regenerated run happens in this mode; failing tests count
        # directly as fail-to-pass against a notional all-pass second run.
        tally = TransitionTally(p2p=len(res1.passed), f2p=len(failing))
        return Detection(
            function_id=fn.id,
            verdict=Verdict.POSITIVE,
            reason=Reason.F2P_NO_P2F,
            mode=mode,
            tally=tally,
            evidence=tuple(sorted(failing)),
            artifacts=artifacts,
            suite_revision=suite.revision,
        )

    if not failing:
        return negative(Reason.ALL_TESTS_PASSED, revision=suite.revision)

    # Phase 2: regenerate the implementation and rerun the same suite.
    try:
        impl = synthesize_code(fn, provider, params, log=log)
    except _GENERATION_ERRORS as exc:
        logger.warning("%s: code regeneration failed: %s", fn.id, exc)
        return negative(Reason.GENERATION_FAILED, revision=suite.revision, detail=str(exc))
    save("regenerated_impl.txt", impl.source_text + "\n")

    res2 = _execute(
        fn, suite, adapter, impl, subject_root, limits, config, fn_dir, "regenerated_run"
    )
    if not res2.compiled:
        return negative(
            Reason.REGENERATED_CODE_UNCOMPILABLE,
            revision=suite.revision,
            detail="; ".join(d.render() for d in res2.compile_errors),
        )

    tally, f2p_names = tally_transitions(suite.names, res1, res2)
    gate = GateMode.FULL if mode is AnalysisMode.FULL else GateMode.NO_P2F_GATE
    verdict, reason = verdict_from_tally(tally, gate)
    if verdict is Verdict.POSITIVE:
        return Detection(
            function_id=fn.id,
            verdict=verdict,
            reason=reason,
            mode=mode,
            tally=tally,
            evidence=tuple(f2p_names),
            artifacts=artifacts,
            suite_revision=suite.revision,
        )
    return negative(reason, tally=tally, revision=suite.revision)


def _execute(
    fn: DocumentedFunction,
    suite: GeneratedTestSuite,
    adapter: SubjectAdapter,
    impl_override,
    subject_root: Path,
    limits: ExecutionLimits,
    config: Config,
    fn_dir: Path | None,
    label: str,
) -> ExecutionOutcome:
    return execute_suite(
        Path(subject_root),
        fn,
        suite,
        adapter,
        impl_override,
        limits=limits,
        artifacts_dir=(fn_dir / "runs") if fn_dir is not None else None,
        artifact_label=label,
        keep_workspace=config.keep_workspaces,
    )

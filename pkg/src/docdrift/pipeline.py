"""Batch orchestration: whole-tree scans and dataset evaluations.

These functions are the working core behind both the service endpoints and
the command line. Detections fan out to a bounded worker pool; the report is
always assembled in function-id order regardless of completion order.
"""

from __future__ import annotations

import datetime as _dt
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

from . import __version__
from ._fsutil import fingerprint_tree
from .config import Config
from .corpus.adapter import SubjectAdapter, get_adapter
from .corpus.extract import extract_functions, filter_eligible
from .corpus.types import DocumentedFunction, ExtractionWarning
from .errors import ConfigError, SchemaError, SubjectBrokenError
from .evaluation import (
    DEFAULT_DRAWS,
    DEFAULT_RATIOS,
    DatasetEntry,
    MetricsReport,
    SweepReport,
    imbalance_sweep,
    load_dataset,
    metrics,
    pair_fix_precision,
    score,
)
from .errors import MissingPairError
from .generation.cache import CachingProvider, ResponseCache
from .generation.prompts import TEMPLATE_VERSION
from .generation.provider import HttpProvider, Provider, ScriptedProvider
from .reporting import RunReport, load_predictions, load_run_report, render_summary, write_run_report
from .verdict import Detection, Reason, Verdict, detect_inconsistency

logger = logging.getLogger(__name__)

EXIT_CLEAN = 0
EXIT_FINDINGS = 1
EXIT_ERROR = 2


@dataclass
class ScanOutcome:
    run_dir: Path
    report: RunReport
    exit_code: int


@dataclass
class EvalOutcome:
    run_dir: Path
    report: RunReport
    exit_code: int


def build_provider(config: Config) -> Provider:
    """Provider stack per configuration: scripted or remote, plus the disk
    cache when a cache directory is configured."""
    provider_cfg = config.provider
    if provider_cfg.kind == "scripted":
        directory = Path(provider_cfg.scripted.dir)
        if provider_cfg.scripted.mode == "playbook":
            inner: Provider = ScriptedProvider.from_playbook_dir(directory)
        else:
            inner = ScriptedProvider.from_hash_dir(directory)
    else:
        inner = HttpProvider(provider_cfg.base_url, auth_env_var=provider_cfg.auth_env_var)
    if provider_cfg.cache_dir:
        return CachingProvider(inner, ResponseCache(Path(provider_cfg.cache_dir)), TEMPLATE_VERSION)
    return inner


def next_run_dir(base: Path) -> Path:
    """First free run-NNNN directory under ``base``; no timestamps in names."""
    base = Path(base)
    base.mkdir(parents=True, exist_ok=True)
    index = 1
    while True:
        candidate = base / f"run-{index:04d}"
        try:
            candidate.mkdir()
            return candidate
        except FileExistsError:
            index += 1


def _effective_workers(config: Config, adapter: SubjectAdapter, task_count: int) -> int:
    if not adapter.parallel_safe_toolchain:
        return 1
    cap = adapter.max_toolchain_parallelism or os.cpu_count() or 1
    return max(1, min(config.limits.parallelism, cap, task_count or 1))


def _base_header(config: Config, mode: str) -> dict:
    return {
        "tool": "docdrift",
        "tool_version": __version__,
        "template_version": TEMPLATE_VERSION,
        "mode": mode,
        "seed": config.seed,
        "provider": {
            "kind": config.provider.kind,
            "model": config.provider.model,
            "temperature": config.provider.temperature,
        },
        "limits": config.limits.model_dump(),
        "subject_language": config.subject_language,
    }


def _meta() -> dict:
    return {"timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat()}


def run_scan(
    project_root: Path | str,
    config: Config,
    *,
    function: str | None = None,
    mode: str | None = None,
    run_dir: Path | str | None = None,
) -> ScanOutcome:
    """Extract, filter, and analyze every eligible function under a tree.

    Exit code 0 when nothing was flagged, 1 when at least one function is
    positive; operational failures raise and map to exit code 2.
    """
    started = time.monotonic()
    project_root = Path(project_root)
    if mode is not None:
        config = config.model_copy(update={"mode": mode.replace("-", "_")})
    adapter = get_adapter(config.subject_language)
    provider = build_provider(config)

    health = adapter.check_subject(project_root)
    broken = [d for d in health if d.kind.value == "compile_error"]
    if broken:
        raise SubjectBrokenError(
            "subject does not build: " + "; ".join(d.render() for d in broken[:5])
        )

    run_path = Path(run_dir) if run_dir is not None else next_run_dir(Path(config.report_dir))
    run_path.mkdir(parents=True, exist_ok=True)

    fingerprint_before = fingerprint_tree(project_root)
    warnings: list[ExtractionWarning] = []
    functions = filter_eligible(extract_functions(project_root, adapter, warnings_out=warnings))
    if function is not None:
        functions = [fn for fn in functions if fn.qualified_name == function]

    def detect_one(fn: DocumentedFunction) -> Detection:
        return detect_inconsistency(
            fn, adapter, provider, config, subject_root=project_root, run_dir=run_path
        )

    workers = _effective_workers(config, adapter, len(functions))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            detections = list(pool.map(detect_one, functions))
    else:
        detections = [detect_one(fn) for fn in functions]
    detections.sort(key=lambda d: d.function_id)

    fingerprint_after = fingerprint_tree(project_root)

    header = _base_header(config, config.mode)
    header.update(
        {
            "subject_root": str(project_root),
            "subject_fingerprint_before": fingerprint_before,
            "subject_fingerprint_after": fingerprint_after,
            "subject_unchanged": fingerprint_before == fingerprint_after,
            "function_filter": function,
            "extraction_warnings": [f"{w.file_path}: {w.message}" for w in warnings],
        }
    )
    meta = _meta()
    meta["duration_seconds"] = round(time.monotonic() - started, 3)
    report = RunReport(header=header, detections=detections, meta=meta)
    write_run_report(run_path, report)
    if fingerprint_before != fingerprint_after:
        logger.error("subject tree changed during the scan: %s", project_root)

    exit_code = EXIT_FINDINGS if report.positives else EXIT_CLEAN
    return ScanOutcome(run_dir=run_path, report=report, exit_code=exit_code)


def _resolve_entry_root(subjects_root: Path, entry: DatasetEntry) -> Path:
    root = subjects_root
    if entry.project:
        root = root / entry.project
    if entry.revision:
        root = root / entry.revision
    return root


def run_eval(
    manifest: Path | str,
    config: Config | None = None,
    *,
    replay_dir: Path | str | None = None,
    subjects_root: Path | str | None = None,
    sweep: bool = False,
    ratios: list[str] | None = None,
    draws: int | None = None,
    seed: int | None = None,
    run_dir: Path | str | None = None,
) -> EvalOutcome:
    """Score the detector against a labeled manifest.

    Predictions either come from running the detector per entry (live mode,
    needs ``config`` and ``subjects_root``) or from a prior run's prediction
    records (replay mode, which touches neither provider nor toolchain).
    """
    started = time.monotonic()
    entries = load_dataset(manifest)
    detections: list[Detection] = []
    predictions_records: list[dict] = []
    excluded: list[str] = []

    if replay_dir is not None:
        predictions = load_predictions(Path(replay_dir))
        source = {"predictions_source": f"replay:{replay_dir}"}
    else:
        if config is None:
            raise ConfigError("live evaluation needs a configuration file")
        if subjects_root is None:
            raise ConfigError("live evaluation needs --subjects-root")
        subjects_root = Path(subjects_root)
        adapter = get_adapter(config.subject_language)
        provider = build_provider(config)
        run_path_early = Path(run_dir) if run_dir is not None else next_run_dir(Path(config.report_dir))
        run_dir = run_path_early

        roots_cache: dict[Path, list[DocumentedFunction]] = {}
        predictions = {}
        for entry in entries:
            root = _resolve_entry_root(subjects_root, entry)
            if root not in roots_cache:
                if not root.is_dir():
                    raise SchemaError(f"entry {entry.id!r}: subject root {root} does not exist")
                roots_cache[root] = filter_eligible(extract_functions(root, adapter))
            candidates = [
                fn
                for fn in roots_cache[root]
                if fn.qualified_name == entry.function and (not entry.file or fn.file_path == entry.file)
            ]
            if len(candidates) != 1:
                raise SchemaError(
                    f"entry {entry.id!r}: expected exactly one eligible function "
                    f"{entry.function!r} in {root}, found {len(candidates)}"
                )
            fn = replace(candidates[0], id=f"{entry.id}::{candidates[0].id}")
            detection = detect_inconsistency(
                fn, adapter, provider, config, subject_root=root, run_dir=Path(run_dir)
            )
            detections.append(detection)
            if detection.reason is Reason.SUBJECT_BROKEN:
                excluded.append(entry.id)
            predictions[entry.id] = detection.verdict.value
            predictions_records.append(
                {
                    "id": entry.id,
                    "function_id": detection.function_id,
                    "verdict": detection.verdict.value,
                    "reason": detection.reason.value,
                }
            )
        source = {"predictions_source": "live"}

    scored_entries = [e for e in entries if e.id not in set(excluded)]
    cm = score(predictions, scored_entries)
    try:
        pfp = pair_fix_precision(predictions, scored_entries)
    except MissingPairError:
        pfp = None  # dataset without pair links: the pfp column reads n/a
    metrics_report: MetricsReport = metrics(cm, pfp=pfp)

    sweep_report: SweepReport | None = None
    effective_seed = seed if seed is not None else (config.seed if config is not None else 0)
    if sweep:
        sweep_report = imbalance_sweep(
            predictions,
            scored_entries,
            ratios=ratios or list(DEFAULT_RATIOS),
            n_draws=draws or DEFAULT_DRAWS,
            seed=effective_seed,
        )

    if run_dir is None:
        base = Path(config.report_dir) if config is not None else Path("docdrift-runs")
        run_dir = next_run_dir(base)
    run_path = Path(run_dir)
    run_path.mkdir(parents=True, exist_ok=True)

    if config is not None:
        header = _base_header(config, config.mode)
    else:
        header = {
            "tool": "docdrift",
            "tool_version": __version__,
            "template_version": TEMPLATE_VERSION,
            "mode": "eval",
            "seed": effective_seed,
        }
    header.update(
        {
            "manifest": str(manifest),
            "entries": len(entries),
            "excluded_subject_broken": sorted(excluded),
            "sweep": {
                "enabled": sweep,
                "ratios": list(ratios) if ratios else None,
                "draws": draws,
                "seed": effective_seed,
            },
            **source,
        }
    )
    meta = _meta()
    meta["duration_seconds"] = round(time.monotonic() - started, 3)
    report = RunReport(
        header=header,
        detections=detections,
        meta=meta,
        metrics_report=metrics_report,
        sweep_report=sweep_report,
        predictions=predictions_records,
    )
    write_run_report(run_path, report)
    return EvalOutcome(run_dir=run_path, report=report, exit_code=EXIT_CLEAN)


def summarize_run(run_dir: Path | str) -> str:
    """Render the stored report of a previous run (the `report` command)."""
    report = load_run_report(Path(run_dir))
    return render_summary(report)

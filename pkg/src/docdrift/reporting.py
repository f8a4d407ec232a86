"""Run reports: line-delimited records plus a human summary.

Volatile values (timestamp, wall time) live alone on the first line of
``report.jsonl``; every other byte of a report is a pure function of inputs
and configuration, so two runs over identical inputs differ in exactly that
one line.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import MissingReportError
from .evaluation import MetricsReport, SweepReport, render_metrics_table
from .verdict import Detection, Verdict

REPORT_FILE = "report.jsonl"
SUMMARY_FILE = "summary.txt"
PREDICTIONS_FILE = "predictions.jsonl"
METRICS_FILE = "metrics.json"
METRICS_TABLE_FILE = "metrics_table.txt"
SWEEP_FILE = "sweep.json"


@dataclass
class RunReport:
    header: dict
    detections: list[Detection] = field(default_factory=list)
    meta: dict = field(default_factory=dict)
    metrics_report: MetricsReport | None = None
    sweep_report: SweepReport | None = None
    predictions: list[dict] = field(default_factory=list)

    @property
    def positives(self) -> list[Detection]:
        return [d for d in self.detections if d.verdict is Verdict.POSITIVE]

    @property
    def counts_by_reason(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for detection in self.detections:
            counts[detection.reason.value] = counts.get(detection.reason.value, 0) + 1
        return dict(sorted(counts.items()))


def _dump(record: dict) -> str:
    return json.dumps(record, sort_keys=True, ensure_ascii=False)


def write_run_report(run_dir: Path, report: RunReport) -> Path:
    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)

    lines = [_dump({"record": "meta", **report.meta})]
    header = dict(report.header)
    header["counts_by_reason"] = report.counts_by_reason
    header["n_functions"] = len(report.detections)
    lines.append(_dump({"record": "header", **header}))
    for detection in sorted(report.detections, key=lambda d: d.function_id):
        lines.append(_dump({"record": "detection", **detection.to_dict()}))
    (run_dir / REPORT_FILE).write_text("\n".join(lines) + "\n", encoding="utf-8")

    if report.predictions:
        pred_lines = [_dump(p) for p in report.predictions]
        (run_dir / PREDICTIONS_FILE).write_text("\n".join(pred_lines) + "\n", encoding="utf-8")
    if report.metrics_report is not None:
        (run_dir / METRICS_FILE).write_text(
            json.dumps(report.metrics_report.to_dict(), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
        (run_dir / METRICS_TABLE_FILE).write_text(
            render_metrics_table(report.metrics_report, title=str(header.get("mode", "run")))
            + "\n",
            encoding="utf-8",
        )
    if report.sweep_report is not None:
        (run_dir / SWEEP_FILE).write_text(
            json.dumps(report.sweep_report.to_dict(), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
    (run_dir / SUMMARY_FILE).write_text(render_summary(report), encoding="utf-8")
    return run_dir / REPORT_FILE


def load_run_report(run_dir: Path) -> RunReport:
    run_dir = Path(run_dir)
    path = run_dir / REPORT_FILE
    if not path.is_file():
        raise MissingReportError(f"{run_dir} does not contain {REPORT_FILE}")
    meta: dict = {}
    header: dict = {}
    detections: list[Detection] = []
    try:
        for line in path.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            record = json.loads(line)
            kind = record.pop("record", None)
            if kind == "meta":
                meta = record
            elif kind == "header":
                header = record
            elif kind == "detection":
                detections.append(Detection.from_dict(record))
            else:
                raise ValueError(f"unknown record kind {kind!r}")
    except (json.JSONDecodeError, KeyError, ValueError) as exc:
        raise MissingReportError(f"{path} is not a readable run report: {exc}") from exc

    predictions: list[dict] = []
    pred_path = run_dir / PREDICTIONS_FILE
    if pred_path.is_file():
        try:
            predictions = [
                json.loads(line)
                for line in pred_path.read_text(encoding="utf-8").splitlines()
                if line.strip()
            ]
        except json.JSONDecodeError as exc:
            raise MissingReportError(f"{pred_path} is corrupt: {exc}") from exc
    return RunReport(header=header, detections=detections, meta=meta, predictions=predictions)


def load_predictions(run_dir: Path) -> dict[str, str]:
    """Entry-id -> verdict map from a previous evaluation run."""
    run_dir = Path(run_dir)
    path = run_dir / PREDICTIONS_FILE
    if not path.is_file():
        raise MissingReportError(f"{run_dir} does not contain {PREDICTIONS_FILE}")
    predictions: dict[str, str] = {}
    try:
        for line in path.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            record = json.loads(line)
            predictions[record["id"]] = record["verdict"]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise MissingReportError(f"{path} is corrupt: {exc}") from exc
    return predictions


def render_summary(report: RunReport) -> str:
    """Human-readable digest: positives first, stable ordering, no timestamps."""
    header = report.header
    lines: list[str] = []
    lines.append(f"tool: {header.get('tool', 'docdrift')} {header.get('tool_version', '')}".rstrip())
    lines.append(f"mode: {header.get('mode', 'full')}")
    if header.get("subject_root"):
        lines.append(f"subject: {header['subject_root']}")
    if header.get("manifest"):
        lines.append(f"manifest: {header['manifest']}")
    lines.append(f"functions analyzed: {len(report.detections)}")
    positives = sorted(report.positives, key=lambda d: d.function_id)
    lines.append(f"positives: {len(positives)}")
    counts = report.counts_by_reason
    if counts:
        lines.append("counts by reason:")
        for reason, count in counts.items():
            lines.append(f"  {reason}: {count}")
    if positives:
        lines.append("")
        lines.append("findings (documentation and code disagree):")
        for detection in positives:
            lines.append(f"  {detection.function_id}")
            lines.append(f"    fail-to-pass evidence: {', '.join(detection.evidence)}")
            location = detection.artifacts.get("dir", "")
            if location:
                lines.append(f"    artifacts: {location}")
    else:
        lines.append("")
        lines.append("no findings.")
    if report.metrics_report is not None:
        lines.append("")
        lines.append(render_metrics_table(report.metrics_report, title=str(header.get("mode", "run"))))
    return "\n".join(lines) + "\n"

"""Request and response bodies for the HTTP service."""

from __future__ import annotations

from typing import Any, Literal

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: Literal["ok"] = "ok"
    version: str


class TallyModel(BaseModel):
    p2p: int
    p2f: int
    f2p: int
    f2f: int


class DetectionModel(BaseModel):
    function_id: str
    verdict: Literal["positive", "negative"]
    reason: str
    mode: str
    tally: TallyModel | None = None
    evidence: list[str] = Field(default_factory=list)
    artifacts: dict[str, str] = Field(default_factory=dict)
    suite_revision: int | None = None
    detail: str = ""


class ScanRequest(BaseModel):
    root: str
    config_path: str | None = None
    config: dict[str, Any] | None = None
    function: str | None = None
    mode: str | None = None
    report_dir: str | None = None


class ScanResponse(BaseModel):
    run_dir: str
    exit_code: int
    n_functions: int
    positives: list[DetectionModel]
    counts_by_reason: dict[str, int]
    summary: str


class MetricsModel(BaseModel):
    exact: dict[str, str | None]
    rendered: dict[str, str]
    cm: dict[str, int]


class EvalRequest(BaseModel):
    manifest: str
    config_path: str | None = None
    config: dict[str, Any] | None = None
    replay_dir: str | None = None
    subjects_root: str | None = None
    sweep: bool = False
    ratios: list[str] | None = None
    draws: int | None = None
    seed: int | None = None
    report_dir: str | None = None


class EvalResponse(BaseModel):
    run_dir: str
    exit_code: int
    metrics: MetricsModel
    sweep: dict[str, Any] | None = None
    summary: str


class ReportResponse(BaseModel):
    run_dir: str
    summary: str
    positives: list[DetectionModel]
    counts_by_reason: dict[str, int]


class ErrorResponse(BaseModel):
    error: str
    message: str

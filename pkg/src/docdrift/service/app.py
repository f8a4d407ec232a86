"""HTTP facade over the scan/eval/report pipeline.

The service wraps the core package one-to-one: a scan or evaluation request
runs synchronously and answers with the run directory plus the findings, so
any number of clients (the bundled CLI included) can drive batch analyses
and fetch results later.
"""

from __future__ import annotations

import logging
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..config import Config, config_from_mapping, load_config
from ..errors import ConfigError, DocdriftError, MissingReportError
from ..pipeline import run_eval, run_scan
from ..reporting import load_run_report, render_summary
from ..verdict import Detection
from .models import (
    DetectionModel,
    EvalRequest,
    EvalResponse,
    HealthResponse,
    MetricsModel,
    ReportResponse,
    ScanRequest,
    ScanResponse,
)

logger = logging.getLogger(__name__)


def _detection_model(detection: Detection) -> DetectionModel:
    return DetectionModel.model_validate(detection.to_dict())


def _load_request_config(config_path: str | None, inline: dict | None) -> Config:
    if config_path is not None and inline is not None:
        raise ConfigError("give either config_path or an inline config, not both")
    if config_path is not None:
        return load_config(Path(config_path))
    if inline is not None:
        return config_from_mapping(inline)
    raise ConfigError("a configuration is required (config_path or inline config)")


def create_app() -> FastAPI:
    app = FastAPI(
        title="docdrift",
        version=__version__,
        description=(
            "Detects code/documentation inconsistencies by executing "
            "documentation-derived tests against the original and a "
            "documentation-regenerated implementation."
        ),
    )

    @app.exception_handler(DocdriftError)
    async def _domain_error(request: Request, exc: DocdriftError) -> JSONResponse:
        status = 404 if isinstance(exc, MissingReportError) else 400
        return JSONResponse(
            status_code=status,
            content={"error": type(exc).__name__, "message": str(exc)},
        )

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(version=__version__)

    @app.post("/scan", response_model=ScanResponse)
    def scan(request: ScanRequest) -> ScanResponse:
        config = _load_request_config(request.config_path, request.config)
        outcome = run_scan(
            Path(request.root),
            config,
            function=request.function,
            mode=request.mode,
            run_dir=Path(request.report_dir) if request.report_dir else None,
        )
        return ScanResponse(
            run_dir=str(outcome.run_dir),
            exit_code=outcome.exit_code,
            n_functions=len(outcome.report.detections),
            positives=[_detection_model(d) for d in outcome.report.positives],
            counts_by_reason=outcome.report.counts_by_reason,
            summary=render_summary(outcome.report),
        )

    @app.post("/eval", response_model=EvalResponse)
    def evaluate(request: EvalRequest) -> EvalResponse:
        config = None
        if request.config_path is not None or request.config is not None:
            config = _load_request_config(request.config_path, request.config)
        if request.replay_dir is None and config is None:
            raise ConfigError("live evaluation needs a configuration; replay needs replay_dir")
        outcome = run_eval(
            Path(request.manifest),
            config,
            replay_dir=Path(request.replay_dir) if request.replay_dir else None,
            subjects_root=Path(request.subjects_root) if request.subjects_root else None,
            sweep=request.sweep,
            ratios=request.ratios,
            draws=request.draws,
            seed=request.seed,
            run_dir=Path(request.report_dir) if request.report_dir else None,
        )
        assert outcome.report.metrics_report is not None
        return EvalResponse(
            run_dir=str(outcome.run_dir),
            exit_code=outcome.exit_code,
            metrics=MetricsModel.model_validate(outcome.report.metrics_report.to_dict()),
            sweep=(
                outcome.report.sweep_report.to_dict()
                if outcome.report.sweep_report is not None
                else None
            ),
            summary=render_summary(outcome.report),
        )

    @app.get("/report", response_model=ReportResponse)
    def report(run_dir: str) -> ReportResponse:
        loaded = load_run_report(Path(run_dir))
        return ReportResponse(
            run_dir=run_dir,
            summary=render_summary(loaded),
            positives=[_detection_model(d) for d in loaded.positives],
            counts_by_reason=loaded.counts_by_reason,
        )

    return app

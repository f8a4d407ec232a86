"""Run configuration: loading, validation, defaults."""

from __future__ import annotations

from pathlib import Path
from typing import Any, Literal

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .errors import ConfigError

AnalysisModeName = Literal["full", "no_p2f_gate", "phase1_only"]


class ScriptedProviderConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    mode: Literal["playbook", "hash"] = "playbook"
    dir: str = ""


class ProviderConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["remote", "scripted"] = "scripted"
    base_url: str = ""
    model: str = "scripted"
    temperature: float = Field(default=0.0, ge=0.0)
    auth_env_var: str | None = None
    cache_dir: str | None = None
    scripted: ScriptedProviderConfig = Field(default_factory=ScriptedProviderConfig)

    @model_validator(mode="after")
    def _check_kind_fields(self) -> "ProviderConfig":
        if self.kind == "remote" and not self.base_url:
            raise ValueError("provider.base_url is required when provider.kind is 'remote'")
        if self.kind == "scripted" and not self.scripted.dir:
            raise ValueError("provider.scripted.dir is required when provider.kind is 'scripted'")
        return self


class LimitsConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    max_repair_attempts: int = Field(default=3, ge=0)
    max_tests: int = Field(default=20, ge=1)
    per_test_timeout: float = Field(default=30.0, gt=0.0)
    build_timeout: float = Field(default=300.0, gt=0.0)
    parallelism: int = Field(default=1, ge=1)


class Config(BaseModel):
    """Everything a scan or evaluation run needs, as loaded from YAML."""

    model_config = ConfigDict(extra="forbid")

    subject_language: str
    provider: ProviderConfig
    limits: LimitsConfig = Field(default_factory=LimitsConfig)
    mode: AnalysisModeName = "full"
    report_dir: str = "docdrift-runs"
    seed: int = 0
    keep_workspaces: bool = False

    @field_validator("mode", mode="before")
    @classmethod
    def _normalize_mode(cls, value: Any) -> Any:
        if isinstance(value, str):
            return value.replace("-", "_")
        return value


def config_from_mapping(data: Any, *, source: str = "<inline>") -> Config:
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: configuration must be a mapping")
    try:
        return Config.model_validate(data)
    except ValidationError as exc:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in exc.errors()
        )
        raise ConfigError(f"{source}: invalid configuration: {problems}") from exc


def load_config(path: Path | str) -> Config:
    """Read a YAML (or JSON) configuration file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read configuration file {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: not valid YAML: {exc}") from exc
    return config_from_mapping(data, source=str(path))

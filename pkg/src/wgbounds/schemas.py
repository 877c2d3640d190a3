"""Pydantic request/response models of the HTTP service."""

from __future__ import annotations

from pydantic import BaseModel, Field

from .config import ExperimentConfig


class RunRequest(BaseModel):
    """A verb request: the experiment config plus optional overrides."""

    config: ExperimentConfig = Field(default_factory=ExperimentConfig)
    seed: int | None = None
    threads: int | None = None

    def effective_config(self) -> ExperimentConfig:
        cfg = self.config
        updates = {}
        if self.seed is not None:
            updates["seed"] = self.seed
        if self.threads is not None:
            updates["threads"] = self.threads
        return cfg.model_copy(update=updates) if updates else cfg


class RunResponse(BaseModel):
    verb: str
    config_hash: str
    summary: dict
    files: dict[str, str]


class HealthResponse(BaseModel):
    status: str
    version: str


class ErrorBody(BaseModel):
    kind: str
    message: str

"""Experiment configuration: a single YAML file with nested sections.

The same pydantic models double as the request schema of the HTTP service,
so a config file and a request body are literally the same structure.  Every
output artifact carries the sha256 hash of the canonical JSON serialization
of the validated config.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .bounds import BoundConstants
from .errors import ConfigError, InvalidParamsError, UnknownFamilyError
from .geometry import CURVATURE_FAMILIES, CurvatureFunction, StripGeometry, curvature_library, ellipticity_constants
from .potentials import POTENTIAL_FAMILIES, Potential, potential_library


class _StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class CurvatureSpec(_StrictModel):
    family: str = "zero"
    params: dict[str, float] = Field(default_factory=dict)
    file: str | None = None

    @field_validator("family")
    @classmethod
    def _known_family(cls, name):
        if name not in CURVATURE_FAMILIES:
            raise UnknownFamilyError("curvature", name, CURVATURE_FAMILIES)
        return name

    def build(self) -> CurvatureFunction:
        if self.file is not None:
            return CurvatureFunction.from_file(self.file)
        return curvature_library(self.family, self.params)


class GeometrySpec(_StrictModel):
    d: float = 1.0
    curvature: CurvatureSpec = Field(default_factory=CurvatureSpec)

    @field_validator("d")
    @classmethod
    def _positive(cls, value):
        if value <= 0:
            raise ValueError("d must be positive")
        return value

    def build(self) -> StripGeometry:
        return ellipticity_constants(self.d, self.curvature.build())


class PotentialSpec(_StrictModel):
    family: str = "gaussian"
    params: dict[str, float] = Field(default_factory=dict)
    alphas: list[float] = Field(default_factory=lambda: [1.0])

    @field_validator("family")
    @classmethod
    def _known_family(cls, name):
        if name not in POTENTIAL_FAMILIES:
            raise UnknownFamilyError("potential", name, POTENTIAL_FAMILIES)
        return name

    @field_validator("alphas")
    @classmethod
    def _positive_ascending(cls, alphas):
        if not alphas or any(a <= 0 for a in alphas):
            raise ValueError("alphas must be a nonempty list of positive scales")
        if any(b <= a for a, b in zip(alphas, alphas[1:])):
            raise ValueError("alphas must be strictly ascending")
        return alphas

    def build(self, d: float) -> Potential:
        return potential_library(self.family, self.params, d)


class GridSpec(_StrictModel):
    S: float = 8.0
    nx: int = 257
    ny: int = 33
    levels: int = 1
    S_sweep: list[float] = Field(default_factory=list)

    @field_validator("levels")
    @classmethod
    def _levels(cls, value):
        if value < 1:
            raise ValueError("levels must be >= 1")
        return value

    @field_validator("S", "nx", "ny")
    @classmethod
    def _positive(cls, value):
        if value <= 0:
            raise ValueError("grid parameters must be positive")
        return value


class ConstantsSpec(_StrictModel):
    mode: str = "fixed"  # "fixed" | "calibrate"
    values: dict[str, float] = Field(default_factory=dict)
    scan: list[float] = Field(default_factory=lambda: [0.25, 0.5, 1.0, 2.0, 4.0])
    floor: float = 1e-6

    @field_validator("mode")
    @classmethod
    def _mode(cls, value):
        if value not in ("fixed", "calibrate"):
            raise ValueError("constants.mode must be 'fixed' or 'calibrate'")
        return value

    def build(self) -> BoundConstants:
        try:
            return BoundConstants(**self.values)
        except (TypeError, InvalidParamsError) as exc:
            raise ConfigError(f"bad constants values: {exc}") from exc


class ExperimentConfig(_StrictModel):
    """Everything one run needs; defaults give a small straight-guide sweep."""

    geometry: GeometrySpec = Field(default_factory=GeometrySpec)
    potential: PotentialSpec = Field(default_factory=PotentialSpec)
    grid: GridSpec = Field(default_factory=GridSpec)
    constants: ConstantsSpec = Field(default_factory=ConstantsSpec)
    seed: int = 0
    threads: int = 1
    count_cap: int = 256
    gap_trials: int = 100
    convergence_gate: float = 0.01  # relative drift allowed between finest grids

    @field_validator("threads")
    @classmethod
    def _threads(cls, value):
        if value < 1:
            raise ValueError("threads must be >= 1")
        return value


def config_hash(cfg: ExperimentConfig) -> str:
    """First 12 hex chars of the sha256 of the canonical JSON dump."""
    canonical = json.dumps(cfg.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:12]


def config_from_dict(raw: dict) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(raw)
    except ValidationError as exc:
        first = exc.errors()[0]
        loc = ".".join(str(p) for p in first["loc"]) or "<root>"
        # surface family errors under their dedicated type
        msg = first["msg"]
        if "unknown potential family" in msg or "unknown curvature family" in msg:
            raise UnknownFamilyError(
                "potential" if "potential" in msg else "curvature",
                msg.split("'")[1] if "'" in msg else "?",
                POTENTIAL_FAMILIES if "potential" in msg else CURVATURE_FAMILIES,
            ) from exc
        raise ConfigError(f"config field {loc}: {msg}") from exc


def load_config(path) -> ExperimentConfig:
    """Parse and validate a YAML experiment config."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigError(f"{path}: YAML parse error{where}: {exc}") from exc
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return config_from_dict(raw)


def serialize_config(cfg: ExperimentConfig) -> str:
    """YAML dump that reparses to an equal config."""
    return yaml.safe_dump(cfg.model_dump(mode="json"), sort_keys=True)

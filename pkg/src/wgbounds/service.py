"""HTTP service exposing the experiment verbs.

Errors map to structured bodies: config and geometry problems come back as
400 with kind "validation"; numerical nonconvergence as 502 with kind
"nonconvergence", so thin clients can translate them into exit codes.
"""

from __future__ import annotations

from fastapi import FastAPI
from fastapi.responses import JSONResponse

from . import __version__
from .config import config_hash
from .errors import (
    CapReachedError,
    ConfigError,
    ConvergenceFailureError,
    EigensolverNonconvergenceError,
    GridTooSmallError,
    InvalidGeometryError,
    SelfIntersectionSuspectedError,
    WgBoundsError,
)
from .experiments import run_experiment
from .schemas import HealthResponse, RunRequest, RunResponse

app = FastAPI(
    title="wgbounds",
    version=__version__,
    description="Waveguide eigenvalue counts and CLR/Lieb-Thirring-type bounds",
)

_VALIDATION_ERRORS = (
    ConfigError,
    InvalidGeometryError,
    SelfIntersectionSuspectedError,
    GridTooSmallError,
)
_NONCONVERGENCE_ERRORS = (
    EigensolverNonconvergenceError,
    ConvergenceFailureError,
    CapReachedError,
)


@app.exception_handler(WgBoundsError)
async def _wg_error_handler(request, exc: WgBoundsError):
    if isinstance(exc, _VALIDATION_ERRORS):
        status, kind = 400, "validation"
    elif isinstance(exc, _NONCONVERGENCE_ERRORS):
        status, kind = 502, "nonconvergence"
    else:
        status, kind = 500, "internal"
    content = {"kind": kind, "message": str(exc)}
    partial = getattr(exc, "partial_artifact", None)
    if partial is not None:
        content["files"] = partial.files  # partial artifacts with FAILED marker rows
    return JSONResponse(status_code=status, content=content)


@app.get("/health", response_model=HealthResponse)
def health():
    return HealthResponse(status="ok", version=__version__)


def _run(verb: str, request: RunRequest) -> RunResponse:
    cfg = request.effective_config()
    art = run_experiment(cfg, verb)
    return RunResponse(
        verb=verb, config_hash=art.config_hash, summary=art.summary, files=art.files
    )


@app.post("/validate", response_model=RunResponse)
def validate(request: RunRequest):
    return _run("validate", request)


@app.post("/solve", response_model=RunResponse)
def solve(request: RunRequest):
    return _run("solve", request)


@app.post("/bounds", response_model=RunResponse)
def bounds(request: RunRequest):
    return _run("bounds", request)


@app.post("/verify", response_model=RunResponse)
def verify(request: RunRequest):
    return _run("verify", request)


@app.post("/calibrate", response_model=RunResponse)
def calibrate(request: RunRequest):
    return _run("calibrate", request)

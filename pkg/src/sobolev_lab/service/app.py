"""FastAPI service exposing the lab commands.

Every response is an envelope {header, body}: the header carries the
version, the timestamp, and the fully resolved request for provenance; the
body is deterministic for a given request (the timestamp is isolated in
the header on purpose).
"""

from __future__ import annotations

from datetime import datetime, timezone

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..errors import SobolevLabError
from . import runners
from .models import (
    ConformalRequest,
    DerivativeRequest,
    FlowRequest,
    LabResponse,
    RearrangeRequest,
    ResponseHeader,
    SolveRequest,
    VerifyRequest,
)

app = FastAPI(title="sobolev-lab", version=__version__)


def _envelope(command: str, request, body: dict) -> LabResponse:
    header = ResponseHeader(
        version=__version__,
        timestamp=datetime.now(timezone.utc).isoformat(),
        command=command,
        config=request.model_dump(),
    )
    return LabResponse(header=header, body=body)


def _run(command: str, request, runner) -> LabResponse:
    try:
        return _envelope(command, request, runner(request))
    except SobolevLabError as exc:
        raise HTTPException(status_code=422, detail=f"{type(exc).__name__}: {exc}")
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc))


@app.get("/health")
def health():
    return {"status": "ok"}


@app.get("/version")
def version():
    return {"version": __version__}


@app.post("/solve", response_model=LabResponse)
def solve(request: SolveRequest):
    return _run("solve", request, runners.run_solve)


@app.post("/rearrange", response_model=LabResponse)
def rearrange(request: RearrangeRequest):
    return _run("rearrange", request, runners.run_rearrange)


@app.post("/verify", response_model=LabResponse)
def verify(request: VerifyRequest):
    return _run("verify", request, runners.run_verify)


@app.post("/derivative", response_model=LabResponse)
def derivative(request: DerivativeRequest):
    return _run("derivative", request, runners.run_derivative)


@app.post("/flow", response_model=LabResponse)
def flow(request: FlowRequest):
    return _run("flow", request, runners.run_flow)


@app.post("/conformal", response_model=LabResponse)
def conformal(request: ConformalRequest):
    return _run("conformal", request, runners.run_conformal)

"""HTTP front end for the simulator.

POST /run and /sweep execute replays and return the same results document the
CLI writes; POST /gen-trace streams a trace CSV.  The service holds no state
between requests, so identical requests return identical bodies.
"""

from __future__ import annotations

from typing import Literal

from fastapi import FastAPI, HTTPException
from fastapi.responses import PlainTextResponse
from pydantic import BaseModel, Field, field_validator

from . import __version__
from .cca import LoadMatrix, MeasurementTiming, TrafficModel, generate_matrix
from .errors import ConfigError, TraceParseError
from .gpr import KernelParams
from .harness import make_config, results_payload, sweep
from .selection import canonical_policy
from .traceio import parse_trace, trace_csv_text


class RegimeSpec(BaseModel):
    channel: int
    segments: list[tuple[int, float]] = Field(min_length=1)


class TrafficSpec(BaseModel):
    seed: int
    channels: int
    regimes: list[RegimeSpec]

    def to_model(self) -> TrafficModel:
        return TrafficModel.from_dict(self.model_dump())


class RunRequest(BaseModel):
    channels: int = 13
    rounds: int = 50
    duration_ms: float = 100.0
    minislot_us: float = 100.0
    k: int = 7
    window: int = 2
    policy: str = "weight_product"
    seed: int | None = None
    lengthscale: float = 1.0
    include_bootstrap: bool = False
    stay_on_tie: bool = True
    smooth_input: bool = True
    traffic: TrafficSpec | None = None
    trace: str | None = Field(default=None, description="trace CSV text")

    @field_validator("policy")
    @classmethod
    def _canon(cls, v: str) -> str:
        return canonical_policy(v)


class SweepRequest(RunRequest):
    k_values: list[int] = Field(default_factory=lambda: list(range(2, 11)))
    w_values: list[int] = Field(default_factory=lambda: [2, 3, 4])
    policies: list[str] = Field(default_factory=lambda: ["weight_product"])

    @field_validator("policies")
    @classmethod
    def _canon_all(cls, v: list[str]) -> list[str]:
        return [canonical_policy(p) for p in v]


class GenTraceRequest(BaseModel):
    traffic: TrafficSpec
    rounds: int = 50
    duration_ms: float = 100.0
    minislot_us: float = 100.0


class ExhaustiveOut(BaseModel):
    L1: float
    c1_ms: float


class RunRow(BaseModel):
    K: int
    w: int
    policy: str
    L2: float
    c2_ms: float
    err_true: float
    err_avg: float
    switches: int


class RunResponse(BaseModel):
    config: dict
    exhaustive: ExhaustiveOut
    runs: list[RunRow]


app = FastAPI(title="chanprobe", version=__version__)


DEFAULT_SEED = 42


def _resolve_matrix(req: RunRequest, timing: MeasurementTiming) -> tuple[LoadMatrix, str, int | None]:
    """Same source-resolution rules as the CLI: the effective seed is the
    traffic spec's unless the request overrides it, and a bare trace carries
    no seed at all."""
    if req.traffic is not None and req.trace is not None:
        raise ConfigError("give either a traffic spec or a trace, not both")
    if req.trace is not None:
        return parse_trace(req.trace), "trace", req.seed
    if req.traffic is not None:
        model = req.traffic.to_model()
        if model.channels != req.channels:
            raise ConfigError(
                f"traffic spec covers {model.channels} channels, request says {req.channels}"
            )
        if req.seed is not None and req.seed != model.seed:
            model = TrafficModel(seed=req.seed, channels=model.channels, segments=model.segments)
        return generate_matrix(model, req.rounds, timing), "traffic", model.seed
    seed = req.seed if req.seed is not None else DEFAULT_SEED
    model = TrafficModel.default(req.channels, seed)
    return generate_matrix(model, req.rounds, timing), "default", seed


def _execute(req: RunRequest, k_values: list[int], w_values: list[int], policies: list[str]) -> dict:
    timing = MeasurementTiming(req.duration_ms, req.minislot_us)
    params = KernelParams(lengthscale=req.lengthscale)
    matrix, source, seed = _resolve_matrix(req, timing)
    body = sweep(
        matrix,
        timing,
        k_values=k_values,
        w_values=w_values,
        policies=policies,
        params=params,
        include_bootstrap=req.include_bootstrap,
        stay_on_tie=req.stay_on_tie,
        smooth_input=req.smooth_input,
    )
    config = make_config(
        channels=matrix.channels,
        rounds=matrix.rounds,
        timing=timing,
        seed=seed,
        source=source,
        params=params,
        include_bootstrap=req.include_bootstrap,
        stay_on_tie=req.stay_on_tie,
        smooth_input=req.smooth_input,
    )
    return results_payload(config, body)


@app.get("/healthz")
def healthz() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/run", response_model=RunResponse)
def run(req: RunRequest) -> dict:
    try:
        return _execute(req, [req.k], [req.window], [req.policy])
    except (ConfigError, TraceParseError) as exc:
        raise HTTPException(status_code=400, detail=str(exc))


@app.post("/sweep", response_model=RunResponse)
def run_sweep(req: SweepRequest) -> dict:
    try:
        return _execute(req, req.k_values, req.w_values, req.policies)
    except (ConfigError, TraceParseError) as exc:
        raise HTTPException(status_code=400, detail=str(exc))


@app.post("/gen-trace", response_class=PlainTextResponse)
def gen_trace(req: GenTraceRequest) -> PlainTextResponse:
    try:
        timing = MeasurementTiming(req.duration_ms, req.minislot_us)
        matrix = generate_matrix(req.traffic.to_model(), req.rounds, timing)
    except ConfigError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    return PlainTextResponse(content=trace_csv_text(matrix), media_type="text/csv")

"""HTTP service wrapping the planning engine.

Requests carry the same flat scenario config the CLI accepts; responses
are typed snapshots of the JSON artifacts, so a service client and a CLI
run with identical inputs see identical numbers.
"""

from __future__ import annotations

from typing import Any, Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import artifacts
from .config import scenario_from_config
from .errors import ConfigError, PlanningError
from .optimizer import BASELINE_REGIMES, run_baseline, solve
from .scenario import validate
from .sweep_runner import SweepSpec, optimizer_config_from, run_sweep


class SolveRequest(BaseModel):
    config: dict[str, Any] = Field(default_factory=dict)
    seed: int = 0
    optimizer: dict[str, Any] = Field(default_factory=dict)


class BaselineRequest(SolveRequest):
    regime: str = "optimized"


class ValidateRequest(BaseModel):
    config: dict[str, Any] = Field(default_factory=dict)
    seed: int = 0


class ValidateResponse(BaseModel):
    ok: bool
    violations: list[str]


class SolutionSummary(BaseModel):
    kappa: Optional[float]
    R_star: float
    n_uav: int
    u_haps: int
    coverage_pct: float
    outage_count: int
    outage_users: list[int]
    lambda_true: float
    lambda_true_db: Optional[float]
    lambda_upp: Optional[float]
    lambda_upp_db: Optional[float]
    L_cs: int
    L_uav: int


class AllocationRow(BaseModel):
    user: int
    x_m: float
    y_m: float
    zone: str
    server: str
    subcarriers: str
    n_subcarriers: int
    ris_elements: int
    power_w: float
    rate_bps: float
    meets_rate: bool
    outage: bool


class TraceEntry(BaseModel):
    kappa: Optional[float]
    L_cs: int
    L_uav: int
    R_star: float
    u_haps: int
    n_uav: int
    outage_count: int
    lambda_true: float
    lambda_true_db: Optional[float]
    lambda_upp: Optional[float]
    lambda_upp_db: Optional[float]


class Deployment(BaseModel):
    n_uav: int
    centroids: list[list[float]]
    membership: dict[str, int]


class SolveResponse(BaseModel):
    seed: int
    regime: str
    summary: SolutionSummary
    deployment: Deployment
    allocation: list[AllocationRow]
    trace: list[TraceEntry]


class BaselineRow(BaseModel):
    regime: str
    kappa: Optional[float]
    coverage_pct: float
    n_uav: int
    outage_count: int
    lambda_upp_db: Optional[float]


class CompareResponse(BaseModel):
    seed: int
    rows: list[BaselineRow]


class SweepRequest(BaseModel):
    variable: str
    grid: list[float]
    regime: str = "optimized"
    replications: int = 1
    config: dict[str, Any] = Field(default_factory=dict)
    optimizer: dict[str, Any] = Field(default_factory=dict)


class SweepRowModel(BaseModel):
    variable: str
    value: float
    seed: int
    u_haps: Optional[int]
    coverage_pct: Optional[float]
    n_uav: Optional[int]
    lambda_true_db: Optional[float]
    lambda_upp_db: Optional[float]
    r_star: Optional[float]
    outage_count: Optional[int]
    wall_ms: float
    error: Optional[str]


class SweepResponse(BaseModel):
    variable: str
    regime: str
    replications: int
    rows: list[SweepRowModel]


app = FastAPI(
    title="ntnplan",
    version="0.1.0",
    description="Planning service for reflector-assisted aerial access networks.",
)


def _scenario(config: dict[str, Any], seed: int):
    try:
        scenario = scenario_from_config(config, seed)
    except ConfigError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    violations = validate(scenario)
    if violations:
        raise HTTPException(status_code=400, detail="invalid scenario: " + "; ".join(violations))
    return scenario


def _optimizer(overrides: dict[str, Any]):
    try:
        return optimizer_config_from(overrides)
    except (ConfigError, TypeError) as exc:
        raise HTTPException(status_code=400, detail=str(exc))


@app.get("/health")
def health() -> dict[str, str]:
    return {"status": "ok"}


@app.post("/validate", response_model=ValidateResponse)
def validate_endpoint(request: ValidateRequest) -> ValidateResponse:
    try:
        scenario = scenario_from_config(request.config, request.seed)
    except ConfigError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    violations = validate(scenario)
    return ValidateResponse(ok=not violations, violations=violations)


@app.post("/solve", response_model=SolveResponse)
def solve_endpoint(request: SolveRequest) -> SolveResponse:
    scenario = _scenario(request.config, request.seed)
    cfg = _optimizer(request.optimizer)
    result = solve(scenario, cfg, request.seed)
    artifact = artifacts.solution_artifact(result, scenario, request.seed, regime="optimized")
    return _to_solve_response(artifact)


@app.post("/baseline", response_model=SolveResponse)
def baseline_endpoint(request: BaselineRequest) -> SolveResponse:
    if request.regime not in BASELINE_REGIMES:
        raise HTTPException(
            status_code=400, detail=f"regime must be one of {BASELINE_REGIMES}"
        )
    scenario = _scenario(request.config, request.seed)
    cfg = _optimizer(request.optimizer)
    result = run_baseline(request.regime, scenario, request.seed, cfg)
    artifact = artifacts.solution_artifact(result, scenario, request.seed, regime=request.regime)
    return _to_solve_response(artifact)


@app.post("/compare", response_model=CompareResponse)
def compare_endpoint(request: SolveRequest) -> CompareResponse:
    scenario = _scenario(request.config, request.seed)
    cfg = _optimizer(request.optimizer)
    results = {
        regime: run_baseline(regime, scenario, request.seed, cfg) for regime in BASELINE_REGIMES
    }
    artifact = artifacts.comparison_artifact(results, scenario, request.seed)
    return CompareResponse(seed=artifact["seed"], rows=artifact["rows"])


@app.post("/sweep", response_model=SweepResponse)
def sweep_endpoint(request: SweepRequest) -> SweepResponse:
    _optimizer(request.optimizer)
    spec = SweepSpec(
        variable=request.variable,
        grid=tuple(request.grid),
        regime=request.regime,
        replications=request.replications,
        config=request.config,
        optimizer=request.optimizer,
    )
    try:
        result = run_sweep(spec)
    except ConfigError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    except PlanningError as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    artifact = artifacts.sweep_artifact(result)
    return SweepResponse(
        variable=artifact["variable"],
        regime=artifact["regime"],
        replications=artifact["replications"],
        rows=artifact["rows"],
    )


def _to_solve_response(artifact: dict[str, Any]) -> SolveResponse:
    return SolveResponse(
        seed=artifact["seed"],
        regime=artifact["regime"],
        summary=artifact["summary"],
        deployment=artifact["deployment"],
        allocation=artifact["allocation"],
        trace=artifact["trace"],
    )

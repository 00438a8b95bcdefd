"""Batch experiment engine: parameter sweeps and the minimum-surface search.

Each sweep cell is an independent, seeded end-to-end run, so any row can be
reproduced standalone. Failures are captured as error-tagged rows and never
abort the sweep.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Any

from .config import linear_to_db, scenario_from_config
from .errors import ConfigError, NotAchievable, PlanningError
from .optimizer import BASELINE_REGIMES, OptimizerConfig, SolveResult, run_baseline, solve
from .scenario import Scenario

SWEEP_VARIABLES = ("M", "P_cs", "r0", "kappa")

_VARIABLE_FIELD = {"M": "M", "P_cs": "P_cs_dbm", "r0": "r0_bps"}

M_SEARCH_CAP = 100_000_000


@dataclass(frozen=True)
class SweepSpec:
    """One experiment family: a swept variable, its grid, and the fixed rest."""

    variable: str
    grid: tuple[float, ...]
    regime: str = "optimized"
    replications: int = 1
    config: dict[str, Any] = field(default_factory=dict)
    optimizer: dict[str, Any] = field(default_factory=dict)

    def validated(self) -> "SweepSpec":
        if self.variable not in SWEEP_VARIABLES:
            raise ConfigError(f"variable must be one of {SWEEP_VARIABLES}, got {self.variable!r}")
        if self.variable != "kappa" and self.regime not in BASELINE_REGIMES:
            raise ConfigError(f"regime must be one of {BASELINE_REGIMES}, got {self.regime!r}")
        if not self.grid:
            raise ConfigError("grid must not be empty")
        ascending = all(a < b for a, b in zip(self.grid, self.grid[1:]))
        descending = all(a > b for a, b in zip(self.grid, self.grid[1:]))
        if not (ascending or descending):
            raise ConfigError(f"grid must be strictly monotone, got {self.grid}")
        if self.replications < 1:
            raise ConfigError(f"replications must be >= 1, got {self.replications}")
        return self


@dataclass(frozen=True)
class SweepRow:
    """One (grid value, seed) cell; metric fields are None on error."""

    variable: str
    value: float
    seed: int
    u_haps: int | None
    coverage_pct: float | None
    n_uav: int | None
    lambda_true_db: float | None
    lambda_upp_db: float | None
    r_star: float | None
    outage_count: int | None
    wall_ms: float
    error: str | None = None


@dataclass(frozen=True)
class SweepResult:
    spec: SweepSpec
    rows: tuple[SweepRow, ...]


def optimizer_config_from(overrides: dict[str, Any]) -> OptimizerConfig:
    """Build an OptimizerConfig from a plain dict, rejecting unknown knobs."""
    known = set(OptimizerConfig.__dataclass_fields__)
    unknown = sorted(set(overrides) - known)
    if unknown:
        raise ConfigError(f"unknown optimizer fields: {', '.join(unknown)}")
    kwargs = dict(overrides)
    if kwargs.get("kappa_grid") is not None:
        kwargs["kappa_grid"] = tuple(kwargs["kappa_grid"])
    return OptimizerConfig(**kwargs)


def _db_or_none(value: float | None) -> float | None:
    if value is None or value <= 0.0:
        return None
    return linear_to_db(value)


def evaluate_cell(spec: SweepSpec, value: float, seed: int) -> SweepRow:
    """Run one cell end to end; identical to a standalone run with the same inputs."""
    start = time.perf_counter()
    try:
        result, scenario = _run_cell(spec, value, seed)
        sol = result.best
        wall_ms = (time.perf_counter() - start) * 1e3
        return SweepRow(
            variable=spec.variable,
            value=float(value),
            seed=seed,
            u_haps=sol.U_haps,
            coverage_pct=100.0 * sol.U_haps / scenario.n_users,
            n_uav=sol.N_uav_star,
            lambda_true_db=_db_or_none(sol.lambda_true),
            lambda_upp_db=_db_or_none(sol.lambda_upp),
            r_star=sol.R_star,
            outage_count=len(sol.outage_users),
            wall_ms=wall_ms,
        )
    except (PlanningError, ValueError) as exc:
        wall_ms = (time.perf_counter() - start) * 1e3
        return SweepRow(
            variable=spec.variable,
            value=float(value),
            seed=seed,
            u_haps=None,
            coverage_pct=None,
            n_uav=None,
            lambda_true_db=None,
            lambda_upp_db=None,
            r_star=None,
            outage_count=None,
            wall_ms=wall_ms,
            error=f"{type(exc).__name__}: {exc}",
        )


def _run_cell(spec: SweepSpec, value: float, seed: int) -> tuple[SolveResult, Scenario]:
    cfg_dict = dict(spec.config)
    opt = optimizer_config_from(spec.optimizer)
    if spec.variable == "kappa":
        scenario = scenario_from_config(cfg_dict, seed)
        result = solve(scenario, replace(opt, kappa_grid=(float(value),), Q_max=1), seed)
        return result, scenario
    field_name = _VARIABLE_FIELD[spec.variable]
    cfg_dict[field_name] = int(value) if spec.variable == "M" else float(value)
    scenario = scenario_from_config(cfg_dict, seed)
    result = run_baseline(spec.regime, scenario, seed, opt)
    return result, scenario


def run_sweep(spec: SweepSpec) -> SweepResult:
    spec = spec.validated()
    rows = [
        evaluate_cell(spec, value, seed)
        for value in spec.grid
        for seed in range(spec.replications)
    ]
    return SweepResult(spec=spec, rows=tuple(rows))


def _covers_everyone(result: SolveResult, scenario: Scenario) -> bool:
    sol = result.best
    if sol.outage_users:
        return False
    uav_served = {u for (u, _j), subs in sol.plan.uav_subcarriers.items() if subs}
    return sol.U_haps + len(uav_served) == scenario.n_users


def min_ris_for_full_coverage(
    r0: float,
    regime: str,
    base_config: dict[str, Any] | None = None,
    seed: int = 0,
    optimizer: dict[str, Any] | None = None,
    m_cap: int = M_SEARCH_CAP,
) -> int:
    """Smallest element count that serves every user at rate r0.

    Doubling search for an upper bracket, then integer bisection down to 1%
    relative width (or a width of one element, whichever is coarser). On
    exit the lower bracket is infeasible and the returned value feasible.
    """
    if not r0 > 0:
        raise ValueError(f"r0 must be positive, got {r0}")
    opt = optimizer_config_from(optimizer or {})

    def feasible(m: int) -> bool:
        cfg = dict(base_config or {})
        cfg["M"] = int(m)
        cfg["r0_bps"] = float(r0)
        scenario = scenario_from_config(cfg, seed)
        return _covers_everyone(run_baseline(regime, scenario, seed, opt), scenario)

    if feasible(1):
        return 1
    lo, hi = 1, 2
    while hi < m_cap and not feasible(hi):
        lo, hi = hi, min(hi * 2, m_cap)
    if hi >= m_cap and not feasible(hi):
        raise NotAchievable(f"no M <= {m_cap} reaches full coverage at r0={r0}")

    while hi - lo > max(1, int(0.01 * hi)):
        mid = (lo + hi) // 2
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    return hi

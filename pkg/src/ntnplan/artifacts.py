"""Artifact serialization: canonical JSON documents and CSV tables.

Artifacts contain only JSON-native values (no NaN or infinities), so a
written document re-parses to exactly the in-memory dict. JSON output is
canonical (sorted keys, fixed indent) and therefore byte-stable for a
fixed config and seed.
"""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Any

from .allocation import user_rate_in_plan
from .config import linear_to_db
from .optimizer import ParetoSolution, SolveResult, TracePoint
from .ris import design_phases_for
from .scenario import Scenario
from .sweep_runner import SweepResult

SOLUTION_SCHEMA = "ntnplan.solution.v1"
COMPARISON_SCHEMA = "ntnplan.baselines.v1"
SWEEP_SCHEMA = "ntnplan.sweep.v1"

ALLOCATION_FIELDS = (
    "user",
    "x_m",
    "y_m",
    "zone",
    "server",
    "subcarriers",
    "n_subcarriers",
    "ris_elements",
    "power_w",
    "rate_bps",
    "meets_rate",
    "outage",
)

TRACE_FIELDS = (
    "kappa",
    "L_cs",
    "L_uav",
    "R_star",
    "u_haps",
    "n_uav",
    "outage_count",
    "lambda_true_db",
    "lambda_upp_db",
)

SWEEP_FIELDS = (
    "variable",
    "value",
    "seed",
    "u_haps",
    "coverage_pct",
    "n_uav",
    "lambda_true_db",
    "lambda_upp_db",
    "r_star",
    "outage_count",
    "wall_ms",
    "error",
)

BASELINE_FIELDS = (
    "regime",
    "kappa",
    "coverage_pct",
    "n_uav",
    "outage_count",
    "lambda_upp_db",
)


def _finite_or_none(value: float | None) -> float | None:
    if value is None:
        return None
    value = float(value)
    if not math.isfinite(value):
        return None
    return value


def _db_or_none(linear: float | None) -> float | None:
    if linear is None or linear <= 0.0:
        return None
    return linear_to_db(linear)


def allocation_rows(solution: ParetoSolution, scenario: Scenario) -> list[dict[str, Any]]:
    """Per-user assignment table, sorted by user id."""
    phases = design_phases_for(scenario)
    plan = solution.plan
    outage = set(solution.outage_users)
    rows = []
    for user in range(scenario.n_users):
        pos = scenario.users[user]
        kind, uav = plan.server_of(user)
        if kind == "haps":
            zone = "haps"
            server = "haps"
            subs = plan.haps_subcarriers[user]
            start, stop = plan.ris_clusters.cluster_of_user[user]
            elements = stop - start
            power = sum(plan.power_cs[(user, l)] for l in subs)
        elif kind == "uav":
            zone = "uav"
            server = f"uav-{uav}"
            subs = plan.uav_subcarriers[(user, uav)]
            elements = 0
            power = sum(plan.power_uav[(user, uav, l)] for l in subs)
        else:
            zone = "uav" if user in plan.zone.B else "haps"
            server = "none"
            subs = ()
            elements = 0
            power = 0.0
        rate = user_rate_in_plan(user, plan, scenario, solution.deployment, phases)
        rows.append(
            {
                "user": user,
                "x_m": pos.x,
                "y_m": pos.y,
                "zone": zone,
                "server": server,
                "subcarriers": ";".join(str(l) for l in subs),
                "n_subcarriers": len(subs),
                "ris_elements": elements,
                "power_w": power,
                "rate_bps": rate,
                "meets_rate": rate >= scenario.r0_user,
                "outage": user in outage,
            }
        )
    return rows


def trace_rows(trace: tuple[TracePoint, ...]) -> list[dict[str, Any]]:
    # loss figures carried both linear and in dB for auditability
    return [
        {
            "kappa": _finite_or_none(point.kappa),
            "L_cs": point.L_cs,
            "L_uav": point.L_uav,
            "R_star": point.R_star,
            "u_haps": point.U_haps,
            "n_uav": point.N_uav,
            "outage_count": point.outage_count,
            "lambda_true": point.lambda_true,
            "lambda_true_db": _db_or_none(point.lambda_true),
            "lambda_upp": _finite_or_none(point.lambda_upp),
            "lambda_upp_db": _db_or_none(point.lambda_upp),
        }
        for point in trace
    ]


def solution_summary(solution: ParetoSolution, scenario: Scenario) -> dict[str, Any]:
    return {
        "kappa": _finite_or_none(solution.kappa),
        "R_star": solution.R_star,
        "n_uav": solution.N_uav_star,
        "u_haps": solution.U_haps,
        "coverage_pct": 100.0 * solution.U_haps / scenario.n_users,
        "outage_count": len(solution.outage_users),
        "outage_users": list(solution.outage_users),
        "lambda_true": solution.lambda_true,
        "lambda_true_db": _db_or_none(solution.lambda_true),
        "lambda_upp": _finite_or_none(solution.lambda_upp),
        "lambda_upp_db": _db_or_none(solution.lambda_upp),
        "L_cs": solution.plan.split.L_cs,
        "L_uav": solution.plan.split.L_uav,
    }


def solution_artifact(
    result: SolveResult,
    scenario: Scenario,
    seed: int,
    regime: str = "optimized",
) -> dict[str, Any]:
    """Full JSON document for one solve or baseline run."""
    sol = result.best
    deployment = {
        "n_uav": sol.deployment.n_uav,
        "centroids": [[cx, cy] for cx, cy in sol.deployment.centroids],
        "membership": {str(u): j for u, j in sorted(sol.deployment.membership.items())},
    }
    return {
        "schema": SOLUTION_SCHEMA,
        "seed": seed,
        "regime": regime,
        "summary": solution_summary(sol, scenario),
        "deployment": deployment,
        "allocation": allocation_rows(sol, scenario),
        "trace": trace_rows(result.trace),
    }


def baseline_rows(results: dict[str, SolveResult], scenario: Scenario) -> list[dict[str, Any]]:
    rows = []
    for regime, result in results.items():
        sol = result.best
        rows.append(
            {
                "regime": regime,
                "kappa": _finite_or_none(sol.kappa),
                "coverage_pct": 100.0 * sol.U_haps / scenario.n_users,
                "n_uav": sol.N_uav_star,
                "outage_count": len(sol.outage_users),
                "lambda_upp_db": _db_or_none(sol.lambda_upp),
            }
        )
    return rows


def comparison_artifact(
    results: dict[str, SolveResult], scenario: Scenario, seed: int
) -> dict[str, Any]:
    return {
        "schema": COMPARISON_SCHEMA,
        "seed": seed,
        "rows": baseline_rows(results, scenario),
    }


def sweep_rows(result: SweepResult) -> list[dict[str, Any]]:
    """Sweep rows in deterministic order: swept value, then seed."""
    rows = []
    for row in sorted(result.rows, key=lambda r: (r.value, r.seed)):
        rows.append(
            {
                "variable": row.variable,
                "value": row.value,
                "seed": row.seed,
                "u_haps": row.u_haps,
                "coverage_pct": row.coverage_pct,
                "n_uav": row.n_uav,
                "lambda_true_db": row.lambda_true_db,
                "lambda_upp_db": row.lambda_upp_db,
                "r_star": row.r_star,
                "outage_count": row.outage_count,
                "wall_ms": row.wall_ms,
                "error": row.error,
            }
        )
    return rows


def sweep_artifact(result: SweepResult) -> dict[str, Any]:
    return {
        "schema": SWEEP_SCHEMA,
        "variable": result.spec.variable,
        "regime": result.spec.regime,
        "replications": result.spec.replications,
        "rows": sweep_rows(result),
    }


def canonical_json(document: dict[str, Any]) -> str:
    """Stable serialization: sorted keys, two-space indent, trailing newline."""
    return json.dumps(document, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def rows_to_csv(fieldnames: tuple[str, ...], rows: list[dict[str, Any]]) -> str:
    """UTF-8 CSV with a fixed header; floats use shortest round-trip repr."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(fieldnames)
    for row in rows:
        writer.writerow([_cell(row.get(name)) for name in fieldnames])
    return buffer.getvalue()

"""Two-layer planning search over the bandwidth portioning factor.

Outer loop: scan a grid of portioning factors. Inner loop, lexicographic:
first shrink the inner-zone radius while every outer-zone user stays rate
feasible (maximizing reflector-path coverage), then walk the UAV count
down while the inner zone stays feasible. The returned operating point is
the lexicographically best traced one: coverage first, then UAV count,
then the loss bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable

import numpy as np

from . import channel
from .allocation import (
    AllocationPlan,
    BandwidthSplit,
    ZonePartition,
    build_haps_assignment,
    build_uav_assignment,
    count_haps_served,
    haps_only_split,
    partition,
    split_bandwidth,
    uav_only_split,
    user_rate_in_plan,
)
from .errors import InsufficientElements, InvalidAlpha, NoSubcarriersForUser
from .placement import (
    UavDeployment,
    empty_deployment,
    kmeans_place,
    pathloss_upper_bound,
    true_total_pathloss,
)
from .ris import PhaseDesign, design_phases_for
from .scenario import Scenario, derive_seed

BASELINE_REGIMES = ("uav-only", "haps-only", "equal-split", "optimized")

# Seed salts keep the per-purpose RNG streams disjoint.
_SALT_CLUSTER = 11
_SALT_KMEANS = 23


@dataclass(frozen=True)
class OptimizerConfig:
    """Knobs of the two-layer search; defaults match the desk-scale setup."""

    kappa_grid: tuple[float, ...] | None = None   # None -> 1.0, 1.5, ... up to Q_max
    Q_max: int = 8
    delta_R: float = 50.0          # radius scan step, m
    delta_N: int = 1               # UAV reduction step
    T: int | None = None           # radius scan cap; None -> floor(R0 / delta_R)
    T_prime: int | None = None     # UAV scan cap; None -> full descent to 1
    epsilon: float = 1.0           # convergence threshold on the integer deltas
    N_uav_init: int | str = "auto"  # "auto" -> inner-zone size
    n_uav_max: int | None = None   # optional hard deployment budget
    early_stop: bool = False       # consecutive-delta stop on the outer scan
    kmeans_restarts: int = 20
    kmeans_max_iter: int = 100

    def __post_init__(self) -> None:
        if not self.delta_R > 0:
            raise ValueError(f"delta_R must be positive, got {self.delta_R}")
        if self.delta_N < 1:
            raise ValueError(f"delta_N must be >= 1, got {self.delta_N}")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.Q_max < 1:
            raise ValueError(f"Q_max must be >= 1, got {self.Q_max}")
        if self.kappa_grid is not None:
            grid = tuple(self.kappa_grid)
            if not grid:
                raise ValueError("kappa_grid must not be empty")
            if any(not k > 0 for k in grid):
                raise ValueError(f"kappa values must be positive, got {grid}")
            if not all(a < b for a, b in zip(grid, grid[1:])):
                raise ValueError(f"kappa_grid must be strictly increasing, got {grid}")
        if self.n_uav_max is not None and self.n_uav_max < 0:
            raise ValueError(f"n_uav_max must be >= 0, got {self.n_uav_max}")

    def resolved_grid(self) -> tuple[float, ...]:
        if self.kappa_grid is not None:
            return tuple(self.kappa_grid)[: self.Q_max]
        return tuple(1.0 + 0.5 * i for i in range(self.Q_max))


@dataclass(frozen=True)
class HapsStage:
    """Result of the radius scan: smallest feasible zone radius and its plan fragment."""

    r_star: float
    zone: ZonePartition
    clustering: object | None
    haps_subcarriers: dict
    power_cs: dict
    u_haps: int
    scan: tuple[tuple[float, int, bool], ...]   # (radius, |C|, feasible) per step
    steps: int


@dataclass(frozen=True)
class UavStage:
    """Result of the UAV reduction scan."""

    n_uav: int
    n_init: int
    deployment: UavDeployment
    outage: tuple[int, ...]
    steps: int
    feasible: bool


@dataclass(frozen=True)
class ParetoSolution:
    """One operating point: portioning factor, zone radius, UAV fleet, plan."""

    kappa: float
    R_star: float
    N_uav_star: int
    U_haps: int
    outage_users: tuple[int, ...]
    lambda_true: float
    lambda_upp: float | None
    deployment: UavDeployment
    plan: AllocationPlan

    def lexicographic_key(self) -> tuple[float, float, float]:
        upper = self.lambda_upp if self.lambda_upp is not None else math.inf
        return (self.U_haps, -self.N_uav_star, -upper)


@dataclass(frozen=True)
class TracePoint:
    """Per-grid-point summary retained for plotting and dominance checks."""

    kappa: float
    L_cs: int
    L_uav: int
    R_star: float
    U_haps: int
    N_uav: int
    outage_count: int
    lambda_true: float
    lambda_upp: float | None
    r_steps: int
    n_steps: int
    solution: ParetoSolution


@dataclass(frozen=True)
class SolveResult:
    best: ParetoSolution
    trace: tuple[TracePoint, ...]
    counters: dict[str, int]


def _radius_grid(scenario: Scenario, cfg: OptimizerConfig, include_zero: bool) -> list[float]:
    cap = cfg.T if cfg.T is not None else math.floor(scenario.R0 / cfg.delta_R)
    grid = []
    for t in range(1, cap + 1):
        r = scenario.R0 - t * cfg.delta_R
        if r <= 0:
            break
        grid.append(r)
    if include_zero:
        grid.append(0.0)
    return grid


def _haps_zone_feasible(
    zone: ZonePartition,
    split: BandwidthSplit,
    scenario: Scenario,
    phases: PhaseDesign,
    seed: int,
) -> tuple[bool, object | None, dict, dict]:
    """Build the outer-zone assignment and test every outer user's rate."""
    if not zone.C:
        return True, None, {}, {}
    try:
        clustering, subs, power = build_haps_assignment(zone.C, split, scenario, seed)
    except (InsufficientElements, NoSubcarriersForUser):
        return False, None, {}, {}
    probe = AllocationPlan(
        zone=zone,
        split=split,
        ris_clusters=clustering,
        haps_subcarriers=subs,
        uav_subcarriers={},
        power_cs=power,
        power_uav={},
    )
    no_uavs = empty_deployment()
    for user in zone.C:
        if user_rate_in_plan(user, probe, scenario, no_uavs, phases) < scenario.r0_user:
            return False, clustering, subs, power
    return True, clustering, subs, power


def _haps_stage(
    split: BandwidthSplit,
    scenario: Scenario,
    seed: int,
    cfg: OptimizerConfig,
    phases: PhaseDesign,
    q: int,
    include_zero: bool = False,
) -> HapsStage:
    """Shrink the zone radius while every outer user stays feasible.

    The scan stops at the first infeasible radius; the kept radius is the
    smallest feasible one (the full radius, with an empty outer zone, is
    trivially feasible).
    """
    full_zone = partition(scenario.users, scenario.R0, scenario.coverage_center)
    best = (scenario.R0, full_zone, None, {}, {})
    scan: list[tuple[float, int, bool]] = []

    if split.L_cs > 0:
        for t, radius in enumerate(_radius_grid(scenario, cfg, include_zero), start=1):
            zone = partition(scenario.users, radius, scenario.coverage_center)
            ok, clustering, subs, power = _haps_zone_feasible(
                zone, split, scenario, phases, derive_seed(seed, _SALT_CLUSTER, q, t)
            )
            scan.append((radius, len(zone.C), ok))
            if not ok:
                break
            best = (radius, zone, clustering, subs, power)

    r_star, zone, clustering, subs, power = best
    return HapsStage(
        r_star=r_star,
        zone=zone,
        clustering=clustering,
        haps_subcarriers=subs,
        power_cs=power,
        u_haps=len(zone.C),
        scan=tuple(scan),
        steps=len(scan),
    )


def _uav_zone_rates(
    uav_subs: dict[tuple[int, int], tuple[int, ...]],
    power_uav: dict[tuple[int, int, int], float],
    deployment: UavDeployment,
    split: BandwidthSplit,
    scenario: Scenario,
) -> dict[int, float]:
    """Vectorized per-user rates inside the UAV band, interference included.

    Matches channel.uav_sinr link by link; kept separate so the reduction
    scan does not pay a per-subcarrier pair scan in Python.
    """
    pairs = [(u, j) for (u, j), subs in uav_subs.items() if subs]
    if not pairs:
        return {}
    users = sorted({u for u, _ in pairs})
    serving = {u: j for u, j in pairs}
    radio = scenario.radio
    altitude = scenario.uav_altitude

    gains = np.empty((len(users), deployment.n_uav))
    for row, user in enumerate(users):
        pos = scenario.users[user]
        for j in range(deployment.n_uav):
            gains[row, j] = channel.uav_channel_gain(
                pos, deployment.uav_position(j, altitude), radio
            )

    offset = split.L_cs
    tx_power = np.zeros((split.L_uav, deployment.n_uav))
    for (user, j), subs in uav_subs.items():
        for l in subs:
            tx_power[l - offset, j] = power_uav[(user, j, l)]

    noise = channel.noise_power(radio, scenario.subcarrier_bandwidth)
    B_l = scenario.subcarrier_bandwidth
    strict = scenario.strict_cross_uav_orthogonality

    rates: dict[int, float] = {}
    for row, user in enumerate(users):
        j = serving[user]
        subs = uav_subs[(user, j)]
        idx = np.fromiter((l - offset for l in subs), dtype=int)
        own = np.fromiter((power_uav[(user, j, l)] for l in subs), dtype=float)
        signal = own * gains[row, j]
        if strict:
            interference = 0.0
        else:
            interference = tx_power[idx, :] @ gains[row, :] - tx_power[idx, j] * gains[row, j]
        gamma = signal / (noise + interference)
        rates[user] = float(B_l * np.log2(1.0 + gamma).sum())
    return rates


def _uav_stage(
    zone: ZonePartition,
    split: BandwidthSplit,
    scenario: Scenario,
    seed: int,
    cfg: OptimizerConfig,
    q: int,
) -> UavStage:
    """Walk the UAV count down from its initial value while feasible.

    The first infeasible count ends the scan; if even the initial count
    fails, it is returned with the rate violators marked for outage.
    """
    users_b = list(zone.B)
    r0 = scenario.r0_user
    if not users_b:
        return UavStage(0, 0, empty_deployment(), (), 0, True)
    if split.L_uav == 0 or cfg.n_uav_max == 0:
        outage = tuple(users_b) if r0 > 0 else ()
        return UavStage(0, 0, empty_deployment(), outage, 0, not outage)

    n_init = len(users_b) if cfg.N_uav_init == "auto" else int(cfg.N_uav_init)
    n_init = max(1, min(n_init, len(users_b)))
    if cfg.n_uav_max is not None:
        n_init = min(n_init, cfg.n_uav_max)
    t_cap = cfg.T_prime if cfg.T_prime is not None else 1 + (n_init - 1) // max(cfg.delta_N, 1)

    points = [scenario.users[u] for u in users_b]
    best: tuple[int, UavDeployment] | None = None
    first_attempt: tuple[UavDeployment, dict[int, float]] | None = None
    steps = 0
    n = n_init
    for _ in range(t_cap):
        if n < 1:
            break
        deployment = kmeans_place(
            points,
            n,
            derive_seed(seed, _SALT_KMEANS, q, n),
            max_iter=cfg.kmeans_max_iter,
            restarts=cfg.kmeans_restarts,
            user_ids=users_b,
        )
        steps += 1
        try:
            uav_subs, power = build_uav_assignment(deployment, split, scenario)
        except NoSubcarriersForUser:
            rates: dict[int, float] = {}
            feasible = False
        else:
            rates = _uav_zone_rates(uav_subs, power, deployment, split, scenario)
            feasible = all(rates.get(u, 0.0) >= r0 for u in users_b)
        if first_attempt is None:
            first_attempt = (deployment, rates)
        if not feasible:
            break
        best = (n, deployment)
        n -= cfg.delta_N

    if best is not None:
        n_star, deployment = best
        return UavStage(n_star, n_init, deployment, (), steps, True)

    deployment, rates = first_attempt
    violators = tuple(sorted(u for u in users_b if rates.get(u, 0.0) < r0))
    return UavStage(n_init, n_init, deployment, violators, steps, False)


def _assemble(
    kappa: float,
    split: BandwidthSplit,
    stage_h: HapsStage,
    stage_u: UavStage,
    scenario: Scenario,
) -> ParetoSolution:
    deployment = stage_u.deployment
    if deployment.n_uav > 0 and split.L_uav > 0:
        try:
            uav_subs, power_uav = build_uav_assignment(deployment, split, scenario)
        except NoSubcarriersForUser:
            uav_subs, power_uav = {}, {}
    else:
        uav_subs, power_uav = {}, {}
    plan = AllocationPlan(
        zone=stage_h.zone,
        split=split,
        ris_clusters=stage_h.clustering,
        haps_subcarriers=stage_h.haps_subcarriers,
        uav_subcarriers=uav_subs,
        power_cs=stage_h.power_cs,
        power_uav=power_uav,
    )
    lam_true = true_total_pathloss(deployment, scenario) if deployment.n_uav else 0.0
    try:
        lam_upp = pathloss_upper_bound(deployment, scenario, n_uav_init=stage_u.n_init)
    except InvalidAlpha:
        lam_upp = None  # bound undefined away from exponent 2; report loss only
    return ParetoSolution(
        kappa=kappa,
        R_star=stage_h.r_star,
        N_uav_star=stage_u.n_uav,
        U_haps=count_haps_served(plan),
        outage_users=stage_u.outage,
        lambda_true=lam_true,
        lambda_upp=lam_upp,
        deployment=deployment,
        plan=plan,
    )


def maximize_haps_coverage(
    kappa: float,
    scenario: Scenario,
    seed: int,
    cfg: OptimizerConfig | None = None,
) -> HapsStage:
    cfg = cfg or OptimizerConfig()
    phases = design_phases_for(scenario)
    return _haps_stage(split_bandwidth(kappa, scenario.L_tot), scenario, seed, cfg, phases, q=0)


def minimize_uav_count(
    R_star: float,
    kappa: float,
    scenario: Scenario,
    seed: int,
    cfg: OptimizerConfig | None = None,
) -> UavStage:
    cfg = cfg or OptimizerConfig()
    split = split_bandwidth(kappa, scenario.L_tot)
    zone = partition(scenario.users, R_star, scenario.coverage_center)
    return _uav_stage(zone, split, scenario, seed, cfg, q=0)


def solve(scenario: Scenario, cfg: OptimizerConfig | None = None, seed: int = 0) -> SolveResult:
    """Full grid scan plus lexicographic selection.

    Early stopping (when enabled) only prunes the scan; the best traced
    point is returned either way.
    """
    cfg = cfg or OptimizerConfig()
    phases = design_phases_for(scenario)
    trace: list[TracePoint] = []
    counters = {"kappa_points": 0, "r_steps": 0, "n_steps": 0, "kmeans_runs": 0}

    for q, kappa in enumerate(cfg.resolved_grid()):
        split = split_bandwidth(kappa, scenario.L_tot)
        stage_h = _haps_stage(split, scenario, seed, cfg, phases, q)
        stage_u = _uav_stage(stage_h.zone, split, scenario, seed, cfg, q)
        solution = _assemble(kappa, split, stage_h, stage_u, scenario)
        trace.append(_trace_point(split, stage_h, stage_u, solution))
        counters["kappa_points"] += 1
        counters["r_steps"] += stage_h.steps
        counters["n_steps"] += stage_u.steps
        counters["kmeans_runs"] += stage_u.steps * cfg.kmeans_restarts
        if cfg.early_stop and len(trace) >= 2:
            prev, cur = trace[-2], trace[-1]
            if (
                abs(cur.N_uav - prev.N_uav) < cfg.epsilon
                and abs(cur.U_haps - prev.U_haps) < cfg.epsilon
            ):
                break

    best = _lexicographic_best(point.solution for point in trace)
    return SolveResult(best=best, trace=tuple(trace), counters=counters)


def _trace_point(
    split: BandwidthSplit, stage_h: HapsStage, stage_u: UavStage, solution: ParetoSolution
) -> TracePoint:
    return TracePoint(
        kappa=solution.kappa,
        L_cs=split.L_cs,
        L_uav=split.L_uav,
        R_star=solution.R_star,
        U_haps=solution.U_haps,
        N_uav=solution.N_uav_star,
        outage_count=len(solution.outage_users),
        lambda_true=solution.lambda_true,
        lambda_upp=solution.lambda_upp,
        r_steps=stage_h.steps,
        n_steps=stage_u.steps,
        solution=solution,
    )


def _lexicographic_best(solutions: Iterable[ParetoSolution]) -> ParetoSolution:
    best: ParetoSolution | None = None
    for sol in solutions:
        if best is None or sol.lexicographic_key() > best.lexicographic_key():
            best = sol
    if best is None:
        raise ValueError("no solutions traced")
    return best


def run_baseline(
    regime: str,
    scenario: Scenario,
    seed: int = 0,
    cfg: OptimizerConfig | None = None,
) -> SolveResult:
    """Evaluate one of the named operating regimes.

    uav-only and haps-only are exact degenerate band splits (a zero-width
    band, not a numeric limit); equal-split pins the portioning factor at
    one; optimized runs the full scan.
    """
    cfg = cfg or OptimizerConfig()
    if regime not in BASELINE_REGIMES:
        raise ValueError(f"unknown regime {regime!r}, expected one of {BASELINE_REGIMES}")

    if regime == "optimized":
        return solve(scenario, cfg, seed)
    if regime == "equal-split":
        return solve(scenario, replace(cfg, kappa_grid=(1.0,), Q_max=1), seed)

    phases = design_phases_for(scenario)
    if regime == "uav-only":
        split = uav_only_split(scenario.L_tot)
        zone = partition(scenario.users, scenario.R0, scenario.coverage_center)
        stage_h = HapsStage(
            r_star=scenario.R0,
            zone=zone,
            clustering=None,
            haps_subcarriers={},
            power_cs={},
            u_haps=0,
            scan=(),
            steps=0,
        )
        stage_u = _uav_stage(zone, split, scenario, seed, cfg, q=0)
        solution = _assemble(0.0, split, stage_h, stage_u, scenario)
    else:  # haps-only: the zone radius may vanish so every user can be served
        split = haps_only_split(scenario.L_tot)
        stage_h = _haps_stage(split, scenario, seed, cfg, phases, q=0, include_zero=True)
        stage_u = _uav_stage(stage_h.zone, split, scenario, seed, cfg, q=0)
        solution = _assemble(math.inf, split, stage_h, stage_u, scenario)

    point = _trace_point(split, stage_h, stage_u, solution)
    counters = {
        "kappa_points": 1,
        "r_steps": stage_h.steps,
        "n_steps": stage_u.steps,
        "kmeans_runs": stage_u.steps * cfg.kmeans_restarts,
    }
    return SolveResult(best=solution, trace=(point,), counters=counters)

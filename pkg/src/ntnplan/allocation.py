"""Zone partitioning, bandwidth portioning, and concrete resource plans.

A plan pins down who is served by which tier, on which subcarriers, with
how much power. Construction keeps every structural constraint satisfied
(disjoint clusters, per-node orthogonality, budget-respecting uniform power
splits); check_feasibility re-verifies them and evaluates per-user rates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from . import channel
from .errors import NoSubcarriersForUser
from .placement import UavDeployment, empty_deployment
from .ris import PhaseDesign, RisClustering, cluster_ris
from .scenario import Point3, Scenario

BUDGET_REL_TOL = 1e-12


@dataclass(frozen=True)
class ZonePartition:
    """Inner-disk user set B (radius R) and outer complement C."""

    R: float
    B: tuple[int, ...]
    C: tuple[int, ...]


def partition(users: Sequence[Point3], R: float, center: Point3 | None = None) -> ZonePartition:
    """Threshold split on horizontal distance to the coverage center.

    Users exactly on the boundary go to B; the split is exhaustive and
    disjoint by construction.
    """
    if R < 0:
        raise ValueError(f"R must be >= 0, got {R}")
    cx = center.x if center is not None else 0.0
    cy = center.y if center is not None else 0.0
    inner = []
    outer = []
    for i, u in enumerate(users):
        if math.hypot(u.x - cx, u.y - cy) <= R:
            inner.append(i)
        else:
            outer.append(i)
    return ZonePartition(R=float(R), B=tuple(inner), C=tuple(outer))


@dataclass(frozen=True)
class BandwidthSplit:
    """Subcarrier counts for the ground-station band and the UAV band.

    kappa is the portioning ratio L_cs / L_uav; the degenerate endpoints
    (all-UAV, all-CS) are stored as kappa = 0 and kappa = inf with exact
    zero-width bands.
    """

    kappa: float
    L_cs: int
    L_uav: int

    @property
    def L_tot(self) -> int:
        return self.L_cs + self.L_uav

    def cs_band(self) -> range:
        return range(0, self.L_cs)

    def uav_band(self) -> range:
        return range(self.L_cs, self.L_tot)


def split_bandwidth(kappa: float, L_tot: int) -> BandwidthSplit:
    """L_cs = floor(kappa / (kappa + 1) * L_tot), remainder to the UAV band.

    The all-CS and all-UAV endpoints are separate constructors, not limits
    of this formula.
    """
    if not kappa > 0 or not math.isfinite(kappa):
        raise ValueError(f"kappa must be positive and finite, got {kappa}")
    if L_tot < 2:
        raise ValueError(f"L_tot must be >= 2, got {L_tot}")
    l_cs = math.floor(kappa / (kappa + 1.0) * L_tot)
    return BandwidthSplit(kappa=float(kappa), L_cs=l_cs, L_uav=L_tot - l_cs)


def uav_only_split(L_tot: int) -> BandwidthSplit:
    return BandwidthSplit(kappa=0.0, L_cs=0, L_uav=L_tot)


def haps_only_split(L_tot: int) -> BandwidthSplit:
    return BandwidthSplit(kappa=math.inf, L_cs=L_tot, L_uav=0)


@dataclass(frozen=True)
class AllocationPlan:
    """Complete user/subcarrier/power assignment for both tiers."""

    zone: ZonePartition
    split: BandwidthSplit
    ris_clusters: RisClustering | None
    haps_subcarriers: dict[int, tuple[int, ...]]                 # user -> subcarriers
    uav_subcarriers: dict[tuple[int, int], tuple[int, ...]]      # (user, uav) -> subcarriers
    power_cs: dict[tuple[int, int], float]                       # (user, subcarrier) -> W
    power_uav: dict[tuple[int, int, int], float]                 # (user, uav, subcarrier) -> W

    def server_of(self, user: int) -> tuple[str, int | None]:
        """('haps', None), ('uav', j), or ('none', None) for unassigned."""
        if self.haps_subcarriers.get(user):
            return ("haps", None)
        for (u, j), subs in self.uav_subcarriers.items():
            if u == user and subs:
                return ("uav", j)
        return ("none", None)


def build_haps_assignment(
    users_in_C: Sequence[int],
    split: BandwidthSplit,
    scenario: Scenario,
    seed: int,
) -> tuple[RisClustering | None, dict[int, tuple[int, ...]], dict[tuple[int, int], float]]:
    """Cluster, subcarrier, and power assignment for the outer-zone users.

    Each user receives floor(L_cs / |C|) subcarriers as a contiguous block
    (sorted user order) and floor(M / |C|) reflector elements; remainders
    idle. The ground-station budget is split uniformly over active
    (user, subcarrier) pairs.
    """
    users = sorted(int(u) for u in users_in_C)
    if not users:
        return None, {}, {}
    per_user = split.L_cs // len(users)
    if per_user == 0:
        raise NoSubcarriersForUser(
            f"L_cs={split.L_cs} cannot give {len(users)} users a subcarrier each"
        )
    clustering = cluster_ris(users, scenario.M, seed)
    subcarriers: dict[int, tuple[int, ...]] = {}
    for position, user in enumerate(users):
        start = position * per_user
        subcarriers[user] = tuple(range(start, start + per_user))
    active_pairs = len(users) * per_user
    share = scenario.P_cs_max / active_pairs
    power = {(u, l): share for u, subs in subcarriers.items() for l in subs}
    return clustering, subcarriers, power


def build_uav_assignment(
    deployment: UavDeployment,
    split: BandwidthSplit,
    scenario: Scenario,
) -> tuple[dict[tuple[int, int], tuple[int, ...]], dict[tuple[int, int, int], float]]:
    """Subcarrier and power assignment inside each UAV cell.

    Every UAV reuses the full UAV band: its members get disjoint shares of
    floor(L_uav / members) subcarriers plus round-robin remainder, and the
    per-UAV budget is split uniformly over its active pairs.
    """
    subcarriers: dict[tuple[int, int], tuple[int, ...]] = {}
    power: dict[tuple[int, int, int], float] = {}
    band = list(split.uav_band())
    for uav in range(deployment.n_uav):
        members = deployment.members_of(uav)
        if not members:
            continue
        base, remainder = divmod(split.L_uav, len(members))
        if base == 0:
            starving = members[remainder]
            raise NoSubcarriersForUser(
                f"uav {uav} has {len(members)} members but only L_uav={split.L_uav} "
                f"subcarriers; user {starving} would get none"
            )
        cursor = 0
        active = 0
        for position, user in enumerate(members):
            count = base + (1 if position < remainder else 0)
            subcarriers[(user, uav)] = tuple(band[cursor : cursor + count])
            cursor += count
            active += count
        share = scenario.P_uav_max / active
        for position, user in enumerate(members):
            for l in subcarriers[(user, uav)]:
                power[(user, uav, l)] = share
    return subcarriers, power


def build_plan(
    zone: ZonePartition,
    split: BandwidthSplit,
    deployment: UavDeployment | None,
    scenario: Scenario,
    seed: int,
) -> AllocationPlan:
    """Assemble both tiers into one plan.

    A missing or empty deployment leaves the inner-zone users unassigned
    (they surface as outage in the feasibility report, not as an error).
    """
    clustering, haps_subs, power_cs = build_haps_assignment(zone.C, split, scenario, seed)
    if deployment is None:
        deployment = empty_deployment()
    if deployment.n_uav > 0 and split.L_uav > 0:
        uav_subs, power_uav = build_uav_assignment(deployment, split, scenario)
    else:
        uav_subs, power_uav = {}, {}
    return AllocationPlan(
        zone=zone,
        split=split,
        ris_clusters=clustering,
        haps_subcarriers=haps_subs,
        uav_subcarriers=uav_subs,
        power_cs=power_cs,
        power_uav=power_uav,
    )


def user_rate_in_plan(
    user: int,
    plan: AllocationPlan,
    scenario: Scenario,
    deployment: UavDeployment,
    phases: PhaseDesign,
) -> float:
    """Achieved rate for one user under the plan; 0.0 when unassigned."""
    B_l = scenario.subcarrier_bandwidth
    subs = plan.haps_subcarriers.get(user)
    if subs:
        snrs = [channel.haps_snr(user, l, plan, scenario, phases) for l in subs]
        return channel.user_rate(snrs, B_l)
    for (u, uav), uav_subs in plan.uav_subcarriers.items():
        if u == user and uav_subs:
            sinrs = [channel.uav_sinr(user, uav, l, plan, scenario, deployment) for l in uav_subs]
            return channel.user_rate(sinrs, B_l)
    return 0.0


def count_haps_served(plan: AllocationPlan) -> int:
    """Users with at least one subcarrier and at least one reflector element."""
    if plan.ris_clusters is None:
        return 0
    count = 0
    for user, subs in plan.haps_subcarriers.items():
        cluster = plan.ris_clusters.cluster_of_user.get(user)
        if subs and cluster and cluster[1] > cluster[0]:
            count += 1
    return count


@dataclass(frozen=True)
class FeasibilityReport:
    """Outcome of the full constraint sweep over one plan."""

    haps_ok: bool
    uav_ok: bool
    structural_ok: bool
    violating_users: tuple[int, ...]          # rate below target (unassigned users rate 0)
    structural_violations: tuple[str, ...]
    user_rates: dict[int, float]

    @property
    def all_ok(self) -> bool:
        return self.haps_ok and self.uav_ok and self.structural_ok


def check_feasibility(
    plan: AllocationPlan,
    scenario: Scenario,
    deployment: UavDeployment,
    phases: PhaseDesign,
) -> FeasibilityReport:
    """Evaluate rate targets for every user plus all structural constraints.

    Violations are data, never exceptions: an unassigned user simply shows
    a zero rate and lands in violating_users when the target is positive.
    """
    problems = list(_structural_violations(plan, scenario))
    rates: dict[int, float] = {}
    for user in (*plan.zone.C, *plan.zone.B):
        rates[user] = user_rate_in_plan(user, plan, scenario, deployment, phases)

    r0 = scenario.r0_user
    haps_ok = all(rates[u] >= r0 for u in plan.zone.C)
    uav_ok = all(rates[u] >= r0 for u in plan.zone.B)
    violating = tuple(sorted(u for u, rate in rates.items() if rate < r0))
    return FeasibilityReport(
        haps_ok=haps_ok,
        uav_ok=uav_ok,
        structural_ok=not problems,
        violating_users=violating,
        structural_violations=tuple(problems),
        user_rates=rates,
    )


def _structural_violations(plan: AllocationPlan, scenario: Scenario) -> list[str]:
    problems: list[str] = []

    haps_users = {u for u, subs in plan.haps_subcarriers.items() if subs}
    uav_users: dict[int, list[int]] = {}
    for (user, uav), subs in plan.uav_subcarriers.items():
        if subs:
            uav_users.setdefault(user, []).append(uav)

    for user in sorted(haps_users & set(uav_users)):
        problems.append(f"exclusive-association: user {user} assigned to both tiers")
    for user, uavs in sorted(uav_users.items()):
        if len(uavs) > 1:
            problems.append(f"single-uav-association: user {user} assigned to uavs {sorted(uavs)}")

    cs_band = set(plan.split.cs_band())
    seen_cs: dict[int, int] = {}
    for user, subs in sorted(plan.haps_subcarriers.items()):
        for l in subs:
            if l not in cs_band:
                problems.append(f"cs-band: user {user} uses subcarrier {l} outside the CS band")
            if l in seen_cs:
                problems.append(
                    f"cs-orthogonality: subcarrier {l} serves users {seen_cs[l]} and {user}"
                )
            seen_cs[l] = user

    uav_band = set(plan.split.uav_band())
    per_uav_seen: dict[int, dict[int, int]] = {}
    for (user, uav), subs in sorted(plan.uav_subcarriers.items()):
        seen = per_uav_seen.setdefault(uav, {})
        for l in subs:
            if l not in uav_band:
                problems.append(f"uav-band: user {user} uses subcarrier {l} outside the UAV band")
            if l in seen:
                problems.append(
                    f"uav-orthogonality: uav {uav} subcarrier {l} serves users {seen[l]} and {user}"
                )
            seen[l] = user

    if plan.ris_clusters is not None:
        ranges = sorted(plan.ris_clusters.cluster_of_user.items(), key=lambda kv: kv[1])
        for (user_a, span_a), (user_b, span_b) in zip(ranges, ranges[1:]):
            if span_b[0] < span_a[1]:
                problems.append(
                    f"ris-exclusivity: clusters of users {user_a} and {user_b} overlap"
                )
        for user, (start, stop) in ranges:
            if start < 0 or stop > scenario.M:
                problems.append(f"ris-range: cluster of user {user} exceeds M={scenario.M}")

    cs_total = sum(plan.power_cs.values())
    if cs_total > scenario.P_cs_max * (1 + BUDGET_REL_TOL):
        problems.append(f"cs-power-budget: {cs_total!r} W > P_cs_max={scenario.P_cs_max!r} W")
    per_uav_power: dict[int, float] = {}
    for (user, uav, l), p in plan.power_uav.items():
        per_uav_power[uav] = per_uav_power.get(uav, 0.0) + p
    for uav, total in sorted(per_uav_power.items()):
        if total > scenario.P_uav_max * (1 + BUDGET_REL_TOL):
            problems.append(f"uav-power-budget: uav {uav} uses {total!r} W > {scenario.P_uav_max!r} W")

    for user, subs in plan.haps_subcarriers.items():
        for l in subs:
            if (user, l) not in plan.power_cs:
                problems.append(f"cs-power-missing: no power for user {user} subcarrier {l}")
    for (user, uav), subs in plan.uav_subcarriers.items():
        for l in subs:
            if (user, uav, l) not in plan.power_uav:
                problems.append(f"uav-power-missing: no power for ({user}, {uav}, {l})")

    return problems

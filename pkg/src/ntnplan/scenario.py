"""World model: node geometry, radio constants, and seeded user layouts.

Everything here is immutable after construction and safe to share across
threads. All radio quantities are stored linear; dB/dBm conversion happens
once at config load (see :mod:`ntnplan.config`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PlacementBudgetExhausted

# Rejection-sampling budget per requested user.
PLACEMENT_ATTEMPTS_PER_USER = 10_000


@dataclass(frozen=True)
class Point3:
    """Cartesian position in meters."""

    x: float
    y: float
    z: float = 0.0


@dataclass(frozen=True)
class RadioParams:
    """Link-budget constants, all linear.

    eta1/eta2 are the excess-loss multipliers over free space for
    unobstructed and obstructed air-to-ground links; psi/beta shape the
    elevation-dependent sight probability.
    """

    f_c: float        # carrier frequency, Hz
    c: float          # propagation speed, m/s
    alpha: float      # path-loss exponent
    eta1: float       # excess loss, clear links (>= 1)
    eta2: float       # excess loss, blocked links (>= eta1)
    psi: float        # sight-probability offset, degrees
    beta: float       # sight-probability slope, 1/degree
    N0: float         # noise power spectral density, W/Hz
    G_cs: float       # ground-station antenna gain
    G_uav: float      # aerial base-station antenna gain
    G_user: float     # user terminal antenna gain
    mu: float         # reflector element efficiency in [0, 1]

    @property
    def wavelength(self) -> float:
        return self.c / self.f_c


@dataclass(frozen=True)
class Scenario:
    """Immutable world description consumed by every planning stage."""

    users: tuple[Point3, ...]
    cs_pos: Point3
    haps_pos: Point3
    coverage_center: Point3
    R0: float                 # coverage radius, m
    D0: float                 # minimum user separation, m
    uav_altitude: float       # shared altitude of every aerial base station, m
    radio: RadioParams
    L_tot: int                # total subcarrier count
    BW_total: float           # system bandwidth, Hz
    P_cs_max: float           # ground-station power budget, W
    P_uav_max: float          # per-UAV power budget, W
    M: int                    # total reflector element count
    r0_user: float            # per-user minimum rate, bit/s
    strict_cross_uav_orthogonality: bool = False

    @property
    def n_users(self) -> int:
        return len(self.users)

    @property
    def subcarrier_bandwidth(self) -> float:
        return self.BW_total / self.L_tot


def generate_users(count: int, R0: float, D0: float, seed: int) -> list[Point3]:
    """Draw `count` ground positions uniform in the disk of radius R0.

    Rejection sampling: uniform disk proposals, rejected when closer than D0
    to an already placed user. Identical arguments give an identical layout.

    Raises PlacementBudgetExhausted after 10000 * count failed proposals,
    which signals an infeasible density rather than bad luck.
    """
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    if R0 <= 0:
        raise ValueError(f"R0 must be positive, got {R0}")
    if D0 < 0:
        raise ValueError(f"D0 must be >= 0, got {D0}")

    rng = np.random.default_rng(seed)
    budget = PLACEMENT_ATTEMPTS_PER_USER * count
    placed_x: list[float] = []
    placed_y: list[float] = []
    d0_sq = D0 * D0

    attempts = 0
    while len(placed_x) < count:
        if attempts >= budget:
            raise PlacementBudgetExhausted(
                f"placed {len(placed_x)} of {count} users after {attempts} attempts "
                f"(R0={R0}, D0={D0}); the requested density does not fit"
            )
        attempts += 1
        r = R0 * math.sqrt(rng.random())
        phi = 2.0 * math.pi * rng.random()
        x = r * math.cos(phi)
        y = r * math.sin(phi)
        ok = True
        for px, py in zip(placed_x, placed_y):
            if (x - px) ** 2 + (y - py) ** 2 < d0_sq:
                ok = False
                break
        if ok:
            placed_x.append(x)
            placed_y.append(y)

    return [Point3(x, y, 0.0) for x, y in zip(placed_x, placed_y)]


def validate(scenario: Scenario) -> list[str]:
    """Return every violated invariant, naming the offending field.

    An empty list means the scenario is consistent.
    """
    v: list[str] = []
    r = scenario.radio

    if not r.f_c > 0:
        v.append(f"f_c must be positive (f_c={r.f_c})")
    if not r.c > 0:
        v.append(f"c must be positive (c={r.c})")
    if not r.alpha >= 2:
        v.append(f"alpha must be >= 2 (alpha={r.alpha})")
    if not r.eta1 >= 1:
        v.append(f"eta1 must be >= 1 (eta1={r.eta1})")
    if not r.eta2 >= r.eta1:
        v.append(f"eta2 >= eta1 required (eta1={r.eta1}, eta2={r.eta2})")
    if not 0 <= r.mu <= 1:
        v.append(f"mu must lie in [0, 1] (mu={r.mu})")
    if not r.N0 > 0:
        v.append(f"N0 must be positive (N0={r.N0})")
    if r.psi < 0:
        v.append(f"psi must be >= 0 (psi={r.psi})")
    if r.beta < 0:
        v.append(f"beta must be >= 0 (beta={r.beta})")
    for name, gain in (("G_cs", r.G_cs), ("G_uav", r.G_uav), ("G_user", r.G_user)):
        if not gain > 0:
            v.append(f"{name} must be positive linear gain ({name}={gain})")

    if not scenario.R0 > 0:
        v.append(f"R0 must be positive (R0={scenario.R0})")
    if scenario.D0 < 0:
        v.append(f"D0 must be >= 0 (D0={scenario.D0})")
    if not scenario.uav_altitude > 0:
        v.append(f"uav_altitude must be positive (uav_altitude={scenario.uav_altitude})")
    if scenario.L_tot < 2:
        v.append(f"L_tot must be >= 2 (L_tot={scenario.L_tot})")
    if scenario.M < 1:
        v.append(f"M must be >= 1 (M={scenario.M})")
    if not scenario.BW_total > 0 or not scenario.subcarrier_bandwidth > 0:
        v.append(f"BW_total must give a positive per-subcarrier bandwidth (BW_total={scenario.BW_total})")
    if not scenario.P_cs_max > 0:
        v.append(f"P_cs_max must be positive (P_cs_max={scenario.P_cs_max})")
    if not scenario.P_uav_max > 0:
        v.append(f"P_uav_max must be positive (P_uav_max={scenario.P_uav_max})")
    if scenario.r0_user < 0:
        v.append(f"r0_bps must be >= 0 (r0_bps={scenario.r0_user})")

    for name, node in (
        ("cs_pos", scenario.cs_pos),
        ("haps_pos", scenario.haps_pos),
        ("coverage_center", scenario.coverage_center),
    ):
        if not all(math.isfinite(c) for c in (node.x, node.y, node.z)):
            v.append(f"{name} has non-finite components ({node})")

    cx, cy = scenario.coverage_center.x, scenario.coverage_center.y
    for i, u in enumerate(scenario.users):
        if not all(math.isfinite(c) for c in (u.x, u.y, u.z)):
            v.append(f"user {i} has non-finite coordinates ({u})")
            continue
        if u.z != 0.0:
            v.append(f"user {i} not on the ground (z={u.z})")
        dist = math.hypot(u.x - cx, u.y - cy)
        if dist > scenario.R0 * (1 + 1e-12):
            v.append(f"user {i} outside coverage: distance {dist:.3f} m > R0={scenario.R0} m")
    for i in range(scenario.n_users):
        for j in range(i + 1, scenario.n_users):
            a, b = scenario.users[i], scenario.users[j]
            d = math.hypot(a.x - b.x, a.y - b.y)
            if d < scenario.D0 * (1 - 1e-12):
                v.append(f"users {i} and {j} violate D0 separation: {d:.3f} m < D0={scenario.D0} m")

    return v


def derive_seed(*parts: int) -> int:
    """Stable 64-bit sub-seed from an integer path; platform independent."""
    ss = np.random.SeedSequence([int(p) for p in parts])
    return int(ss.generate_state(1, dtype=np.uint64)[0])

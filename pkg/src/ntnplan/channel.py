"""Link-level math: distances, sight probability, path loss, SINR, rates.

Path loss for the aerial base stations follows the probabilistic
air-to-ground model: Lbar = [p_los * eta1 + (1 - p_los) * eta2] * (4 pi f d / c)^alpha.
The reflected ground-station path is a two-leg free-space cascade with the
coherent cluster gain supplied by :mod:`ntnplan.ris`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

from .errors import DegenerateGeometry, UnassignedLink, UnassignedUser
from .ris import PhaseDesign, coherence_amplitude
from .scenario import Point3, RadioParams, Scenario

if TYPE_CHECKING:  # pragma: no cover - annotations only
    from .allocation import AllocationPlan
    from .placement import UavDeployment


def distance_3d(a: Point3, b: Point3) -> float:
    """Euclidean distance in meters."""
    return math.sqrt((a.x - b.x) ** 2 + (a.y - b.y) ** 2 + (a.z - b.z) ** 2)


def elevation_angle_deg(user: Point3, uav: Point3) -> float:
    """Elevation of the aerial node seen from the user, in (0, 90] degrees."""
    d = distance_3d(user, uav)
    if d == 0.0:
        raise DegenerateGeometry("user and uav coincide; elevation undefined")
    if uav.z <= user.z:
        raise ValueError(f"uav must be above the user (uav.z={uav.z}, user.z={user.z})")
    return math.degrees(math.asin((uav.z - user.z) / d))


def los_probability(elevation_deg: float, psi: float, beta: float) -> float:
    """Sigmoid sight probability 1 / (1 + psi * exp(-beta * (elevation - psi)))."""
    if psi < 0 or beta < 0:
        raise ValueError("psi and beta must be non-negative")
    return 1.0 / (1.0 + psi * math.exp(-beta * (elevation_deg - psi)))


def free_space_loss(distance_m: float, radio: RadioParams) -> float:
    """(4 pi f d / c)^alpha, linear."""
    return (4.0 * math.pi * radio.f_c * distance_m / radio.c) ** radio.alpha


def uav_average_pathloss(user: Point3, uav: Point3, radio: RadioParams) -> float:
    """Probability-weighted air-to-ground loss, linear.

    Bracketed by eta1 * fspl and eta2 * fspl for any geometry.
    """
    fspl = free_space_loss(distance_3d(user, uav), radio)
    p = los_probability(elevation_angle_deg(user, uav), radio.psi, radio.beta)
    return (p * radio.eta1 + (1.0 - p) * radio.eta2) * fspl


def uav_channel_gain(user: Point3, uav: Point3, radio: RadioParams) -> float:
    """|h|^2 = G_uav * G_user / Lbar for the air-to-ground link."""
    return radio.G_uav * radio.G_user / uav_average_pathloss(user, uav, radio)


@dataclass(frozen=True)
class UavLinkStats:
    """Everything the air-to-ground budget needs for one user-UAV pair."""

    distance: float        # m
    elevation_deg: float
    p_los: float
    avg_pathloss: float    # linear
    channel_gain: float    # linear, |h|^2


def uav_link_stats(user: Point3, uav: Point3, radio: RadioParams) -> UavLinkStats:
    d = distance_3d(user, uav)
    elev = elevation_angle_deg(user, uav)
    p = los_probability(elev, radio.psi, radio.beta)
    fspl = free_space_loss(d, radio)
    loss = (p * radio.eta1 + (1.0 - p) * radio.eta2) * fspl
    return UavLinkStats(
        distance=d,
        elevation_deg=elev,
        p_los=p,
        avg_pathloss=loss,
        channel_gain=radio.G_uav * radio.G_user / loss,
    )


def cascade_element_gain(user: Point3, scenario: Scenario) -> float:
    """Per-element squared gain of the CS -> reflector -> user cascade.

    Collapsed geometry: every element sits at the platform position, both
    legs are free-space with exponent 2.
    """
    radio = scenario.radio
    k_friis = (4.0 * math.pi * radio.f_c / radio.c) ** 2
    d_feed = distance_3d(scenario.cs_pos, scenario.haps_pos)
    d_user = distance_3d(scenario.haps_pos, user)
    loss = (k_friis * d_feed * d_feed) * (k_friis * d_user * d_user)
    return radio.G_cs * radio.G_user / loss


def noise_power(radio: RadioParams, bandwidth_hz: float) -> float:
    """Thermal noise power N0 * B in watts."""
    return radio.N0 * bandwidth_hz


def haps_snr(
    user: int,
    subcarrier: int,
    plan: "AllocationPlan",
    scenario: Scenario,
    phases: PhaseDesign,
) -> float:
    """Linear SNR of the reflected path for one (user, subcarrier) pair.

    gamma = P * (coherent cluster amplitude)^2 * |h_element|^2 / (N0 * B_l);
    with the closed-form phase design the amplitude is mu * cluster size.
    """
    subs = plan.haps_subcarriers.get(user)
    if not subs or subcarrier not in subs:
        raise UnassignedUser(f"user {user} has no assignment on subcarrier {subcarrier}")
    if plan.ris_clusters is None or user not in plan.ris_clusters.cluster_of_user:
        raise UnassignedUser(f"user {user} has no reflector cluster")
    start, stop = plan.ris_clusters.cluster_of_user[user]
    power = plan.power_cs[(user, subcarrier)]
    amp = coherence_amplitude(phases, start, stop, scenario.radio.mu)
    gain = cascade_element_gain(scenario.users[user], scenario)
    noise = noise_power(scenario.radio, scenario.subcarrier_bandwidth)
    return power * (amp * amp * gain) / noise


def uav_sinr(
    user: int,
    uav: int,
    subcarrier: int,
    plan: "AllocationPlan",
    scenario: Scenario,
    deployment: "UavDeployment",
) -> float:
    """Linear SINR for one (user, uav, subcarrier) assignment.

    The interference sum covers exactly the other UAVs transmitting on the
    same subcarrier in the plan; with strict cross-UAV orthogonality the
    sum is zero by model assumption.
    """
    subs = plan.uav_subcarriers.get((user, uav))
    if not subs or subcarrier not in subs:
        raise UnassignedLink(f"(user={user}, uav={uav}, subcarrier={subcarrier}) not in plan")
    radio = scenario.radio
    user_pos = scenario.users[user]
    own_pos = _uav_position(deployment, uav, scenario.uav_altitude)
    signal = plan.power_uav[(user, uav, subcarrier)] * uav_channel_gain(user_pos, own_pos, radio)
    noise = noise_power(radio, scenario.subcarrier_bandwidth)

    interference = 0.0
    if not scenario.strict_cross_uav_orthogonality:
        for (other_user, other_uav), other_subs in plan.uav_subcarriers.items():
            if other_uav == uav or subcarrier not in other_subs:
                continue
            other_pos = _uav_position(deployment, other_uav, scenario.uav_altitude)
            p = plan.power_uav[(other_user, other_uav, subcarrier)]
            interference += p * uav_channel_gain(user_pos, other_pos, radio)

    return signal / (noise + interference)


def user_rate(per_subcarrier_snr: Sequence[float], B_l: float) -> float:
    """Aggregate rate sum(B_l * log2(1 + gamma)) in bit/s."""
    total = 0.0
    for gamma in per_subcarrier_snr:
        if gamma < 0:
            raise ValueError(f"SNR must be >= 0, got {gamma}")
        total += B_l * math.log2(1.0 + gamma)
    return total


@dataclass(frozen=True)
class RateBreakdown:
    """Per-subcarrier SNRs plus the aggregate rate they produce."""

    per_subcarrier_snr: tuple[float, ...]
    rate_bps: float


def rate_breakdown(per_subcarrier_snr: Sequence[float], B_l: float) -> RateBreakdown:
    return RateBreakdown(
        per_subcarrier_snr=tuple(float(g) for g in per_subcarrier_snr),
        rate_bps=user_rate(per_subcarrier_snr, B_l),
    )


def _uav_position(deployment: "UavDeployment", uav: int, altitude: float) -> Point3:
    cx, cy = deployment.centroids[uav]
    return Point3(cx, cy, altitude)

"""Reflector surface control: phase design, element clustering, exact-geometry check.

The engine normally collapses the whole surface to the platform position,
which makes the closed-form phase design exactly coherent. The exact
per-element path is kept for measuring how much that collapse distorts the
link gain on a real grid of element positions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientElements
from .scenario import Point3, RadioParams, Scenario

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class PhaseDesign:
    """Per-element phase shifts plus the two reference phases they cancel.

    ``uniform`` marks designs where every element carries the same phase,
    which lets the coherent sum be evaluated in O(1).
    """

    phi: np.ndarray            # radians, length M, each in [0, 2*pi)
    xi0: float                 # reference phase of the feeder leg, radians
    omega0: float              # reference phase of the user leg, radians
    uniform: bool = False

    @property
    def n_elements(self) -> int:
        return int(self.phi.shape[0])


def coherent_phase_design(xi0: float, omega0: float, M: int) -> PhaseDesign:
    """All M phases set to (xi0 + omega0) mod 2*pi.

    With the collapsed geometry this makes every element reflection purely
    real and maximal, so the cluster sum reaches mu * M_cluster exactly.
    The phase vector is a read-only constant view, so surfaces with tens of
    millions of elements cost no memory.
    """
    if M < 1:
        raise ValueError(f"M must be >= 1, got {M}")
    value = (xi0 + omega0) % TWO_PI
    phi = np.broadcast_to(np.float64(value), (M,))
    return PhaseDesign(phi=phi, xi0=xi0, omega0=omega0, uniform=True)


def design_phases_for(scenario: Scenario) -> PhaseDesign:
    """Phase design anchored to the collapsed path lengths.

    xi0 = 2*pi * d(CS, platform) / lambda and omega0 = 2*pi * d(platform,
    coverage center) / lambda; the zone center is the representative user
    point since per-user phase differences do not change the coherent
    magnitude in the collapsed model.
    """
    lam = scenario.radio.wavelength
    d_feed = _dist(scenario.cs_pos, scenario.haps_pos)
    d_user = _dist(scenario.haps_pos, scenario.coverage_center)
    xi0 = (TWO_PI * d_feed / lam) % TWO_PI
    omega0 = (TWO_PI * d_user / lam) % TWO_PI
    return coherent_phase_design(xi0, omega0, scenario.M)


def coherence_amplitude(phases: PhaseDesign, start: int, stop: int, mu: float) -> float:
    """|sum over elements [start, stop) of mu * exp(-j(phi - xi0 - omega0))|."""
    if phases.uniform:
        return mu * (stop - start)
    residual = phases.phi[start:stop] - phases.xi0 - phases.omega0
    return mu * abs(np.exp(-1j * residual).sum())


@dataclass(frozen=True)
class RisClustering:
    """Disjoint contiguous element ranges, one per served user."""

    cluster_of_user: dict[int, tuple[int, int]]   # user -> [start, stop) element range
    elements_per_cluster: int

    def cluster_size(self, user: int) -> int:
        start, stop = self.cluster_of_user[user]
        return stop - start


def cluster_ris(users_in_C: list[int], M: int, seed: int) -> RisClustering:
    """Assign floor(M / |C|) contiguous elements to each user in C.

    The block-to-user mapping is a random injective function drawn from the
    seed; leftover M mod |C| elements stay idle so every served user sees an
    identical cluster size.
    """
    n = len(users_in_C)
    if n < 1:
        raise ValueError("users_in_C must not be empty")
    if M < n:
        raise InsufficientElements(f"need at least {n} elements for {n} users, have M={M}")
    per_cluster = M // n
    rng = np.random.default_rng(seed)
    block_of = rng.permutation(n)
    mapping = {}
    for position, user in enumerate(users_in_C):
        block = int(block_of[position])
        mapping[int(user)] = (block * per_cluster, (block + 1) * per_cluster)
    return RisClustering(cluster_of_user=mapping, elements_per_cluster=per_cluster)


def element_grid(center: Point3, count: int, spacing: float) -> list[Point3]:
    """Square planar grid of element positions centered at ``center``.

    Row-major order in the x-y plane at the center's altitude; used by the
    exact-geometry gain below.
    """
    side = math.ceil(math.sqrt(count))
    half = (side - 1) / 2.0
    positions = []
    for index in range(count):
        row, col = divmod(index, side)
        positions.append(
            Point3(
                center.x + (col - half) * spacing,
                center.y + (row - half) * spacing,
                center.z,
            )
        )
    return positions


def exact_cascade_gain(
    user: Point3,
    element_positions: list[Point3],
    phases: PhaseDesign,
    radio: RadioParams,
    cs_pos: Point3,
) -> float:
    """|sum_m h_m * theta_m|^2 with true per-element distances and phases.

    Each leg uses the free-space model with exponent 2 and the element's own
    path phase 2*pi*d/lambda, so this is the reference against which the
    collapsed-geometry approximation can be measured.
    """
    lam = radio.wavelength
    k_friis = (4.0 * math.pi * radio.f_c / radio.c) ** 2
    total = 0.0 + 0.0j
    for m, elem in enumerate(element_positions):
        d1 = _dist(cs_pos, elem)
        d2 = _dist(elem, user)
        loss = (k_friis * d1 * d1) * (k_friis * d2 * d2)
        amplitude = math.sqrt(radio.G_cs * radio.G_user / loss)
        xi_m = TWO_PI * d1 / lam
        omega_m = TWO_PI * d2 / lam
        reflection = radio.mu * np.exp(-1j * (phases.phi[m] - xi_m - omega_m))
        total += amplitude * reflection
    return float(abs(total) ** 2)


def _dist(a: Point3, b: Point3) -> float:
    return math.sqrt((a.x - b.x) ** 2 + (a.y - b.y) ** 2 + (a.z - b.z) ** 2)

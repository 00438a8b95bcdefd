"""Aerial base-station placement via k-means over user ground positions.

Minimizing the clustering objective minimizes a closed-form upper bound of
the total average air-to-ground loss (valid for exponent 2 and a shared
altitude), so placement reduces to Lloyd iterations plus restarts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import channel
from .errors import EmptyZone, InvalidAlpha
from .scenario import Point3, Scenario, derive_seed


@dataclass(frozen=True)
class UavDeployment:
    """Chosen UAV count, 2-D centroids, and user-to-UAV membership."""

    n_uav: int
    centroids: tuple[tuple[float, float], ...]
    membership: dict[int, int]        # user id -> uav index
    kmeans_objective: float           # sum of squared 2-D distances, m^2

    def uav_position(self, index: int, altitude: float) -> Point3:
        cx, cy = self.centroids[index]
        return Point3(cx, cy, altitude)

    def members_of(self, index: int) -> list[int]:
        return sorted(u for u, j in self.membership.items() if j == index)


def empty_deployment() -> UavDeployment:
    return UavDeployment(n_uav=0, centroids=(), membership={}, kmeans_objective=0.0)


def _assign(xy: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """Nearest-centroid labels under squared 2-D distance; ties pick the lowest index."""
    d2 = ((xy[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    return d2.argmin(axis=1)


def _objective(xy: np.ndarray, centroids: np.ndarray, labels: np.ndarray) -> float:
    diff = xy - centroids[labels]
    return float((diff * diff).sum())


def _seed_plus_plus(xy: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ style seeding: first uniform, then squared-distance weighted."""
    n = xy.shape[0]
    chosen = [int(rng.integers(n))]
    while len(chosen) < k:
        d2 = ((xy[:, None, :] - xy[chosen][None, :, :]) ** 2).sum(axis=2).min(axis=1)
        total = d2.sum()
        if total <= 0.0:
            candidates = [i for i in range(n) if i not in chosen]
            chosen.append(int(rng.choice(candidates)))
            continue
        chosen.append(int(rng.choice(n, p=d2 / total)))
    return xy[chosen].copy()


def _apply_best_swap(xy: np.ndarray, labels: np.ndarray, k: int) -> bool:
    """Apply the single most improving one-point move, if any.

    Uses the exact cost delta of moving point i from its cluster a (size
    n_a, mean mu_a) to cluster b: n_b/(n_b+1) * |x - mu_b|^2 -
    n_a/(n_a-1) * |x - mu_a|^2. Escapes assignment-stable local minima
    that plain centroid iteration cannot leave. Ties break on the lowest
    point index, then the lowest target cluster.
    """
    sizes = np.array([(labels == c).sum() for c in range(k)])
    means = np.array(
        [xy[labels == c].mean(axis=0) if sizes[c] else np.zeros(2) for c in range(k)]
    )
    best_delta = -1e-9
    best_move: tuple[int, int] | None = None
    for i in range(xy.shape[0]):
        a = int(labels[i])
        if sizes[a] <= 1:
            continue  # moving would empty the donor cluster
        d_a = float(((xy[i] - means[a]) ** 2).sum())
        leave = sizes[a] / (sizes[a] - 1) * d_a
        for b in range(k):
            if b == a:
                continue
            d_b = float(((xy[i] - means[b]) ** 2).sum())
            delta = sizes[b] / (sizes[b] + 1) * d_b - leave
            if delta < best_delta:
                best_delta = delta
                best_move = (i, b)
    if best_move is None:
        return False
    labels[best_move[0]] = best_move[1]
    return True


def single_lloyd_run(
    points: Sequence[Point3],
    k: int,
    seed: int,
    max_iter: int = 100,
) -> tuple[np.ndarray, np.ndarray, float, list[float]]:
    """One seeded Lloyd run; returns (centroids, labels, objective, history).

    Centroid iteration runs to a stable assignment, then a one-point swap
    refinement fires when it strictly lowers the cost, after which the
    iteration resumes; the run ends at a state that is both
    nearest-centroid stable and one-move optimal (or at max_iter). The
    history records the objective after each centroid update and is
    non-increasing. Empty clusters are re-seeded with the point currently
    farthest from its own centroid.
    """
    xy = np.array([[p.x, p.y] for p in points], dtype=float)
    n = xy.shape[0]
    if n == 0:
        raise EmptyZone("cannot place UAVs over an empty user set")
    if not 1 <= k <= n:
        raise ValueError(f"k must satisfy 1 <= k <= {n}, got {k}")

    rng = np.random.default_rng(seed)
    centroids = _seed_plus_plus(xy, k, rng)
    labels = _assign(xy, centroids)
    history: list[float] = []

    iterations = 0
    while iterations < max_iter:
        stable = False
        while iterations < max_iter and not stable:
            # Re-seed empty clusters before the centroid update.
            for cluster in range(k):
                if not np.any(labels == cluster):
                    distances = ((xy - centroids[labels]) ** 2).sum(axis=1)
                    worst = int(distances.argmax())
                    centroids[cluster] = xy[worst]
                    labels[worst] = cluster
            for cluster in range(k):
                mask = labels == cluster
                centroids[cluster] = xy[mask].mean(axis=0)
            history.append(_objective(xy, centroids, labels))
            iterations += 1
            new_labels = _assign(xy, centroids)
            if np.array_equal(new_labels, labels):
                stable = True
            else:
                labels = new_labels
        if not stable or not _apply_best_swap(xy, labels, k):
            break

    return centroids, labels, _objective(xy, centroids, labels), history


def kmeans_place(
    points: Sequence[Point3],
    k: int,
    seed: int,
    max_iter: int = 100,
    restarts: int = 20,
    user_ids: Sequence[int] | None = None,
) -> UavDeployment:
    """Best of ``restarts`` seeded Lloyd runs over the 2-D user positions.

    Membership keys default to local indices 0..n-1; pass ``user_ids`` to
    key by scenario user ids instead.
    """
    n = len(points)
    if n == 0:
        raise EmptyZone("cannot place UAVs over an empty user set")
    if not 1 <= k <= n:
        raise ValueError(f"k must satisfy 1 <= k <= {n}, got {k}")
    ids = list(user_ids) if user_ids is not None else list(range(n))
    if len(ids) != n:
        raise ValueError("user_ids length must match points")

    best: tuple[np.ndarray, np.ndarray, float] | None = None
    for restart in range(restarts):
        centroids, labels, objective, _ = single_lloyd_run(
            points, k, derive_seed(seed, restart), max_iter=max_iter
        )
        if best is None or objective < best[2]:
            best = (centroids, labels, objective)

    centroids, labels, objective = best
    membership = {ids[i]: int(labels[i]) for i in range(n)}
    return UavDeployment(
        n_uav=k,
        centroids=tuple((float(cx), float(cy)) for cx, cy in centroids),
        membership=membership,
        kmeans_objective=objective,
    )


def true_total_pathloss(deployment: UavDeployment, scenario: Scenario) -> float:
    """Sum of the average air-to-ground loss over every served user-UAV pair."""
    total = 0.0
    for user_id, uav in deployment.membership.items():
        uav_pos = deployment.uav_position(uav, scenario.uav_altitude)
        total += channel.uav_average_pathloss(scenario.users[user_id], uav_pos, scenario.radio)
    return total


def pathloss_upper_bound(
    deployment: UavDeployment,
    scenario: Scenario,
    n_uav_init: int | None = None,
) -> float:
    """Closed-form upper bound on the total average air-to-ground loss.

    eta2 * (4 pi f / c)^2 * (altitude^2 * I * N_init + clustering objective),
    where I counts all scenario users and N_init is the UAV count the
    reduction scan started from (defaults to the deployment size). Only
    valid for path-loss exponent 2.
    """
    radio = scenario.radio
    if radio.alpha != 2:
        raise InvalidAlpha(f"loss bound requires alpha=2, scenario has alpha={radio.alpha}")
    if n_uav_init is None:
        n_uav_init = deployment.n_uav
    k_friis = (4.0 * math.pi * radio.f_c / radio.c) ** 2
    fixed_term = scenario.uav_altitude**2 * scenario.n_users * n_uav_init
    return radio.eta2 * k_friis * (fixed_term + deployment.kmeans_objective)

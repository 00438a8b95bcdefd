import math

import pytest

from ntnplan.allocation import build_plan, check_feasibility, partition, split_bandwidth
from ntnplan.config import scenario_from_config
from ntnplan.optimizer import (
    _SALT_KMEANS,
    OptimizerConfig,
    maximize_haps_coverage,
    minimize_uav_count,
    run_baseline,
    solve,
)
from ntnplan.placement import kmeans_place
from ntnplan.ris import design_phases_for
from ntnplan.scenario import derive_seed


def test_zero_rate_demand_shrinks_radius_to_grid_floor(default_scenario):
    sc = scenario_from_config({"r0_bps": 0.0}, seed=0)
    stage = maximize_haps_coverage(1.0, sc, seed=0)
    assert stage.r_star == pytest.approx(50.0)  # smallest positive grid radius
    outer = partition(sc.users, 50.0, sc.coverage_center)
    assert stage.u_haps == len(outer.C)


def test_tiny_surface_cannot_serve_anyone():
    sc = scenario_from_config({"M": 20, "r0_bps": 1e9}, seed=0)
    stage = maximize_haps_coverage(1.0, sc, seed=0)
    assert stage.r_star == sc.R0
    assert stage.u_haps == 0


def test_coverage_monotone_along_feasible_prefix(default_scenario):
    stage = maximize_haps_coverage(1.0, default_scenario, seed=0)
    sizes = [n for _r, n, ok in stage.scan if ok]
    assert all(b >= a for a, b in zip(sizes, sizes[1:]))


def test_uav_scan_empty_zone():
    sc = scenario_from_config({"r0_bps": 0.0}, seed=0)
    stage = minimize_uav_count(0.0, 1.0, sc, seed=0)
    assert stage.n_uav == 0
    assert stage.deployment.n_uav == 0


def test_uav_scan_single_user_gets_one_overhead_uav():
    sc = scenario_from_config({"users": [[120.0, 40.0]], "D0_m": 0.0}, seed=0)
    stage = minimize_uav_count(sc.R0, 1.0, sc, seed=0)
    assert stage.n_uav == 1
    assert stage.deployment.centroids[0][0] == pytest.approx(120.0)
    assert stage.deployment.centroids[0][1] == pytest.approx(40.0)


@pytest.mark.parametrize("r0_mbps", [5.0, 35.0, 60.0])
def test_uav_scan_matches_exhaustive_prefix_oracle(r0_mbps):
    # six inner users; re-evaluate every candidate count independently via
    # the scalar checker and reduce with explicit prefix logic
    coords = [[60.0, 0.0], [-60.0, 30.0], [0.0, -80.0], [90.0, 90.0], [-100.0, -40.0], [30.0, 120.0]]
    sc = scenario_from_config({"users": coords, "D0_m": 0.0, "r0_bps": r0_mbps * 1e6}, seed=0)
    cfg = OptimizerConfig()
    stage = minimize_uav_count(sc.R0, 1.0, sc, seed=3, cfg=cfg)

    split = split_bandwidth(1.0, sc.L_tot)
    zone = partition(sc.users, sc.R0, sc.coverage_center)
    phases = design_phases_for(sc)

    def feasible(n):
        deployment = kmeans_place(
            [sc.users[u] for u in zone.B],
            n,
            derive_seed(3, _SALT_KMEANS, 0, n),
            max_iter=cfg.kmeans_max_iter,
            restarts=cfg.kmeans_restarts,
            user_ids=zone.B,
        )
        plan = build_plan(zone, split, deployment, sc, seed=0)
        report = check_feasibility(plan, sc, deployment, phases)
        return report.uav_ok

    n0 = len(zone.B)
    expected = None
    for n in range(n0, 0, -1):
        if feasible(n):
            expected = n
        else:
            break
    if expected is None:
        assert stage.n_uav == n0
        assert stage.outage
    else:
        assert stage.n_uav == expected
        assert stage.outage == ()


def test_vectorized_rates_agree_with_scalar_channel_path(default_scenario):
    sc = scenario_from_config({"r0_bps": 25e6, "M": 400_000}, seed=2)
    result = run_baseline("equal-split", sc, seed=2)
    sol = result.best
    if not sol.plan.uav_subcarriers:
        pytest.skip("no UAV side in this draw")
    phases = design_phases_for(sc)
    from ntnplan.allocation import user_rate_in_plan
    from ntnplan.optimizer import _uav_zone_rates

    fast = _uav_zone_rates(
        sol.plan.uav_subcarriers, sol.plan.power_uav, sol.deployment, sol.plan.split, sc
    )
    for user, rate in fast.items():
        slow = user_rate_in_plan(user, sol.plan, sc, sol.deployment, phases)
        assert rate == pytest.approx(slow, rel=1e-9)


def test_degenerate_regimes(default_scenario):
    sc = default_scenario
    uav_only = run_baseline("uav-only", sc, seed=0).best
    assert uav_only.U_haps == 0
    assert uav_only.kappa == 0.0
    haps_only = run_baseline("haps-only", sc, seed=0).best
    assert haps_only.N_uav_star == 0
    assert math.isinf(haps_only.kappa)


def test_optimized_dominates_equal_split_lexicographically():
    for seed in range(3):
        sc = scenario_from_config({"r0_bps": 16e6, "M": 1_000_000}, seed=seed)
        opt = run_baseline("optimized", sc, seed).best
        eq = run_baseline("equal-split", sc, seed).best
        assert (opt.U_haps, -opt.N_uav_star) >= (eq.U_haps, -eq.N_uav_star)


def test_dominance_holds_at_large_surface_high_rate():
    # ten-million-element surface, demanding rate: the tuned portioning
    # strictly beats the even split on both objectives
    for seed in range(2):
        sc = scenario_from_config({"M": 10_000_000, "r0_bps": 30e6}, seed=seed)
        opt = run_baseline("optimized", sc, seed).best
        eq = run_baseline("equal-split", sc, seed).best
        assert opt.U_haps > eq.U_haps
        assert opt.N_uav_star <= eq.N_uav_star


def test_best_is_not_dominated_in_trace():
    sc = scenario_from_config({"r0_bps": 16e6, "M": 1_000_000}, seed=1)
    result = solve(sc, seed=1)
    best_key = result.best.lexicographic_key()
    assert all(point.solution.lexicographic_key() <= best_key for point in result.trace)


def test_solve_deterministic(default_scenario):
    sc = scenario_from_config({"r0_bps": 12e6}, seed=4)
    a = solve(sc, seed=4)
    b = solve(sc, seed=4)
    assert a.best == b.best
    assert a.trace == b.trace
    assert a.counters == b.counters


def test_solution_invariants(default_scenario):
    sc = scenario_from_config({"r0_bps": 12e6}, seed=3)
    result = solve(sc, seed=3)
    phases = design_phases_for(sc)
    for point in result.trace:
        sol = point.solution
        report = check_feasibility(sol.plan, sc, sol.deployment, phases)
        assert report.structural_ok, report.structural_violations
        assert report.haps_ok  # the radius scan only keeps feasible outer zones
        if sol.lambda_upp is not None:
            assert sol.lambda_true <= sol.lambda_upp * (1 + 1e-12)


def test_termination_counters_within_caps(default_scenario):
    sc = default_scenario
    cfg = OptimizerConfig()
    result = solve(sc, cfg, seed=0)
    t_radius = math.floor(sc.R0 / cfg.delta_R)
    assert result.counters["kappa_points"] <= cfg.Q_max
    assert result.counters["r_steps"] <= cfg.Q_max * t_radius
    assert result.counters["n_steps"] <= cfg.Q_max * sc.n_users
    assert result.counters["kmeans_runs"] <= cfg.Q_max * sc.n_users * cfg.kmeans_restarts


def test_early_stop_prunes_but_returns_traced_best():
    sc = scenario_from_config({"r0_bps": 1e6}, seed=0)
    eager = solve(sc, OptimizerConfig(early_stop=True), seed=0)
    full = solve(sc, OptimizerConfig(early_stop=False), seed=0)
    assert len(eager.trace) <= len(full.trace)
    assert eager.best.lexicographic_key() == max(p.solution.lexicographic_key() for p in eager.trace)


def test_explicit_kappa_grid_and_qmax_cap():
    sc = scenario_from_config({}, seed=0)
    result = solve(sc, OptimizerConfig(kappa_grid=(0.5, 1.0, 2.0, 4.0), Q_max=3), seed=0)
    assert [p.kappa for p in result.trace] == [0.5, 1.0, 2.0]


def test_unknown_regime_rejected(default_scenario):
    with pytest.raises(ValueError, match="regime"):
        run_baseline("nonsense", default_scenario, seed=0)


def test_loss_bound_omitted_off_nominal_exponent():
    # with a non-square-law exponent the closed-form bound does not apply;
    # the search still runs and reports the true loss only
    sc = scenario_from_config({"alpha": 2.5, "r0_bps": 30e6, "M": 500_000}, seed=0)
    result = solve(sc, seed=0)
    assert any(p.N_uav > 0 for p in result.trace)
    for point in result.trace:
        assert point.lambda_upp is None
        if point.N_uav > 0:
            assert point.lambda_true > 0


def test_zero_rate_target_means_no_outage_without_uavs():
    # an unassigned user trivially meets a zero rate target
    sc = scenario_from_config({"users": [[10.0, 0.0], [400.0, 0.0]], "D0_m": 0.0, "r0_bps": 0.0}, seed=0)
    result = run_baseline("haps-only", sc, seed=0)
    assert result.best.outage_users == ()
    assert result.best.N_uav_star == 0


def test_config_invariants_enforced():
    with pytest.raises(ValueError, match="delta_R"):
        OptimizerConfig(delta_R=0.0)
    with pytest.raises(ValueError, match="epsilon"):
        OptimizerConfig(epsilon=0.0)
    with pytest.raises(ValueError, match="increasing"):
        OptimizerConfig(kappa_grid=(2.0, 1.0))
    with pytest.raises(ValueError, match="positive"):
        OptimizerConfig(kappa_grid=(0.0, 1.0))


def test_uav_budget_cap():
    sc = scenario_from_config({"r0_bps": 60e6}, seed=0)
    capped = run_baseline("equal-split", sc, seed=0, cfg=OptimizerConfig(n_uav_max=1)).best
    assert capped.N_uav_star <= 1
    zero = run_baseline("equal-split", sc, seed=0, cfg=OptimizerConfig(n_uav_max=0)).best
    assert zero.N_uav_star == 0
    inner_users = set(zero.plan.zone.B)
    assert set(zero.outage_users) == inner_users

"""Planning engine for reflector-assisted aerial access networks.

Core objects: a Scenario (world model), an AllocationPlan (who is served
by which tier, on which subcarriers, with how much power), and the
two-layer search in :mod:`ntnplan.optimizer` that picks a zone radius,
a UAV fleet, and a bandwidth portioning factor.
"""

from .allocation import (
    AllocationPlan,
    BandwidthSplit,
    FeasibilityReport,
    ZonePartition,
    build_plan,
    check_feasibility,
    count_haps_served,
    partition,
    split_bandwidth,
)
from .config import default_config, scenario_from_config
from .optimizer import (
    BASELINE_REGIMES,
    OptimizerConfig,
    ParetoSolution,
    SolveResult,
    maximize_haps_coverage,
    minimize_uav_count,
    run_baseline,
    solve,
)
from .placement import UavDeployment, kmeans_place, pathloss_upper_bound, true_total_pathloss
from .ris import PhaseDesign, RisClustering, cluster_ris, coherent_phase_design, design_phases_for
from .scenario import Point3, RadioParams, Scenario, generate_users, validate
from .sweep_runner import SweepSpec, min_ris_for_full_coverage, run_sweep

__version__ = "0.1.0"

__all__ = [
    "AllocationPlan",
    "BandwidthSplit",
    "BASELINE_REGIMES",
    "FeasibilityReport",
    "OptimizerConfig",
    "ParetoSolution",
    "PhaseDesign",
    "Point3",
    "RadioParams",
    "RisClustering",
    "Scenario",
    "SolveResult",
    "SweepSpec",
    "UavDeployment",
    "ZonePartition",
    "build_plan",
    "check_feasibility",
    "cluster_ris",
    "coherent_phase_design",
    "count_haps_served",
    "default_config",
    "design_phases_for",
    "generate_users",
    "kmeans_place",
    "maximize_haps_coverage",
    "min_ris_for_full_coverage",
    "minimize_uav_count",
    "partition",
    "pathloss_upper_bound",
    "run_baseline",
    "run_sweep",
    "scenario_from_config",
    "solve",
    "split_bandwidth",
    "true_total_pathloss",
    "validate",
    "__version__",
]

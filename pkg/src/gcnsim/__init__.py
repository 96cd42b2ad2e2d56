"""gcnsim: a deterministic simulator of a solar-powered cloudlet network,
with a branch-and-bound placement engine for green-aware avatar migration."""

from .model import (
    Assignment,
    AvatarLoad,
    CloudletSpec,
    DelayParams,
    PowerParams,
    ServerPacking,
    SiteTopology,
    active_server_count,
    avatar_weight,
    cloudlet_power_approx,
    cloudlet_power_exact,
    default_delay_params,
    default_power_params,
    feasible_set,
    ongrid_energy,
    pack_first_fit,
    propagation_delay,
    server_power,
)
from .solver import (
    BnbNode,
    Infeasible,
    InfeasibleAvatar,
    InsufficientCapacity,
    MilpInstance,
    Solution,
    SolverConfig,
    TooLarge,
    aggregate_bound,
    brute_force,
    build_instance,
    solve,
)
from .strategy import SlotState, StrategyOutcome, far_assign, gear_assign
from .scenario import (
    CountError,
    ParseError,
    ScenarioConfig,
    SolarTrace,
    UEState,
    enb_of,
    green_power,
    init_topology,
    init_ues,
    load_scenario_config,
    load_solar_trace,
    sample_utilization,
    step_mobility,
)
from .engine import RunResult, SlotMetrics, compute_slot_metrics, run

__version__ = "0.1.0"

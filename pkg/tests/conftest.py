import random

import pytest

from gcnsim import (
    DelayParams,
    MilpInstance,
    PowerParams,
    ScenarioConfig,
    SiteTopology,
    avatar_weight,
    default_delay_params,
    default_power_params,
    init_topology,
)
from gcnsim.cli import bundled_trace_path
from gcnsim.scenario import load_solar_trace


@pytest.fixture(scope="session")
def power() -> PowerParams:
    return default_power_params()


@pytest.fixture(scope="session")
def delay() -> DelayParams:
    return default_delay_params()


@pytest.fixture(scope="session")
def grid_topo():
    """Default 4x4 topology; capacity draws discarded (fixed seed)."""
    topo, _ = init_topology(ScenarioConfig(), random.Random(0))
    return topo


@pytest.fixture(scope="session")
def bell_trace():
    return load_solar_trace(bundled_trace_path())


def line_topology(spacing_km: float, count: int) -> SiteTopology:
    """Sites on a line, used to control distances exactly in solver tests."""
    positions = tuple((spacing_km * i, 0.0) for i in range(count))
    distances = tuple(
        tuple(abs(px - qx) for qx, _ in positions) for px, _ in positions
    )
    return SiteTopology(site_positions=positions, distances=distances,
                        area_side=spacing_km * max(count - 1, 1),
                        grid_dim=count)


def random_instance(rng: random.Random, max_avatars: int = 8,
                    max_cloudlets: int = 4) -> MilpInstance:
    """Small random placement instance with weights from the power model."""
    power = default_power_params()
    n = rng.randint(1, max_avatars)
    m = rng.randint(1, max_cloudlets)
    weights = tuple(avatar_weight(rng.uniform(10.0, 100.0), power)
                    for _ in range(n))
    fsets = []
    for _ in range(n):
        fs = {i for i in range(m) if rng.random() < 0.7}
        if not fs:
            fs = {rng.randrange(m)}
        fsets.append(frozenset(fs))
    green = tuple(rng.uniform(0.0, 60.0) for _ in range(m))
    caps = tuple(rng.randint(-(-n // m), n) for _ in range(m))
    return MilpInstance(weights=weights, feasible_sets=tuple(fsets),
                        green_power=green, count_capacity=caps)

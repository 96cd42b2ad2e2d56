"""Experimental world: topology, UE mobility, CPU loads, solar supply.

A scenario is a square grid of eNB/cloudlet sites covering a square area.
UEs roam by a modified random waypoint model whose destinations are drawn
from a normal distribution centered on the middle of the area, so traffic
concentrates in the urban core. Green supply comes from an hourly solar
irradiance trace scaled by each cloudlet's panel; urban panels can be
derated by a factor kappa to model dirtier urban skies.

All randomness flows through a single `random.Random` stream per run, and
every draw happens in a fixed order (per slot: per UE ascending, speed
first, then destination redraws, then CPU), so a seed pins down the whole
world evolution byte for byte.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .model import (
    Assignment,
    CloudletSpec,
    DelayParams,
    PowerParams,
    SiteTopology,
)
from .solver import InsufficientCapacity
from .strategy import nearest_feasible_order


class ParseError(ValueError):
    """A config or trace file line failed to parse."""

    def __init__(self, path: str, line_no: int, message: str):
        self.path = path
        self.line_no = line_no
        super().__init__(f"{path}:{line_no}: {message}")


class CountError(ValueError):
    """A trace file does not contain exactly one row per hour."""


@dataclass(frozen=True)
class ScenarioConfig:
    grid_dim: int = 4
    area_side: float = 8.0
    ue_count: int = 200
    slot_count: int = 96
    capacity_range: tuple[int, int] = (10, 30)
    speed_range: tuple[float, float] = (0.0, 10.0)
    dest_mean: float = 4.0
    dest_stddev: float = 1.4
    cpu_range: tuple[float, float] = (10.0, 100.0)
    kernel_cpu: float = 10.0
    panel_area: float = 5.0
    panel_efficiency: float = 0.46
    kappa: float = 0.0
    urban_region: tuple[float, float, float, float] = (2.0, 2.0, 6.0, 6.0)
    rng_seed: int = 1

    def __post_init__(self) -> None:
        if self.grid_dim < 1:
            raise ValueError("grid_dim must be >= 1")
        if self.area_side <= 0:
            raise ValueError("area_side must be positive")
        if self.ue_count < 0:
            raise ValueError("ue_count must be non-negative")
        if self.slot_count < 0:
            raise ValueError("slot_count must be non-negative")
        for name in ("capacity_range", "speed_range", "cpu_range"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"{name} must be ordered low..high")
        if self.capacity_range[0] < 1:
            raise ValueError("capacity_range must start at >= 1 server")
        if not 0 <= self.kappa <= 1:
            raise ValueError("kappa must be in [0, 1]")
        if not (0 <= self.cpu_range[0] and self.cpu_range[1] <= 100):
            raise ValueError("cpu_range must lie within [0, 100]")
        if self.kernel_cpu > self.cpu_range[0]:
            raise ValueError("kernel_cpu cannot exceed the CPU range floor")
        x0, y0, x1, y1 = self.urban_region
        if x0 > x1 or y0 > y1:
            raise ValueError("urban_region must be an ordered rectangle")


@dataclass(frozen=True)
class UEState:
    """A roaming user: position and current waypoint, both in km."""

    position: tuple[float, float]
    destination: tuple[float, float]
    speed: float
    avatar_id: int


@dataclass(frozen=True)
class SolarTrace:
    """Hourly solar irradiance for one day, W/m^2."""

    hourly_irradiance: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.hourly_irradiance) != 24:
            raise CountError(
                f"expected 24 hourly values, got {len(self.hourly_irradiance)}")
        if any(v < 0 for v in self.hourly_irradiance):
            raise ValueError("irradiance values must be non-negative")


def init_topology(config: ScenarioConfig,
                  rng: random.Random) -> tuple[SiteTopology, tuple[CloudletSpec, ...]]:
    """Build the site grid and draw each cloudlet's rack size.

    Sites sit at cell centers; a cloudlet is urban when its center falls
    inside the configured urban rectangle.
    """
    g = config.grid_dim
    cell = config.area_side / g
    positions = tuple(
        (cell * (gx + 0.5), cell * (gy + 0.5))
        for gy in range(g) for gx in range(g)
    )
    distances = tuple(
        tuple(math.dist(p, q) for q in positions) for p in positions
    )
    topo = SiteTopology(site_positions=positions, distances=distances,
                        area_side=config.area_side, grid_dim=g)
    x0, y0, x1, y1 = config.urban_region
    specs = tuple(
        CloudletSpec(
            server_count=rng.randint(*config.capacity_range),
            panel_area=config.panel_area,
            panel_efficiency=config.panel_efficiency,
            zone="urban" if x0 <= px <= x1 and y0 <= py <= y1 else "rural",
        )
        for px, py in positions
    )
    return topo, specs


def enb_of(position: tuple[float, float], topo: SiteTopology) -> int:
    """Site index of the square cell containing a position.

    Cells are half-open on their low edges; the outer boundary of the last
    row/column is closed so the whole area is covered.
    """
    cell = topo.area_side / topo.grid_dim
    gx = min(int(position[0] / cell), topo.grid_dim - 1)
    gy = min(int(position[1] / cell), topo.grid_dim - 1)
    return gy * topo.grid_dim + gx


def _draw_destination(config: ScenarioConfig,
                      rng: random.Random) -> tuple[float, float]:
    # Redraw until inside the area rather than clamping, so no probability
    # mass piles up on the boundary.
    side = config.area_side
    while True:
        x = rng.gauss(config.dest_mean, config.dest_stddev)
        y = rng.gauss(config.dest_mean, config.dest_stddev)
        if 0.0 <= x <= side and 0.0 <= y <= side:
            return (x, y)


def init_ues(config: ScenarioConfig, topo: SiteTopology,
             specs: tuple[CloudletSpec, ...], power: PowerParams,
             delay: DelayParams,
             rng: random.Random) -> tuple[list[UEState], Assignment]:
    """Scatter UEs uniformly and park each avatar at its nearest cloudlet.

    Initial placement follows the FAR rule (nearest in-range cloudlet with
    room), so the starting state is valid for either strategy.
    """
    order = nearest_feasible_order(topo, delay)
    cap = [s.server_count * power.server_capacity for s in specs]
    used = [0] * len(specs)
    ues: list[UEState] = []
    placement: dict[int, int] = {}
    for avatar_id in range(config.ue_count):
        pos = (rng.uniform(0.0, config.area_side),
               rng.uniform(0.0, config.area_side))
        dest = _draw_destination(config, rng)
        speed = rng.uniform(*config.speed_range)
        ues.append(UEState(position=pos, destination=dest, speed=speed,
                           avatar_id=avatar_id))
        for i in order[enb_of(pos, topo)]:
            if used[i] < cap[i]:
                placement[avatar_id] = i
                used[i] += 1
                break
        else:
            raise InsufficientCapacity(
                f"no in-range cloudlet has room for avatar {avatar_id}")
    return ues, Assignment(placement)


def step_mobility(ue: UEState, slot_seconds: float, config: ScenarioConfig,
                  rng: random.Random) -> UEState:
    """Advance one UE by one slot of random-waypoint motion.

    A fresh speed is drawn every slot. The UE moves straight toward its
    waypoint and stops there exactly (no overshoot); on arrival the next
    waypoint is drawn immediately.
    """
    speed = rng.uniform(*config.speed_range)
    px, py = ue.position
    dx, dy = ue.destination[0] - px, ue.destination[1] - py
    remaining = math.hypot(dx, dy)
    travel = speed * slot_seconds / 1000.0  # km per slot
    if travel >= remaining:
        return UEState(position=ue.destination,
                       destination=_draw_destination(config, rng),
                       speed=speed, avatar_id=ue.avatar_id)
    frac = travel / remaining
    return UEState(position=(px + dx * frac, py + dy * frac),
                   destination=ue.destination, speed=speed,
                   avatar_id=ue.avatar_id)


def sample_utilization(config: ScenarioConfig, rng: random.Random) -> float:
    """Draw one avatar's total CPU (percent) for the next slot; the kernel
    floor is included in the value."""
    return rng.uniform(*config.cpu_range)


def green_power(trace: SolarTrace, slot: int, spec: CloudletSpec,
                kappa: float, slot_length: float = 0.25) -> float:
    """Green supply (W) of one cloudlet in one slot.

    Piecewise-constant within each hour of the trace; urban cloudlets are
    derated by kappa.
    """
    hour = int(slot * slot_length) % 24
    watts = trace.hourly_irradiance[hour] * spec.panel_area * spec.panel_efficiency
    if spec.zone == "urban":
        watts *= (1.0 - kappa)
    return watts


TRACE_HEADER = "hour,irradiance_w_per_m2"


def load_solar_trace(path: str) -> SolarTrace:
    """Read an hourly irradiance file: a header line, then 24 `H,V` rows
    with H ascending 0..23 and V a non-negative decimal."""
    with open(path, "r", encoding="utf-8") as f:
        lines = f.read().splitlines()
    if not lines or lines[0].strip() != TRACE_HEADER:
        raise ParseError(path, 1, f"expected header '{TRACE_HEADER}'")
    values: list[float] = []
    for line_no, raw in enumerate(lines[1:], start=2):
        text = raw.strip()
        if not text:
            raise ParseError(path, line_no, "blank line in trace body")
        parts = text.split(",")
        if len(parts) != 2:
            raise ParseError(path, line_no, "expected 'hour,value'")
        try:
            hour = int(parts[0])
            value = float(parts[1])
        except ValueError:
            raise ParseError(path, line_no, f"malformed row {text!r}") from None
        if hour != len(values):
            raise ParseError(path, line_no,
                             f"hour {hour} out of order (expected {len(values)})")
        if value < 0:
            raise ParseError(path, line_no, "irradiance must be non-negative")
        values.append(value)
    if len(values) != 24:
        raise CountError(f"{path}: expected 24 rows, got {len(values)}")
    return SolarTrace(hourly_irradiance=tuple(values))


def dump_solar_trace(trace: SolarTrace, path: str) -> None:
    """Write a trace in the same format `load_solar_trace` reads."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(TRACE_HEADER + "\n")
        for hour, value in enumerate(trace.hourly_irradiance):
            f.write(f"{hour},{value}\n")


_INT_FIELDS = {"grid_dim", "ue_count", "slot_count", "rng_seed"}
_FLOAT_FIELDS = {"area_side", "dest_mean", "dest_stddev", "kernel_cpu",
                 "panel_area", "panel_efficiency", "kappa"}
_INT_PAIR_FIELDS = {"capacity_range"}
_FLOAT_PAIR_FIELDS = {"speed_range", "cpu_range"}
_RECT_FIELDS = {"urban_region"}


def load_scenario_config(path: str) -> ScenarioConfig:
    """Read a scenario config: `key = value` lines using the ScenarioConfig
    field names, `#` comments, pairs and rectangles comma-separated.
    Unspecified fields keep their defaults."""
    overrides: dict[str, object] = {}
    with open(path, "r", encoding="utf-8") as f:
        lines = f.read().splitlines()
    for line_no, raw in enumerate(lines, start=1):
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            raise ParseError(path, line_no, "expected 'key = value'")
        key, value = (part.strip() for part in text.split("=", 1))
        try:
            if key in _INT_FIELDS:
                overrides[key] = int(value)
            elif key in _FLOAT_FIELDS:
                overrides[key] = float(value)
            elif key in _INT_PAIR_FIELDS:
                lo, hi = value.split(",")
                overrides[key] = (int(lo), int(hi))
            elif key in _FLOAT_PAIR_FIELDS:
                lo, hi = value.split(",")
                overrides[key] = (float(lo), float(hi))
            elif key in _RECT_FIELDS:
                x0, y0, x1, y1 = value.split(",")
                overrides[key] = (float(x0), float(y0), float(x1), float(y1))
            else:
                raise ParseError(path, line_no, f"unknown key {key!r}")
        except ParseError:
            raise
        except ValueError:
            raise ParseError(path, line_no,
                             f"malformed value for {key!r}: {value!r}") from None
    try:
        return ScenarioConfig(**overrides)
    except ValueError as exc:
        raise ParseError(path, 0, str(exc)) from None

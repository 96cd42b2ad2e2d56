"""Power, delay and energy models for a green cloudlet network.

Every function here is a pure closed-form expression over immutable inputs:
server and cloudlet power draw, avatar placement weights, eNB-to-cloudlet
propagation delay, and per-slot on-grid energy. The simulation engine and
the assignment solver are both built on top of these primitives, so any
power number reported anywhere in the package traces back to this module.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class PowerParams:
    """Server power model constants.

    An active server draws `standby_power` watts at zero load, plus
    `avatar_coeff` watts of hypervisor overhead per hosted avatar, plus
    `cpu_coeff` watts per percentage point of CPU in use. A server hosts
    at most `server_capacity` avatars; every avatar burns `kernel_cpu`
    percent CPU just running its OS kernel.
    """

    standby_power: float = 80.0
    cpu_coeff: float = 0.2
    avatar_coeff: float = 0.3
    server_capacity: int = 16
    kernel_cpu: float = 10.0

    def __post_init__(self) -> None:
        if self.standby_power <= 0 or self.cpu_coeff <= 0 or self.avatar_coeff <= 0:
            raise ValueError("power coefficients must be positive")
        if not isinstance(self.server_capacity, int) or self.server_capacity < 1:
            raise ValueError("server_capacity must be a positive integer")
        if not 0 < self.kernel_cpu < 100:
            raise ValueError("kernel_cpu must be in (0, 100)")


@dataclass(frozen=True)
class DelayParams:
    """Propagation-delay model and slot timing.

    `dist_coeff` maps eNB-to-cloudlet distance (km) to one-way delay (ms);
    `sla_max_delay` is the delay bound the provider guarantees;
    `slot_length` is the decision-slot length in hours.
    """

    dist_coeff: float = 3.33
    sla_max_delay: float = 10.0
    slot_length: float = 0.25

    def __post_init__(self) -> None:
        if self.dist_coeff <= 0:
            raise ValueError("dist_coeff must be positive")
        if self.sla_max_delay < 0:
            raise ValueError("sla_max_delay must be non-negative")
        if self.slot_length <= 0:
            raise ValueError("slot_length must be positive")


def default_power_params(kernel_cpu: float = 10.0) -> PowerParams:
    """Power constants used throughout the experiments."""
    return PowerParams(kernel_cpu=kernel_cpu)


def default_delay_params() -> DelayParams:
    """Delay/SLA constants used throughout the experiments."""
    return DelayParams()


@dataclass(frozen=True)
class SiteTopology:
    """Grid of co-located eNB/cloudlet sites with pairwise distances in km."""

    site_positions: tuple[tuple[float, float], ...]
    distances: tuple[tuple[float, ...], ...]
    area_side: float
    grid_dim: int

    def __post_init__(self) -> None:
        n = len(self.site_positions)
        if len(self.distances) != n or any(len(row) != n for row in self.distances):
            raise ValueError("distance matrix shape must match site count")
        for i in range(n):
            if self.distances[i][i] != 0.0:
                raise ValueError("distance matrix diagonal must be zero")
            for j in range(n):
                d = self.distances[i][j]
                if d < 0:
                    raise ValueError("distances must be non-negative")
                if d != self.distances[j][i]:
                    raise ValueError("distance matrix must be symmetric")

    @property
    def site_count(self) -> int:
        return len(self.site_positions)


@dataclass(frozen=True)
class CloudletSpec:
    """Static per-cloudlet configuration: rack size, solar panel, zone."""

    server_count: int
    panel_area: float = 5.0
    panel_efficiency: float = 0.46
    zone: str = "rural"

    def __post_init__(self) -> None:
        if self.server_count < 1:
            raise ValueError("server_count must be >= 1")
        if self.panel_area < 0:
            raise ValueError("panel_area must be non-negative")
        if not 0 < self.panel_efficiency <= 1:
            raise ValueError("panel_efficiency must be in (0, 1]")
        if self.zone not in ("urban", "rural"):
            raise ValueError("zone must be 'urban' or 'rural'")


@dataclass(frozen=True)
class AvatarLoad:
    """One avatar's demand for a slot: total CPU (kernel + application)
    in percent, and the site index of the eNB its UE is attached to."""

    avatar_id: int
    total_cpu: float
    attached_enb: int

    def __post_init__(self) -> None:
        if self.avatar_id < 0:
            raise ValueError("avatar_id must be non-negative")
        if not 0.0 <= self.total_cpu <= 100.0:
            raise ValueError("total_cpu must be within [0, 100]")


@dataclass(frozen=True)
class Assignment:
    """Placement map: avatar_id -> cloudlet index, one cloudlet per avatar."""

    placement: dict[int, int] = field(default_factory=dict)

    def cloudlet_of(self, avatar_id: int) -> int:
        return self.placement[avatar_id]

    def counts(self, n_cloudlets: int) -> list[int]:
        """Number of avatars hosted per cloudlet."""
        out = [0] * n_cloudlets
        for i in self.placement.values():
            out[i] += 1
        return out


@dataclass(frozen=True)
class ServerPacking:
    """One cloudlet's avatars grouped into servers (filled first-fit)."""

    servers: tuple[tuple[AvatarLoad, ...], ...]

    @property
    def server_ids(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(a.avatar_id for a in srv) for srv in self.servers)

    @property
    def hosted_count(self) -> int:
        return sum(len(srv) for srv in self.servers)


def active_server_count(avatar_count: int, server_capacity: int) -> int:
    """Servers needed to host `avatar_count` avatars, `server_capacity` each."""
    if avatar_count < 0 or server_capacity < 1:
        raise ValueError("avatar_count must be >= 0 and server_capacity >= 1")
    return -(-avatar_count // server_capacity)


def pack_first_fit(avatars: list[AvatarLoad], server_capacity: int) -> ServerPacking:
    """Fill servers in arrival order, each up to capacity before opening the next.

    Packing is power-neutral for homogeneous servers; first-fit is used purely
    so that runs are reproducible.
    """
    if server_capacity < 1:
        raise ValueError("server_capacity must be >= 1")
    servers = [
        tuple(avatars[j : j + server_capacity])
        for j in range(0, len(avatars), server_capacity)
    ]
    return ServerPacking(servers=tuple(servers))


def server_power(avatars_on_server: list[AvatarLoad] | tuple[AvatarLoad, ...],
                 params: PowerParams) -> float:
    """Power draw (W) of one active server hosting the given avatars."""
    if len(avatars_on_server) > params.server_capacity:
        raise ValueError("server hosts more avatars than its capacity")
    cpu_total = sum(a.total_cpu for a in avatars_on_server)
    return (params.standby_power
            + params.avatar_coeff * len(avatars_on_server)
            + params.cpu_coeff * cpu_total)


def cloudlet_power_exact(packing: ServerPacking, params: PowerParams) -> float:
    """Cloudlet power (W) as the sum over its active servers; 0 if empty."""
    return sum(server_power(srv, params) for srv in packing.servers)


def avatar_weight(total_cpu: float, params: PowerParams) -> float:
    """Placement-independent power weight (W) one avatar contributes to a
    cloudlet under the linearized model: amortized standby share plus
    hypervisor overhead plus CPU draw."""
    if not 0.0 <= total_cpu <= 100.0:
        raise ValueError("total_cpu must be within [0, 100]")
    return (params.standby_power / params.server_capacity
            + params.avatar_coeff
            + params.cpu_coeff * total_cpu)


def cloudlet_power_approx(loads: list[AvatarLoad] | tuple[AvatarLoad, ...],
                          params: PowerParams) -> float:
    """Linearized cloudlet power (W): sum of avatar weights.

    Matches `cloudlet_power_exact` whenever the avatar count is a multiple
    of the server capacity; otherwise undershoots by less than one standby
    share (the rounding of the active-server count).
    """
    return sum(avatar_weight(a.total_cpu, params) for a in loads)


def propagation_delay(cloudlet: int, enb: int, topo: SiteTopology,
                      params: DelayParams) -> float:
    """One-way avatar propagation delay (ms) between a cloudlet and an eNB."""
    return params.dist_coeff * topo.distances[cloudlet][enb]


def feasible_set(enb: int, topo: SiteTopology, params: DelayParams) -> frozenset[int]:
    """Cloudlets an avatar attached at `enb` may use without breaking the SLA."""
    sigma, eps = params.dist_coeff, params.sla_max_delay
    return frozenset(
        i for i in range(topo.site_count) if sigma * topo.distances[i][enb] <= eps
    )


def ongrid_energy(power_demand: float, green_power: float,
                  slot_length: float) -> float:
    """On-grid energy (Wh) drawn over one slot; green surplus is not banked."""
    if slot_length <= 0:
        raise ValueError("slot_length must be positive")
    if power_demand < 0 or green_power < 0:
        raise ValueError("power values must be non-negative")
    return max(0.0, slot_length * (power_demand - green_power))


def assignment_loads(loads: list[AvatarLoad] | tuple[AvatarLoad, ...],
                     assignment: Assignment,
                     n_cloudlets: int) -> list[list[AvatarLoad]]:
    """Group loads by assigned cloudlet, each group in ascending avatar id.

    This is the canonical grouping used for all power accounting; keeping
    one summation order everywhere makes energy comparisons between
    strategies reproducible bit for bit.
    """
    groups: list[list[AvatarLoad]] = [[] for _ in range(n_cloudlets)]
    for load in sorted(loads, key=lambda a: a.avatar_id):
        groups[assignment.placement[load.avatar_id]].append(load)
    return groups

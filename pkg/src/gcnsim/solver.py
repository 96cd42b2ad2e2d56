"""Branch-and-bound solver for green-energy-aware avatar placement.

The per-slot decision is a pure assignment problem: place every avatar on
one cloudlet from its delay-feasible set, respect each cloudlet's hosting
capacity, and minimize total on-grid power, i.e.

    minimize  sum_i max(0, load_i - green_i)

where `load_i` is the sum of the placement weights of the avatars put on
cloudlet i. The problem is NP-hard (it contains the partition problem), so
`solve` runs depth-first branch and bound with an admissible aggregate
bound and supports truncation by node budget or relative gap, returning
the best incumbent found. `brute_force` is an exhaustive oracle for small
instances, used to validate the search.

Arithmetic note: objectives and bounds are computed in fixed-point integer
watts (1/2^20 W resolution). All partial sums are exact, so two placements
whose objectives are mathematically equal compare equal regardless of
summation order, pruning at equality is safe, and the search is
bit-reproducible. Reported `Solution` values are the integer results
converted back to float watts.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass

from .model import (
    Assignment,
    AvatarLoad,
    CloudletSpec,
    DelayParams,
    PowerParams,
    SiteTopology,
    avatar_weight,
    feasible_set,
)

# Fixed-point scale for watt values inside the search (about 1e-6 W).
_SCALE = 1 << 20

# Relative-gap denominator floor, to keep gap finite at zero objective.
_TINY = 1e-12


class Infeasible(Exception):
    """No complete assignment satisfies the constraints."""


class InfeasibleAvatar(Infeasible):
    """Some avatar has no cloudlet within its delay bound."""

    def __init__(self, avatar_id: int):
        self.avatar_id = avatar_id
        super().__init__(f"avatar {avatar_id} has an empty feasible set")


class InsufficientCapacity(Infeasible):
    """Total hosting capacity is smaller than the avatar population."""


class TooLarge(Exception):
    """Instance exceeds the brute-force enumeration guard."""


def _to_units(watts: float) -> int:
    return round(watts * _SCALE)


def _to_watts(units: int) -> float:
    return units / _SCALE


@dataclass
class MilpInstance:
    """One slot's placement problem.

    `weights[k]` is avatar k's placement weight in watts, `feasible_sets[k]`
    the cloudlets it may use, `green_power[i]` cloudlet i's green supply in
    watts and `count_capacity[i]` the number of avatars it can host.
    `avatar_ids` maps instance positions back to avatar identifiers.
    """

    weights: tuple[float, ...]
    feasible_sets: tuple[frozenset[int], ...]
    green_power: tuple[float, ...]
    count_capacity: tuple[int, ...]
    avatar_ids: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        self.weights = tuple(float(w) for w in self.weights)
        self.feasible_sets = tuple(frozenset(fs) for fs in self.feasible_sets)
        self.green_power = tuple(float(g) for g in self.green_power)
        self.count_capacity = tuple(int(c) for c in self.count_capacity)
        if not self.avatar_ids:
            self.avatar_ids = tuple(range(len(self.weights)))
        n, m = len(self.weights), len(self.green_power)
        if len(self.feasible_sets) != n or len(self.avatar_ids) != n:
            raise ValueError("per-avatar field lengths disagree")
        if len(set(self.avatar_ids)) != n:
            raise ValueError("avatar ids must be unique")
        if len(self.count_capacity) != m:
            raise ValueError("per-cloudlet field lengths disagree")
        if any(w < 0 for w in self.weights):
            raise ValueError("weights must be non-negative")
        if any(g < 0 for g in self.green_power):
            raise ValueError("green power must be non-negative")
        if any(c < 0 for c in self.count_capacity):
            raise ValueError("capacities must be non-negative")
        for k, fs in enumerate(self.feasible_sets):
            if not fs:
                raise InfeasibleAvatar(self.avatar_ids[k])
            if any(i < 0 or i >= m for i in fs):
                raise ValueError("feasible set references unknown cloudlet")
        if sum(self.count_capacity) < n:
            raise InsufficientCapacity(
                f"capacity {sum(self.count_capacity)} < {n} avatars")
        self._iw = tuple(_to_units(w) for w in self.weights)
        self._ig = tuple(_to_units(g) for g in self.green_power)

    @property
    def n_avatars(self) -> int:
        return len(self.weights)

    @property
    def n_cloudlets(self) -> int:
        return len(self.green_power)

    def index_of(self, avatar_id: int) -> int:
        try:
            return self.avatar_ids.index(avatar_id)
        except ValueError:
            raise KeyError(f"unknown avatar id {avatar_id}") from None


@dataclass(frozen=True)
class SolverConfig:
    """Search budget and warm start for one `solve` call."""

    node_limit: int = 100_000
    gap_tolerance: float = 0.0
    seed_assignment: Assignment | None = None

    def __post_init__(self) -> None:
        if self.node_limit < 1:
            raise ValueError("node_limit must be >= 1")
        if self.gap_tolerance < 0:
            raise ValueError("gap_tolerance must be non-negative")


@dataclass(frozen=True)
class Solution:
    """Result of a solve: incumbent assignment plus proof metadata."""

    assignment: Assignment
    objective: float
    lower_bound: float
    gap: float
    nodes_explored: int
    proven_optimal: bool


@dataclass(frozen=True)
class BnbNode:
    """A partial placement in the search tree.

    `fixed` maps already-placed avatar ids to cloudlets; `remaining` lists
    unplaced avatar ids in branch order. The committed fields are derived
    from `fixed`, and `bound` is an admissible lower bound on the best
    completion of this node.
    """

    fixed: dict[int, int]
    committed_load: tuple[float, ...]
    committed_count: tuple[int, ...]
    remaining: tuple[int, ...]
    bound: float

    @staticmethod
    def from_partial(inst: MilpInstance, fixed: dict[int, int]) -> "BnbNode":
        load = [0.0] * inst.n_cloudlets
        count = [0] * inst.n_cloudlets
        for avatar_id, i in fixed.items():
            k = inst.index_of(avatar_id)
            load[i] += inst.weights[k]
            count[i] += 1
        remaining = tuple(a for a in inst.avatar_ids if a not in fixed)
        node = BnbNode(fixed=dict(fixed), committed_load=tuple(load),
                       committed_count=tuple(count), remaining=remaining,
                       bound=0.0)
        object.__setattr__(node, "bound", aggregate_bound(node, inst))
        return node


def build_instance(loads: list[AvatarLoad], specs: list[CloudletSpec],
                   green: list[float], topo: SiteTopology,
                   power: PowerParams, delay: DelayParams) -> MilpInstance:
    """Assemble the placement problem for one slot.

    Raises InfeasibleAvatar if some avatar has no cloudlet within the delay
    bound, InsufficientCapacity if the avatars cannot all be hosted.
    """
    if len(specs) != topo.site_count or len(green) != topo.site_count:
        raise ValueError("specs/green length must match the topology")
    return MilpInstance(
        weights=tuple(avatar_weight(a.total_cpu, power) for a in loads),
        feasible_sets=tuple(feasible_set(a.attached_enb, topo, delay)
                            for a in loads),
        green_power=tuple(green),
        count_capacity=tuple(s.server_count * power.server_capacity
                             for s in specs),
        avatar_ids=tuple(a.avatar_id for a in loads),
    )


def _int_bound(load: list[int], wrem: int, ig: tuple[int, ...]) -> int:
    """Admissible bound, exact integer arithmetic.

    Committed deficit can only grow, and the remaining weight must either
    fit into the cloudlets' residual green slack or come from the grid;
    dropping the delay and capacity constraints only relaxes the problem.
    """
    deficit = 0
    slack = 0
    for li, gi in zip(load, ig):
        if li > gi:
            deficit += li - gi
        else:
            slack += gi - li
    spill = wrem - slack
    return deficit + (spill if spill > 0 else 0)


def _int_objective(place: list[int], iw: tuple[int, ...],
                   ig: tuple[int, ...], m: int) -> int:
    """Exact on-grid power (fixed-point) of a complete placement."""
    load = [0] * m
    for k, i in enumerate(place):
        load[i] += iw[k]
    return sum(load[i] - ig[i] for i in range(m) if load[i] > ig[i])


def aggregate_bound(node: BnbNode, inst: MilpInstance) -> float:
    """Lower bound (W) on the best completion of a partial placement.

    Computed from `node.fixed` in exact fixed-point arithmetic, so the
    admissibility relation to `brute_force` optima carries over to the
    returned floats unchanged.
    """
    load = [0] * inst.n_cloudlets
    for avatar_id, i in node.fixed.items():
        load[i] += inst._iw[inst.index_of(avatar_id)]
    wrem = sum(inst._iw[inst.index_of(a)] for a in node.remaining)
    return _to_watts(_int_bound(load, wrem, inst._ig))


def _placement_from_assignment(inst: MilpInstance,
                               assignment: Assignment) -> list[int]:
    """Validate an assignment against the instance; return index-form placement."""
    if set(assignment.placement) != set(inst.avatar_ids):
        raise ValueError("assignment does not cover the avatar population")
    place = [0] * inst.n_avatars
    used = [0] * inst.n_cloudlets
    for k, avatar_id in enumerate(inst.avatar_ids):
        i = assignment.placement[avatar_id]
        if i not in inst.feasible_sets[k]:
            raise ValueError(f"avatar {avatar_id} placed outside its feasible set")
        place[k] = i
        used[i] += 1
    for i, cap in enumerate(inst.count_capacity):
        if used[i] > cap:
            raise ValueError(f"cloudlet {i} over capacity in seed assignment")
    return place


def _to_assignment(inst: MilpInstance, place: list[int]) -> Assignment:
    return Assignment({inst.avatar_ids[k]: place[k] for k in range(inst.n_avatars)})


def solve(inst: MilpInstance, config: SolverConfig | None = None) -> Solution:
    """Depth-first branch and bound over placements.

    Branches on the heaviest unplaced avatar; children are its feasible
    cloudlets with spare capacity, visited in order of residual green
    supply. Avatars with identical weight and feasible set are
    interchangeable, so their cloudlet indices are forced non-decreasing
    to kill the symmetry. A feasible `seed_assignment` is installed as the
    initial incumbent and can only be improved on; without one, the node
    budget starts binding only after the first complete placement is found,
    so truncated searches still return a feasible answer. All ties break
    toward the lowest index, which makes runs bit-reproducible.
    """
    cfg = config or SolverConfig()
    n, m = inst.n_avatars, inst.n_cloudlets
    iw, ig = inst._iw, inst._ig
    cap = inst.count_capacity
    fsets = [sorted(fs) for fs in inst.feasible_sets]

    # Static branch order: heaviest first, then lowest instance index.
    order = sorted(range(n), key=lambda k: (-iw[k], k))
    wrem_suffix = [0] * (n + 1)
    for d in range(n - 1, -1, -1):
        wrem_suffix[d] = wrem_suffix[d + 1] + iw[order[d]]

    # Symmetry groups: previous interchangeable avatar in branch order.
    group_prev: dict[int, int] = {}
    last_of: dict[tuple[int, frozenset[int]], int] = {}
    for d in range(n):
        k = order[d]
        key = (iw[k], inst.feasible_sets[k])
        if key in last_of:
            group_prev[k] = last_of[key]
        last_of[key] = k

    best_obj: int | None = None
    best_place: list[int] | None = None
    seeded_place: list[int] | None = None
    if cfg.seed_assignment is not None:
        seeded_place = _placement_from_assignment(inst, cfg.seed_assignment)
        best_obj = _int_objective(seeded_place, iw, ig, m)
        best_place = seeded_place

    root_bound = _int_bound([0] * m, wrem_suffix[0], ig)

    place = [-1] * n
    load = [0] * m
    used = [0] * m
    nodes = 0
    stop = False
    stopped_by_gap = False

    def visit(depth: int, deficit: int, slack: int) -> None:
        nonlocal nodes, stop, stopped_by_gap, best_obj, best_place
        nodes += 1
        if depth == n:
            if best_obj is None or deficit < best_obj:
                best_obj = deficit
                best_place = place.copy()
                if best_obj - root_bound <= cfg.gap_tolerance * best_obj:
                    stop = True  # incumbent provably within tolerance
                    stopped_by_gap = True
            return
        if best_obj is not None and nodes >= cfg.node_limit:
            # The budget binds only once an incumbent exists, so truncation
            # still returns a feasible placement.
            stop = True
            return
        k = order[depth]
        wk = iw[k]
        wr = wrem_suffix[depth + 1]
        floor_i = place[group_prev[k]] if k in group_prev else 0
        children: list[tuple[int, int, int, int, int]] = []
        for i in fsets[k]:
            if i < floor_i or used[i] >= cap[i]:
                continue
            li, gi = load[i], ig[i]
            d2 = deficit - (li - gi if li > gi else 0)
            s2 = slack - (gi - li if gi > li else 0)
            li += wk
            d2 += li - gi if li > gi else 0
            s2 += gi - li if gi > li else 0
            spill = wr - s2
            b = d2 + (spill if spill > 0 else 0)
            if best_obj is not None and b >= best_obj:
                continue
            # sort key: most residual green first, then lowest index
            children.append((load[i] - gi, i, b, d2, s2))
        children.sort()
        for _, i, b, d2, s2 in children:
            if best_obj is not None and b >= best_obj:
                continue  # incumbent improved while visiting a sibling
            place[k] = i
            load[i] += wk
            used[i] += 1
            visit(depth + 1, d2, s2)
            load[i] -= wk
            used[i] -= 1
            place[k] = -1
            if stop:
                return

    if best_obj is not None and best_obj - root_bound <= cfg.gap_tolerance * best_obj:
        # Seed already meets the tolerance against the root bound.
        nodes = 1
        stop = stopped_by_gap = True
    else:
        needed = n + 500
        if sys.getrecursionlimit() < needed:
            sys.setrecursionlimit(needed)
        visit(0, 0, sum(ig))
    exhausted = (not stop) or (stopped_by_gap and best_obj == root_bound)

    if best_obj is None or best_place is None:
        raise Infeasible("no feasible placement exists")

    objective = _to_watts(best_obj)
    lb_units = best_obj if exhausted else root_bound
    lower_bound = _to_watts(lb_units)
    gap = 0.0 if best_obj == lb_units else (objective - lower_bound) / max(objective, _TINY)
    return Solution(
        assignment=_to_assignment(inst, best_place),
        objective=objective,
        lower_bound=lower_bound,
        gap=gap,
        nodes_explored=nodes,
        proven_optimal=exhausted or stopped_by_gap or gap <= cfg.gap_tolerance,
    )


def brute_force(inst: MilpInstance, enumeration_limit: int = 1_000_000) -> Solution:
    """Exhaustive oracle: enumerate every feasible placement.

    Enumerates avatars in instance order over their feasible sets (pruning
    only on capacity), keeping the first placement that attains the
    minimum. Raises TooLarge when the feasible-set product exceeds
    `enumeration_limit`, Infeasible when nothing completes.
    """
    n, m = inst.n_avatars, inst.n_cloudlets
    combos = 1
    for fs in inst.feasible_sets:
        combos *= len(fs)
        if combos > enumeration_limit:
            raise TooLarge(
                f"enumeration would exceed {enumeration_limit} placements")
    fsets = [sorted(fs) for fs in inst.feasible_sets]
    iw, ig = inst._iw, inst._ig
    cap = inst.count_capacity

    best_obj: int | None = None
    best_place: list[int] | None = None
    place = [-1] * n
    load = [0] * m
    used = [0] * m
    leaves = 0

    def enumerate_from(k: int) -> None:
        nonlocal best_obj, best_place, leaves
        if k == n:
            leaves += 1
            obj = sum(load[i] - ig[i] for i in range(m) if load[i] > ig[i])
            if best_obj is None or obj < best_obj:
                best_obj = obj
                best_place = place.copy()
            return
        for i in fsets[k]:
            if used[i] >= cap[i]:
                continue
            place[k] = i
            load[i] += iw[k]
            used[i] += 1
            enumerate_from(k + 1)
            load[i] -= iw[k]
            used[i] -= 1
            place[k] = -1

    enumerate_from(0)
    if best_obj is None or best_place is None:
        raise Infeasible("no feasible placement exists")
    objective = _to_watts(best_obj)
    return Solution(
        assignment=_to_assignment(inst, best_place),
        objective=objective,
        lower_bound=objective,
        gap=0.0,
        nodes_explored=leaves,
        proven_optimal=True,
    )

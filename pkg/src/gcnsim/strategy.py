"""Per-slot avatar placement strategies.

Both strategies map one slot's state to a complete assignment:

* FAR (follow-me): every avatar goes to the cloudlet nearest its UE's eNB
  that still has room, never breaking the delay bound. It minimizes
  propagation delay and ignores energy entirely.
* GEAR (green-aware): solves the on-grid power minimization with branch
  and bound, warm-started with the better of FAR's placement and the
  previous slot's placement, so its objective can never exceed either.

Strategies are deterministic functions of their inputs; they draw no
randomness and keep no state between slots.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .model import (
    Assignment,
    AvatarLoad,
    CloudletSpec,
    DelayParams,
    PowerParams,
    SiteTopology,
    assignment_loads,
    cloudlet_power_approx,
)
from .solver import (
    Infeasible,
    MilpInstance,
    Solution,
    SolverConfig,
    _int_objective,
    _placement_from_assignment,
    build_instance,
    solve,
)


@dataclass(frozen=True)
class SlotState:
    """Everything a strategy may look at for one slot: next-slot loads and
    green supply, the previous placement, and the scenario constants."""

    loads: tuple[AvatarLoad, ...]
    green_power: tuple[float, ...]
    prev_assignment: Assignment
    topo: SiteTopology
    specs: tuple[CloudletSpec, ...]
    power: PowerParams
    delay: DelayParams


@dataclass(frozen=True)
class StrategyOutcome:
    """A strategy's decision for one slot."""

    assignment: Assignment
    migrations: int
    solver_stats: Solution | None = None


def _count_migrations(new: Assignment, prev: Assignment) -> int:
    return sum(1 for k, i in new.placement.items() if prev.placement.get(k) != i)


def nearest_feasible_order(topo: SiteTopology, delay: DelayParams) -> list[list[int]]:
    """For each eNB, its delay-feasible cloudlets sorted nearest-first.

    Distance ties break toward the lower cloudlet index.
    """
    sigma, eps = delay.dist_coeff, delay.sla_max_delay
    order = []
    for e in range(topo.site_count):
        cands = [(topo.distances[i][e], i) for i in range(topo.site_count)
                 if sigma * topo.distances[i][e] <= eps]
        cands.sort()
        order.append([i for _, i in cands])
    return order


def far_assign(state: SlotState) -> StrategyOutcome:
    """Place each avatar at the nearest cloudlet with spare capacity.

    Avatars are processed in ascending id. When the nearest cloudlet is
    full the avatar overflows to the next-nearest with room, still within
    the delay bound; if every in-range cloudlet is full the slot is
    infeasible.
    """
    order = nearest_feasible_order(state.topo, state.delay)
    cap = [s.server_count * state.power.server_capacity for s in state.specs]
    used = [0] * len(state.specs)
    placement: dict[int, int] = {}
    for load in sorted(state.loads, key=lambda a: a.avatar_id):
        for i in order[load.attached_enb]:
            if used[i] < cap[i]:
                placement[load.avatar_id] = i
                used[i] += 1
                break
        else:
            raise Infeasible(
                f"no in-range cloudlet has room for avatar {load.avatar_id}")
    assignment = Assignment(placement)
    return StrategyOutcome(
        assignment=assignment,
        migrations=_count_migrations(assignment, state.prev_assignment),
    )


def _approx_power_gap(state: SlotState, assignment: Assignment) -> float:
    """Total on-grid power (W) of an assignment under the linearized model,
    summed in the canonical per-cloudlet order used by the engine."""
    groups = assignment_loads(state.loads, assignment, len(state.specs))
    return sum(
        max(0.0, cloudlet_power_approx(group, state.power) - green)
        for group, green in zip(groups, state.green_power)
    )


def _feasible_or_none(inst: MilpInstance, assignment: Assignment) -> list[int] | None:
    try:
        return _placement_from_assignment(inst, assignment)
    except ValueError:
        return None


def gear_assign(state: SlotState, config: SolverConfig | None = None) -> StrategyOutcome:
    """Minimize on-grid power by re-placing avatars, warm-started by FAR.

    The previous slot's placement replaces FAR as the warm start only when
    it is still feasible and strictly better under both the solver's exact
    fixed-point objective and the engine's float accounting; the solver's
    result replaces the warm start under the same double test. The double
    test guarantees the returned placement never accounts worse than FAR's
    in the engine, down to the last bit.
    """
    cfg = config or SolverConfig()
    inst = build_instance(list(state.loads), list(state.specs),
                          list(state.green_power), state.topo,
                          state.power, state.delay)
    far = far_assign(state)

    seed = far.assignment
    seed_units = _int_objective(_placement_from_assignment(inst, seed),
                                inst._iw, inst._ig, inst.n_cloudlets)
    seed_gap = _approx_power_gap(state, seed)
    prev_place = _feasible_or_none(inst, state.prev_assignment)
    if prev_place is not None:
        prev_units = _int_objective(prev_place, inst._iw, inst._ig,
                                    inst.n_cloudlets)
        prev_gap = _approx_power_gap(state, state.prev_assignment)
        if prev_units < seed_units and prev_gap < seed_gap:
            seed = state.prev_assignment
            seed_units, seed_gap = prev_units, prev_gap

    sol = solve(inst, replace(cfg, seed_assignment=seed))

    chosen = seed
    if sol.assignment.placement != seed.placement:
        if _approx_power_gap(state, sol.assignment) < seed_gap:
            chosen = sol.assignment
    return StrategyOutcome(
        assignment=chosen,
        migrations=_count_migrations(chosen, state.prev_assignment),
        solver_stats=sol,
    )

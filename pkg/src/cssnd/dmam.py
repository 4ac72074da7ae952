"""Multi-phase construction and improvement heuristic.

Phase I enumerates commodity paths (see `paths`).  Phase II dedicates one
asset per cheapest path.  Phase III merges pairs of paths into shared asset
cycles, either greedily (config "r"), via smallest-conflicted-pairs-first
selection (config "c"), or via an exact maximum-cardinality minimum-cost
matching over the explored pairs (config "a").  Phase IV mixes leftover
single paths into other cycles by letting a holding arc ride a dominant
path.  Phase V resolves asset shortage by leasing or outsourcing unit by
unit and finalizes asset cycles.

Merge feasibility works on a normalized timeline: due periods that wrap are
pushed one horizon forward, then the second path is pushed after the first,
so both chains and the wrap-back point t_O1 + |T| sit on one axis.  A merge
is classified purely spatially (which repositioning legs are needed) and the
time-wise conditions check that the repositioning legs fit the two gaps.
Shifted merges retry the same conditions with the chains moved one period
using the early/tardy sibling paths.

A merged cycle runs both carried chains, the repositioning legs between
them, and idle holds in the gaps.  A lone cycle runs just its service leg,
an empty return trip, and idle holds: dragging the chain's waiting periods
along can make the cycle too long to close, and a commodity waiting on an
uncapacitated holding arc occupies no asset anyway, exactly as in the exact
model where holding arcs appear in no forcing constraint.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .core import (
    CssndError,
    Instance,
    KIND_SHIFT,
    TimeSpaceNetwork,
    TransformedCommodity,
    build_time_space_network,
    cyclic_span,
    expand_commodities,
    wrap_period,
)
from .matching import max_weight_matching
from .paths import OFFERED, OUTSOURCED_MODE, CommodityPath, enumerate_paths

CONFIG_RANDOM = "r"
CONFIG_CUSTOM = "c"
CONFIG_ADVANCED = "a"

NO_REP = "no_rep"
ONE_REP_V1 = "one_rep_v1"
ONE_REP_V2 = "one_rep_v2"
TWO_REP = "two_rep"

# Shifting alternatives: (path-one offset, path-two offset); the first four
# move a single chain one period, the last two move both in opposite
# directions for a combined shift of two.
ALTERNATIVES = {
    1: (1, 0),
    2: (-1, 0),
    3: (0, 1),
    4: (0, -1),
    5: (1, -1),
    6: (-1, 1),
}


@dataclass(frozen=True)
class LegView:
    """The asset-side silhouette of a (possibly truncated) path chain."""

    path_id: int
    oc_id: int
    phys_from: int
    phys_to: int
    start: int                 # period of chain start, 1..|T|
    busy: int                  # periods from chain start to chain end


def leg_view(path: CommodityPath) -> LegView:
    return LegView(
        path_id=path.id,
        oc_id=path.oc_id,
        phys_from=path.origin_physical,
        phys_to=path.dest_physical,
        start=path.depart_period,
        busy=path.busy_periods,
    )


def adjust_times(leg1: LegView, leg2: LegView, period_count: int):
    """Normalize the two chains onto one forward timeline.

    Returns (t_o1, t_d1, t_o2, t_d2, t_wrap) where t_wrap = t_o1 + |T| is
    the moment the cycle must close.
    """
    t_o1, t_d1 = leg1.start, leg1.start + leg1.busy
    t_o2 = leg2.start
    t_d2 = t_o2 + leg2.busy
    # busy spans already encode any due-before-release wrap, so the first
    # two prerequisites hold by construction; the third aligns path two
    # after path one.
    if t_o1 >= t_o2:
        t_o2 += period_count
        t_d2 += period_count
    return t_o1, t_d1, t_o2, t_d2, t_o1 + period_count


def _spatial_type(leg1: LegView, leg2: LegView) -> str:
    back_matches = leg1.phys_from == leg2.phys_to
    forth_matches = leg1.phys_to == leg2.phys_from
    if back_matches and forth_matches:
        return NO_REP
    if back_matches:
        return ONE_REP_V1
    if forth_matches:
        return ONE_REP_V2
    return TWO_REP


def _time_conditions(
    merge_type: str,
    times,
    d_forth: int,
    d_back: int,
    a1: int = 0,
    a2: int = 0,
) -> bool:
    """Time-wise merge conditions, with optional one-period chain offsets.

    d_forth is the repositioning distance first-destination -> second-origin,
    d_back the distance second-destination -> first-origin.
    """
    t_o1, t_d1, t_o2, t_d2, t_wrap = times
    t_o1, t_d1 = t_o1 + a1, t_d1 + a1
    t_o2, t_d2 = t_o2 + a2, t_d2 + a2
    t_wrap = t_wrap + a1
    if merge_type == NO_REP:
        return t_d1 <= t_o2 and t_d2 <= t_wrap
    if merge_type == ONE_REP_V1:
        return t_d2 <= t_wrap and t_d1 < t_o2 and d_forth <= t_o2 - t_d1
    if merge_type == ONE_REP_V2:
        return t_d1 <= t_o2 and t_d2 < t_wrap and d_back <= t_wrap - t_d2
    return (
        t_d1 < t_o2
        and t_d2 < t_wrap
        and d_back <= t_wrap - t_d2
        and d_forth <= t_o2 - t_d1
    )


def _slack_values(merge_type: str, times, d_forth: int, d_back: int) -> list[int]:
    """Positive entries measure how far each condition is from holding."""
    t_o1, t_d1, t_o2, t_d2, t_wrap = times
    if merge_type == NO_REP:
        return [t_d1 - t_o2, t_d2 - t_wrap]
    if merge_type == ONE_REP_V1:
        return [t_d2 - t_wrap, t_d1 - t_o2 + 1, d_forth - (t_o2 - t_d1)]
    if merge_type == ONE_REP_V2:
        return [t_d1 - t_o2, t_d2 - t_wrap + 1, d_back - (t_wrap - t_d2)]
    return [
        t_d1 - t_o2 + 1,
        t_d2 - t_wrap + 1,
        d_back - (t_wrap - t_d2),
        d_forth - (t_o2 - t_d1),
    ]


def check_regular_merge(
    leg1: LegView, leg2: LegView, instance: Instance
) -> str | None:
    """Return the (spatially determined) merge type if the chains fit one
    cycle without shifting, else None."""
    period_count = instance.period_count
    times = adjust_times(leg1, leg2, period_count)
    merge_type = _spatial_type(leg1, leg2)
    d_forth = (
        0
        if leg1.phys_to == leg2.phys_from
        else instance.physical.d(leg1.phys_to, leg2.phys_from)
    )
    d_back = (
        0
        if leg2.phys_to == leg1.phys_from
        else instance.physical.d(leg2.phys_to, leg1.phys_from)
    )
    if _time_conditions(merge_type, times, d_forth, d_back):
        return merge_type
    return None


@dataclass(frozen=True)
class MergeCandidate:
    path_one: int
    path_two: int
    merge_type: str
    shifted: bool
    alternative: int            # 0 for regular merges
    offset_one: int
    offset_two: int
    new_path_one: int           # path id after any shift (== path_one if none)
    new_path_two: int
    combined_cost: float


class PathBook:
    """All generated paths plus the lookups the phases need."""

    def __init__(self, instance: Instance, tsn: TimeSpaceNetwork):
        self.instance = instance
        self.tsn = tsn
        self.tcs, self.incidence = expand_commodities(instance)
        self.tc_by_id = {tc.id: tc for tc in self.tcs}
        self.by_id: dict[int, CommodityPath] = {}
        self.by_tc: dict[int, list[CommodityPath]] = {}
        next_id = 1
        for tc in self.tcs:
            tc_paths = enumerate_paths(tc, tsn, instance.costs, id_start=next_id)
            next_id += len(tc_paths)
            self.by_tc[tc.id] = tc_paths
            for p in tc_paths:
                self.by_id[p.id] = p

    def tc_of(self, path: CommodityPath) -> TransformedCommodity:
        return self.tc_by_id[path.tc_id]

    def oc_paths(self, oc_id: int) -> list[CommodityPath]:
        return [
            p for tc_id in self.incidence[oc_id] for p in self.by_tc[tc_id]
        ]

    def sibling(self, path: CommodityPath, offset: int) -> CommodityPath | None:
        """Same-shape offered path of the TC shifted by `offset` periods."""
        if path.mode != OFFERED:
            return None
        shift = KIND_SHIFT[path.kind] + offset
        if shift not in (-1, 0, 1):
            return None
        kind_index = shift + 1     # early, original, tardy
        sibling_tc = self.incidence[path.oc_id][kind_index]
        for p in self.by_tc[sibling_tc]:
            if (
                p.mode == OFFERED
                and p.lead_holds == path.lead_holds
                and p.trail_holds == path.trail_holds
            ):
                return p
        return None

    def cheapest_outsourced(self, oc_id: int) -> CommodityPath:
        candidates = [
            p for p in self.oc_paths(oc_id) if p.mode == OUTSOURCED_MODE
        ]
        if not candidates:
            raise CssndError(f"commodity {oc_id} has no outsourced fallback")
        return min(candidates, key=lambda p: (p.cost, p.id))


def check_shifted_merge(
    leg1: LegView,
    leg2: LegView,
    path1: CommodityPath,
    path2: CommodityPath,
    instance: Instance,
    book: PathBook,
) -> tuple[str, int, CommodityPath, CommodityPath] | None:
    """Try the one- and two-period shifting alternatives after a regular
    merge failed.  Returns (merge_type, alternative, new_path1, new_path2)
    for the cheapest feasible alternative, or None."""
    period_count = instance.period_count
    times = adjust_times(leg1, leg2, period_count)
    merge_type = _spatial_type(leg1, leg2)
    d_forth = (
        0
        if leg1.phys_to == leg2.phys_from
        else instance.physical.d(leg1.phys_to, leg2.phys_from)
    )
    d_back = (
        0
        if leg2.phys_to == leg1.phys_from
        else instance.physical.d(leg2.phys_to, leg1.phys_from)
    )
    slacks = _slack_values(merge_type, times, d_forth, d_back)
    s_max = max(slacks)
    if s_max > 2 or s_max < 1:
        return None
    alternatives = (1, 2, 3, 4) if s_max == 1 else (5, 6)
    best = None
    for m in alternatives:
        a1, a2 = ALTERNATIVES[m]
        new1 = book.sibling(path1, a1) if a1 else path1
        new2 = book.sibling(path2, a2) if a2 else path2
        if new1 is None or new2 is None:
            continue
        if not _time_conditions(merge_type, times, d_forth, d_back, a1, a2):
            continue
        cost = new1.cost + new2.cost
        if best is None or cost < best[0] - 1e-12:
            best = (cost, merge_type, m, new1, new2)
    if best is None:
        return None
    return best[1], best[2], best[3], best[4]


@dataclass
class CycleLeg:
    path_id: int
    asset_arcs: tuple[int, ...]   # arcs the asset runs for this commodity
    start: int                    # normalized period of first asset arc
    end: int                      # normalized period after last asset arc
    phys_from: int
    phys_to: int


@dataclass
class AssetCycle:
    legs: list[CycleLeg]
    rep_plan: list[tuple[int, int]] = field(default_factory=list)  # (arc, t)
    asset_id: int = 0
    kind: str = "owned"
    arc_seq: tuple[int, ...] = ()

    @property
    def carried_paths(self) -> list[int]:
        return [leg.path_id for leg in self.legs]

    @property
    def merged(self) -> bool:
        return len(self.legs) > 1


@dataclass
class PhaseStat:
    phase: str
    cycles: int
    total_cost: float
    seconds: float


@dataclass
class Solution:
    instance: Instance
    tsn: TimeSpaceNetwork
    book: PathBook
    selected: dict[int, CommodityPath] = field(default_factory=dict)
    cycles: list[AssetCycle] = field(default_factory=list)
    outsourced: set[int] = field(default_factory=set)
    dominant: set[int] = field(default_factory=set)
    svc_registry: dict[int, int] = field(default_factory=dict)  # arc -> path
    phase_log: list[PhaseStat] = field(default_factory=list)

    def offered_cycle_count(self) -> int:
        return len(self.cycles)

    def owned_used(self) -> int:
        return min(len(self.cycles), self.instance.owned_assets)

    def leased(self) -> int:
        return max(0, len(self.cycles) - self.instance.owned_assets)

    def cost_breakdown(self) -> dict[str, float]:
        costs = self.instance.costs
        routing = penalty = outsourcing = 0.0
        for path in self.selected.values():
            base = path.cost / costs.multiplier(path.kind)
            if path.mode == OFFERED:
                routing += base
            else:
                outsourcing += base
            penalty += path.cost - base
        return {
            "fixed_owned": costs.fixed_owned * self.owned_used(),
            "fixed_leased": costs.fixed_leased * self.leased(),
            "routing": routing,
            "penalty": penalty,
            "outsourcing": outsourcing,
        }

    def total_cost(self) -> float:
        return sum(self.cost_breakdown().values())

    def summary(self) -> dict[str, int | float]:
        on_time = early = tardy = 0
        for path in self.selected.values():
            if path.mode != OFFERED:
                continue
            if path.kind == "original":
                on_time += 1
            elif path.kind == "early":
                early += 1
            else:
                tardy += 1
        return {
            "owned_used": self.owned_used(),
            "leased": self.leased(),
            "on_time": on_time,
            "early": early,
            "tardy": tardy,
            "outsourced": len(self.outsourced),
            "total_cost": self.total_cost(),
        }


def construct_initial(instance: Instance, book: PathBook) -> Solution:
    """Phase II: cheapest path per original commodity, one cycle per offered
    path, outsourced fallback where no offered path exists."""
    solution = Solution(instance=instance, tsn=book.tsn, book=book)
    for oc in instance.commodities:
        for path in sorted(book.oc_paths(oc.id), key=lambda p: (p.cost, p.id)):
            if path.mode == OFFERED:
                svc = path.arcs[path.lead_holds]
                if svc in solution.svc_registry:
                    continue            # service slot already taken
                solution.svc_registry[svc] = path.id
                solution.selected[oc.id] = path
                solution.cycles.append(
                    AssetCycle(legs=[_single_leg(path)])
                )
                break
            solution.selected[oc.id] = path
            solution.outsourced.add(oc.id)
            break
        else:
            raise CssndError(f"commodity {oc.id} has no candidate path")
    return solution


def _single_leg(path: CommodityPath) -> CycleLeg:
    return CycleLeg(
        path_id=path.id,
        asset_arcs=path.arcs,
        start=path.depart_period,
        end=path.depart_period + path.busy_periods,
        phys_from=path.origin_physical,
        phys_to=path.dest_physical,
    )


def partition_paths(
    solution: Solution,
) -> tuple[list[CommodityPath], list[CommodityPath]]:
    """Split unmerged offered paths into primary and secondary, both sorted
    by busy span descending (ties by id)."""
    period_count = solution.instance.period_count
    singles = [
        solution.book.by_id[c.legs[0].path_id]
        for c in solution.cycles
        if not c.merged
    ]
    primary = [p for p in singles if 2 * p.busy_periods > period_count]
    secondary = [p for p in singles if 2 * p.busy_periods <= period_count]
    key = lambda p: (-p.busy_periods, p.id)
    return sorted(primary, key=key), sorted(secondary, key=key)


def _pair_order(solution: Solution):
    """Exploration order: path one from longest to shortest busy span, path
    two over strictly shorter (or equal, later-id) spans that can share a
    horizon with it."""
    period_count = solution.instance.period_count
    primary, secondary = partition_paths(solution)
    ordered = primary + secondary
    for p1 in ordered:
        cap = min(p1.busy_periods, period_count - p1.busy_periods)
        for p2 in ordered:
            if p2.id == p1.id or p2.oc_id == p1.oc_id:
                continue
            if p2.busy_periods > cap:
                continue
            if p2.busy_periods == p1.busy_periods and p2.id < p1.id:
                continue
            yield p1, p2


def explore_pair(
    path1: CommodityPath, path2: CommodityPath, solution: Solution
) -> MergeCandidate | None:
    leg1, leg2 = leg_view(path1), leg_view(path2)
    instance = solution.instance
    merge_type = check_regular_merge(leg1, leg2, instance)
    if merge_type is not None:
        return MergeCandidate(
            path_one=path1.id,
            path_two=path2.id,
            merge_type=merge_type,
            shifted=False,
            alternative=0,
            offset_one=0,
            offset_two=0,
            new_path_one=path1.id,
            new_path_two=path2.id,
            combined_cost=path1.cost + path2.cost,
        )
    shifted = check_shifted_merge(
        leg1, leg2, path1, path2, instance, solution.book
    )
    if shifted is None:
        return None
    merge_type, alternative, new1, new2 = shifted
    a1, a2 = ALTERNATIVES[alternative]
    return MergeCandidate(
        path_one=path1.id,
        path_two=path2.id,
        merge_type=merge_type,
        shifted=True,
        alternative=alternative,
        offset_one=a1,
        offset_two=a2,
        new_path_one=new1.id,
        new_path_two=new2.id,
        combined_cost=new1.cost + new2.cost,
    )


def _rep_distance(instance: Instance, a: int, b: int) -> int:
    return 0 if a == b else instance.physical.d(a, b)


def _plan_repositioning(
    solution: Solution,
    leg1: CycleLeg,
    leg2: CycleLeg,
) -> list[tuple[int, int]] | None:
    """Choose repositioning arcs for the two gaps, avoiding service arcs
    already operated by another asset.  Times are normalized; returns
    (arc_id, normalized depart) pairs or None when no slot is free."""
    instance = solution.instance
    tsn = solution.tsn
    period_count = instance.period_count
    plan: list[tuple[int, int]] = []
    taken = set(solution.svc_registry)
    gaps = (
        (leg1.phys_to, leg2.phys_from, leg1.end, leg2.start),
        (leg2.phys_to, leg1.phys_from, leg2.end, leg1.start + period_count),
    )
    for phys_from, phys_to, earliest, latest in gaps:
        if phys_from == phys_to:
            continue
        d = instance.physical.d(phys_from, phys_to)
        slot = None
        for depart in range(earliest, latest - d + 1):
            arc = tsn.service_arc(phys_from, phys_to, wrap_period(depart, period_count))
            if arc.id not in taken:
                slot = (arc.id, depart)
                taken.add(arc.id)
                break
        if slot is None:
            return None
        plan.append(slot)
    return plan


def merge_paths(
    solution: Solution, candidate: MergeCandidate
) -> AssetCycle | None:
    """Build the merged cycle for a feasible candidate; None when every
    repositioning slot is occupied by another asset.

    Times come from the original pair's normalization plus the candidate's
    offsets, exactly the axis the conditions were verified on; shifted
    sibling chains keep their shape, so the offsets translate them rigidly.
    """
    book = solution.book
    old1 = book.by_id[candidate.path_one]
    old2 = book.by_id[candidate.path_two]
    new1 = book.by_id[candidate.new_path_one]
    new2 = book.by_id[candidate.new_path_two]
    period_count = solution.instance.period_count
    t_o1, t_d1, t_o2, t_d2, _ = adjust_times(
        leg_view(old1), leg_view(old2), period_count
    )
    leg1 = CycleLeg(
        path_id=new1.id,
        asset_arcs=new1.arcs,
        start=t_o1 + candidate.offset_one,
        end=t_d1 + candidate.offset_one,
        phys_from=new1.origin_physical,
        phys_to=new1.dest_physical,
    )
    leg2 = CycleLeg(
        path_id=new2.id,
        asset_arcs=new2.arcs,
        start=t_o2 + candidate.offset_two,
        end=t_d2 + candidate.offset_two,
        phys_from=new2.origin_physical,
        phys_to=new2.dest_physical,
    )
    plan = _plan_repositioning(solution, leg1, leg2)
    if plan is None:
        return None
    cycle = AssetCycle(legs=[leg1, leg2], rep_plan=plan)
    problems = simulate_cycle(cycle, solution)
    if problems:
        raise CssndError(
            "merged cycle failed simulation: " + "; ".join(problems)
        )
    return cycle


def _execute_merge(solution: Solution, candidate: MergeCandidate) -> bool:
    """Swap shifted paths in, replace the two single cycles by the merged
    cycle, and keep the service-arc registry exact."""
    book = solution.book
    old1 = book.by_id[candidate.path_one]
    old2 = book.by_id[candidate.path_two]
    new1 = book.by_id[candidate.new_path_one]
    new2 = book.by_id[candidate.new_path_two]
    # shifted replacements must not steal someone else's service slot
    incoming = []
    for old, new in ((old1, new1), (old2, new2)):
        if new.id != old.id:
            svc = new.arcs[new.lead_holds]
            if solution.svc_registry.get(svc, new.id) != new.id:
                return False
            incoming.append(svc)
    if len(set(incoming)) != len(incoming):
        return False
    for old, new in ((old1, new1), (old2, new2)):
        if new.id != old.id:
            del solution.svc_registry[old.arcs[old.lead_holds]]
            solution.svc_registry[new.arcs[new.lead_holds]] = new.id
            solution.selected[old.oc_id] = new
    cycle = merge_paths(solution, candidate)
    if cycle is None:
        # roll back the shift bookkeeping
        for old, new in ((old1, new1), (old2, new2)):
            if new.id != old.id:
                del solution.svc_registry[new.arcs[new.lead_holds]]
                solution.svc_registry[old.arcs[old.lead_holds]] = old.id
                solution.selected[old.oc_id] = old
        return False
    for arc_id, _ in cycle.rep_plan:
        solution.svc_registry[arc_id] = -1   # repositioning marker
    drop = {candidate.path_one, candidate.path_two}
    solution.cycles = [
        c for c in solution.cycles if not (set(c.carried_paths) & drop)
    ]
    solution.cycles.append(cycle)
    return True


def merge_phase(solution: Solution, config: str) -> int:
    """Phase III.  Returns the number of merges executed."""
    executed = 0
    if config == CONFIG_RANDOM:
        progress = True
        while progress:
            progress = False
            for p1, p2 in _pair_order(solution):
                candidate = explore_pair(p1, p2, solution)
                if candidate and _execute_merge(solution, candidate):
                    executed += 1
                    progress = True
                    break
        return executed

    candidates = []
    for p1, p2 in _pair_order(solution):
        candidate = explore_pair(p1, p2, solution)
        if candidate:
            candidates.append(candidate)
    if config == CONFIG_CUSTOM:
        chosen = scopf(candidates)
    elif config == CONFIG_ADVANCED:
        pairs = [(c.path_one, c.path_two) for c in candidates]
        costs = {
            (c.path_one, c.path_two): c.combined_cost for c in candidates
        }
        matched = set(solve_p2(pairs, costs))
        chosen = [c for c in candidates if (c.path_one, c.path_two) in matched]
    else:
        raise CssndError(f"unknown configuration '{config}'")
    for candidate in chosen:
        if _execute_merge(solution, candidate):
            executed += 1
    return executed


def scopf(candidates: list[MergeCandidate]) -> list[MergeCandidate]:
    """Smallest-conflicted-pairs-first selection of vertex-disjoint merges.

    Each path's individual score is the number of explored pairs it appears
    in; a pair scores the sum of its two endpoints.  Repeatedly pick the
    lowest-scoring pair (ties by path ids) and cancel everything touching
    its endpoints.  Scores are computed once, on the full conflict array.
    """
    degree: dict[int, int] = {}
    for c in candidates:
        degree[c.path_one] = degree.get(c.path_one, 0) + 1
        degree[c.path_two] = degree.get(c.path_two, 0) + 1
    remaining = sorted(
        candidates,
        key=lambda c: (
            degree[c.path_one] + degree[c.path_two],
            min(c.path_one, c.path_two),
            max(c.path_one, c.path_two),
        ),
    )
    selected: list[MergeCandidate] = []
    used: set[int] = set()
    for candidate in remaining:
        if candidate.path_one in used or candidate.path_two in used:
            continue
        selected.append(candidate)
        used.add(candidate.path_one)
        used.add(candidate.path_two)
    return selected


COST_SCALE = 10**9   # pair costs compared at 1e-9 resolution


def solve_p2(
    pairs: list[tuple[int, int]], costs: dict[tuple[int, int], float]
) -> list[tuple[int, int]]:
    """Exact solution of the pair-selection program: maximum number of
    vertex-disjoint pairs, minimum total cost among those.

    The iterated target scheme (start at floor(|M|/2) selections, drop one
    by one until feasible, then minimize cost at the first feasible rung)
    lands exactly on the maximum-cardinality minimum-cost matching, which
    is computed here by the blossom algorithm on negated costs; depth-first
    enumeration was measured hopeless already at forty-odd conflicting
    paths.
    """
    if not pairs:
        return []
    unique = sorted({(min(i, j), max(i, j)) for i, j in pairs})
    original = {}
    for i, j in pairs:
        original.setdefault((min(i, j), max(i, j)), (i, j))
    vertices = sorted({v for pair in unique for v in pair})
    index = {v: n for n, v in enumerate(vertices)}
    edges = []
    for i, j in unique:
        cost = costs.get((i, j), costs.get((j, i)))
        edges.append((index[i], index[j], -int(round(cost * COST_SCALE))))
    mate = max_weight_matching(edges, max_cardinality=True)
    selected = []
    for i, j in unique:
        if mate[index[i]] == index[j]:
            selected.append(original[(i, j)])
    return sorted(selected)


def _particle(path: CommodityPath, drop_index: int, tsn: TimeSpaceNetwork):
    """Remove one holding arc; return the service-bearing remainder as a
    LegView plus its asset arcs, or None when the drop splits the leg off."""
    period_count = tsn.period_count
    if drop_index < path.lead_holds:
        arcs = path.arcs[drop_index + 1 :]
        lead_left = path.lead_holds - drop_index - 1
        start = wrap_period(path.depart_period + drop_index + 1, period_count)
        busy = lead_left + path.leg_duration + path.trail_holds
        phys_from = path.origin_physical
        phys_to = path.dest_physical
    else:
        hold_pos = drop_index - path.lead_holds - 1  # position in trail run
        arcs = path.arcs[: path.lead_holds + 1 + hold_pos]
        start = path.depart_period
        busy = path.lead_holds + path.leg_duration + hold_pos
        phys_from = path.origin_physical
        phys_to = path.dest_physical
    view = LegView(
        path_id=path.id,
        oc_id=path.oc_id,
        phys_from=phys_from,
        phys_to=phys_to,
        start=start,
        busy=busy,
    )
    return view, arcs


def mix_phase(solution: Solution) -> int:
    """Phase IV: drop a holding arc that rides another selected (dominant)
    path and merge the remaining particle, trying the commodity's variant
    paths when the current one cannot be placed.  Each unmerged single is
    visited once, in path-id order."""
    executed = 0
    book = solution.book
    sources = sorted(
        (c for c in solution.cycles if not c.merged),
        key=lambda c: c.legs[0].path_id,
    )
    for cycle in sources:
        if cycle not in solution.cycles:
            continue                    # consumed as a target meanwhile
        current = book.by_id[cycle.legs[0].path_id]
        if current.id in solution.dominant:
            continue
        if _try_mix_cycle(solution, cycle, current):
            executed += 1
    return executed


def _selected_arc_owners(solution: Solution) -> dict[int, list[int]]:
    owners: dict[int, list[int]] = {}
    for path in solution.selected.values():
        if path.mode != OFFERED:
            continue
        for arc_id in path.arcs:
            owners.setdefault(arc_id, []).append(path.id)
    return owners


def _try_mix_cycle(
    solution: Solution, cycle: AssetCycle, current: CommodityPath
) -> bool:
    book = solution.book
    tsn = solution.tsn
    instance = solution.instance
    hold_owners = _selected_arc_owners(solution)
    alternatives = [current] + [
        p
        for p in sorted(book.oc_paths(current.oc_id), key=lambda p: p.id)
        if p.mode == OFFERED and p.id != current.id
    ]
    targets = [
        c
        for c in solution.cycles
        if not c.merged and c is not cycle
        and book.by_id[c.legs[0].path_id].id not in solution.dominant
    ]
    for alt in alternatives:
        hold_positions = [
            idx
            for idx, arc_id in enumerate(alt.arcs)
            if tsn.arcs[arc_id - 1].kind == "hold"
        ]
        for drop_index in hold_positions:
            arc_id = alt.arcs[drop_index]
            dominant_ids = [
                pid
                for pid in hold_owners.get(arc_id, [])
                if book.by_id[pid].oc_id != current.oc_id
            ]
            if not dominant_ids:
                continue
            view, particle_arcs = _particle(alt, drop_index, tsn)
            for target_cycle in targets:
                target = book.by_id[target_cycle.legs[0].path_id]
                merge_type = check_regular_merge(
                    leg_view(target), view, instance
                )
                if merge_type is None:
                    continue
                if _execute_mix(
                    solution, cycle, target_cycle, current, alt,
                    view, particle_arcs, dominant_ids[0],
                ):
                    return True
    return False


def _execute_mix(
    solution: Solution,
    source_cycle: AssetCycle,
    target_cycle: AssetCycle,
    current: CommodityPath,
    alt: CommodityPath,
    particle: LegView,
    particle_arcs: tuple[int, ...],
    dominant_id: int,
) -> bool:
    book = solution.book
    period_count = solution.instance.period_count
    target = book.by_id[target_cycle.legs[0].path_id]
    if alt.id != current.id:
        svc = alt.arcs[alt.lead_holds]
        if solution.svc_registry.get(svc, alt.id) not in (alt.id, current.id):
            return False
    t_o1, t_d1, t_o2, t_d2, _ = adjust_times(
        leg_view(target), particle, period_count
    )
    leg1 = CycleLeg(
        path_id=target.id,
        asset_arcs=target.arcs,
        start=t_o1,
        end=t_d1,
        phys_from=target.origin_physical,
        phys_to=target.dest_physical,
    )
    leg2 = CycleLeg(
        path_id=alt.id,
        asset_arcs=particle_arcs,
        start=t_o2,
        end=t_d2,
        phys_from=particle.phys_from,
        phys_to=particle.phys_to,
    )
    swap = alt.id != current.id
    if swap:
        del solution.svc_registry[current.arcs[current.lead_holds]]
        solution.svc_registry[alt.arcs[alt.lead_holds]] = alt.id
        solution.selected[current.oc_id] = alt
    plan = _plan_repositioning(solution, leg1, leg2)
    if plan is None:
        if swap:
            del solution.svc_registry[alt.arcs[alt.lead_holds]]
            solution.svc_registry[current.arcs[current.lead_holds]] = current.id
            solution.selected[current.oc_id] = current
        return False
    cycle = AssetCycle(legs=[leg1, leg2], rep_plan=plan)
    problems = simulate_cycle(cycle, solution)
    if problems:
        raise CssndError("mix produced an invalid cycle: " + "; ".join(problems))
    for arc_id, _ in plan:
        solution.svc_registry[arc_id] = -1
    solution.cycles = [
        c for c in solution.cycles if c is not source_cycle and c is not target_cycle
    ]
    solution.cycles.append(cycle)
    solution.dominant.add(dominant_id)
    return True


def resolve_capacity(solution: Solution) -> None:
    """Phase V: cover any shortage beyond the owned fleet by leasing or by
    outsourcing single-commodity cycles, whichever increases cost less."""
    instance = solution.instance
    g = instance.costs.fixed_leased
    shortage = len(solution.cycles) - instance.owned_assets
    leased = 0
    while shortage > 0:
        singles = [c for c in solution.cycles if not c.merged]
        conversions = []
        for cycle in singles:
            path = solution.book.by_id[cycle.legs[0].path_id]
            fallback = solution.book.cheapest_outsourced(path.oc_id)
            conversions.append((fallback.cost - path.cost, path.id, cycle, fallback))
        conversions.sort(key=lambda item: (item[0], item[1]))
        can_lease = leased < instance.leasable_assets
        if conversions and (conversions[0][0] < g or not can_lease):
            _, _, cycle, fallback = conversions[0]
            path = solution.book.by_id[cycle.legs[0].path_id]
            del solution.svc_registry[path.arcs[path.lead_holds]]
            solution.selected[path.oc_id] = fallback
            solution.outsourced.add(path.oc_id)
            solution.cycles.remove(cycle)
        elif can_lease:
            leased += 1
        else:
            raise CssndError(
                "asset shortage cannot be resolved: lease budget exhausted "
                "and no single-commodity cycle left to outsource"
            )
        shortage -= 1


def finalize_cycles(solution: Solution) -> None:
    """Assign asset ids and materialize each cycle's arc sequence."""
    instance = solution.instance
    solution.cycles.sort(key=lambda c: min(c.carried_paths))
    survivors: list[AssetCycle] = []
    for cycle in solution.cycles:
        if _materialize(solution, cycle):
            survivors.append(cycle)
        else:
            # no conflict-free return slot; fall back to outsourcing
            path = solution.book.by_id[cycle.legs[0].path_id]
            fallback = solution.book.cheapest_outsourced(path.oc_id)
            del solution.svc_registry[path.arcs[path.lead_holds]]
            solution.selected[path.oc_id] = fallback
            solution.outsourced.add(path.oc_id)
    solution.cycles = survivors
    for index, cycle in enumerate(solution.cycles, start=1):
        cycle.asset_id = index
        cycle.kind = "owned" if index <= instance.owned_assets else "leased"


def _materialize(solution: Solution, cycle: AssetCycle) -> bool:
    """Build the closed arc sequence covering all |T| periods."""
    tsn = solution.tsn
    instance = solution.instance
    period_count = instance.period_count

    if cycle.merged:
        legs = sorted(cycle.legs, key=lambda leg: leg.start)
        plan = list(cycle.rep_plan)
    else:
        # a lone asset runs only its service leg plus the empty return trip;
        # the commodity's own waiting happens on uncapacitated holding arcs
        leg = cycle.legs[0]
        path = solution.book.by_id[leg.path_id]
        svc_arc = tsn.arcs[path.arcs[path.lead_holds] - 1]
        legs = [
            CycleLeg(
                path_id=path.id,
                asset_arcs=(svc_arc.id,),
                start=svc_arc.depart,
                end=svc_arc.depart + svc_arc.duration,
                phys_from=path.origin_physical,
                phys_to=path.dest_physical,
            )
        ]
        plan = _plan_return(solution, legs[0])
        if plan is None:
            return False

    leg_at = {leg.start: leg for leg in legs}
    rep_at = {depart: arc_id for arc_id, depart in plan}
    start = legs[0].start
    cursor = start
    place = legs[0].phys_from
    seq: list[int] = []
    while cursor < start + period_count:
        if cursor in leg_at:
            leg = leg_at.pop(cursor)
            if place != leg.phys_from:
                raise CssndError("asset is not at the pickup terminal")
            seq.extend(leg.asset_arcs)
            cursor = leg.end
            place = leg.phys_to
        elif cursor in rep_at:
            arc = tsn.arcs[rep_at.pop(cursor) - 1]
            if place != arc.phys_from:
                raise CssndError("repositioning departs from the wrong terminal")
            seq.append(arc.id)
            cursor += arc.duration
            place = arc.phys_to
        else:
            seq.append(tsn.holding_arc(place, wrap_period(cursor, period_count)).id)
            cursor += 1

    total = sum(tsn.arcs[a - 1].duration for a in seq)
    if total != period_count or place != legs[0].phys_from or leg_at or rep_at:
        raise CssndError("asset cycle failed to close on itself")
    cycle.arc_seq = tuple(seq)
    cycle.rep_plan = plan
    return True


def _plan_return(solution: Solution, leg: CycleLeg) -> list[tuple[int, int]] | None:
    """Pick the empty return trip of a single-commodity cycle."""
    instance = solution.instance
    tsn = solution.tsn
    period_count = instance.period_count
    if leg.phys_to == leg.phys_from:
        return []
    d = instance.physical.d(leg.phys_to, leg.phys_from)
    for depart in range(leg.end, leg.start + period_count - d + 1):
        arc = tsn.service_arc(
            leg.phys_to, leg.phys_from, wrap_period(depart, period_count)
        )
        if arc.id not in solution.svc_registry:
            solution.svc_registry[arc.id] = -1
            return [(arc.id, depart)]
    return None


def simulate_cycle(cycle: AssetCycle, solution: Solution) -> list[str]:
    """Independent discrete check of a two-leg cycle: chains in window, no
    overlap, repositioning trips physically consistent and on time."""
    period_count = solution.instance.period_count
    book = solution.book
    problems = []
    legs = sorted(cycle.legs, key=lambda leg: leg.start)
    if len(legs) != 2:
        return []
    first, second = legs
    if first.end > second.start:
        problems.append("chains overlap in time")
    if second.end > first.start + period_count:
        problems.append("second chain runs past the cycle close")
    for leg in legs:
        path = book.by_id[leg.path_id]
        tc = book.tc_of(path)
        span = tc.window_span(period_count)
        start_offset = cyclic_span(
            tc.release_period, wrap_period(leg.start, period_count), period_count
        )
        if start_offset + (leg.end - leg.start) > span:
            problems.append(f"path {path.id} violates its delivery window")
    reps = {depart: arc_id for arc_id, depart in cycle.rep_plan}
    position, clock = first.phys_to, first.end
    checkpoints = [(second.phys_from, second.start), (first.phys_from, first.start + period_count)]
    stage_ends = [second, None]
    for (needed_phys, deadline), nxt in zip(checkpoints, stage_ends):
        trips = sorted((t, a) for t, a in reps.items() if clock <= t < deadline)
        for depart, arc_id in trips:
            arc = solution.tsn.arcs[arc_id - 1]
            if arc.phys_from != position or depart < clock:
                problems.append("repositioning leg detached from route")
            position, clock = arc.phys_to, depart + arc.duration
        if position != needed_phys or clock > deadline:
            problems.append("asset cannot reach the next pickup in time")
        if nxt is not None:
            position, clock = nxt.phys_to, nxt.end
    return problems


def solution_to_assignment(solution: Solution) -> dict[str, float]:
    """Translate a finalized schedule into model variable values.

    Asset cycles become y/d values.  Each selected delivery becomes a p
    plus a flow along its chain extended by holding arcs up to the due
    node, which is what flow conservation demands of any delivery that
    arrives early; outsourced deliveries additionally set their s flag.
    """
    from .model import var_d, var_p, var_s, var_x, var_y

    tsn = solution.tsn
    book = solution.book
    period_count = solution.instance.period_count
    fleet = solution.instance.owned_assets + solution.instance.leasable_assets
    values: dict[str, float] = {}
    for cycle in solution.cycles:
        if not cycle.arc_seq:
            raise CssndError("cycles must be finalized before conversion")
        if not 1 <= cycle.asset_id <= fleet:
            raise CssndError(
                "schedule uses more assets than the fleet offers; resolve "
                "capacity before converting"
            )
        values[var_d(cycle.asset_id)] = 1.0
        for arc_id in cycle.arc_seq:
            values[var_y(cycle.asset_id, arc_id)] = 1.0
    for oc_id, path in solution.selected.items():
        tc = book.tc_of(path)
        values[var_p(tc.id)] = 1.0
        flow_arcs = list(path.arcs)
        t = path.arrival_period
        while t != tc.due_period:
            flow_arcs.append(tsn.holding_arc(tc.dest_physical, t).id)
            t = wrap_period(t + 1, period_count)
        for arc_id in flow_arcs:
            values[var_x(tc.id, arc_id)] = tc.volume
            if tsn.arcs[arc_id - 1].kind == "outsourced":
                values[var_s(tc.id, arc_id)] = 1.0
    return values


def run_dmam(
    instance: Instance,
    config: str = CONFIG_ADVANCED,
    tsn: TimeSpaceNetwork | None = None,
) -> tuple[Solution, dict]:
    """Run all phases; returns the solution and a flat report row."""
    if config not in (CONFIG_RANDOM, CONFIG_CUSTOM, CONFIG_ADVANCED):
        raise CssndError(f"unknown configuration '{config}'")
    instance.validate()
    timings = {}
    t0 = time.perf_counter()
    if tsn is None:
        tsn = build_time_space_network(instance.physical, instance.period_count)
    book = PathBook(instance, tsn)
    timings["paths"] = time.perf_counter() - t0

    def log(solution, phase, t_start):
        solution.phase_log.append(
            PhaseStat(
                phase=phase,
                cycles=len(solution.cycles),
                total_cost=solution.total_cost(),
                seconds=time.perf_counter() - t_start,
            )
        )

    t = time.perf_counter()
    solution = construct_initial(instance, book)
    log(solution, "construct", t)

    t = time.perf_counter()
    merge_phase(solution, config)
    log(solution, "merge", t)

    t = time.perf_counter()
    mix_phase(solution)
    log(solution, "mix", t)

    t = time.perf_counter()
    resolve_capacity(solution)
    finalize_cycles(solution)
    log(solution, "capacity", t)

    report = {
        "config": config,
        **solution.summary(),
        "timings": {**timings, **{s.phase: s.seconds for s in solution.phase_log}},
        "cycle_counts": {s.phase: s.cycles for s in solution.phase_log},
    }
    return solution, report

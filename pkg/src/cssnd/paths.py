"""Commodity path enumeration and pricing.

A commodity path carries one TC over exactly one service (or outsourced) leg
plus holding arcs at its endpoint terminals.  The chain always starts at the
TC's release node; waiting before departure is a run of leading holding arcs
and early arrival leaves a gap to the due node.

Pricing note: whichever chain shape is chosen, the flow behind it must still
occupy holding arcs from release until the leg departs and from arrival to
the due node, and each of those periods is billed at the holding rate.  Path
cost therefore charges the full residual window (span - leg duration) of
holding, which makes the heuristic's totals agree with the exact objective
to the last bit.  Shapes of one TC consequently differ in cost only through
their service leg.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import (
    Arc,
    CostParams,
    CssndError,
    TimeSpaceNetwork,
    TransformedCommodity,
    cyclic_span,
    wrap_period,
)

OFFERED = "offered"
OUTSOURCED_MODE = "outsourced"


@dataclass(frozen=True)
class CommodityPath:
    id: int
    tc_id: int
    oc_id: int
    kind: str                   # early | original | tardy
    mode: str                   # offered | outsourced
    arcs: tuple[int, ...]       # arc ids, contiguous chain
    origin_physical: int
    dest_physical: int
    depart_period: int          # chain start == TC release
    arrival_period: int         # chain end, at or before due
    leg_duration: int           # service / outsourced leg length in periods
    lead_holds: int
    trail_holds: int
    busy_periods: int           # cyclic span from chain start to chain end
    cost: float                 # penalty multiplier and residual holding included

    def service_depart(self, period_count: int) -> int:
        return wrap_period(self.depart_period + self.lead_holds, period_count)


def path_cost(
    leg_cost: float,
    holding_cost: float,
    window_span: int,
    leg_duration: int,
    multiplier: float,
) -> float:
    """Price a path: (leg + full residual holding) scaled by the penalty."""
    residual = max(0, window_span - leg_duration)
    return multiplier * (leg_cost + holding_cost * residual)


def enumerate_paths(
    tc: TransformedCommodity,
    tsn: TimeSpaceNetwork,
    costs: CostParams,
    id_start: int = 1,
) -> list[CommodityPath]:
    """All single-leg paths of a TC, offered shapes first, then outsourced.

    Offered shapes are every split (lead, trail) of at most `slack` holding
    arcs around the service leg, enumerated lead-ascending then trail-
    ascending.  When the window is too tight for any offered leg the list
    still ends with an outsourced fallback; a third party can always be paid
    to carry the commodity.
    """
    period_count = tsn.period_count
    span = tc.window_span(period_count)
    d = tsn.service_arc(tc.origin_physical, tc.dest_physical, 1).duration
    multiplier = costs.multiplier(tc.kind)
    paths: list[CommodityPath] = []
    next_id = id_start

    def chain_arcs(lead: int, trail: int, leg: Arc) -> tuple[int, ...]:
        arcs: list[int] = []
        for step in range(lead):
            t = wrap_period(tc.release_period + step, period_count)
            arcs.append(tsn.holding_arc(tc.origin_physical, t).id)
        arcs.append(leg.id)
        for step in range(trail):
            t = wrap_period(leg.arrive + step, period_count)
            arcs.append(tsn.holding_arc(tc.dest_physical, t).id)
        return tuple(arcs)

    if span >= d:
        slack = span - d
        for lead in range(slack + 1):
            depart = wrap_period(tc.release_period + lead, period_count)
            leg = tsn.service_arc(tc.origin_physical, tc.dest_physical, depart)
            leg_cost = costs.service_cost(
                tc.id, tc.origin_physical, tc.dest_physical, depart
            )
            for trail in range(slack - lead + 1):
                paths.append(
                    CommodityPath(
                        id=next_id,
                        tc_id=tc.id,
                        oc_id=tc.parent_id,
                        kind=tc.kind,
                        mode=OFFERED,
                        arcs=chain_arcs(lead, trail, leg),
                        origin_physical=tc.origin_physical,
                        dest_physical=tc.dest_physical,
                        depart_period=tc.release_period,
                        arrival_period=wrap_period(leg.arrive + trail, period_count),
                        leg_duration=d,
                        lead_holds=lead,
                        trail_holds=trail,
                        busy_periods=lead + d + trail,
                        cost=path_cost(
                            leg_cost, costs.holding_cost, span, d, multiplier
                        ),
                    )
                )
                next_id += 1

    leg = tsn.outsourced_arc(tc.origin_physical, tc.dest_physical, tc.release_period)
    if leg is None and span < d:
        raise CssndError(
            f"TC {tc.id}: no offered path fits the window and no outsourced "
            "service exists on its O-D pair"
        )
    if leg is not None:
        leg_cost = costs.outsourced_cost(
            tc.id, tc.origin_physical, tc.dest_physical, tc.release_period
        )
        paths.append(
            CommodityPath(
                id=next_id,
                tc_id=tc.id,
                oc_id=tc.parent_id,
                kind=tc.kind,
                mode=OUTSOURCED_MODE,
                arcs=(leg.id,),
                origin_physical=tc.origin_physical,
                dest_physical=tc.dest_physical,
                depart_period=tc.release_period,
                arrival_period=leg.arrive,
                leg_duration=d,
                lead_holds=0,
                trail_holds=0,
                busy_periods=d,
                cost=path_cost(leg_cost, costs.holding_cost, span, d, multiplier),
            )
        )
    return paths


def validate_path(
    path: CommodityPath, tc: TransformedCommodity, tsn: TimeSpaceNetwork
) -> list[str]:
    """Re-check the chain against its TC: contiguity, window, single leg."""
    problems = []
    period_count = tsn.period_count
    arcs = [next(a for a in tsn.arcs if a.id == arc_id) for arc_id in path.arcs]
    legs = [a for a in arcs if a.kind != "hold"]
    if len(legs) != 1:
        problems.append(f"path {path.id}: {len(legs)} non-holding legs")
    node = (tc.origin_physical, tc.release_period)
    for arc in arcs:
        if (arc.phys_from, arc.depart) != node:
            problems.append(f"path {path.id}: chain breaks at arc {arc.id}")
            break
        node = (arc.phys_to, arc.arrive)
    span = tc.window_span(period_count)
    arrival_offset = cyclic_span(tc.release_period, path.arrival_period, period_count)
    if path.mode == OFFERED and arrival_offset > span:
        problems.append(f"path {path.id}: arrives after the due period")
    if node != (path.dest_physical, path.arrival_period):
        problems.append(f"path {path.id}: arrival field disagrees with chain")
    return problems

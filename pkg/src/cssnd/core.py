"""Domain types: physical network, time-space network, commodities, instances.

Conventions used throughout the package:

* Physical nodes are numbered 1..n, periods 1..|T|.
* The time-space node for (physical p, period t) is (p - 1) * |T| + t.
* Period arithmetic is cyclic: an arc departing period a with duration d
  arrives at ((a - 1 + d) mod |T|) + 1.  An arc is *circular* when its
  arrival period index is smaller than its departure index, i.e. it wraps
  around the end of the planning horizon.
* An arc departing a and arriving b *spans* period t when the activity is in
  progress during t: t in {a, a+1, ..., b-1} taken cyclically.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import rng

HOLD = "hold"
SERVICE = "service"
OUTSOURCED = "outsourced"

EARLY = "early"
ORIGINAL = "original"
TARDY = "tardy"
KIND_ORDER = (EARLY, ORIGINAL, TARDY)
KIND_SHIFT = {EARLY: -1, ORIGINAL: 0, TARDY: +1}

# Cost distributions tied to the instance file contract: with a routing seed,
# service legs price at U[0.6, 1.0] and outsourced legs at 25 + U[1.2, 2.0]
# per (arc, transformed commodity).
SERVICE_COST_LO, SERVICE_COST_HI = 0.6, 1.0
OUTSOURCED_COST_BASE = 25.0
OUTSOURCED_COST_LO, OUTSOURCED_COST_HI = 1.2, 2.0


class CssndError(Exception):
    """Domain error: invalid instance data or unusable arguments."""


def wrap_period(period: int, period_count: int) -> int:
    """Map an arbitrary integer onto the cyclic range 1..period_count."""
    return (period - 1) % period_count + 1


def cyclic_span(start: int, end: int, period_count: int) -> int:
    """Number of periods from start to end moving forward cyclically."""
    return (end - start) % period_count


def ts_node(physical: int, period: int, period_count: int) -> int:
    """Time-space node id for (physical, period); bijective and 1-based."""
    if period < 1 or period > period_count:
        raise CssndError(f"period {period} outside 1..{period_count}")
    if physical < 1:
        raise CssndError(f"physical node {physical} must be >= 1")
    return (physical - 1) * period_count + period


def ts_decode(node: int, period_count: int) -> tuple[int, int]:
    """Inverse of ts_node."""
    return (node - 1) // period_count + 1, (node - 1) % period_count + 1


@dataclass(frozen=True)
class Arc:
    """One time-space arc. `duration` is in periods, `capacity` may be inf."""

    id: int
    kind: str                  # hold | service | outsourced
    phys_from: int
    phys_to: int
    depart: int                # period index 1..|T|
    arrive: int                # period index 1..|T|
    duration: int
    capacity: float
    circular: bool

    def spans(self, t: int, period_count: int) -> bool:
        """True when the activity is under way during period t."""
        return cyclic_span(self.depart, t, period_count) < self.duration


@dataclass(frozen=True)
class PhysicalNetwork:
    node_count: int
    distance: tuple[tuple[int, ...], ...]   # d[i][j], 0-indexed, diagonal 0

    def d(self, i: int, j: int) -> int:
        """Distance in periods between physical nodes i and j (1-based)."""
        return self.distance[i - 1][j - 1]

    def total_distance(self) -> int:
        """Sum of d over ordered pairs, the distance-index statistic."""
        return sum(
            self.distance[i][j]
            for i in range(self.node_count)
            for j in range(self.node_count)
            if i != j
        )


def validate_distances(physical: PhysicalNetwork, period_count: int) -> list[str]:
    """Report every violation of the return-trip bound or triangle inequality.

    Returns an empty list when the matrix is usable.
    """
    n = physical.node_count
    dmat = physical.distance
    problems: list[str] = []
    if len(dmat) != n or any(len(row) != n for row in dmat):
        return [f"distance matrix is not {n}x{n}"]
    bound = period_count // 2
    for i in range(n):
        if dmat[i][i] != 0:
            problems.append(f"d[{i + 1}][{i + 1}] = {dmat[i][i]}, diagonal must be 0")
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            if dmat[i][j] < 1:
                problems.append(f"d[{i + 1}][{j + 1}] = {dmat[i][j]} < 1")
            if dmat[i][j] > bound:
                problems.append(
                    f"d[{i + 1}][{j + 1}] = {dmat[i][j]} exceeds "
                    f"floor(|T|/2) = {bound}, no return trip fits the horizon"
                )
    for i in range(n):
        for j in range(n):
            for k in range(n):
                if i != j and j != k and i != k:
                    if dmat[i][k] > dmat[i][j] + dmat[j][k]:
                        problems.append(
                            f"triangle violation: d[{i + 1}][{k + 1}] = {dmat[i][k]}"
                            f" > d[{i + 1}][{j + 1}] + d[{j + 1}][{k + 1}]"
                            f" = {dmat[i][j] + dmat[j][k]}"
                        )
    return problems


@dataclass
class TimeSpaceNetwork:
    """Complete holding/service network over the cyclic horizon.

    Immutable after construction.  `t1`, `t2`, `t3` partition the periods:
    t2 holds origins of circular arcs, t3 their destinations, t1 the rest.
    """

    node_count: int            # physical nodes
    period_count: int
    arcs: list[Arc] = field(default_factory=list)
    holding_arcs: list[Arc] = field(default_factory=list)
    service_arcs: list[Arc] = field(default_factory=list)
    outsourced_arcs: list[Arc] = field(default_factory=list)
    t1: frozenset[int] = frozenset()
    t2: frozenset[int] = frozenset()
    t3: frozenset[int] = frozenset()
    _service_index: dict = field(default_factory=dict, repr=False)
    _hold_index: dict = field(default_factory=dict, repr=False)
    _outsourced_index: dict = field(default_factory=dict, repr=False)

    @property
    def ts_node_count(self) -> int:
        return self.node_count * self.period_count

    def node(self, physical: int, period: int) -> int:
        return ts_node(physical, period, self.period_count)

    def arc_tail(self, arc: Arc) -> int:
        return self.node(arc.phys_from, arc.depart)

    def arc_head(self, arc: Arc) -> int:
        return self.node(arc.phys_to, arc.arrive)

    def service_arc(self, i: int, j: int, depart: int) -> Arc:
        return self._service_index[(i, j, depart)]

    def holding_arc(self, i: int, depart: int) -> Arc:
        return self._hold_index[(i, depart)]

    def outsourced_arc(self, i: int, j: int, depart: int) -> Arc | None:
        return self._outsourced_index.get((i, j, depart))

    def arcs_spanning(self, t: int) -> list[Arc]:
        return [a for a in self.arcs if a.spans(t, self.period_count)]


def build_time_space_network(
    physical: PhysicalNetwork,
    period_count: int,
    service_capacity: float = 1.0,
    outsourced_arcs_spec: list[tuple[int, int, int]] | None = None,
) -> TimeSpaceNetwork:
    """Build the complete time-space network over `physical`.

    One service arc per ordered physical pair and departure period, one
    holding arc per node and period, and outsourced arcs either mirroring the
    service arcs (default) or restricted to the (i, j, depart) triples in
    `outsourced_arcs_spec`.  Outsourced capacity is effectively unlimited;
    the third party absorbs whatever volume is sent.
    """
    problems = validate_distances(physical, period_count)
    if problems:
        raise CssndError("invalid distance matrix: " + "; ".join(problems[:3]))

    tsn = TimeSpaceNetwork(node_count=physical.node_count, period_count=period_count)
    arcs = tsn.arcs
    next_id = 1

    def add(kind, i, j, depart, duration, capacity) -> Arc:
        nonlocal next_id
        arrive = wrap_period(depart + duration, period_count)
        arc = Arc(
            id=next_id,
            kind=kind,
            phys_from=i,
            phys_to=j,
            depart=depart,
            arrive=arrive,
            duration=duration,
            capacity=capacity,
            circular=arrive < depart,
        )
        next_id += 1
        arcs.append(arc)
        return arc

    for i in range(1, physical.node_count + 1):
        for t in range(1, period_count + 1):
            arc = add(HOLD, i, i, t, 1, float("inf"))
            tsn.holding_arcs.append(arc)
            tsn._hold_index[(i, t)] = arc

    for i in range(1, physical.node_count + 1):
        for j in range(1, physical.node_count + 1):
            if i == j:
                continue
            for t in range(1, period_count + 1):
                arc = add(SERVICE, i, j, t, physical.d(i, j), service_capacity)
                tsn.service_arcs.append(arc)
                tsn._service_index[(i, j, t)] = arc

    if outsourced_arcs_spec is None:
        spec = [
            (i, j, t)
            for i in range(1, physical.node_count + 1)
            for j in range(1, physical.node_count + 1)
            if i != j
            for t in range(1, period_count + 1)
        ]
    else:
        spec = list(outsourced_arcs_spec)
    for i, j, t in spec:
        arc = add(OUTSOURCED, i, j, t, physical.d(i, j), float("inf"))
        tsn.outsourced_arcs.append(arc)
        tsn._outsourced_index[(i, j, t)] = arc

    origins = frozenset(a.depart for a in arcs if a.circular)
    destinations = frozenset(a.arrive for a in arcs if a.circular)
    tsn.t2 = origins
    tsn.t3 = destinations - origins
    tsn.t1 = frozenset(range(1, period_count + 1)) - tsn.t2 - tsn.t3
    return tsn


@dataclass(frozen=True)
class OriginalCommodity:
    id: int
    origin_physical: int
    dest_physical: int
    release_period: int
    due_period: int
    volume: float = 1.0


@dataclass(frozen=True)
class TransformedCommodity:
    """Early / original / tardy delivery variant of an original commodity."""

    id: int
    parent_id: int
    kind: str                  # early | original | tardy
    origin_physical: int
    dest_physical: int
    release_period: int
    due_period: int
    volume: float

    def origin_node(self, period_count: int) -> int:
        return ts_node(self.origin_physical, self.release_period, period_count)

    def dest_node(self, period_count: int) -> int:
        return ts_node(self.dest_physical, self.due_period, period_count)

    def window_span(self, period_count: int) -> int:
        return cyclic_span(self.release_period, self.due_period, period_count)


@dataclass(frozen=True)
class CostParams:
    fixed_owned: float = 25.0          # per owned asset used
    fixed_leased: float = 50.0         # per leased asset
    holding_cost: float = 0.15         # per holding arc and flow unit
    penalty_early: float = 1.2         # multiplier on early deliveries
    penalty_tardy: float = 1.2         # multiplier on tardy deliveries
    routing_seed: int | None = None
    routing_table: dict | None = None  # {(kind, i, j, depart, tc_id): cost}

    def multiplier(self, kind: str) -> float:
        if kind == EARLY:
            return self.penalty_early
        if kind == TARDY:
            return self.penalty_tardy
        return 1.0

    def service_cost(self, tc_id: int, i: int, j: int, depart: int) -> float:
        """Per-unit routing cost of a service arc for one TC (no penalty)."""
        if self.routing_table is not None:
            return self.routing_table[(SERVICE, i, j, depart, tc_id)]
        if self.routing_seed is None:
            raise CssndError("cost params carry neither routing seed nor table")
        u = rng.unit_at(self.routing_seed, "svc", i, j, depart, tc_id)
        return SERVICE_COST_LO + (SERVICE_COST_HI - SERVICE_COST_LO) * u

    def outsourced_cost(self, tc_id: int, i: int, j: int, depart: int) -> float:
        if self.routing_table is not None:
            return self.routing_table[(OUTSOURCED, i, j, depart, tc_id)]
        if self.routing_seed is None:
            raise CssndError("cost params carry neither routing seed nor table")
        u = rng.unit_at(self.routing_seed, "out", i, j, depart, tc_id)
        return OUTSOURCED_COST_BASE + OUTSOURCED_COST_LO + (
            OUTSOURCED_COST_HI - OUTSOURCED_COST_LO
        ) * u


@dataclass(frozen=True)
class Instance:
    physical: PhysicalNetwork
    period_count: int
    commodities: tuple[OriginalCommodity, ...]
    owned_assets: int
    leasable_assets: int
    costs: CostParams
    seed: int = 0

    def validate(self) -> None:
        if self.owned_assets < 1:
            raise CssndError("at least one owned asset is required")
        if self.leasable_assets < 0:
            raise CssndError("leasable asset count cannot be negative")
        problems = validate_distances(self.physical, self.period_count)
        if problems:
            raise CssndError("invalid distances: " + "; ".join(problems[:3]))
        seen_pairs = set()
        for oc in self.commodities:
            if oc.origin_physical == oc.dest_physical:
                raise CssndError(f"commodity {oc.id} has origin == destination")
            for p in (oc.release_period, oc.due_period):
                if not 1 <= p <= self.period_count:
                    raise CssndError(f"commodity {oc.id} period {p} out of range")
            if oc.volume <= 0:
                raise CssndError(f"commodity {oc.id} has non-positive volume")
            seen_pairs.add((oc.origin_physical, oc.dest_physical))


def expand_commodities(
    instance: Instance,
) -> tuple[list[TransformedCommodity], dict[int, tuple[int, int, int]]]:
    """Expand each original commodity into its early/original/tardy variants.

    TC ids follow the tabular convention: commodity k owns ids 3k-2 (early),
    3k-1 (original), 3k (tardy).  Returns the TC list and the incidence map
    from original id to its three TC ids.
    """
    period_count = instance.period_count
    tcs: list[TransformedCommodity] = []
    incidence: dict[int, tuple[int, int, int]] = {}
    for oc in instance.commodities:
        ids = []
        for offset, kind in enumerate(KIND_ORDER):
            shift = KIND_SHIFT[kind]
            tc = TransformedCommodity(
                id=3 * (oc.id - 1) + offset + 1,
                parent_id=oc.id,
                kind=kind,
                origin_physical=oc.origin_physical,
                dest_physical=oc.dest_physical,
                release_period=wrap_period(oc.release_period + shift, period_count),
                due_period=wrap_period(oc.due_period + shift, period_count),
                volume=oc.volume,
            )
            tcs.append(tc)
            ids.append(tc.id)
        incidence[oc.id] = tuple(ids)
    return tcs, incidence

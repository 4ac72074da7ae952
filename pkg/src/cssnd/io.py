"""Instance file format.

A single JSON document with canonical field names:

    n_physical, periods, distance[][],
    commodities[{id, origin, dest, release, due, volume}],
    owned, leasable,
    costs{f, g, holding, r_e, r_l, routing_seed | routing_table},
    seed

`routing_table`, when present instead of `routing_seed`, is a list of
[kind, i, j, depart, tc, cost] rows with kind "service" or "outsourced".
Serialization is deterministic: same instance, same bytes.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

from .core import (
    CostParams,
    CssndError,
    Instance,
    OriginalCommodity,
    PhysicalNetwork,
)


def instance_to_dict(instance: Instance) -> dict:
    costs: dict = {
        "f": instance.costs.fixed_owned,
        "g": instance.costs.fixed_leased,
        "holding": instance.costs.holding_cost,
        "r_e": instance.costs.penalty_early,
        "r_l": instance.costs.penalty_tardy,
    }
    if instance.costs.routing_table is not None:
        costs["routing_table"] = [
            [kind, i, j, depart, tc, cost]
            for (kind, i, j, depart, tc), cost in sorted(
                instance.costs.routing_table.items()
            )
        ]
    else:
        costs["routing_seed"] = instance.costs.routing_seed
    return {
        "n_physical": instance.physical.node_count,
        "periods": instance.period_count,
        "distance": [list(row) for row in instance.physical.distance],
        "commodities": [
            {
                "id": oc.id,
                "origin": oc.origin_physical,
                "dest": oc.dest_physical,
                "release": oc.release_period,
                "due": oc.due_period,
                "volume": oc.volume,
            }
            for oc in instance.commodities
        ],
        "owned": instance.owned_assets,
        "leasable": instance.leasable_assets,
        "costs": costs,
        "seed": instance.seed,
    }


def instance_from_dict(data: dict) -> Instance:
    try:
        costs_data = data["costs"]
        routing_table = None
        if "routing_table" in costs_data:
            routing_table = {
                (kind, i, j, depart, tc): cost
                for kind, i, j, depart, tc, cost in costs_data["routing_table"]
            }
        costs = CostParams(
            fixed_owned=costs_data["f"],
            fixed_leased=costs_data["g"],
            holding_cost=costs_data["holding"],
            penalty_early=costs_data["r_e"],
            penalty_tardy=costs_data["r_l"],
            routing_seed=costs_data.get("routing_seed"),
            routing_table=routing_table,
        )
        instance = Instance(
            physical=PhysicalNetwork(
                node_count=data["n_physical"],
                distance=tuple(tuple(row) for row in data["distance"]),
            ),
            period_count=data["periods"],
            commodities=tuple(
                OriginalCommodity(
                    id=c["id"],
                    origin_physical=c["origin"],
                    dest_physical=c["dest"],
                    release_period=c["release"],
                    due_period=c["due"],
                    volume=c.get("volume", 1.0),
                )
                for c in data["commodities"]
            ),
            owned_assets=data["owned"],
            leasable_assets=data["leasable"],
            costs=costs,
            seed=data.get("seed", 0),
        )
    except (KeyError, TypeError) as exc:
        raise CssndError(f"malformed instance document: {exc}") from exc
    instance.validate()
    return instance


def dumps_instance(instance: Instance) -> str:
    return json.dumps(instance_to_dict(instance), indent=2) + "\n"


def save_instance(instance: Instance, path: str | Path) -> None:
    Path(path).write_text(dumps_instance(instance))


def load_instance(path: str | Path) -> Instance:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise CssndError(f"{path}: not valid JSON ({exc})") from exc
    return instance_from_dict(data)


def instance_digest(instance: Instance) -> str:
    """Stable content hash of an instance, independent of file layout."""
    return hashlib.sha256(dumps_instance(instance).encode("utf-8")).hexdigest()

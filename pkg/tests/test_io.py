"""Instance file round-trips and the canonical field contract."""

from __future__ import annotations

import json

import pytest

from cssnd.core import CssndError
from cssnd.instgen import generate_instance
from cssnd.io import (
    dumps_instance,
    instance_digest,
    instance_from_dict,
    instance_to_dict,
    load_instance,
    save_instance,
)
from tests.conftest import make_sample_instance


def test_round_trip_preserves_instance(tmp_path):
    original = generate_instance("medium", 25, seed=31)
    path = tmp_path / "i.json"
    save_instance(original, path)
    loaded = load_instance(path)
    assert loaded == original
    assert instance_digest(loaded) == instance_digest(original)


def test_canonical_field_names():
    data = instance_to_dict(make_sample_instance())
    assert set(data) == {
        "n_physical", "periods", "distance", "commodities",
        "owned", "leasable", "costs", "seed",
    }
    assert set(data["commodities"][0]) == {
        "id", "origin", "dest", "release", "due", "volume",
    }
    assert set(data["costs"]) == {
        "f", "g", "holding", "r_e", "r_l", "routing_seed",
    }


def test_explicit_routing_table_round_trip(tmp_path):
    instance = make_sample_instance()
    data = instance_to_dict(instance)
    data["costs"].pop("routing_seed")
    data["costs"]["routing_table"] = [
        ["service", 1, 2, 1, 2, 0.75],
        ["outsourced", 1, 2, 1, 2, 26.4],
    ]
    loaded = instance_from_dict(data)
    assert loaded.costs.service_cost(2, 1, 2, 1) == 0.75
    assert loaded.costs.outsourced_cost(2, 1, 2, 1) == 26.4
    path = tmp_path / "table.json"
    save_instance(loaded, path)
    again = load_instance(path)
    assert again.costs.routing_table == loaded.costs.routing_table


def test_malformed_documents_are_domain_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(CssndError):
        load_instance(bad)
    with pytest.raises(CssndError):
        instance_from_dict({"n_physical": 3})


def test_serialization_is_stable():
    instance = generate_instance("small", 10, seed=3)
    assert dumps_instance(instance) == dumps_instance(instance)
    assert json.loads(dumps_instance(instance))["seed"] == 3

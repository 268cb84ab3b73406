import json

import numpy as np
import pytest

from staticrm.config import build_instance, load_instance, parse_distribution
from staticrm.errors import ValidationError
from staticrm.fixtures import load_fixture
from staticrm.lp import solve_upper_bound
from staticrm.model import MixtureMNL, RankedList


def two_price_config(**extra):
    cfg = {
        "name": "tp",
        "items": 1,
        "prices": [1.0, 2.0],  # unsorted on purpose
        "horizon": 3,
        "inventories": [2],
        "assortment_family": {"type": "all"},
        "choice_model": {"variant": "table", "coupling": "single",
                         "product_demands": [[{"product": [0, 1], "demand": 1 / 3},
                                              {"product": [0, 0], "demand": 1.0}]]},
    }
    cfg.update(extra)
    return cfg


def test_product_demands_table_matches_fixture():
    inst = build_instance(two_price_config())
    ref = load_fixture("two-price").instance
    assert inst.prices == pytest.approx([2.0, 1.0])
    assert inst.stationary and inst.name == "tp"
    for j in range(2):
        assert inst.q(0, [(0, j)]) == pytest.approx(ref.q(0, [(0, j)]))
    assert solve_upper_bound(inst).objective == pytest.approx(2.5)


def test_per_assortment_table():
    cfg = two_price_config()
    cfg["choice_model"] = {"variant": "table", "periods": [
        [{"assortment": [[0, 1]], "demand": [0.3]}, {"assortment": [[0, 0]], "demand": [{"kind": "point", "value": 1.0}]}],
        [{"assortment": [[0, 1]], "demand": [0.1]}, {"assortment": [[0, 0]], "demand": [0.5]}],
        [{"assortment": [[0, 1]], "demand": [0.2]}, {"assortment": [[0, 0]], "demand": [0.9]}],
    ]}
    inst = build_instance(cfg)
    assert not inst.stationary
    assert inst.q(1, [(0, 0)]) == pytest.approx([0.1])
    assert inst.q(2, [(0, 1)]) == pytest.approx([0.9])


def test_per_assortment_table_needs_one_law_per_product():
    cfg = two_price_config()
    cfg["choice_model"] = {"variant": "table", "periods": [[{"assortment": [[0, 1]], "demand": [0.3, 0.2]}]]}
    with pytest.raises(ValidationError, match="one demand law"):
        build_instance(cfg)


def test_mixture_mnl():
    cfg = {
        "items": 2, "prices": [5.0, 3.0], "horizon": 4, "inventories": [1, 2],
        "assortment_family": {"type": "capacity", "k": 1},
        "choice_model": {"variant": "mixture-mnl", "segments": [
            {"means": 0.5, "no_purchase": 1.0, "attractions": [{"product": [0, 0], "weight": 2.0}]},
            {"means": [0.2], "attractions": [{"product": [1, 1], "weight": 1.0}]},
        ]},
    }
    inst = build_instance(cfg)
    assert isinstance(inst.choice, MixtureMNL)
    assert all(len(s) <= 1 for s in inst.family)
    assert inst.q(0, [(0, 0)]) == pytest.approx([0.5 * 2 / 3])


def test_ranked_list():
    cfg = {
        "items": 2, "prices": [1.0, 0.5], "horizon": 2, "inventories": [1, 1],
        "assortment_family": {"type": "explicit", "assortments": [[[0, 0], [1, 1]]], "close": True},
        "choice_model": {"variant": "ranked-list", "lists": [
            {"prob": 0.5, "order": [[1, 1], [0, 0]]}, {"prob": 0.5, "order": []}]},
    }
    inst = build_instance(cfg)
    assert isinstance(inst.choice, RankedList)
    assert len(inst.family) == 4
    assert inst.q(0, [(0, 0), (1, 1)]) == pytest.approx([0.0, 0.5])


def test_allowed_prices():
    cfg = two_price_config(assortment_family={"type": "all", "allowed": {"0": [1]}})
    inst = build_instance(cfg)
    # position 1 in the config's price list is 2.0, the highest price after sorting
    assert [tuple(s) for s in inst.family] == [(), ((0, 0),)]


def test_load_instance_roundtrip(tmp_path):
    path = tmp_path / "inst.json"
    path.write_text(json.dumps(two_price_config()))
    assert load_instance(str(path)).horizon == 3
    path.write_text("{not json")
    with pytest.raises(ValidationError, match="JSON"):
        load_instance(str(path))


@pytest.mark.parametrize("spec,mean", [
    (0.25, 0.25),
    ({"kind": "bernoulli", "mean": 0.2, "scale": 0.5}, 0.2),
    ({"kind": "point", "value": 0.4}, 0.4),
    ({"kind": "finite", "support": [[0, 0.5], [0.6, 0.5]]}, 0.3),
    ({"kind": "binomial", "n": 4, "beta": 0.25}, 0.25),  # Bin(n, beta) / n
])
def test_distribution_kinds(spec, mean):
    assert parse_distribution(spec).mean == pytest.approx(mean)


def test_truncated_exponential_kind():
    d = parse_distribution({"kind": "truncated-exponential", "lambda": 2.0})
    assert 0 < d.mean < 0.5


@pytest.mark.parametrize("bad", [{"kind": "gamma"}, {"kind": "binomial", "n": 3}, "text"])
def test_distribution_errors(bad):
    with pytest.raises(ValidationError):
        parse_distribution(bad)


@pytest.mark.parametrize("mutate,match", [
    (lambda c: c.pop("horizon"), "misses"),
    (lambda c: c.update(prices=[1.0, 1.0]), "duplicate"),
    (lambda c: c.update(inventories=[0]), "at least 1"),
    (lambda c: c.update(inventories=[1, 1]), "one inventory"),
    (lambda c: c["choice_model"].update(variant="magic"), "variant"),
    (lambda c: c["choice_model"]["product_demands"][0][0].update(product=[3, 0]), "outside"),
    (lambda c: c["choice_model"]["product_demands"][0][0].update(product="x"), "item, price"),
])
def test_config_errors(mutate, match):
    cfg = two_price_config()
    mutate(cfg)
    with pytest.raises(ValidationError, match=match):
        build_instance(cfg)


def test_duplicate_product_in_assortment():
    cfg = two_price_config(assortment_family={"type": "explicit", "assortments": [[[0, 0], [0, 0]]]})
    with pytest.raises(ValidationError, match="twice"):
        build_instance(cfg)


def test_same_item_twice_needs_multi_price():
    cfg = two_price_config(assortment_family={"type": "explicit", "assortments": [[[0, 0], [0, 1]]], "close": True})
    with pytest.raises(ValidationError, match="item twice"):
        build_instance(cfg)


def test_schema_document_snippets_build():
    import pathlib
    import re

    doc = (pathlib.Path(__file__).parents[1] / "docs" / "instance_schema.md").read_text()
    snippets = [json.loads(b) for b in re.findall(r"```json\n(.*?)```", doc, re.S)]
    one = {"items": 1, "prices": [5, 3], "horizon": 3, "inventories": [1], "assortment_family": {"type": "all"}}
    two = {**one, "items": 2, "inventories": [1, 2]}
    pair = {**two, "assortment_family": {"type": "explicit", "assortments": [[[0, 0], [1, 0]]], "close": True}}
    assert len(snippets) == 4
    for choice, base in zip(snippets, (one, pair, two, two)):
        assert build_instance({**base, "choice_model": choice}).horizon == 3

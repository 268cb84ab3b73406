"""Build instances from JSON descriptions (schema in docs/instance_schema.md)."""

from __future__ import annotations

import json
from collections.abc import Mapping

import numpy as np

from .errors import ValidationError
from .model import (
    DemandDistribution, Instance, MixtureMNL, Product, RankedList, TableChoice,
    enumerate_assortments,
)

REQUIRED_KEYS = ("items", "prices", "horizon", "inventories", "assortment_family", "choice_model")


def parse_distribution(spec) -> DemandDistribution:
    """A number is a Bernoulli mean; otherwise a dict tagged by ``kind``."""
    if isinstance(spec, (int, float)):
        return DemandDistribution.bernoulli(float(spec))
    if not isinstance(spec, Mapping):
        raise ValidationError(f"cannot read a demand distribution from {spec!r}")
    kind = spec.get("kind", "bernoulli")
    try:
        if kind == "bernoulli":
            return DemandDistribution.bernoulli(float(spec["mean"]), float(spec.get("scale", 1.0)))
        if kind == "point":
            return DemandDistribution.point(float(spec["value"]))
        if kind == "finite":
            return DemandDistribution.finite([(float(v), float(p)) for v, p in spec["support"]])
        if kind == "binomial":
            return DemandDistribution.binomial(int(spec["n"]), float(spec["beta"]))
        if kind == "truncated-exponential":
            return DemandDistribution.truncated_exponential(float(spec["lambda"]), int(spec.get("grid", 64)))
    except KeyError as exc:
        raise ValidationError(f"distribution of kind {kind!r} misses field {exc}") from None
    raise ValidationError(f"unknown distribution kind {kind!r}")


class _Products:
    """Maps config product references ``[item, price_position]`` to sorted-price products."""

    def __init__(self, n_items: int, remap: list):
        self.n_items = n_items
        self.remap = remap

    def __call__(self, ref) -> Product:
        try:
            i, j = int(ref[0]), int(ref[1])
        except (TypeError, ValueError, IndexError):
            raise ValidationError(f"product reference {ref!r} must be [item, price]") from None
        if not 0 <= i < self.n_items or not 0 <= j < len(self.remap):
            raise ValidationError(f"product reference {ref!r} outside the item/price grid")
        return Product(i, self.remap[j])

    def assortment(self, refs) -> tuple:
        s = [self(r) for r in refs]
        if len(set(s)) != len(s):
            raise ValidationError(f"assortment {refs!r} lists a product twice")
        return tuple(sorted(s))


def _family(spec, n_items, n_prices, prod: _Products):
    kind = spec.get("type", "all")
    multi = bool(spec.get("allow_multi_price", False))
    if kind == "explicit":
        sets = [prod.assortment(s) for s in spec["assortments"]]
        for s in sets:
            items = [p.item for p in s]
            if not multi and len(set(items)) != len(items):
                raise ValidationError(f"assortment {s} contains an item twice")
        return enumerate_assortments(n_items, n_prices, "explicit", assortments=sets,
                                     allow_multi_price=multi, close=bool(spec.get("close", False)))
    allowed = None
    if "allowed" in spec:
        allowed = {int(i): [prod((int(i), j)).price for j in js] for i, js in spec["allowed"].items()}
    return enumerate_assortments(n_items, n_prices, kind, k=spec.get("k"), allowed=allowed)


def _choice(spec, family, prod: _Products, horizon: int):
    variant = spec.get("variant")
    if variant == "table":
        coupling = spec.get("coupling", "single")
        if "product_demands" in spec:
            periods = [{prod(e["product"]): parse_distribution(e["demand"]) for e in period}
                       for period in spec["product_demands"]]
            return TableChoice.from_product_demands(periods, family, coupling)
        tables = []
        for period in spec["periods"]:
            tab = {}
            for entry in period:
                s = prod.assortment(entry["assortment"])
                demand = entry["demand"]
                if len(demand) != len(entry["assortment"]):
                    raise ValidationError(f"assortment {entry['assortment']} needs one demand law per product")
                laws = {prod(r): parse_distribution(d) for r, d in zip(entry["assortment"], demand)}
                tab[s] = laws
            tables.append(tab)
        return TableChoice(tuple(tables), coupling)
    if variant == "mixture-mnl":
        means, atts, v0 = [], [], []
        for seg in spec["segments"]:
            m = seg["means"]
            means.append(tuple(float(x) for x in (m if isinstance(m, list) else [m])))
            atts.append({prod(a["product"]): float(a["weight"]) for a in seg["attractions"]})
            v0.append(float(seg.get("no_purchase", 0.0)))
        return MixtureMNL(tuple(means), tuple(atts), tuple(v0))
    if variant == "ranked-list":
        lists = tuple((float(e["prob"]), tuple(prod(r) for r in e["order"])) for e in spec["lists"])
        return RankedList(lists)
    raise ValidationError(f"unknown choice model variant {variant!r}")


def build_instance(config: Mapping) -> Instance:
    """Validate a parsed JSON description and build the ``Instance``.

    Prices may be listed in any order; they are sorted decreasingly and
    every product reference ``[item, k]`` (``k`` a position in the given
    price list) is remapped accordingly.
    """
    missing = [k for k in REQUIRED_KEYS if k not in config]
    if missing:
        raise ValidationError(f"instance description misses keys: {', '.join(missing)}")
    items = config["items"]
    n_items = len(items) if isinstance(items, list) else int(items)
    prices = [float(p) for p in config["prices"]]
    if len(set(prices)) != len(prices):
        raise ValidationError("duplicate prices")
    order = sorted(range(len(prices)), key=lambda j: -prices[j])
    remap = [0] * len(prices)
    for new, old in enumerate(order):
        remap[old] = new
    prod = _Products(n_items, remap)
    inventories = np.array([float(b) for b in config["inventories"]])
    if inventories.size != n_items:
        raise ValidationError("need one inventory per item")
    if (inventories < 1).any():
        raise ValidationError("every inventory must be at least 1")
    horizon = int(config["horizon"])
    family = _family(config["assortment_family"], n_items, len(prices), prod)
    choice = _choice(config["choice_model"], family, prod, horizon)
    stationary = bool(config.get("stationary", choice.stationary))
    return Instance(np.array(sorted(prices, reverse=True)), inventories, horizon, family, choice,
                    stationary=stationary, name=str(config.get("name", "")))


def load_instance(path: str) -> Instance:
    try:
        with open(path) as fh:
            return build_instance(json.load(fh))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON ({exc})") from None

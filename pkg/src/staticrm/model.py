"""Domain types: products, assortment families, demand laws and choice models.

Indices are 0-based throughout: item ``i`` in ``range(n_items)`` and price
index ``j`` in ``range(m)`` with ``prices[0] > prices[1] > ...``.

A choice model answers two questions for a period ``t`` and an assortment
``S`` (a sorted tuple of products):

* ``means(t, S)``: the expected quantity demanded of each product of ``S``;
* ``atoms(t, S)``: the joint demand law as a finite list of
  ``(probability, demand vector)`` pairs.

Everything downstream (LPs, exact evaluation, simulation) is written against
these two methods.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .errors import ValidationError

PROB_TOL = 1e-12


class Product(NamedTuple):
    item: int
    price: int


Assortment = tuple  # sorted tuple of Product


def as_assortment(products: Iterable) -> Assortment:
    return tuple(sorted(Product(int(i), int(j)) for i, j in products))


# ---------------------------------------------------------------------------
# Assortment families


@dataclass(frozen=True, eq=False)
class AssortmentFamily:
    """Downward-closed family of feasible assortments in canonical order.

    Canonical order is lexicographic on the sorted product tuples, so the
    empty assortment is always at index 0.
    """

    assortments: tuple
    allow_multi_price: bool = False
    _index: dict = field(init=False, repr=False)

    def __post_init__(self):
        canon = sorted({as_assortment(s) for s in self.assortments})
        if len(canon) != len(self.assortments):
            raise ValidationError("family lists an assortment twice")
        object.__setattr__(self, "assortments", tuple(canon))
        object.__setattr__(self, "_index", {s: k for k, s in enumerate(canon)})
        if () not in self._index:
            raise ValidationError("family must contain the empty assortment")
        for s in canon:
            items = [p.item for p in s]
            if len(set(s)) != len(s):
                raise ValidationError(f"assortment {s} repeats a product")
            if not self.allow_multi_price and len(set(items)) != len(items):
                raise ValidationError(f"assortment {s} offers an item at two prices")
            for p in s:
                smaller = tuple(q for q in s if q != p)
                if smaller not in self._index:
                    raise ValidationError(
                        f"family is not downward-closed: {smaller} missing below {s}"
                    )

    def __len__(self):
        return len(self.assortments)

    def __iter__(self):
        return iter(self.assortments)

    def __getitem__(self, k):
        return self.assortments[k]

    def __contains__(self, s):
        return as_assortment(s) in self._index

    def index(self, s) -> int:
        try:
            return self._index[as_assortment(s)]
        except KeyError:
            raise ValidationError(f"assortment {tuple(s)} is not in the family") from None

    @property
    def products(self) -> tuple:
        return tuple(sorted({p for s in self.assortments for p in s}))

    def restrict(self, k: int, keep_items) -> int:
        """Index of assortment ``k`` with products of items outside ``keep_items`` removed."""
        s = self.assortments[k]
        return self._index[tuple(p for p in s if p.item in keep_items)]


def downward_closure(assortments: Iterable) -> list:
    out = {()}
    for s in assortments:
        s = as_assortment(s)
        for r in range(len(s) + 1):
            out.update(itertools.combinations(s, r))
    return sorted(out)


def enumerate_assortments(
    n_items: int,
    n_prices: int,
    constraint: str = "all",
    *,
    k: int | None = None,
    assortments: Sequence | None = None,
    allowed: Mapping[int, Sequence[int]] | None = None,
    allow_multi_price: bool = False,
    close: bool = False,
) -> AssortmentFamily:
    """Build a feasible family.

    ``constraint`` is one of ``"all"`` (each item absent or at one allowed
    price), ``"capacity"`` (same, at most ``k`` products) or ``"explicit"``
    (the given ``assortments``; must already be downward-closed unless
    ``close`` is set).
    """
    if constraint == "explicit":
        if assortments is None:
            raise ValidationError("explicit family needs an assortment list")
        sets = [as_assortment(s) for s in assortments]
        for s in sets:
            for p in s:
                if not (0 <= p.item < n_items and 0 <= p.price < n_prices):
                    raise ValidationError(f"product {p} outside the item/price grid")
        if close:
            sets = downward_closure(sets)
        elif () not in sets:
            sets.append(())
        return AssortmentFamily(tuple(sets), allow_multi_price=allow_multi_price)
    if constraint not in ("all", "capacity"):
        raise ValidationError(f"unknown family constraint {constraint!r}")
    if constraint == "capacity" and (k is None or k < 0):
        raise ValidationError("capacity family needs k >= 0")
    options = []
    for i in range(n_items):
        prices = list(allowed.get(i, range(n_prices))) if allowed else list(range(n_prices))
        options.append([None] + [Product(i, j) for j in prices])
    sets = []
    for combo in itertools.product(*options):
        s = tuple(p for p in combo if p is not None)
        if constraint == "capacity" and len(s) > k:
            continue
        sets.append(s)
    return AssortmentFamily(tuple(sets))


def single_item_family(n_prices: int, allowed: Sequence[int] | None = None) -> AssortmentFamily:
    js = range(n_prices) if allowed is None else allowed
    return AssortmentFamily(((),) + tuple((Product(0, j),) for j in js))


# ---------------------------------------------------------------------------
# Demand distributions


@dataclass(frozen=True)
class DemandDistribution:
    """Finite-support law of the quantity demanded of one product, in [0, 1]."""

    values: tuple
    probs: tuple
    kind: str = "finite"

    def __post_init__(self):
        if len(self.values) != len(self.probs) or not self.values:
            raise ValidationError("distribution needs matching, non-empty values/probs")
        vals = [float(v) for v in self.values]
        ps = [float(p) for p in self.probs]
        if any(v < 0 or v > 1 for v in vals):
            raise ValidationError("demand values must lie in [0, 1]")
        if any(p < 0 for p in ps):
            raise ValidationError("negative probability")
        if abs(math.fsum(ps) - 1.0) > PROB_TOL:
            raise ValidationError(f"probabilities sum to {math.fsum(ps)!r}, not 1")
        order = sorted(range(len(vals)), key=vals.__getitem__)
        object.__setattr__(self, "values", tuple(vals[k] for k in order))
        object.__setattr__(self, "probs", tuple(ps[k] for k in order))

    @classmethod
    def bernoulli(cls, mean: float, scale: float = 1.0) -> "DemandDistribution":
        """``scale`` with probability ``mean / scale``, else 0."""
        if scale <= 0 or not 0 <= mean <= scale:
            raise ValidationError("bernoulli needs 0 <= mean <= scale, scale > 0")
        p = mean / scale
        if p == 0:
            return cls((0.0,), (1.0,), "bernoulli")
        if p == 1:
            return cls((scale,), (1.0,), "bernoulli")
        return cls((0.0, scale), (1.0 - p, p), "bernoulli")

    @classmethod
    def point(cls, value: float) -> "DemandDistribution":
        return cls((value,), (1.0,), "point")

    @classmethod
    def finite(cls, pairs: Iterable) -> "DemandDistribution":
        pairs = list(pairs)
        return cls(tuple(v for v, _ in pairs), tuple(p for _, p in pairs), "finite")

    @classmethod
    def binomial(cls, n: int, beta: float) -> "DemandDistribution":
        """Bin(n, beta) / n."""
        if n < 1 or not 0 <= beta <= 1:
            raise ValidationError("binomial needs n >= 1 and beta in [0, 1]")
        pmf = [math.comb(n, k) * beta**k * (1 - beta) ** (n - k) for k in range(n + 1)]
        total = math.fsum(pmf)
        return cls(tuple(k / n for k in range(n + 1)), tuple(p / total for p in pmf), "binomial")

    @classmethod
    def truncated_exponential(cls, lam: float, grid: int = 64) -> "DemandDistribution":
        """Exponential(lam) conditioned on [0, 1], discretized on ``grid`` equal bins.

        Each bin's mass sits at the conditional mean of the bin, so the mean
        is preserved exactly; E[min(c, Q)] is approximated inside bins.
        """
        if grid < 1:
            raise ValidationError("grid must be positive")
        edges = np.linspace(0.0, 1.0, grid + 1)
        if abs(lam) < 1e-12:
            vals = (edges[:-1] + edges[1:]) / 2
            return cls(tuple(vals), tuple([1.0 / grid] * grid), "truncated-exponential")
        e = np.exp(-lam * edges)
        mass = (e[:-1] - e[1:]) / (1.0 - np.exp(-lam))
        a, b = edges[:-1], edges[1:]
        cond = (a * e[:-1] - b * e[1:]) / (e[:-1] - e[1:]) + 1.0 / lam
        mass = mass / math.fsum(mass)
        return cls(tuple(np.clip(cond, 0, 1)), tuple(mass), "truncated-exponential")

    @property
    def mean(self) -> float:
        return math.fsum(v * p for v, p in zip(self.values, self.probs))

    @property
    def is_binary(self) -> bool:
        return all(v in (0.0, 1.0) for v, p in zip(self.values, self.probs) if p > 0)

    def cdf(self, x: float) -> float:
        return math.fsum(p for v, p in zip(self.values, self.probs) if v <= x)

    def expected_min(self, c: float) -> float:
        return math.fsum(min(c, v) * p for v, p in zip(self.values, self.probs))


# ---------------------------------------------------------------------------
# Choice models


class ChoiceModel:
    """Per-period demand law over offered products.

    Subclasses implement ``_atoms(t, S)``; results are memoized per (period,
    assortment) since the laws are immutable.
    """

    variant = "abstract"
    horizon: int | None = None  # None: defined for every period
    integral = False
    single_purchase = False

    def _atoms(self, t: int, s: Assortment):
        raise NotImplementedError

    @property
    def stationary(self) -> bool:
        raise NotImplementedError

    def atoms(self, t: int, s: Assortment):
        """Return ``(probs, demand)``; ``demand[k, l]`` is the quantity of ``s[l]`` in atom ``k``."""
        cache = self.__dict__.setdefault("_atom_cache", {})
        key = (0 if self.stationary else t, s)
        out = cache.get(key)
        if out is None:
            if not s:
                out = (np.ones(1), np.zeros((1, 0)))
            else:
                probs, demand = self._atoms(t, s)
                out = (np.asarray(probs, dtype=float), np.asarray(demand, dtype=float).reshape(len(probs), len(s)))
                if (out[1] > 1 + PROB_TOL).any() or (out[1] < 0).any():
                    raise ValidationError(f"demand outside [0, 1] for {s} in period {t}")
            cache[key] = out
        return out

    def means(self, t: int, s: Assortment) -> np.ndarray:
        probs, demand = self.atoms(t, s)
        return probs @ demand

    def product_law(self, t: int, s: Assortment, pos: int) -> tuple:
        """Marginal (values, probs) of product ``s[pos]``."""
        probs, demand = self.atoms(t, s)
        law: dict = {}
        for p, v in zip(probs, demand[:, pos]):
            if p > 0:
                law[v] = law.get(v, 0.0) + p
        vals = sorted(law)
        return np.array(vals), np.array([law[v] for v in vals])

    def uniform_dim(self, s: Assortment) -> int:
        """Number of uniforms ``from_uniforms`` consumes per draw."""
        return 1

    def from_uniforms(self, t: int, s: Assortment, u: np.ndarray) -> np.ndarray:
        """Map uniforms of shape ``(size, >= uniform_dim(s))`` to demand vectors by inverse CDF."""
        probs, demand = self.atoms(t, s)
        cum = np.cumsum(probs)
        k = np.searchsorted(cum, u[:, 0] * cum[-1], side="right")
        return demand[np.minimum(k, len(probs) - 1)]

    def sample(self, t: int, s: Assortment, rng: np.random.Generator, size: int) -> np.ndarray:
        """Draw ``size`` demand vectors for assortment ``s`` in period ``t``."""
        return self.from_uniforms(t, s, rng.random((size, max(1, self.uniform_dim(s)))))


@dataclass(frozen=True, eq=False)
class TableChoice(ChoiceModel):
    """Explicit table of per-product demand laws, indexed by period and assortment.

    ``tables`` holds one mapping per period (a single mapping means
    stationary): assortment -> {product: DemandDistribution}. With
    ``coupling="single"`` every law must be {0,1}-valued and at most one
    product is bought (a categorical draw); ``"independent"`` draws each
    product on its own.
    """

    tables: tuple
    coupling: str = "single"
    variant = "table"

    def __post_init__(self):
        if self.coupling not in ("single", "independent"):
            raise ValidationError(f"unknown coupling {self.coupling!r}")
        tables = tuple(
            {as_assortment(s): {Product(*p): d for p, d in laws.items()} for s, laws in tab.items()}
            for tab in self.tables
        )
        object.__setattr__(self, "tables", tables)
        binary = True
        for tab in tables:
            for s, laws in tab.items():
                if set(laws) != set(s):
                    raise ValidationError(f"table entry for {s} must give a law for each product")
                binary &= all(d.is_binary for d in laws.values())
                if self.coupling == "single":
                    if not all(d.is_binary for d in laws.values()):
                        raise ValidationError("single-purchase coupling needs {0,1} demand laws")
                    if math.fsum(d.mean for d in laws.values()) > 1 + PROB_TOL:
                        raise ValidationError(f"choice probabilities for {s} sum above 1")
        object.__setattr__(self, "integral", binary)
        object.__setattr__(self, "single_purchase", binary and self.coupling == "single")

    @property
    def stationary(self) -> bool:
        return len(self.tables) == 1

    @property
    def horizon(self):
        return None if self.stationary else len(self.tables)

    def covers(self, s: Assortment) -> bool:
        return not s or all(s in tab for tab in self.tables)

    def laws(self, t: int, s: Assortment) -> dict:
        tab = self.tables[0 if self.stationary else t]
        try:
            return tab[s]
        except KeyError:
            raise ValidationError(f"no demand table for {s} in period {t}") from None

    def _atoms(self, t, s):
        laws = self.laws(t, s)
        if self.coupling == "single":
            q = [laws[p].mean for p in s]
            probs = q + [max(0.0, 1.0 - math.fsum(q))]
            demand = np.vstack([np.eye(len(s)), np.zeros(len(s))])
            return probs, demand
        per = [list(zip(laws[p].values, laws[p].probs)) for p in s]
        probs, rows = [], []
        for combo in itertools.product(*per):
            probs.append(math.prod(pr for _, pr in combo))
            rows.append([v for v, _ in combo])
        return probs, rows

    def means(self, t, s):
        if not s:
            return np.zeros(0)
        laws = self.laws(t, s)
        return np.array([laws[p].mean for p in s])

    def product_law(self, t, s, pos):
        d = self.laws(t, s)[s[pos]]
        return np.array(d.values), np.array(d.probs)

    def uniform_dim(self, s):
        return 1 if self.coupling == "single" else len(s)

    def from_uniforms(self, t, s, u):
        if self.coupling == "single" or not s:
            return super().from_uniforms(t, s, u)
        laws = self.laws(t, s)
        out = np.empty((u.shape[0], len(s)))
        for col, p in enumerate(s):
            d = laws[p]
            cum = np.cumsum(d.probs)
            k = np.searchsorted(cum, u[:, col] * cum[-1], side="right")
            out[:, col] = np.asarray(d.values)[np.minimum(k, len(d.values) - 1)]
        return out

    @classmethod
    def from_probabilities(cls, periods: Sequence[Mapping]) -> "TableChoice":
        """Single-purchase Bernoulli table from ``[{assortment: {product: q}}]``."""
        tables = []
        for tab in periods:
            tables.append({
                s: {p: DemandDistribution.bernoulli(q) for p, q in probs.items()}
                for s, probs in tab.items()
            })
        return cls(tuple(tables), "single")

    @classmethod
    def from_product_demands(
        cls, periods: Sequence[Mapping], family: AssortmentFamily, coupling: str = "single"
    ) -> "TableChoice":
        """Assortment-independent demand: product ``p`` has the same law in every ``S`` offering it."""
        tables = []
        for laws in periods:
            laws = {Product(*p): d for p, d in laws.items()}
            tab = {}
            for s in family:
                if s:
                    missing = [p for p in s if p not in laws]
                    if missing:
                        raise ValidationError(f"no demand law for products {missing}")
                    tab[s] = {p: laws[p] for p in s}
            tables.append(tab)
        return cls(tuple(tables), coupling)


@dataclass(frozen=True, eq=False)
class MixtureMNL(ChoiceModel):
    """Mixture of MNL segments with Bernoulli segment sizes.

    Segment ``k`` is present in period ``t`` with probability
    ``segment_means[k][t]`` and then splits one unit of demand over the
    offered products it is attracted to, MNL-style with no-purchase weight
    ``no_purchase[k]``; 0/0 is read as 0.
    """

    segment_means: tuple
    attractions: tuple
    no_purchase: tuple
    variant = "mixture-mnl"

    def __post_init__(self):
        means = tuple(tuple(float(x) for x in row) for row in self.segment_means)
        object.__setattr__(self, "segment_means", means)
        object.__setattr__(
            self, "attractions",
            tuple({Product(*p): float(v) for p, v in a.items()} for a in self.attractions),
        )
        object.__setattr__(self, "no_purchase", tuple(float(v) for v in self.no_purchase))
        if not (len(means) == len(self.attractions) == len(self.no_purchase)) or not means:
            raise ValidationError("mixture-MNL needs one mean row, attraction map and no-purchase weight per segment")
        if len({len(r) for r in means}) != 1:
            raise ValidationError("segment mean rows must share a length")
        if any(not 0 <= x <= 1 for r in means for x in r):
            raise ValidationError("segment means must lie in [0, 1]")
        if any(v < 0 for a in self.attractions for v in a.values()) or any(v < 0 for v in self.no_purchase):
            raise ValidationError("attraction weights must be non-negative")

    @property
    def stationary(self) -> bool:
        return all(len(set(r)) == 1 for r in self.segment_means)

    @property
    def horizon(self):
        return None if len(self.segment_means[0]) == 1 else len(self.segment_means[0])

    def _seg_mean(self, k, t):
        row = self.segment_means[k]
        return row[0] if len(row) == 1 else row[t]

    def shares(self, s: Assortment) -> np.ndarray:
        """``shares[k, l]``: demand for ``s[l]`` when segment ``k`` is present."""
        out = np.zeros((len(self.attractions), len(s)))
        for k, (att, v0) in enumerate(zip(self.attractions, self.no_purchase)):
            w = np.array([att.get(p, 0.0) for p in s])
            denom = v0 + w.sum()
            if denom > 0:
                out[k] = w / denom
        return out

    def _atoms(self, t, s):
        sh = self.shares(s)
        ks = len(self.attractions)
        probs, rows = [], []
        for present in itertools.product((0, 1), repeat=ks):
            pr = 1.0
            for k, a in enumerate(present):
                m = self._seg_mean(k, t)
                pr *= m if a else 1.0 - m
            probs.append(pr)
            rows.append(np.array(present, dtype=float) @ sh)
        return probs, rows

    def means(self, t, s):
        if not s:
            return np.zeros(0)
        m = np.array([self._seg_mean(k, t) for k in range(len(self.attractions))])
        return m @ self.shares(s)


@dataclass(frozen=True, eq=False)
class RankedList(ChoiceModel):
    """Stationary distribution over preference lists.

    A customer with list ``(a, b, ...)`` buys the first offered product of
    the list, or nothing when none is offered.
    """

    lists: tuple
    variant = "ranked-list"
    integral = True
    single_purchase = True

    def __post_init__(self):
        lists = tuple((float(p), tuple(Product(*x) for x in order)) for p, order in self.lists)
        object.__setattr__(self, "lists", lists)
        if any(p < 0 for p, _ in lists) or abs(math.fsum(p for p, _ in lists) - 1) > PROB_TOL:
            raise ValidationError("ranked-list probabilities must be non-negative and sum to 1")
        for _, order in lists:
            if len(set(order)) != len(order):
                raise ValidationError("preference list repeats a product")

    @property
    def stationary(self) -> bool:
        return True

    def _atoms(self, t, s):
        pos = {p: k for k, p in enumerate(s)}
        probs = np.zeros(len(s) + 1)
        for pr, order in self.lists:
            pick = next((pos[p] for p in order if p in pos), len(s))
            probs[pick] += pr
        demand = np.vstack([np.eye(len(s)), np.zeros(len(s))])
        return probs, demand


# ---------------------------------------------------------------------------
# Instance


@dataclass(frozen=True, eq=False)
class Instance:
    """A finite-horizon, finite-inventory static pricing/assortment problem."""

    prices: np.ndarray
    inventories: np.ndarray
    horizon: int
    family: AssortmentFamily
    choice: ChoiceModel
    stationary: bool = False
    name: str = ""
    price_labels: tuple | None = None

    def __post_init__(self):
        prices = np.asarray(self.prices, dtype=float).copy()
        b = np.asarray(self.inventories, dtype=float).copy()
        T = int(self.horizon)
        if prices.ndim != 1 or prices.size == 0:
            raise ValidationError("need at least one price")
        if len(set(prices.tolist())) != prices.size:
            raise ValidationError("duplicate prices")
        if (prices < 0).any() or not np.all(np.diff(prices) < 0):
            raise ValidationError("prices must be non-negative and strictly decreasing")
        if b.ndim != 1 or b.size == 0 or (b < 1).any():
            raise ValidationError("every inventory must be at least 1")
        if T < 1:
            raise ValidationError("horizon must be at least 1")
        for p in self.family.products:
            if not (0 <= p.item < b.size and 0 <= p.price < prices.size):
                raise ValidationError(f"family product {p} outside the item/price grid")
        ch = self.choice
        if ch.horizon is not None and ch.horizon != T:
            raise ValidationError(f"choice model covers {ch.horizon} periods, horizon is {T}")
        if self.stationary and not ch.stationary:
            raise ValidationError("instance flagged stationary but its choice model varies over time")
        if isinstance(ch, TableChoice):
            missing = [s for s in self.family if not ch.covers(s)]
            if missing:
                raise ValidationError(f"demand table misses assortments, e.g. {missing[0]}")
        if ch.integral:
            b = np.minimum(b, T)
        prices.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "prices", prices)
        object.__setattr__(self, "inventories", b)
        object.__setattr__(self, "horizon", T)

    @property
    def n_items(self) -> int:
        return int(self.inventories.size)

    @property
    def n_prices(self) -> int:
        return int(self.prices.size)

    @property
    def b_min(self) -> float:
        return float(self.inventories.min())

    @property
    def p_max(self) -> float:
        return float(self.prices.max())

    def q(self, t: int, s) -> np.ndarray:
        """Mean demand of each product of ``s`` in period ``t``."""
        return self.choice.means(t, as_assortment(s))

    def expected_revenue(self, t: int, s: Assortment) -> float:
        """Single-period expected revenue of ``s`` with unlimited stock."""
        if not s:
            return 0.0
        return float(sum(self.prices[p.price] * q for p, q in zip(s, self.choice.means(t, s))))

    def period_tables(self, t: int) -> tuple:
        """Per-assortment expected revenue and expected per-item usage in period ``t``.

        Returns ``(revenue, usage)`` with ``revenue[k]`` the unconstrained
        expected revenue of ``family[k]`` and ``usage[i, k]`` the expected
        units of item ``i`` it sells. Cached per period.
        """
        cache = self.__dict__.setdefault("_period_cache", {})
        key = 0 if self.choice.stationary else t
        out = cache.get(key)
        if out is None:
            revenue = np.zeros(len(self.family))
            usage = np.zeros((self.n_items, len(self.family)))
            for k, s in enumerate(self.family):
                if not s:
                    continue
                q = self.choice.means(t, s)
                for p, qp in zip(s, q):
                    revenue[k] += self.prices[p.price] * qp
                    usage[p.item, k] += qp
            revenue.setflags(write=False)
            usage.setflags(write=False)
            out = cache[key] = (revenue, usage)
        return out

    def choice_probabilities(self, t: int, s) -> dict:
        s = as_assortment(s)
        if s not in self.family:
            raise ValidationError(f"assortment {s} is not in the family")
        return {p: float(q) for p, q in zip(s, self.choice.means(t, s))}

    def sample_demand(self, t: int, s, rng: np.random.Generator, size: int = 1) -> np.ndarray:
        s = as_assortment(s)
        if s not in self.family:
            raise ValidationError(f"assortment {s} is not in the family")
        return self.choice.sample(t, s, rng, size)


def single_item_instance(
    prices: Sequence[float],
    demand,
    inventory: float,
    horizon: int,
    *,
    name: str = "",
) -> Instance:
    """Convenience builder for one item.

    ``demand`` is either a list over prices (stationary) or a list of such
    lists (one per period); entries are means (Bernoulli demand) or
    ``DemandDistribution`` objects.
    """
    def law(x):
        return x if isinstance(x, DemandDistribution) else DemandDistribution.bernoulli(float(x))

    rows = demand if isinstance(demand[0], (list, tuple)) else [demand]
    m = len(prices)
    if any(len(r) != m for r in rows):
        raise ValidationError("each demand row needs one entry per price")
    family = single_item_family(m)
    periods = [{Product(0, j): law(x) for j, x in enumerate(r)} for r in rows]
    binary = all(d.is_binary for laws in periods for d in laws.values())
    choice = TableChoice.from_product_demands(periods, family, "single" if binary else "independent")
    stationary = len(rows) == 1
    return Instance(np.array(prices, float), np.array([inventory], float), horizon, family, choice,
                    stationary=stationary, name=name)

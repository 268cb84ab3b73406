"""Bundled instances with machine-checkable expected values.

Every fixture carries ``expected`` values, each tagged with its origin:
``"reference"`` for a value quoted from the literature the fixture comes
from, ``"derived"`` for one computed independently (by hand or with exact
rational arithmetic), and ``"trivial"`` for a value that follows directly
from the construction. ``verify_fixture`` recomputes every value with the
library and reports mismatches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import lp as lpmod
from . import policies
from .bounds import delta_apx
from .calendar import DeterministicCalendar
from .errors import ValidationError
from .evaluate import exact_expected_revenue, optimal_dp
from .model import (
    DemandDistribution, Instance, MixtureMNL, Product, RankedList, TableChoice,
    enumerate_assortments, single_item_instance,
)

FIXTURE_VERSION = "1"


@dataclass(frozen=True)
class Expected:
    value: float
    origin: str
    note: str = ""


@dataclass(frozen=True, eq=False)
class Fixture:
    """An instance, its expected values, and how to recompute each of them."""

    name: str
    instance: Instance
    expected: dict
    checks: dict = field(repr=False, default_factory=dict)
    tolerance: float = 1e-9
    mode: str = "static"
    description: str = ""

    def compute(self, key: str) -> float:
        return float(self.checks[key](self.instance))


@dataclass(frozen=True)
class CheckResult:
    key: str
    expected: float
    computed: float
    ok: bool


def verify_fixture(fx: Fixture) -> list:
    out = []
    for key, exp in fx.expected.items():
        got = fx.compute(key)
        out.append(CheckResult(key, exp.value, got, abs(got - exp.value) <= fx.tolerance * max(1.0, abs(exp.value))))
    return out


# ---------------------------------------------------------------------------
# helpers


def _price_cal(inst: Instance, js) -> DeterministicCalendar:
    return policies.fixed_price_calendar(inst, js)


def _opt(kind: str):
    builders = {"cdlp-n": lpmod.build_cdlp_n, "cdlp-s": lpmod.build_cdlp_s,
                "dlp-s": lpmod.build_dlp_s, "dlp-n": lpmod.build_dlp_n}
    return lambda inst: lpmod.solve_lp(builders[kind](inst)).objective


def _exact(make, mode="static"):
    return lambda inst: exact_expected_revenue(make(inst), inst, mode)


# ---------------------------------------------------------------------------
# fixtures


def example_1(epsilon: float = 0.1) -> Fixture:
    """LP solution used directly as a calendar can be arbitrarily bad.

    One unit, two periods; the high price ``1/eps^2`` sells only in period 2
    (probability ``eps``), the low price sells w.p. ``1 - eps`` in period 1.
    """
    e = epsilon
    inst = single_item_instance([1 / e**2, 1.0], [[0.0, 1 - e], [e, e]], 1, 2, name="example-1")

    def lp_calendar(i):
        return policies.lp_solution_policy(lpmod.solve_lp(lpmod.build_cdlp_n(i)))

    def alg2(i):
        return policies.nonstationary_threshold_policy(lpmod.solve_lp(lpmod.build_cdlp_n(i)), i)

    opt = (1 - e) + e / e**2
    expected = {
        "opt_lp": Expected(opt, "reference", "(1-eps) + eps/eps^2"),
        "lp_as_calendar": Expected(2 - e, "reference", "low price then high price"),
        "threshold": Expected(opt / 2, "derived", "r*/(2b)"),
        "alg2": Expected(1 / e, "derived", "period 1 discarded, period 2 high price"),
        "alg6": Expected(1 / e, "derived", "bid-price calendar (high, high)"),
    }
    checks = {
        "opt_lp": _opt("cdlp-n"),
        "lp_as_calendar": _exact(lp_calendar),
        "threshold": lambda i: lpmod.solve_lp(lpmod.build_cdlp_n(i)).contributions[0] / (2 * i.inventories[0]),
        "alg2": _exact(alg2),
        "alg6": _exact(policies.bid_price_calendar),
    }
    return Fixture("example-1", inst, expected, checks, description=example_1.__doc__.strip())


def example_high_to_low() -> Fixture:
    """High price before low price beats the reverse order (one unit, two periods)."""
    inst = single_item_instance([8.0, 1.0], [0.1, 0.9], 1, 2, name="example-high-to-low")
    expected = {
        "opt_lp": Expected(1.7, "reference"),
        "high_low": Expected(1.61, "reference", "p1 q1 + (1 - q1) p2 q2"),
        "low_high": Expected(0.98, "reference"),
        "alg5": Expected(1.61, "derived"),
        "optimal_dp": Expected(1.61, "derived", "all four price policies enumerated"),
    }
    checks = {
        "opt_lp": _opt("dlp-s"),
        "high_low": _exact(lambda i: _price_cal(i, [0, 1])),
        "low_high": _exact(lambda i: _price_cal(i, [1, 0])),
        "alg5": _exact(policies.high_low_calendar),
        "optimal_dp": lambda i: optimal_dp(i).root,
    }
    return Fixture("example-high-to-low", inst, expected, checks, description=example_high_to_low.__doc__)


def two_price() -> Fixture:
    """Three periods, two units; the LP mixes prices H=(2, 1/3) and L=(1, 1) half-half."""
    inst = single_item_instance([2.0, 1.0], [1 / 3, 1.0], 2, 3, name="two-price")
    expected = {
        "opt_lp": Expected(2.5, "reference", "x_H = x_L = 1/2"),
        "x_high": Expected(0.5, "reference"),
        "hll": Expected(7 / 3, "derived", "exhaustive inventory-state recursion"),
        "hhl": Expected(20 / 9, "derived"),
        "myopic": Expected(2.0, "derived", "all-low calendar sells out in two periods"),
        "alg5": Expected(7 / 3, "derived", "s_H = 1.5 resolved to the floor"),
    }
    checks = {
        "opt_lp": _opt("cdlp-s"),
        "x_high": lambda i: lpmod.two_price_support(lpmod.solve_lp(lpmod.build_dlp_s(i))).x_high,
        "hll": _exact(lambda i: _price_cal(i, [0, 1, 1])),
        "hhl": _exact(lambda i: _price_cal(i, [0, 0, 1])),
        "myopic": _exact(policies.myopic_policy),
        "alg5": _exact(policies.high_low_calendar),
    }
    return Fixture("two-price", inst, expected, checks, description=two_price.__doc__)


def _binomial_min_mean(T: int, b: int) -> Fraction:
    p = Fraction(b, T)
    return sum(min(k, b) * math.comb(T, k) * p**k * (1 - p) ** (T - k) for k in range(T + 1))


def prop3_tight(T: int = 4, b: int = 2) -> Fixture:
    """One price, demand probability ``b/T``: the stationary ratio is attained exactly."""
    if not 1 <= b <= T:
        raise ValidationError("prop3-tight needs 1 <= b <= T")
    inst = single_item_instance([1.0], [b / T], b, T, name="prop3-tight")
    expected = {
        "opt_lp": Expected(float(b), "reference"),
        "calendar": Expected(float(_binomial_min_mean(T, b)), "derived", "E[min(Bin(T, b/T), b)] by exact pmf"),
        "ratio": Expected(float(_binomial_min_mean(T, b) / b), "derived"),
    }
    checks = {
        "opt_lp": _opt("cdlp-s"),
        "calendar": _exact(lambda i: _price_cal(i, [0] * T)),
        "ratio": lambda i: delta_apx(T, b),
    }
    return Fixture("prop3-tight", inst, expected, checks, tolerance=1e-12, description=prop3_tight.__doc__)


def prop4_tight(epsilon: float = 0.01) -> Fixture:
    """Non-stationary demand: no policy earns more than half of the LP bound as eps -> 0."""
    e = epsilon
    inst = single_item_instance([1 / e, 1.0], [[0.0, 1 - e], [e, e]], 1, 2, name="prop4-tight")
    expected = {
        "opt_lp": Expected(2 - e, "reference"),
        "optimal_dp": Expected(1.0, "reference", "best policy earns 1"),
        "alg6": Expected(1.0, "derived"),
    }
    checks = {
        "opt_lp": _opt("dlp-n"),
        "optimal_dp": lambda i: optimal_dp(i).root,
        "alg6": _exact(policies.bid_price_calendar),
    }
    return Fixture("prop4-tight", inst, expected, checks, description=prop4_tight.__doc__)


def prop6(T: int = 50) -> Fixture:
    """Two prices needed: either single-price calendar falls below the stationary ratio.

    One unit; the high price 3 sells w.p. ``1/(2T)``, the low price 1 w.p. 1.
    """
    q_high = 1 / (2 * T)
    inst = single_item_instance([3.0, 1.0], [q_high, 1.0], 1, T, name="prop6")
    expected = {
        "opt_lp": Expected((4 * T - 3) / (2 * T - 1), "reference"),
        "single_high": Expected(3 * (1 - (1 - q_high) ** T), "derived", "3 P(at least one sale)"),
        "single_low": Expected(1.0, "derived"),
        "delta_apx": Expected(float(_binomial_min_mean(T, 1)), "derived"),
    }
    checks = {
        "opt_lp": _opt("dlp-s"),
        "single_high": _exact(lambda i: _price_cal(i, [0] * T)),
        "single_low": _exact(lambda i: _price_cal(i, [1] * T)),
        "delta_apx": lambda i: delta_apx(T, 1),
    }
    return Fixture("prop6", inst, expected, checks, description=prop6.__doc__)


def prop1_dynamic_sub(epsilon: float = 0.0, T: int = 5) -> Fixture:
    """Dynamic substitution can fall below 1 - 1/e of the LP bound.

    Two items with one unit each. Product A is item 0 at price 1; B is item 0
    and C item 1, both at price ``eps``. Preference lists: C then B w.p. 1/5,
    A w.p. 1/5 - eps, B w.p. eps, nothing w.p. 3/5. The calendar offers
    {A, B, C} every period.
    """
    e = epsilon
    if not 0 <= e < 0.2:
        raise ValidationError("prop1-dynamic-sub needs 0 <= eps < 1/5")
    A, B, C = Product(0, 0), Product(0, 1), Product(1, 1)
    choice = RankedList(((0.2, (C, B)), (0.2 - e, (A,)), (e, (B,)), (0.6, ())))
    fam = enumerate_assortments(2, 2, "explicit", assortments=[(A, B, C)], allow_multi_price=True, close=True)
    inst = Instance(np.array([1.0, e]), np.array([1.0, 1.0]), T, fam, choice, stationary=True, name="prop1-dynamic-sub")
    full = fam.index((A, B, C))

    def cal(i):
        return DeterministicCalendar(i.family, [full] * T, "abc")

    expected = {"calendar": Expected(1959 / 3125, "reference", "value at eps = 0"),
                "opt_lp": Expected(1.0, "reference")} if e == 0 else {}
    checks = {"calendar": _exact(cal, "dynamic"), "opt_lp": _opt("cdlp-s")}
    return Fixture("prop1-dynamic-sub", inst, expected, checks, mode="dynamic", description=prop1_dynamic_sub.__doc__)


# ---------------------------------------------------------------------------
# synthetic mixture-of-MNL family

LOW_PRICES = (400.0, 500.0, 300.0)
HIGH_PRICES = {"small": (800.0, 1000.0, 600.0), "big": (8000.0, 10000.0, 6000.0)}
V_LOW = (5.0, 1.0, 10.0)
V_HIGH = (5.0, 10.0, 1.0)
BASE_INVENTORY = (3.0, 5.0, 4.0)
SYNTHETIC_T = 20
ALPHAS = (0.6, 0.8, 1.0, 1.2, 1.4)
NO_PURCHASE_PAIRS = ((0.0, 0.0), (1.0, 5.0), (5.0, 10.0), (10.0, 20.0))


def segment_means(setting: str, T: int = SYNTHETIC_T) -> tuple:
    """Per-period presence probabilities of the low- and high-price segments."""
    if setting == "stationary":
        return (0.3,) * T, (0.2,) * T
    if setting == "nonstationary":
        low = tuple(0.8 if t < 12 else 0.2 for t in range(T))
        high = tuple(0.0 if t < 12 else 0.2 for t in range(T))
        return low, high
    raise ValidationError(f"unknown synthetic setting {setting!r}")


def synthetic_instance(setting: str = "stationary", gap: str = "small", alpha: float = 1.0,
                       v0: tuple = (0.0, 0.0)) -> Instance:
    """Three items at a high or low price, demand from two Bernoulli-sized MNL segments.

    Inventory is ``alpha * (3, 5, 4)`` scaled so that total inventory equals
    ``alpha`` times the expected number of arriving segments over the horizon.
    """
    if gap not in HIGH_PRICES:
        raise ValidationError(f"unknown price gap {gap!r}")
    low, high = LOW_PRICES, HIGH_PRICES[gap]
    ladder = sorted(set(low) | set(high), reverse=True)
    j_low = [ladder.index(p) for p in low]
    j_high = [ladder.index(p) for p in high]
    fam = enumerate_assortments(3, len(ladder), "all", allowed={i: [j_high[i], j_low[i]] for i in range(3)})
    m_low, m_high = segment_means(setting)
    stationary = setting == "stationary"
    means = ((m_low[0],), (m_high[0],)) if stationary else (m_low, m_high)
    choice = MixtureMNL(
        means,
        ({Product(i, j_low[i]): V_LOW[i] for i in range(3)}, {Product(i, j_high[i]): V_HIGH[i] for i in range(3)}),
        tuple(float(v) for v in v0),
    )
    load = (sum(m_low) + sum(m_high)) / sum(BASE_INVENTORY)
    b = alpha * np.array(BASE_INVENTORY) * load
    name = f"synthetic-{setting}-{gap}"
    return Instance(np.array(ladder), b, SYNTHETIC_T, fam, choice, stationary=stationary, name=name)


def _synthetic(setting, gap):
    def build(alpha: float = 1.0, v0L: float = 0.0, v0H: float = 0.0) -> Fixture:
        inst = synthetic_instance(setting, gap, alpha, (v0L, v0H))
        return Fixture(inst.name, inst, {}, {}, description=synthetic_instance.__doc__)
    return build


_REGISTRY: dict[str, Callable[..., Fixture]] = {
    "example-1": example_1,
    "example-high-to-low": example_high_to_low,
    "two-price": two_price,
    "prop3-tight": prop3_tight,
    "prop4-tight": prop4_tight,
    "prop6": prop6,
    "prop1-dynamic-sub": prop1_dynamic_sub,
    "synthetic-stationary-small": _synthetic("stationary", "small"),
    "synthetic-stationary-big": _synthetic("stationary", "big"),
    "synthetic-nonstationary-small": _synthetic("nonstationary", "small"),
    "synthetic-nonstationary-big": _synthetic("nonstationary", "big"),
}


def list_fixtures() -> list:
    return sorted(_REGISTRY)


def load_fixture(name: str, **params) -> Fixture:
    """Build a fixture by name; keyword parameters override its defaults (e.g. ``T``, ``b``)."""
    try:
        factory = _REGISTRY[name]
    except KeyError:
        raise ValidationError(f"unknown fixture {name!r}; available: {', '.join(list_fixtures())}") from None
    return factory(**params)

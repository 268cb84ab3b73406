"""Checkers for the structural conditions the performance guarantees rely on.

* substitutability: shrinking an assortment never lowers a product's demand;
* truncation ratio: at every stock level ``c`` a higher price sells a larger
  fraction of its untruncated demand;
* CDF ordering: demand laws at any two prices are stochastically ordered.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass

import numpy as np

from .errors import ZeroMeanDemand
from .model import ChoiceModel, DemandDistribution, Instance

TOL = 1e-12


@dataclass(frozen=True)
class SubstitutionViolation:
    period: int
    larger: tuple
    smaller: tuple
    product: tuple
    q_larger: float
    q_smaller: float


def check_substitutability(model: ChoiceModel, family, periods=None) -> list:
    """All ``(t, S, S', product)`` with ``q_t(product, S') < q_t(product, S)`` for ``S' ⊆ S``.

    Args:
        periods: Iterable of periods to check; defaults to period 0 for a
            stationary model and every period otherwise.
    """
    if periods is None:
        periods = [0] if model.stationary or model.horizon is None else range(model.horizon)
    elif isinstance(periods, int):
        periods = [periods]
    out = []
    for t in periods:
        for s in family:
            if len(s) < 2:
                continue
            q_big = dict(zip(s, model.means(t, s)))
            for r in range(1, len(s)):
                for sub in itertools.combinations(s, r):
                    q_small = dict(zip(sub, model.means(t, sub)))
                    for p in sub:
                        if q_small[p] < q_big[p] - TOL:
                            out.append(SubstitutionViolation(t, s, sub, tuple(p), float(q_big[p]), float(q_small[p])))
    return out


class CdfOrder(enum.Enum):
    """Pointwise ordering of two CDFs; ``D1_GE`` means ``F1 >= F2`` (d1 stochastically smaller)."""

    D1_GE = "d1>=d2"
    D2_GE = "d2>=d1"
    INCOMPARABLE = "incomparable"


def check_cdf_dominance(d1: DemandDistribution, d2: DemandDistribution) -> CdfOrder:
    """Compare CDFs on the merged support (CDFs are step functions, so this is exhaustive)."""
    xs = sorted(set(d1.values) | set(d2.values))
    diff = np.array([d1.cdf(x) - d2.cdf(x) for x in xs])
    if (diff >= -TOL).all():
        return CdfOrder.D1_GE
    if (diff <= TOL).all():
        return CdfOrder.D2_GE
    return CdfOrder.INCOMPARABLE


@dataclass(frozen=True)
class TruncationResult:
    passed: bool
    worst_c: float
    worst_margin: float  # min over c of ratio_high(c) - ratio_low(c)


def default_c_grid(*dists: DemandDistribution) -> list:
    pts = {k / 100 for k in range(101)}
    for d in dists:
        pts.update(d.values)
    return sorted(pts)


def truncation_ratio(d: DemandDistribution, c: float) -> float:
    mean = d.mean
    if mean <= 0:
        raise ZeroMeanDemand("truncation ratio is undefined for zero-mean demand")
    return d.expected_min(c) / mean


def check_truncation_ratio(d_high: DemandDistribution, d_low: DemandDistribution, c_grid=None) -> TruncationResult:
    """Whether ``E[min(c, Q_hi)]/E[Q_hi] >= E[min(c, Q_lo)]/E[Q_lo]`` on every ``c`` in the grid.

    Raises:
        ZeroMeanDemand: either law has zero mean.
    """
    grid = default_c_grid(d_high, d_low) if c_grid is None else sorted(set(c_grid))
    worst_c, worst = grid[0], np.inf
    for c in grid:
        m = truncation_ratio(d_high, c) - truncation_ratio(d_low, c)
        if m < worst:
            worst_c, worst = c, m
    return TruncationResult(bool(worst >= -TOL), float(worst_c), float(worst))


@dataclass(frozen=True)
class TruncationViolation:
    item: int
    high: tuple  # (price index, assortment)
    low: tuple
    worst_c: float
    worst_margin: float
    same_assortment: bool


def check_instance_truncation(instance: Instance, t: int = 0) -> list:
    """Truncation-ratio condition over all same-item product pairs of the family.

    Every pair ``(i, j, S)``, ``(i, j', S')`` with ``p_j > p_j'`` is compared;
    products with zero expected demand are skipped (the ratio is undefined).
    Violations with ``S == S'`` are flagged separately via ``same_assortment``.
    """
    laws = {}
    for s in instance.family:
        for pos, p in enumerate(s):
            vals, probs = instance.choice.product_law(t, s, pos)
            d = DemandDistribution(tuple(vals), tuple(probs / probs.sum()))
            if d.mean > 0:
                laws.setdefault(p.item, []).append((p.price, s, d))
    out = []
    for item, entries in sorted(laws.items()):
        grid_pts = {k / 100 for k in range(101)}
        for _, _, d in entries:
            grid_pts.update(d.values)
        grid = sorted(grid_pts)
        for (j, s, dh), (j2, s2, dl) in itertools.product(entries, entries):
            if not instance.prices[j] > instance.prices[j2]:
                continue
            res = check_truncation_ratio(dh, dl, grid)
            if not res.passed:
                out.append(TruncationViolation(item, (j, s), (j2, s2), res.worst_c, res.worst_margin, s == s2))
    return out


def price_laws(instance: Instance, t: int = 0) -> dict:
    """Single-item demand law at each offered price."""
    out = {}
    for s in instance.family:
        if len(s) == 1 and s[0].item == 0:
            vals, probs = instance.choice.product_law(t, s, 0)
            out[s[0].price] = DemandDistribution(tuple(vals), tuple(probs / probs.sum()))
    return out


def check_instance_cdf_order(instance: Instance) -> list:
    """Price pairs ``(j, j')`` whose single-item demand CDFs cross (empty list = condition holds)."""
    periods = [0] if instance.choice.stationary else range(instance.horizon)
    bad = []
    for t in periods:
        laws = price_laws(instance, t)
        for j, j2 in itertools.combinations(sorted(laws), 2):
            if check_cdf_dominance(laws[j], laws[j2]) is CdfOrder.INCOMPARABLE:
                bad.append((t, j, j2))
    return bad

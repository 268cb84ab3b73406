"""Static pricing/assortment policies built from the LP relaxations.

Randomized policies return a ``RandomizedCalendar`` (per-period assortment
distribution, independent across periods); the single-item and benchmark
policies return a ``DeterministicCalendar``. All argmax ties go to the
first candidate in canonical order (family order, or price index).
"""

from __future__ import annotations

import math
import warnings

import numpy as np

from . import lp as lpmod
from .assumptions import check_instance_cdf_order
from .bounds import delta_apx, reservation_delta
from .calendar import DeterministicCalendar, RandomizedCalendar
from .errors import AssumptionViolation, ValidationError
from .evaluate import DEFAULT_STATE_CAP, calendar_value
from .model import Instance

TIE_TOL = 1e-12
LARGE_INVENTORY_MIN = 6


def _first_argmax(values) -> int:
    values = np.asarray(values, dtype=float)
    best = values.max()
    return int(np.flatnonzero(values >= best - TIE_TOL * max(1.0, abs(best)))[0])


def _meta(solution, **extra) -> dict:
    meta = {"opt_lp": float(solution.objective), "lp": solution.lp.kind}
    meta.update(extra)
    return meta


def lp_solution_policy(solution: lpmod.LpSolution) -> RandomizedCalendar:
    """Offer assortment ``S`` in period ``t`` with probability ``x*_t(S)``."""
    fam = solution.lp.instance.family
    return RandomizedCalendar(fam, solution.period_weights(), "lp-sol", _meta(solution))


def stationary_randomized_policy(solution: lpmod.LpSolution) -> RandomizedCalendar:
    """Offer ``S`` with probability ``x*(S)`` in every period, from a stationary LP optimum."""
    if solution.lp.kind not in ("cdlp-s", "dlp-s"):
        raise ValidationError("the stationary randomized policy needs a CDLP-S or DLP-S solution")
    inst = solution.lp.instance
    ratio = delta_apx(inst.horizon, min(inst.b_min, inst.horizon))
    return RandomizedCalendar(inst.family, solution.period_weights(), "alg1",
                              _meta(solution, delta_apx=ratio))


def discard_below_threshold(instance: Instance, s, thresholds) -> tuple:
    """Products of ``s`` whose price exceeds their item's threshold."""
    return tuple(p for p in s if instance.prices[p.price] > thresholds[p.item])


def nonstationary_threshold_policy(solution: lpmod.LpSolution, instance: Instance | None = None) -> RandomizedCalendar:
    """Randomize per the LP, then drop every product priced at or below ``r*_i / (2 b_i)``.

    ``r*_i`` is item ``i``'s contribution to the LP objective. Assortments that
    collapse to the same set after discarding have their weights merged.
    """
    inst = instance or solution.lp.instance
    fam = inst.family
    thresholds = solution.contributions / (2.0 * inst.inventories)
    x = solution.period_weights()
    z = np.zeros_like(x)
    for t in range(inst.horizon):
        for k in np.flatnonzero(x[t] > 0):
            z[t, fam.index(discard_below_threshold(inst, fam[k], thresholds))] += x[t, k]
    return RandomizedCalendar(fam, z, "alg2", _meta(solution, thresholds=[float(v) for v in thresholds]))


def large_inventory_policy(solution: lpmod.LpSolution, instance: Instance | None = None) -> RandomizedCalendar:
    """Scale the LP mix by ``1 - delta`` and offer nothing with the remaining probability.

    ``delta = sqrt(3 ln b_min / b_min)``, clipped to ``[0, 1]``; below
    ``b_min = 6`` the policy is still built but carries no guarantee.
    """
    inst = instance or solution.lp.instance
    b = inst.b_min
    if b < LARGE_INVENTORY_MIN:
        warnings.warn(f"b_min = {b:g} < {LARGE_INVENTORY_MIN}: the large-inventory policy has no "
                      f"guarantee here (delta = {reservation_delta(b, clip=False):.4g})", stacklevel=2)
    delta = reservation_delta(b)
    z = (1.0 - delta) * solution.period_weights()
    z[:, 0] += 1.0 - z.sum(axis=1)
    return RandomizedCalendar(inst.family, z, "alg3", _meta(solution, delta=delta, ratio=1.0 - delta))


def _price_calendar(instance: Instance, prices, name: str, meta: dict) -> DeterministicCalendar:
    fam = instance.family
    idx = [0 if j is None else fam.index(((0, j),)) for j in prices]
    return DeterministicCalendar(fam, idx, name, meta)


def high_low_calendar(
    instance: Instance,
    *,
    override: bool = False,
    mode: str = "static",
    state_cap: int = DEFAULT_STATE_CAP,
    reps: int = 10_000,
    seed: int = 0,
) -> DeterministicCalendar:
    """Single item, stationary demand: the LP's higher price first, then its lower price.

    The high price runs for ``floor(s_H)`` or ``ceil(s_H)`` periods where
    ``s_H = T x_H / (x_H + x_L)``; both are evaluated (exactly when the state
    space allows, otherwise by simulation on common random numbers) and the
    better one is kept, the floor on ties.

    Raises:
        AssumptionViolation: demand laws at two prices are not stochastically
            ordered and ``override`` is not set.
    """
    if instance.n_items != 1 or not instance.stationary:
        raise ValidationError("the high-low calendar needs a single-item stationary instance")
    if not override:
        crossing = check_instance_cdf_order(instance)
        if crossing:
            raise AssumptionViolation(f"demand CDFs at prices {crossing[0][1:]} cross; pass override to proceed")
    sol = lpmod.solve_lp(lpmod.build_dlp_s(instance))
    sup = lpmod.two_price_support(sol)
    T = instance.horizon
    meta = _meta(sol, delta_apx=delta_apx(T, min(instance.b_min, T)))
    if sup.high is None:
        return _price_calendar(instance, [None] * T, "alg5", dict(meta, s_high=0.0))
    s_high = T * sup.x_high / (sup.x_high + sup.x_low)
    # Guard against s_H landing a hair off an integer through round-off.
    if abs(s_high - round(s_high)) < 1e-9:
        s_high = float(round(s_high))
    options = sorted({math.floor(s_high), math.ceil(s_high)})
    best = None
    for s in options:
        cal = _price_calendar(instance, [sup.high] * s + [sup.low] * (T - s), "alg5", {})
        value, _, _ = calendar_value(cal, instance, mode, reps=reps, seed=seed, state_cap=state_cap)
        if best is None or value > best[0] + TIE_TOL * max(1.0, abs(best[0])):
            best = (value, s)
    s_star = best[1]
    prices = [sup.high] * s_star + [sup.low] * (T - s_star)
    return _price_calendar(instance, prices, "alg5", dict(meta, s_high=s_high, s_star=s_star))


def bid_price_calendar(instance: Instance) -> DeterministicCalendar:
    """Single item: each period offers the price maximizing ``(p_j - r*/(2b)) q_tj``.

    ``r*`` is the DLP-N optimum. Offering nothing scores 0 and ranks after
    every price, so a zero-score price still beats it.
    """
    if instance.n_items != 1:
        raise ValidationError("the bid-price calendar needs a single-item instance")
    sol = lpmod.solve_lp(lpmod.build_dlp_n(instance))
    theta = sol.objective / (2.0 * instance.inventories[0])
    js = [j for j in range(instance.n_prices) if ((0, j),) in instance.family]
    prices = []
    for t in range(instance.horizon):
        q = lpmod.single_item_means(instance, t, js)
        scores = list((instance.prices[js] - theta) * q) + [0.0]
        pick = _first_argmax(scores)
        prices.append(js[pick] if pick < len(js) else None)
    return _price_calendar(instance, prices, "alg6", _meta(sol, bid_price=float(theta)))


def myopic_policy(instance: Instance) -> DeterministicCalendar:
    """Each period offers the assortment with the highest unconstrained expected revenue."""
    idx = [_first_argmax(instance.period_tables(t)[0]) for t in range(instance.horizon)]
    return DeterministicCalendar(instance.family, idx, "myopic", {})


def fixed_price_calendar(instance: Instance, prices) -> DeterministicCalendar:
    """Single-item calendar from a list of price indices (``None`` = offer nothing)."""
    return _price_calendar(instance, list(prices), "fixed", {})


RANDOMIZED = ("lp-sol", "alg1", "alg2", "alg3")
DETERMINISTIC = ("myopic", "alg5", "alg6")


def build_policy(name: str, instance: Instance, solution: lpmod.LpSolution | None = None, **opts):
    """Construct a policy by name.

    Randomized policies reuse ``solution`` when given (CDLP-S for
    stationary instances, CDLP-N otherwise).
    """
    if name in RANDOMIZED:
        if solution is None:
            solution = lpmod.solve_upper_bound(instance)
        if name == "lp-sol":
            return lp_solution_policy(solution)
        if name == "alg1":
            return stationary_randomized_policy(solution)
        if name == "alg2":
            return nonstationary_threshold_policy(solution, instance)
        return large_inventory_policy(solution, instance)
    if name == "myopic":
        return myopic_policy(instance)
    if name == "alg5":
        return high_low_calendar(instance, **opts)
    if name == "alg6":
        return bid_price_calendar(instance)
    raise ValidationError(f"unknown policy {name!r}")

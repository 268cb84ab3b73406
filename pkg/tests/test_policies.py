import warnings

import numpy as np
import pytest

from staticrm.bounds import delta_apx
from staticrm.calendar import DeterministicCalendar, RandomizedCalendar, calendar_from_json
from staticrm.errors import AssumptionViolation, ValidationError
from staticrm.evaluate import exact_expected_revenue
from staticrm.fixtures import load_fixture, synthetic_instance
from staticrm.lp import build_cdlp_n, build_cdlp_s, build_dlp_s, solve_lp, solve_upper_bound
from staticrm.model import DemandDistribution as D
from staticrm.model import single_item_instance
from staticrm.policies import (
    bid_price_calendar, build_policy, fixed_price_calendar, high_low_calendar, large_inventory_policy,
    lp_solution_policy, myopic_policy, nonstationary_threshold_policy, stationary_randomized_policy,
)

from generators import single_item


def prices_of(cal):
    return [s[0].price if s else None for s in cal.assortments()]


# -- stationary randomized calendar ------------------------------------------------


def test_two_price_stationary_mix():
    inst = load_fixture("two-price").instance
    cal = stationary_randomized_policy(solve_lp(build_cdlp_s(inst)))
    fam = inst.family
    for row in cal.weights():
        assert row[fam.index([(0, 0)])] == pytest.approx(0.5)
        assert row[fam.index([(0, 1)])] == pytest.approx(0.5)


def test_zero_lp_gives_always_empty_calendar():
    inst = single_item_instance([2.0], [0.0], 1, 3)
    cal = stationary_randomized_policy(solve_lp(build_cdlp_s(inst)))
    assert cal.weights()[:, 0] == pytest.approx(np.ones(3))


def test_stationary_policy_needs_stationary_solution():
    inst = load_fixture("example-1").instance
    with pytest.raises(ValidationError):
        stationary_randomized_policy(solve_lp(build_cdlp_n(inst)))


def test_synthetic_stationary_mix_matches_lp():
    inst = synthetic_instance("stationary", "small", 1.0, (0.0, 0.0))
    sol = solve_lp(build_cdlp_s(inst))
    cal = stationary_randomized_policy(sol)
    w = np.zeros(len(inst.family))
    for (k,), v in zip(sol.lp.labels, sol.x):
        w[k] += v
    w[0] += 1 - w.sum()
    assert cal.weights()[0] == pytest.approx(w, abs=1e-12)
    assert len({tuple(r) for r in cal.weights()}) == 1


# -- threshold (discarding) policy ---------------------------------------------------


def test_discarding_drops_cheap_early_price():
    inst = load_fixture("example-1", epsilon=0.1).instance
    sol = solve_lp(build_cdlp_n(inst))
    cal = nonstationary_threshold_policy(sol, inst)
    assert cal.meta["thresholds"] == pytest.approx([5.45])
    z = cal.weights()
    fam = inst.family
    assert z[0, 0] == pytest.approx(1.0)  # low price discarded in period 1
    assert z[1, fam.index([(0, 0)])] == pytest.approx(1.0)
    assert exact_expected_revenue(cal, inst) == pytest.approx(10.0)
    assert 10.0 >= sol.objective / 2


def test_low_thresholds_keep_lp_solution():
    inst = single_item_instance([3.0, 2.0], [[0.5, 0.9], [0.4, 0.8]], 2, 2)
    sol = solve_lp(build_cdlp_n(inst))
    assert (sol.contributions / (2 * inst.inventories) < inst.prices.min()).all()
    assert nonstationary_threshold_policy(sol, inst).weights() == pytest.approx(lp_solution_policy(sol).weights())


def test_synthetic_small_gap_discards_nothing():
    inst = synthetic_instance("nonstationary", "small", 1.0, (0.0, 0.0))
    sol = solve_upper_bound(inst)
    assert nonstationary_threshold_policy(sol, inst).weights() == pytest.approx(lp_solution_policy(sol).weights())


def test_discarding_merges_collapsed_assortments():
    rng = np.random.default_rng(3)
    for _ in range(30):
        inst = single_item(rng, stationary=False)
        sol = solve_upper_bound(inst)
        z = nonstationary_threshold_policy(sol, inst).weights()
        assert z.sum(axis=1) == pytest.approx(np.ones(inst.horizon))
        thr = sol.contributions[0] / (2 * inst.inventories[0])
        for t in range(inst.horizon):
            for k in np.flatnonzero(z[t] > 1e-12):
                assert all(inst.prices[p.price] > thr for p in inst.family[k])


# -- large-inventory policy ----------------------------------------------------------


def test_large_inventory_scaling():
    inst = single_item_instance([2.0, 1.0], [0.5, 0.9], 100, 400)
    sol = solve_upper_bound(inst)
    cal = large_inventory_policy(sol, inst)
    delta = np.sqrt(3 * np.log(100) / 100)
    x = lp_solution_policy(sol).weights()
    z = cal.weights()
    assert z[:, 1:] == pytest.approx((1 - delta) * x[:, 1:])
    assert cal.meta["delta"] == pytest.approx(0.3717, abs=1e-4)


def test_large_inventory_warns_for_small_stock():
    inst = load_fixture("two-price").instance
    with pytest.warns(UserWarning, match="no guarantee"):
        cal = large_inventory_policy(solve_upper_bound(inst), inst)
    assert cal.weights()[:, 0] == pytest.approx(np.ones(3))  # clipped delta = 1


# -- high-low calendar ------------------------------------------------------------------


def test_two_price_high_low():
    inst = load_fixture("two-price").instance
    cal = high_low_calendar(inst)
    assert cal.meta["s_high"] == pytest.approx(1.5)
    assert cal.meta["s_star"] == 1
    assert prices_of(cal) == [0, 1, 1]
    assert exact_expected_revenue(cal, inst) == pytest.approx(7 / 3)


def test_high_low_on_high_to_low_fixture():
    inst = load_fixture("example-high-to-low").instance
    cal = high_low_calendar(inst)
    assert prices_of(cal) == [0, 1]
    v = exact_expected_revenue(cal, inst)
    assert v == pytest.approx(1.61)
    assert v / 1.7 == pytest.approx(0.947, abs=5e-4)


def test_high_price_only_when_low_weight_vanishes():
    inst = single_item_instance([5.0, 1.0], [0.2, 0.3], 2, 4)
    sup_cal = high_low_calendar(inst)
    assert prices_of(sup_cal) == [0, 0, 0, 0]


def test_crossing_cdfs_need_override():
    inst = single_item_instance([2.0, 1.0], [D.point(0.4), D.finite([(1.0, 0.5), (0.2, 0.5)])], 1, 2)
    with pytest.raises(AssumptionViolation):
        high_low_calendar(inst)
    assert isinstance(high_low_calendar(inst, override=True), DeterministicCalendar)


def test_high_low_needs_single_stationary_item():
    with pytest.raises(ValidationError):
        high_low_calendar(load_fixture("example-1").instance)


def test_high_low_falls_back_to_simulation():
    inst = single_item_instance([3.0, 2.0, 1.0], [D.binomial(4, 0.2), D.binomial(4, 0.5), D.binomial(4, 0.9)], 7.3, 30)
    exact = high_low_calendar(inst)
    sampled = high_low_calendar(inst, state_cap=1, reps=20_000, seed=1)
    assert sampled.meta["s_high"] == pytest.approx(exact.meta["s_high"])
    assert abs(sampled.meta["s_star"] - exact.meta["s_star"]) <= 1


# -- bid-price calendar -------------------------------------------------------------------


def test_bid_price_offers_high_price_twice():
    inst = load_fixture("example-1", epsilon=0.1).instance
    cal = bid_price_calendar(inst)
    assert prices_of(cal) == [0, 0]  # zero-score tie in period 1 resolved to the high price
    assert exact_expected_revenue(cal, inst) == pytest.approx(10.0)


def test_small_bid_price_keeps_myopic_order():
    # r* = 0.9 + 1.5, so the bid price 0.6 is too small to reorder either period's choice.
    inst = single_item_instance([3.0, 1.0], [[0.1, 0.9], [0.5, 0.6]], 2, 2)
    cal = bid_price_calendar(inst)
    assert cal.meta["bid_price"] == pytest.approx(0.6)
    assert prices_of(cal) == prices_of(myopic_policy(inst)) == [1, 0]


def test_bid_price_picks_non_negative_surplus():
    rng = np.random.default_rng(21)
    for _ in range(100):
        inst = single_item(rng, stationary=False)
        cal = bid_price_calendar(inst)
        theta = cal.meta["bid_price"]
        for t, j in enumerate(prices_of(cal)):
            scores = [(inst.prices[k] - theta) * inst.q(t, [(0, k)])[0] for k in range(inst.n_prices)]
            best = max(scores + [0.0])
            if j is None:
                assert best == 0.0 and all(sc < 0 for sc in scores)
            else:
                assert scores[j] == pytest.approx(best, abs=1e-12)
                assert j == min(k for k, sc in enumerate(scores) if sc >= best - 1e-12 * max(1, best))


def test_half_bound_instance_every_calendar_earns_one():
    fx = load_fixture("prop4-tight", epsilon=0.01)
    inst = fx.instance
    opt = fx.compute("opt_lp")
    assert opt == pytest.approx(2 - 0.01)
    for a in (0, 1, None):
        for b in (0, 1, None):
            v = exact_expected_revenue(fixed_price_calendar(inst, [a, b]), inst)
            assert v <= 1 + 1e-9
    assert exact_expected_revenue(bid_price_calendar(inst), inst) == pytest.approx(1.0)


# -- myopic ------------------------------------------------------------------------------


def test_two_price_myopic():
    inst = load_fixture("two-price").instance
    cal = myopic_policy(inst)
    assert prices_of(cal) == [1, 1, 1]
    assert exact_expected_revenue(cal, inst) == pytest.approx(2.0)


def test_single_assortment_family_myopic():
    inst = single_item_instance([1.0], [0.5], 1, 3)
    assert prices_of(myopic_policy(inst)) == [0, 0, 0]


# -- calendars & registry ------------------------------------------------------------------


def test_build_policy_names():
    inst = load_fixture("two-price").instance
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for name in ("lp-sol", "alg1", "alg2", "alg3"):
            assert isinstance(build_policy(name, inst), RandomizedCalendar)
    for name in ("myopic", "alg5", "alg6"):
        assert isinstance(build_policy(name, inst), DeterministicCalendar)
    with pytest.raises(ValidationError):
        build_policy("nope", inst)


def test_calendar_json_roundtrip():
    inst = load_fixture("two-price").instance
    for cal in (build_policy("alg1", inst), high_low_calendar(inst)):
        back = calendar_from_json(cal.to_json(), inst.family)
        assert back.weights() == pytest.approx(cal.weights())
        assert back.name == cal.name


def test_randomized_calendar_validation():
    inst = load_fixture("two-price").instance
    with pytest.raises(ValidationError):
        RandomizedCalendar(inst.family, np.full((3, 3), 0.5))
    with pytest.raises(ValidationError):
        DeterministicCalendar(inst.family, [0, 5, 1])


def test_alg1_guarantee_recorded():
    inst = load_fixture("two-price").instance
    cal = build_policy("alg1", inst)
    assert cal.meta["delta_apx"] == pytest.approx(delta_apx(3, 2))
    assert cal.meta["opt_lp"] == pytest.approx(2.5)


def test_dlp_s_weights_cover_price_singletons():
    inst = load_fixture("two-price").instance
    sol = solve_lp(build_dlp_s(inst))
    z = stationary_randomized_policy(sol).weights()
    assert z.sum(axis=1) == pytest.approx(np.ones(3))

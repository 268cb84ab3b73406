import csv
import functools

import numpy as np
import pytest

from staticrm.calendar import DeterministicCalendar, RandomizedCalendar
from staticrm.errors import StateSpaceTooLarge, ValidationError
from staticrm.evaluate import (
    RevenueStats, calendar_value, exact_expected_revenue, optimal_dp, simulate, upper_bound_check,
)
from staticrm.fixtures import list_fixtures, load_fixture
from staticrm.lp import solve_upper_bound
from staticrm.model import DemandDistribution, Instance, TableChoice, enumerate_assortments
from staticrm.policies import build_policy, fixed_price_calendar

from generators import assortment_instance, single_item

# -- independent oracle --------------------------------------------------------


def brute_force_value(calendar, instance, mode="static"):
    """Recursive expectation over (period, inventory vector); shares nothing with the evaluator."""
    z = calendar.weights()
    fam = instance.family
    prices = instance.prices

    @functools.lru_cache(maxsize=None)
    def value(t, stock):
        if t == instance.horizon:
            return 0.0
        total = 0.0
        for k in np.flatnonzero(z[t] > 0):
            s = fam[k]
            if mode == "dynamic":
                s = tuple(p for p in s if stock[p.item] > 0)
            probs, demand = instance.choice.atoms(t, s)
            for pr, row in zip(probs, demand):
                if pr == 0:
                    continue
                left = list(stock)
                rev = 0.0
                for p, d in zip(s, row):
                    sold = min(left[p.item], d)
                    left[p.item] -= sold
                    rev += prices[p.price] * sold
                total += z[t, k] * pr * (rev + value(t + 1, tuple(round(x, 12) for x in left)))
        return total

    return value(0, tuple(float(b) for b in instance.inventories))


def random_calendar(rng, instance, deterministic=False):
    F, T = len(instance.family), instance.horizon
    if deterministic:
        return DeterministicCalendar(instance.family, rng.integers(0, F, size=T).tolist(), "random", {})
    z = rng.dirichlet(np.ones(F) * 0.5, size=T)
    return RandomizedCalendar(instance.family, z, "random", {})


# -- worked values ---------------------------------------------------------------


def test_two_price_calendars():
    inst = load_fixture("two-price").instance
    assert exact_expected_revenue(fixed_price_calendar(inst, [0, 1, 1]), inst) == pytest.approx(7 / 3, abs=1e-12)
    assert exact_expected_revenue(fixed_price_calendar(inst, [0, 0, 1]), inst) == pytest.approx(20 / 9, abs=1e-12)
    assert exact_expected_revenue(fixed_price_calendar(inst, [1, 1, 1]), inst) == pytest.approx(2.0, abs=1e-12)


def test_single_price_binomial_value():
    inst = load_fixture("prop3-tight", T=4, b=2).instance
    cal = fixed_price_calendar(inst, [0] * 4)
    assert exact_expected_revenue(cal, inst) == pytest.approx(13 / 8, abs=1e-12)


def test_lp_calendar_on_cheap_early_fixture():
    inst = load_fixture("example-1", epsilon=0.1).instance
    assert exact_expected_revenue(fixed_price_calendar(inst, [1, 0]), inst) == pytest.approx(1.9, abs=1e-9)


def test_example_high_to_low_simulated():
    inst = load_fixture("example-high-to-low").instance
    st = simulate(fixed_price_calendar(inst, [0, 1]), inst, "static", 100_000, seed=1)
    assert abs(st.mean - 1.61) <= 0.02
    assert exact_expected_revenue(fixed_price_calendar(inst, [1, 0]), inst) == pytest.approx(0.98, abs=1e-12)


def test_always_empty_calendar():
    inst = load_fixture("two-price").instance
    cal = fixed_price_calendar(inst, [None] * 3)
    st = simulate(cal, inst, "static", 1000, seed=0)
    assert st.mean == 0.0 and st.half_width == 0.0
    assert exact_expected_revenue(cal, inst) == 0.0


def test_dynamic_substitution_fixture_simulated():
    fx = load_fixture("prop1-dynamic-sub", epsilon=0.0)
    inst = fx.instance
    full = inst.family.index(max(inst.family, key=len))
    cal = DeterministicCalendar(inst.family, [full] * inst.horizon, "abc", {})
    st = simulate(cal, inst, "dynamic", 100_000, seed=3)
    assert abs(st.mean - 1959 / 3125) <= 0.01
    assert exact_expected_revenue(cal, inst, "dynamic") == pytest.approx(1959 / 3125, abs=1e-12)


# -- oracle agreement ------------------------------------------------------------


@pytest.mark.parametrize("seed", range(30))
def test_exact_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    kind = ("mnl", "arb", "ranked")[seed % 3]
    inst = assortment_instance(rng, stationary=bool(seed % 2), kind=kind, max_T=4)
    cal = random_calendar(rng, inst)
    for mode in ("static", "dynamic"):
        assert exact_expected_revenue(cal, inst, mode) == pytest.approx(brute_force_value(cal, inst, mode), abs=1e-10)
    assert exact_expected_revenue(cal, inst, method="joint") == pytest.approx(exact_expected_revenue(cal, inst), abs=1e-10)


@pytest.mark.parametrize("seed", range(15))
def test_fractional_demand_exact_matches_brute_force(seed):
    rng = np.random.default_rng(200 + seed)
    inst = single_item(rng, stationary=bool(seed % 2), fractional=True, max_T=4)
    cal = random_calendar(rng, inst)
    assert exact_expected_revenue(cal, inst) == pytest.approx(brute_force_value(cal, inst), abs=1e-10)


def test_fractional_multi_item_per_item_matches_joint():
    fam = enumerate_assortments(2, 2, "all")
    rng = np.random.default_rng(4)
    laws = {p: DemandDistribution.binomial(3, float(rng.uniform(0.1, 0.9))) for p in fam.products}
    choice = TableChoice.from_product_demands([laws], fam, "independent")
    inst = Instance(np.array([3.0, 1.0]), np.array([1.5, 2.0]), 4, fam, choice, stationary=True)
    cal = random_calendar(rng, inst)
    joint = exact_expected_revenue(cal, inst, method="joint")
    assert exact_expected_revenue(cal, inst) == pytest.approx(joint, abs=1e-10)
    assert joint == pytest.approx(brute_force_value(cal, inst), abs=1e-10)


def fixture_calendars(fx):
    inst = fx.instance
    cals = [build_policy("myopic", inst), build_policy("lp-sol", inst)]
    if inst.n_items == 1 and fx.name != "prop1-dynamic-sub":
        cals.append(build_policy("alg6", inst))
    return cals


@pytest.mark.parametrize("name", [n for n in list_fixtures() if not n.startswith("synthetic")])
def test_simulation_agrees_with_exact_on_fixtures(name):
    fx = load_fixture(name)
    for cal in fixture_calendars(fx):
        exact = exact_expected_revenue(cal, fx.instance, fx.mode)
        st = simulate(cal, fx.instance, fx.mode, 100_000, seed=11)
        assert abs(st.mean - exact) <= 4 * st.half_width + 1e-12, (cal.name, st.mean, exact)


@pytest.mark.parametrize("seed", range(6))
def test_simulation_agrees_with_exact_on_random_instances(seed):
    rng = np.random.default_rng(50 + seed)
    inst = assortment_instance(rng, stationary=False, kind="ranked" if seed % 2 else "mnl")
    cal = random_calendar(rng, inst)
    for mode in ("static", "dynamic"):
        st = simulate(cal, inst, mode, 100_000, seed=seed)
        exact = exact_expected_revenue(cal, inst, mode)
        assert abs(st.mean - exact) <= 4 * st.half_width + 1e-12


def test_mixture_instance_simulation_agrees_with_exact():
    fx = load_fixture("synthetic-stationary-small", alpha=0.6)
    inst = fx.instance
    cal = build_policy("myopic", inst)
    exact = exact_expected_revenue(cal, inst)
    st = simulate(cal, inst, "static", 100_000, seed=2)
    assert abs(st.mean - exact) <= 4 * st.half_width


# -- invariants ------------------------------------------------------------------


def test_trace_conservation(tmp_path):
    rng = np.random.default_rng(9)
    inst = assortment_instance(rng, stationary=True, max_T=5)
    cal = random_calendar(rng, inst)
    path = tmp_path / "trace.csv"
    st = simulate(cal, inst, "static", 500, seed=4, trace_path=str(path))
    with open(path) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 500 * inst.horizon
    totals = np.zeros(500)
    sold = np.zeros((500, inst.n_items))
    for row in rows:
        r = int(row["replication"])
        sales = np.array([float(x) for x in row["sales"].split(";")])
        prices = np.zeros(inst.n_items)
        for tok in filter(None, row["assortment"].split(";")):
            i, j = map(int, tok.split(":"))
            prices[i] = inst.prices[j]
        assert float(row["revenue"]) == pytest.approx(float(prices @ sales))
        totals[r] += float(row["revenue"])
        sold[r] += sales
    assert (sold <= inst.inventories + 1e-12).all()
    assert totals == pytest.approx(st.samples)


@pytest.mark.parametrize("seed", range(20))
def test_dynamic_substitution_dominates_static(seed):
    rng = np.random.default_rng(300 + seed)
    inst = assortment_instance(rng, stationary=True, kind="ranked", max_T=5)
    cal = random_calendar(rng, inst)
    assert exact_expected_revenue(cal, inst, "dynamic") >= exact_expected_revenue(cal, inst, "static") - 1e-12


@pytest.mark.parametrize("seed", range(20))
def test_dp_sandwich(seed):
    rng = np.random.default_rng(400 + seed)
    kind = "ranked" if seed % 2 else "mnl"
    inst = assortment_instance(rng, stationary=bool(seed % 3), kind=kind, max_T=5)
    opt = solve_upper_bound(inst).objective
    for mode in ("static", "dynamic"):
        dp = optimal_dp(inst, mode)
        assert dp.root <= opt + 1e-9
        for _ in range(5):
            cal = random_calendar(rng, inst, deterministic=True)
            assert exact_expected_revenue(cal, inst, mode) <= dp.root + 1e-9
        # V is non-decreasing in inventory, componentwise
        V = dp.values
        for axis in range(1, V.ndim):
            assert (np.diff(V, axis=axis) >= -1e-12).all()
        assert not V[-1].any()


def test_dp_worked_values():
    inst = load_fixture("example-high-to-low").instance
    assert optimal_dp(inst).root == pytest.approx(1.61, abs=1e-12)
    inst = load_fixture("two-price").instance
    root = optimal_dp(inst).root
    assert 7 / 3 - 1e-12 <= root <= 2.5 + 1e-12


def test_dp_single_period_is_best_assortment():
    rng = np.random.default_rng(1)
    inst = single_item(rng, stationary=True, max_T=1)
    best = max(inst.expected_revenue(0, s) for s in inst.family)
    assert optimal_dp(inst).root == pytest.approx(best)


def test_dp_rejects_fractional_demand():
    inst = single_item(np.random.default_rng(0), stationary=True, fractional=True)
    with pytest.raises(ValidationError):
        optimal_dp(inst)


def test_dynamic_mode_rejects_fractional_demand():
    inst = single_item(np.random.default_rng(0), stationary=True, fractional=True)
    cal = fixed_price_calendar(inst, [0] * inst.horizon)
    with pytest.raises(ValidationError, match="dynamic"):
        simulate(cal, inst, "dynamic", 10)
    with pytest.raises(ValidationError):
        exact_expected_revenue(cal, inst, "dynamic")


def test_state_cap():
    fx = load_fixture("synthetic-nonstationary-big", alpha=1.4)
    cal = build_policy("lp-sol", fx.instance)
    with pytest.raises(StateSpaceTooLarge):
        exact_expected_revenue(cal, fx.instance, state_cap=3)
    with pytest.raises(StateSpaceTooLarge):
        optimal_dp(load_fixture("prop3-tight", T=6, b=3).instance, state_cap=2)
    value, half, exact = calendar_value(cal, fx.instance, state_cap=3, reps=2000)
    assert not exact and half > 0 and value > 0


def test_seed_determinism_across_threads():
    fx = load_fixture("synthetic-stationary-small", alpha=1.0)
    cal = build_policy("lp-sol", fx.instance)
    runs = [simulate(cal, fx.instance, "static", 10_000, seed=5, threads=th) for th in (1, 1, 4)]
    assert all(np.array_equal(runs[0].samples, r.samples) for r in runs[1:])
    assert len({(r.mean, r.half_width) for r in runs}) == 1
    other = simulate(cal, fx.instance, "static", 10_000, seed=6)
    assert other.mean != runs[0].mean


def test_half_width_formula():
    inst = load_fixture("two-price").instance
    st = simulate(fixed_price_calendar(inst, [0, 1, 1]), inst, "static", 5000, seed=0)
    assert st.half_width == pytest.approx(1.96 * st.samples.std(ddof=1) / np.sqrt(5000))
    assert 0 <= st.mean <= float(inst.inventories.sum() * inst.p_max)
    assert RevenueStats(**{k: v for k, v in st.to_json().items()}).mean == st.mean


def test_upper_bound_check():
    assert upper_bound_check(7 / 3, 2.5)
    assert upper_bound_check(0.0, 0.0)
    assert upper_bound_check(1.61, 1.7)
    assert not upper_bound_check(1.8, 1.7)
    assert upper_bound_check(RevenueStats(1.72, 0.01, 100, 0, "static"), 1.7)
    assert not upper_bound_check(RevenueStats(1.9, 0.01, 100, 0, "static"), 1.7)


def test_calendar_must_match_instance():
    a = load_fixture("two-price").instance
    b = load_fixture("example-high-to-low").instance
    with pytest.raises(ValidationError):
        exact_expected_revenue(fixed_price_calendar(b, [0, 1]), a)


def test_exhaustive_single_item_dp_equals_best_policy_tree():
    """On two periods the DP equals the best inventory-reactive choice, enumerated by hand."""
    rng = np.random.default_rng(8)
    for _ in range(20):
        inst = single_item(rng, stationary=False, max_T=2)
        if inst.horizon != 2:
            continue
        js = range(inst.n_prices)
        q = [[inst.q(t, [(0, j)])[0] for j in js] for t in range(2)]
        p = inst.prices
        b = int(inst.inventories[0])
        last = max([0.0] + [p[j] * q[1][j] for j in js])
        if b >= 2:
            best = max([0.0] + [p[j] * q[0][j] for j in js]) + last
        else:
            best = max([last] + [q[0][j] * p[j] + (1 - q[0][j]) * last for j in js])
        assert optimal_dp(inst).root == pytest.approx(best, abs=1e-12)

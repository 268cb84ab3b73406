"""Expected revenue of static calendars: exact recursion, simulation and the DP oracle.

Two substitution modes are supported:

``static``
    Customers see the planned assortment. Each offered product ``(i, j)``
    sells ``min(remaining stock of i, demand)``. When an assortment carries
    one item at several prices, the item's stock is allocated to its products
    from the highest price down.
``dynamic``
    Customers only see products whose item is still in stock (stock > 0)
    and choose among those. Requires integral single-purchase demand.

Under static substitution an item's sales depend only on its own marginal
demand, so exact evaluation runs one recursion per item; dynamic
substitution needs the joint inventory vector.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .calendar import DeterministicCalendar, RandomizedCalendar
from .errors import StateSpaceTooLarge, ValidationError
from .model import Instance

MODES = ("static", "dynamic")
DEFAULT_STATE_CAP = 100_000
BLOCK_SIZE = 4096
Z_CRIT = 1.96


def _check_mode(instance: Instance, mode: str) -> None:
    if mode not in MODES:
        raise ValidationError(f"unknown substitution mode {mode!r}; use 'static' or 'dynamic'")
    if mode == "dynamic" and not instance.choice.single_purchase:
        raise ValidationError(
            "dynamic substitution needs integral single-purchase demand; use static substitution"
        )


def _check_calendar(calendar, instance: Instance) -> np.ndarray:
    if calendar.family is not instance.family and calendar.family.assortments != instance.family.assortments:
        raise ValidationError("calendar was built on a different assortment family")
    if calendar.horizon != instance.horizon:
        raise ValidationError(f"calendar covers {calendar.horizon} periods, horizon is {instance.horizon}")
    return calendar.weights()


# ---------------------------------------------------------------------------
# Exact evaluation


def _item_period_law(instance: Instance, t: int, z_t: np.ndarray, item: int):
    """Mixture over assortments of item ``item``'s sales requests in period ``t``.

    Returns ``(probs, qty, price)``: ``qty[a, c]`` is the demand for the
    item's ``c``-th product (highest price first) in atom ``a`` and
    ``price[a, c]`` its price.
    """
    law: dict = {}
    for k in np.flatnonzero(z_t > 0):
        s = instance.family[k]
        cols = [c for c, p in enumerate(s) if p.item == item]
        if not cols:
            key = ()
            law[key] = law.get(key, 0.0) + z_t[k]
            continue
        probs, demand = instance.choice.atoms(t, s)
        prices = tuple(float(instance.prices[s[c].price]) for c in cols)
        for pr, row in zip(probs, demand[:, cols]):
            if pr <= 0:
                continue
            key = tuple(zip(prices, (float(v) for v in row)))
            law[key] = law.get(key, 0.0) + z_t[k] * pr
    width = max((len(key) for key in law), default=0)
    probs = np.array(list(law.values()))
    qty = np.zeros((len(law), width))
    price = np.zeros((len(law), width))
    for a, key in enumerate(law):
        for c, (p, q) in enumerate(key):
            price[a, c] = p
            qty[a, c] = q
    return probs, qty, price


def _static_item_revenue(instance: Instance, z: np.ndarray, item: int, cap: int) -> float:
    levels = np.array([float(instance.inventories[item])])
    mass = np.ones(1)
    total = 0.0
    for t in range(instance.horizon):
        probs, qty, price = _item_period_law(instance, t, z[t], item)
        rem = np.repeat(levels[:, None], len(probs), axis=1)
        rev = np.zeros_like(rem)
        for c in range(qty.shape[1]):
            sold = np.minimum(rem, qty[None, :, c])
            rev += sold * price[None, :, c]
            rem = rem - sold
        w = mass[:, None] * probs[None, :]
        total += float((w * rev).sum())
        levels, inv = np.unique(rem.ravel(), return_inverse=True)
        mass = np.bincount(inv, weights=w.ravel(), minlength=levels.size)
        keep = mass > 0
        levels, mass = levels[keep], mass[keep]
        if levels.size > cap:
            raise StateSpaceTooLarge(
                f"item {item} reaches {levels.size} inventory levels in period {t} (cap {cap})"
            )
    return total


def _static_joint_revenue(instance: Instance, z: np.ndarray, cap: int) -> float:
    """Joint-vector recursion for static substitution; cross-checks the per-item path."""
    states = {tuple(float(b) for b in instance.inventories): 1.0}
    total = 0.0
    for t in range(instance.horizon):
        nxt: dict = {}
        for k in np.flatnonzero(z[t] > 0):
            s = instance.family[k]
            probs, demand = instance.choice.atoms(t, s)
            prices = [float(instance.prices[p.price]) for p in s]
            for state, pm in states.items():
                for pr, row in zip(probs, demand):
                    w = pm * z[t, k] * pr
                    if w == 0:
                        continue
                    b = list(state)
                    for c, p in enumerate(s):
                        sold = min(b[p.item], float(row[c]))
                        b[p.item] -= sold
                        total += w * sold * prices[c]
                    key = tuple(b)
                    nxt[key] = nxt.get(key, 0.0) + w
        states = nxt
        if len(states) > cap:
            raise StateSpaceTooLarge(f"{len(states)} joint inventory states in period {t} (cap {cap})")
    return total


def _dynamic_revenue(instance: Instance, z: np.ndarray, cap: int) -> float:
    n_states = math.prod(int(b) + 1 for b in instance.inventories)
    if n_states > cap:
        raise StateSpaceTooLarge(f"{n_states} joint inventory states exceed the cap of {cap}")
    fam = instance.family
    states = {tuple(int(b) for b in instance.inventories): 1.0}
    total = 0.0
    for t in range(instance.horizon):
        nxt: dict = {}
        for state, pm in states.items():
            in_stock = {i for i, c in enumerate(state) if c > 0}
            for k in np.flatnonzero(z[t] > 0):
                w = pm * z[t, k]
                s = fam[fam.restrict(k, in_stock)]
                q = instance.choice.means(t, s) if s else ()
                left = w
                for p, qp in zip(s, q):
                    if qp <= 0:
                        continue
                    b = list(state)
                    b[p.item] -= 1
                    key = tuple(b)
                    nxt[key] = nxt.get(key, 0.0) + w * qp
                    total += w * qp * float(instance.prices[p.price])
                    left -= w * qp
                nxt[state] = nxt.get(state, 0.0) + left
        states = nxt
    return total


def exact_expected_revenue(
    calendar,
    instance: Instance,
    mode: str = "static",
    *,
    state_cap: int = DEFAULT_STATE_CAP,
    method: str = "auto",
) -> float:
    """Exact expected revenue of a (possibly randomized) static calendar.

    Propagates the distribution of remaining inventory period by period,
    mixing over the calendar's assortment draw and the demand atoms. Levels
    are never rounded; the state count is capped instead.

    Args:
        method: ``"auto"``; or ``"joint"`` to force the joint-vector recursion
            under static substitution (slower; used to validate the per-item one).

    Raises:
        StateSpaceTooLarge: the reachable state space exceeds ``state_cap``.
    """
    _check_mode(instance, mode)
    z = _check_calendar(calendar, instance)
    if mode == "dynamic":
        return _dynamic_revenue(instance, z, state_cap)
    if method == "joint":
        return _static_joint_revenue(instance, z, state_cap)
    return float(sum(_static_item_revenue(instance, z, i, state_cap) for i in range(instance.n_items)))


# ---------------------------------------------------------------------------
# Simulation


@dataclass(frozen=True, eq=False)
class RevenueStats:
    """Simulated revenue: mean with a 95% normal-approximation half-width."""

    mean: float
    half_width: float
    replications: int
    seed: int
    mode: str
    samples: np.ndarray | None = field(default=None, repr=False)

    def to_json(self) -> dict:
        return {"mean": self.mean, "half_width": self.half_width, "replications": self.replications,
                "seed": self.seed, "mode": self.mode}

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def block_stream(seed: int, block: int, period: int, draw: int) -> np.random.Generator:
    """Counter-keyed Philox stream; independent of how blocks are scheduled."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, block, period, draw])))


def _choose(cum_z: np.ndarray, u: np.ndarray) -> np.ndarray:
    k = np.searchsorted(cum_z, u * cum_z[-1], side="right")
    return np.minimum(k, cum_z.size - 1)


def _simulate_block(instance, z, mode, seed, block, size, want_trace):
    fam = instance.family
    prices = instance.prices
    inv = np.tile(np.asarray(instance.inventories, float), (size, 1))
    revenue = np.zeros(size)
    trace = [] if want_trace else None
    dim = max(1, max(instance.choice.uniform_dim(s) for s in fam))
    for t in range(instance.horizon):
        rng_a = block_stream(seed, block, t, 0)
        rng_d = block_stream(seed, block, t, 1)
        support = np.flatnonzero(z[t] > 0)
        if support.size == 1:
            ks = np.full(size, support[0])
            rng_a.random(size)  # keep stream consumption independent of z
        else:
            ks = _choose(np.cumsum(z[t]), rng_a.random(size))
        u = rng_d.random((size, dim))
        sales = np.zeros((size, instance.n_items))
        period_rev = np.zeros(size)
        if mode == "dynamic":
            n = instance.n_items
            mask = (inv > 0).astype(np.int64) @ (1 << np.arange(n, dtype=np.int64))
            code = ks.astype(np.int64) * (1 << n) + mask
            for cval in np.unique(code):
                k0, bits = divmod(int(cval), 1 << n)
                s = fam[fam.restrict(k0, {i for i in range(n) if bits >> i & 1})]
                if not s:
                    continue
                rows = np.flatnonzero(code == cval)
                d = instance.choice.from_uniforms(t, s, u[rows])
                for c, p in enumerate(s):
                    sold = np.minimum(inv[rows, p.item], d[:, c])
                    inv[rows, p.item] -= sold
                    sales[rows, p.item] += sold
                    period_rev[rows] += sold * prices[p.price]
        else:
            for k in np.unique(ks):
                s = fam[k]
                if not s:
                    continue
                rows = np.flatnonzero(ks == k)
                d = instance.choice.from_uniforms(t, s, u[rows])
                for c, p in enumerate(s):
                    sold = np.minimum(inv[rows, p.item], d[:, c])
                    inv[rows, p.item] -= sold
                    sales[rows, p.item] += sold
                    period_rev[rows] += sold * prices[p.price]
        revenue += period_rev
        if want_trace:
            trace.append((t, ks.copy(), sales, period_rev))
    return revenue, trace


def simulate(
    calendar,
    instance: Instance,
    mode: str = "static",
    reps: int = 10_000,
    seed: int = 0,
    *,
    threads: int = 1,
    trace_path: str | None = None,
) -> RevenueStats:
    """Monte Carlo revenue of a static calendar.

    Replications run in fixed blocks of ``BLOCK_SIZE``; every block draws
    from its own counter-keyed streams, so the result is bit-identical for
    any ``threads``.

    Args:
        trace_path: If given, write one CSV row per (replication, period) with
            the assortment, per-item sales and revenue.
    """
    _check_mode(instance, mode)
    z = _check_calendar(calendar, instance)
    if reps < 1:
        raise ValidationError("reps must be positive")
    n_blocks = -(-reps // BLOCK_SIZE)
    sizes = [min(BLOCK_SIZE, reps - b * BLOCK_SIZE) for b in range(n_blocks)]
    want_trace = trace_path is not None

    def run(b):
        return _simulate_block(instance, z, mode, seed, b, sizes[b], want_trace)

    if threads > 1 and n_blocks > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, range(n_blocks)))
    else:
        results = [run(b) for b in range(n_blocks)]
    samples = np.concatenate([r[0] for r in results])
    if want_trace:
        _write_trace(trace_path, instance, results, sizes)
    mean = float(samples.mean())
    hw = float(Z_CRIT * samples.std(ddof=1) / math.sqrt(reps)) if reps > 1 else 0.0
    return RevenueStats(mean, hw, reps, seed, mode, samples)


def _write_trace(path, instance, results, sizes):
    fam = instance.family
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["replication", "period", "assortment", "sales", "revenue"])
        offset = 0
        for (_, trace), size in zip(results, sizes):
            rows = []
            for t, ks, sales, rev in trace:
                for r in range(size):
                    label = ";".join(f"{p.item}:{p.price}" for p in fam[ks[r]])
                    rows.append((offset + r, t, label, ";".join(f"{x:.12g}" for x in sales[r]), f"{rev[r]:.12g}"))
            rows.sort(key=lambda row: (row[0], row[1]))
            w.writerows(rows)
            offset += size


# ---------------------------------------------------------------------------
# Optimal dynamic program


@dataclass(frozen=True, eq=False)
class DpValue:
    """Optimal inventory-reactive policy.

    ``values[t][c]`` is the optimal expected revenue from period ``t`` on
    with inventory vector ``c`` (``values[T]`` is zero); ``actions[t][c]``
    the optimal family index.
    """

    values: np.ndarray
    actions: np.ndarray
    root: float


def optimal_dp(instance: Instance, mode: str = "dynamic", *, state_cap: int = DEFAULT_STATE_CAP) -> DpValue:
    """Backward induction over integral inventory vectors.

    Raises:
        ValidationError: demand is fractional or not single-purchase.
        StateSpaceTooLarge: more than ``state_cap`` inventory vectors.
    """
    if not instance.choice.single_purchase:
        raise ValidationError("the DP oracle needs integral single-purchase demand")
    if mode not in MODES:
        raise ValidationError(f"unknown substitution mode {mode!r}")
    caps = tuple(int(b) for b in instance.inventories)
    shape = tuple(c + 1 for c in caps)
    if math.prod(shape) > state_cap:
        raise StateSpaceTooLarge(f"{math.prod(shape)} inventory vectors exceed the cap of {state_cap}")
    T, fam = instance.horizon, instance.family
    V = np.zeros((T + 1,) + shape)
    A = np.zeros((T,) + shape, dtype=int)
    for t in range(T - 1, -1, -1):
        for c in itertools.product(*(range(x) for x in shape)):
            in_stock = {i for i, x in enumerate(c) if x > 0}
            best, arg = -math.inf, 0
            for k, s in enumerate(fam):
                if mode == "dynamic":
                    if fam.restrict(k, in_stock) != k:
                        continue  # offering an out-of-stock item is the same as dropping it
                val = V[(t + 1,) + c]
                if s:
                    for p, qp in zip(s, instance.choice.means(t, s)):
                        if c[p.item] == 0:
                            continue
                        nxt = list(c)
                        nxt[p.item] -= 1
                        val += qp * (float(instance.prices[p.price]) + V[(t + 1,) + tuple(nxt)] - V[(t + 1,) + c])
                if val > best + 1e-12:
                    best, arg = val, k
            V[(t,) + c] = best
            A[(t,) + c] = arg
    root = float(V[(0,) + caps])
    return DpValue(V, A, root)


# ---------------------------------------------------------------------------
# Upper-bound check


def upper_bound_check(value, opt_lp: float) -> bool:
    """Whether a policy value is consistent with the LP upper bound.

    Exact values pass iff ``value <= opt_lp + 1e-9``; ``RevenueStats`` pass
    iff ``mean - 4 * half_width <= opt_lp``.
    """
    if isinstance(value, RevenueStats):
        return value.mean - 4 * value.half_width <= opt_lp
    return float(value) <= opt_lp + 1e-9


def calendar_value(calendar, instance: Instance, mode: str = "static", *, reps: int = 10_000,
                   seed: int = 0, state_cap: int = DEFAULT_STATE_CAP, threads: int = 1):
    """Exact value when the state space allows it, otherwise a simulated mean.

    Returns ``(value, half_width, exact)``.
    """
    try:
        return exact_expected_revenue(calendar, instance, mode, state_cap=state_cap), 0.0, True
    except StateSpaceTooLarge:
        st = simulate(calendar, instance, mode, reps, seed, threads=threads)
        return st.mean, st.half_width, False


__all__ = [
    "DeterministicCalendar", "RandomizedCalendar", "RevenueStats", "DpValue",
    "exact_expected_revenue", "simulate", "optimal_dp", "upper_bound_check", "calendar_value",
]

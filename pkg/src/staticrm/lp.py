"""Deterministic (fluid) LP relaxations and their solutions.

Four relaxations are supported:

* ``cdlp-n``: one variable per (period, assortment); per-period weights sum to 1.
* ``cdlp-s``: one variable per assortment, for stationary demand.
* ``dlp-s``: single item, one variable per price, stationary demand.
* ``dlp-n``: single item, one variable per (period, price).

Every optimum upper-bounds the expected revenue of any policy, static or not.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import simplex
from .errors import NumericalError, ValidationError
from .model import Instance

SUPPORT_TOL = 1e-9
DEFAULT_VARIABLE_CAP = 100_000


@dataclass(frozen=True, eq=False)
class LinearProgram:
    """``max c @ x`` subject to ``A_ub @ x <= b_ub``, ``A_eq @ x == b_eq``, ``x >= 0``.

    Attributes:
        kind: One of ``"cdlp-n"``, ``"cdlp-s"``, ``"dlp-s"``, ``"dlp-n"``.
        labels: Per-variable key. ``(t, k)`` for cdlp-n (``k`` a family index),
            ``(k,)`` for cdlp-s, ``(j,)`` for dlp-s and ``(t, j)`` for dlp-n.
        row_names: One name per constraint row, inequality rows first.
    """

    kind: str
    instance: Instance
    c: np.ndarray
    A_ub: np.ndarray
    b_ub: np.ndarray
    A_eq: np.ndarray
    b_eq: np.ndarray
    labels: tuple
    row_names: tuple

    @property
    def n_vars(self) -> int:
        return int(self.c.size)

    def to_text(self) -> str:
        """Render in CPLEX LP file format (variable names ``x_<label>``)."""
        names = ["x_" + "_".join(str(v) for v in lab) for lab in self.labels]

        def expr(coefs):
            terms = [f"{'+' if a >= 0 else '-'} {abs(a):.12g} {nm}" for a, nm in zip(coefs, names) if a != 0]
            return " ".join(terms) if terms else "0 " + names[0]

        lines = [f"\\ {self.kind} for {self.instance.name or 'instance'}", "Maximize", f" obj: {expr(self.c)}", "Subject To"]
        mu = self.A_ub.shape[0]
        for r in range(mu):
            lines.append(f" {self.row_names[r]}: {expr(self.A_ub[r])} <= {self.b_ub[r]:.12g}")
        for r in range(self.A_eq.shape[0]):
            lines.append(f" {self.row_names[mu + r]}: {expr(self.A_eq[r])} = {self.b_eq[r]:.12g}")
        lines.append("End")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True, eq=False)
class LpSolution:
    """Basic optimal solution of a ``LinearProgram``.

    Attributes:
        x: Variable values in ``lp.labels`` order.
        objective: Optimal value, OPT_LP.
        basis: Indices of basic columns in the solver's standard form.
        contributions: Revenue attributed to each item, summing to ``objective``.
    """

    lp: LinearProgram
    x: np.ndarray
    objective: float
    basis: tuple
    contributions: np.ndarray

    @property
    def support(self) -> tuple:
        return tuple(self.lp.labels[k] for k in np.flatnonzero(self.x > SUPPORT_TOL))

    def period_weights(self) -> np.ndarray:
        """Solution as a ``T x |family|`` matrix of per-period assortment weights.

        Single-item solutions map price ``j`` to the assortment ``{(0, j)}``;
        any shortfall below 1 in a period is assigned to the empty assortment.
        """
        inst = self.lp.instance
        fam = inst.family
        T = inst.horizon
        z = np.zeros((T, len(fam)))
        kind = self.lp.kind
        for lab, v in zip(self.lp.labels, self.x):
            if kind == "cdlp-n":
                z[lab[0], lab[1]] += v
            elif kind == "cdlp-s":
                z[:, lab[0]] += v
            elif kind == "dlp-s":
                z[:, fam.index(((0, lab[0]),))] += v
            else:
                z[lab[0], fam.index(((0, lab[1]),))] += v
        z = np.maximum(z, 0.0)
        z[:, 0] += np.maximum(0.0, 1.0 - z.sum(axis=1))
        return z / z.sum(axis=1, keepdims=True)


@dataclass(frozen=True)
class TwoPriceSupport:
    """At most two prices carrying the DLP-S optimum; ``high`` has the larger price.

    ``high`` and ``low`` are price indices (equal for a one-price support,
    ``None`` when the optimum offers nothing).
    """

    high: int | None
    low: int | None
    x_high: float
    x_low: float


def _check_size(n_vars, cap):
    if n_vars > cap:
        raise ValidationError(f"LP would have {n_vars} variables, above the cap of {cap}")


def build_cdlp_n(instance: Instance, *, variable_cap: int = DEFAULT_VARIABLE_CAP) -> LinearProgram:
    """Choice-based LP with a separate assortment mix per period."""
    T, F, n = instance.horizon, len(instance.family), instance.n_items
    _check_size(T * F, variable_cap)
    c = np.zeros(T * F)
    A_ub = np.zeros((n, T * F))
    A_eq = np.zeros((T, T * F))
    for t in range(T):
        revenue, usage = instance.period_tables(t)
        c[t * F:(t + 1) * F] = revenue
        A_ub[:, t * F:(t + 1) * F] = usage
        A_eq[t, t * F:(t + 1) * F] = 1.0
    labels = tuple((t, k) for t in range(T) for k in range(F))
    rows = tuple(f"inv_{i}" for i in range(n)) + tuple(f"period_{t}" for t in range(T))
    return LinearProgram("cdlp-n", instance, c, A_ub, np.array(instance.inventories, float),
                         A_eq, np.ones(T), labels, rows)


def build_cdlp_s(instance: Instance, *, variable_cap: int = DEFAULT_VARIABLE_CAP) -> LinearProgram:
    """Choice-based LP for stationary demand: one assortment mix for every period."""
    if not instance.stationary:
        raise ValidationError("CDLP-S needs an instance flagged stationary")
    F, T = len(instance.family), instance.horizon
    _check_size(F, variable_cap)
    revenue, usage = instance.period_tables(0)
    labels = tuple((k,) for k in range(F))
    rows = tuple(f"inv_{i}" for i in range(instance.n_items)) + ("mix",)
    return LinearProgram("cdlp-s", instance, T * revenue, T * usage, np.array(instance.inventories, float),
                         np.ones((1, F)), np.ones(1), labels, rows)


def _single_item_prices(instance: Instance) -> list:
    if instance.n_items != 1:
        raise ValidationError("single-item LP needs exactly one item")
    return [j for j in range(instance.n_prices) if ((0, j),) in instance.family]


def single_item_means(instance: Instance, t: int, js) -> np.ndarray:
    return np.array([instance.q(t, [(0, j)])[0] for j in js])


def build_dlp_s(instance: Instance) -> LinearProgram:
    """Single-item pricing LP for stationary demand (price weights sum to at most 1)."""
    js = _single_item_prices(instance)
    if not instance.stationary:
        raise ValidationError("DLP-S needs an instance flagged stationary")
    T = instance.horizon
    q = single_item_means(instance, 0, js)
    p = instance.prices[js]
    A_ub = np.vstack([T * q, np.ones(len(js))])
    b_ub = np.array([instance.inventories[0], 1.0])
    return LinearProgram("dlp-s", instance, T * p * q, A_ub, b_ub, np.zeros((0, len(js))), np.zeros(0),
                         tuple((j,) for j in js), ("inv_0", "mix"))


def build_dlp_n(instance: Instance) -> LinearProgram:
    """Single-item pricing LP with a separate price mix per period."""
    js = _single_item_prices(instance)
    T, m = instance.horizon, len(js)
    c = np.zeros(T * m)
    A_ub = np.zeros((1 + T, T * m))
    for t in range(T):
        q = single_item_means(instance, t, js)
        c[t * m:(t + 1) * m] = instance.prices[js] * q
        A_ub[0, t * m:(t + 1) * m] = q
        A_ub[1 + t, t * m:(t + 1) * m] = 1.0
    b_ub = np.concatenate([[instance.inventories[0]], np.ones(T)])
    labels = tuple((t, j) for t in range(T) for j in js)
    rows = ("inv_0",) + tuple(f"period_{t}" for t in range(T))
    return LinearProgram("dlp-n", instance, c, A_ub, b_ub, np.zeros((0, T * m)), np.zeros(0), labels, rows)


def item_contributions(lp: LinearProgram, x: np.ndarray) -> np.ndarray:
    """Revenue each item contributes to the LP objective at ``x``."""
    inst = lp.instance
    if lp.kind in ("dlp-s", "dlp-n"):
        return np.array([float(lp.c @ x)])
    r = np.zeros(inst.n_items)
    T = inst.horizon
    for lab, v in zip(lp.labels, x):
        if v == 0:
            continue
        t, k = (lab[0], lab[1]) if lp.kind == "cdlp-n" else (0, lab[0])
        s = inst.family[k]
        if not s:
            continue
        scale = 1.0 if lp.kind == "cdlp-n" else T
        for p, q in zip(s, inst.choice.means(t, s)):
            r[p.item] += scale * v * inst.prices[p.price] * q
    return r


def solve_lp(lp: LinearProgram, tolerance: float = 1e-9, *, max_iter: int = 50_000) -> LpSolution:
    """Solve to a basic optimal solution and check feasibility residuals.

    Raises:
        NumericalError: the solver fails or the solution violates a row by
            more than ``tolerance`` after row scaling.
    """
    res = simplex.solve(lp.c, lp.A_ub, lp.b_ub, lp.A_eq if lp.A_eq.size else None,
                        lp.b_eq if lp.b_eq.size else None, max_iter=max_iter)
    x = res.x
    for A, b, eq in ((lp.A_ub, lp.b_ub, False), (lp.A_eq, lp.b_eq, True)):
        if not A.shape[0]:
            continue
        scale = np.maximum(np.abs(A).max(axis=1), 1e-300)
        viol = (A @ x - b) / scale
        bad = np.abs(viol) if eq else np.maximum(viol, 0.0)
        if bad.max() > tolerance:
            raise NumericalError(f"LP solution violates a constraint by {bad.max():.3g}")
    contributions = item_contributions(lp, x)
    return LpSolution(lp, x, res.objective, res.basis, contributions)


def two_price_support(solution: LpSolution) -> TwoPriceSupport:
    """Extract the (at most two) prices of a basic optimal DLP-S solution."""
    if solution.lp.kind != "dlp-s":
        raise ValidationError("two-price support is defined for DLP-S solutions")
    on = [(lab[0], float(v)) for lab, v in zip(solution.lp.labels, solution.x) if v > SUPPORT_TOL]
    if len(on) > 2:
        raise NumericalError(f"basic DLP-S solution has {len(on)} prices in its support")
    if not on:
        return TwoPriceSupport(None, None, 0.0, 0.0)
    on.sort()
    (h, xh), (l, xl) = on[0], on[-1]
    if h == l:
        return TwoPriceSupport(h, h, xh, 0.0)
    return TwoPriceSupport(h, l, xh, xl)


def solve_upper_bound(instance: Instance) -> LpSolution:
    """The natural LP bound: CDLP-S for stationary instances, CDLP-N otherwise."""
    lp = build_cdlp_s(instance) if instance.stationary else build_cdlp_n(instance)
    return solve_lp(lp)


__all__ = [
    "LinearProgram", "LpSolution", "TwoPriceSupport",
    "build_cdlp_n", "build_cdlp_s", "build_dlp_s", "build_dlp_n",
    "solve_lp", "item_contributions", "two_price_support", "solve_upper_bound",
]

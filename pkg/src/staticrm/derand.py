"""Turn a randomized calendar into a deterministic one, period by period.

Period ``t`` is fixed to the candidate assortment (weight above ``zeta``)
whose calendar -- earlier periods already fixed, later periods still
random -- has the highest estimated expected revenue. Estimates are exact
when the inventory state space is small enough and otherwise averages of
``K`` simulated runs, with all candidates of a period sharing the same
random numbers.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass

import numpy as np

from .calendar import DeterministicCalendar, RandomizedCalendar
from .errors import StateSpaceTooLarge, ValidationError
from .evaluate import DEFAULT_STATE_CAP, exact_expected_revenue, simulate
from .lp import solve_upper_bound
from .model import Instance

log = logging.getLogger(__name__)

DEFAULT_K_MAX = 10_000
TIE_TOL = 1e-12


def sample_count(instance: Instance, opt_lp: float, epsilon: float) -> int:
    """Runs per candidate: ``ceil(T^2 (sum b)^2 p_max^2 / OPT^2 / eps^2 * (ln n + ln T))``, at least 1.

    Raises:
        ValidationError: ``opt_lp <= 0`` or ``epsilon <= 0``.
    """
    if opt_lp <= 0:
        raise ValidationError("sample_count needs a positive LP optimum")
    if epsilon <= 0:
        raise ValidationError("epsilon must be positive")
    T = instance.horizon
    total_b = float(np.sum(instance.inventories))
    k = (T * total_b * instance.p_max / opt_lp) ** 2 / epsilon**2 * (math.log(instance.n_items) + math.log(T))
    return max(1, math.ceil(k))


@dataclass(frozen=True)
class DerandConfig:
    """Settings for ``derandomize``.

    Attributes:
        epsilon: Target additive loss (relative to OPT_LP) of the sampled variant.
        k: Fixed runs per candidate; ``None`` uses ``sample_count`` capped at ``k_max``.
        k_max: Cap on the automatic sample count. Capping voids the formal
            epsilon guarantee (a warning is logged).
        variant: ``"auto"`` (exact if the state space allows), ``"exact"`` or ``"sampled"``.
        zeta: Minimum weight for an assortment to be a candidate.
        log_path: Optional JSON-lines file receiving one record per period.
    """

    epsilon: float = 0.1
    seed: int = 0
    k: int | None = None
    k_max: int = DEFAULT_K_MAX
    mode: str = "static"
    variant: str = "auto"
    zeta: float = 1e-9
    state_cap: int = DEFAULT_STATE_CAP
    threads: int = 1
    log_path: str | None = None


def _period_seed(seed: int, t: int) -> int:
    return int(np.random.SeedSequence([seed, t, 0xDE4A]).generate_state(1)[0])


def _resolve_k(randomized, instance, config) -> int:
    if config.k is not None:
        if config.k < 1:
            raise ValidationError("k must be at least 1")
        return int(config.k)
    opt = randomized.meta.get("opt_lp")
    if opt is None:
        opt = solve_upper_bound(instance).objective
    if opt <= 0:
        return 1
    k = sample_count(instance, opt, config.epsilon)
    if k > config.k_max:
        log.warning("sample count %d capped at k_max=%d; the epsilon guarantee no longer applies", k, config.k_max)
        return config.k_max
    return k


def derandomize_with_log(randomized: RandomizedCalendar, instance: Instance, config: DerandConfig = DerandConfig()):
    """Like ``derandomize`` but also returns the per-period decision records."""
    if config.variant not in ("auto", "exact", "sampled"):
        raise ValidationError(f"unknown de-randomization variant {config.variant!r}")
    variant = config.variant
    if variant == "auto":
        try:
            exact_expected_revenue(randomized, instance, config.mode, state_cap=config.state_cap)
            variant = "exact"
        except StateSpaceTooLarge:
            variant = "sampled"
    k = _resolve_k(randomized, instance, config) if variant == "sampled" else None

    def estimate(cal, t):
        if variant == "exact":
            return exact_expected_revenue(cal, instance, config.mode, state_cap=config.state_cap)
        return simulate(cal, instance, config.mode, k, _period_seed(config.seed, t), threads=config.threads).mean

    current = randomized
    records = []
    chosen_idx = []
    for t in range(randomized.horizon):
        cands = current.support(t, config.zeta)
        if not cands:  # every weight below zeta: fall back to the heaviest
            cands = [int(np.argmax(current.z[t]))]
        if len(cands) == 1:
            values = [None]
            pick = cands[0]
        else:
            values = [estimate(current.with_fixed(t, c), t) for c in cands]
            best = max(values)
            pick = cands[next(n for n, v in enumerate(values) if v >= best - TIE_TOL * max(1.0, abs(best)))]
        current = current.with_fixed(t, pick)
        chosen_idx.append(pick)
        records.append({
            "period": t,
            "variant": variant,
            "k": k,
            "candidates": [[list(p) for p in instance.family[c]] for c in cands],
            "estimates": values,
            "chosen": [list(p) for p in instance.family[pick]],
        })
    if config.log_path:
        with open(config.log_path, "w") as fh:
            for rec in records:
                fh.write(json.dumps(rec) + "\n")
    meta = {key: v for key, v in randomized.meta.items() if key in ("opt_lp", "lp")}
    meta.update(source=randomized.name, variant=variant, k=k, epsilon=config.epsilon)
    name = "derand-" + randomized.name
    return DeterministicCalendar(instance.family, chosen_idx, name, meta), records


def derandomize(randomized: RandomizedCalendar, instance: Instance, config: DerandConfig = DerandConfig()) -> DeterministicCalendar:
    """Fix each period of ``randomized`` to its best candidate assortment, in time order."""
    return derandomize_with_log(randomized, instance, config)[0]

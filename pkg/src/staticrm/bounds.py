"""Closed-form performance ratios of the static policies."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import ValidationError

EXACT_T_LIMIT = 400


def _binom_log_pmf(T: int, k: int, p: float) -> float:
    if p <= 0.0:
        return 0.0 if k == 0 else -math.inf
    if p >= 1.0:
        return 0.0 if k == T else -math.inf
    return (math.lgamma(T + 1) - math.lgamma(k + 1) - math.lgamma(T - k + 1)
            + k * math.log(p) + (T - k) * math.log1p(-p))


def delta_apx(T: int, b: float) -> float:
    """``E[min(Bin(T, b/T), b)] / b``: the guarantee of the stationary randomized calendar.

    Computed as ``1 - sum_{k < b} (b - k) / b * P(X = k)``, which only needs
    the lower tail. Integer ``b`` with moderate ``T`` is summed in exact
    rational arithmetic; otherwise log-space binomial coefficients are used.

    Raises:
        ValidationError: ``T < 1``, ``b <= 0`` or ``b > T``.
    """
    T = int(T)
    if T < 1 or b <= 0:
        raise ValidationError("delta_apx needs T >= 1 and b > 0")
    if b > T:
        raise ValidationError(f"delta_apx needs b <= T (got b={b}, T={T})")
    if float(b).is_integer() and T <= EXACT_T_LIMIT:
        bi = int(b)
        p = Fraction(bi, T)
        short = sum(Fraction(bi - k, bi) * math.comb(T, k) * p**k * (1 - p) ** (T - k) for k in range(bi))
        return float(1 - short)
    p = b / T
    short = math.fsum((b - k) / b * math.exp(_binom_log_pmf(T, k, p)) for k in range(math.ceil(b)))
    return 1.0 - short


def poisson_floor(b: float) -> float:
    """``1 - b^b e^{-b} / b!``: the limit of ``delta_apx(T, b)`` as ``T`` grows."""
    if b <= 0:
        raise ValidationError("poisson_floor needs b > 0")
    return 1.0 - math.exp(b * math.log(b) - b - math.lgamma(b + 1))


def reservation_delta(b_min: float, *, clip: bool = True) -> float:
    """Probability ``sqrt(3 ln b / b)`` of offering nothing in the large-inventory policy.

    The raw value exceeds 1 for ``b_min`` below about 4.54; with ``clip`` it
    is truncated to ``[0, 1]``.
    """
    if b_min < 1:
        raise ValidationError("reservation_delta needs b_min >= 1")
    d = math.sqrt(3.0 * math.log(b_min) / b_min)
    return min(1.0, max(0.0, d)) if clip else d


@dataclass(frozen=True)
class GuaranteeReport:
    """Worst-case ratios to the LP bound that apply to an instance.

    Attributes:
        delta_apx: Stationary calendar ratio at ``(T, b_min)``.
        poisson_floor: Horizon-free lower bound on ``delta_apx``.
        reservation_delta: Clipped empty-assortment probability of the
            large-inventory policy.
        large_inventory_ratio: ``1 - reservation_delta`` (meaningful for b_min >= 6).
        tags: Which guarantees apply (``stationary``, ``half``, ``large-inventory``).
    """

    delta_apx: float
    poisson_floor: float
    reservation_delta: float
    large_inventory_ratio: float
    tags: tuple

    def to_json(self) -> dict:
        return {"delta_apx": self.delta_apx, "poisson_floor": self.poisson_floor,
                "reservation_delta": self.reservation_delta,
                "large_inventory_ratio": self.large_inventory_ratio, "tags": list(self.tags)}


def guarantee_report(instance) -> GuaranteeReport:
    b, T = instance.b_min, instance.horizon
    d_apx = delta_apx(T, min(b, T))
    delta = reservation_delta(b)
    tags = ["half"]
    if instance.stationary:
        tags.insert(0, "stationary")
    if b >= 6:
        tags.append("large-inventory")
    return GuaranteeReport(d_apx, poisson_floor(b), delta, 1.0 - delta, tuple(tags))

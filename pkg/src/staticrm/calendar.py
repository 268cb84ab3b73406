"""Static calendars: fixed or per-period randomized assortment sequences."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .model import AssortmentFamily

WEIGHT_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class DeterministicCalendar:
    """Assortment ``family[indices[t]]`` is offered in period ``t``."""

    family: AssortmentFamily
    indices: tuple
    name: str = "calendar"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        idx = tuple(int(k) for k in self.indices)
        if not idx:
            raise ValidationError("calendar needs at least one period")
        if any(not 0 <= k < len(self.family) for k in idx):
            raise ValidationError("calendar refers to an assortment outside the family")
        object.__setattr__(self, "indices", idx)

    @property
    def horizon(self) -> int:
        return len(self.indices)

    def assortments(self) -> list:
        return [self.family[k] for k in self.indices]

    def weights(self) -> np.ndarray:
        z = np.zeros((self.horizon, len(self.family)))
        z[np.arange(self.horizon), self.indices] = 1.0
        return z

    def to_json(self) -> dict:
        return {
            "policy": self.name,
            "kind": "deterministic",
            "calendar": [[list(p) for p in s] for s in self.assortments()],
            **self.meta,
        }


@dataclass(frozen=True, eq=False)
class RandomizedCalendar:
    """Assortment ``family[k]`` is offered in period ``t`` with probability ``z[t, k]``.

    Draws are independent across periods.
    """

    family: AssortmentFamily
    z: np.ndarray
    name: str = "randomized"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        z = np.array(self.z, dtype=float)
        if z.ndim != 2 or z.shape[1] != len(self.family) or z.shape[0] < 1:
            raise ValidationError("calendar weights must be a T x |family| matrix")
        if (z < -WEIGHT_TOL).any() or np.abs(z.sum(axis=1) - 1.0).max() > 1e-7:
            raise ValidationError("each period's weights must be a probability vector")
        z = np.maximum(z, 0.0)
        z /= z.sum(axis=1, keepdims=True)
        z.setflags(write=False)
        object.__setattr__(self, "z", z)

    @property
    def horizon(self) -> int:
        return self.z.shape[0]

    def weights(self) -> np.ndarray:
        return self.z

    def support(self, t: int, threshold: float = WEIGHT_TOL) -> list:
        """Family indices with weight above ``threshold`` in period ``t``, canonical order."""
        return [int(k) for k in np.flatnonzero(self.z[t] > threshold)]

    def with_fixed(self, t: int, k: int) -> "RandomizedCalendar":
        """Copy with period ``t`` fixed to assortment ``k``."""
        z = self.z.copy()
        z[t] = 0.0
        z[t, k] = 1.0
        return RandomizedCalendar(self.family, z, self.name, dict(self.meta))

    def to_json(self) -> dict:
        periods = []
        for t in range(self.horizon):
            periods.append([
                {"assortment": [list(p) for p in self.family[k]], "prob": float(self.z[t, k])}
                for k in self.support(t)
            ])
        return {"policy": self.name, "kind": "randomized", "calendar": periods, **self.meta}


Calendar = DeterministicCalendar | RandomizedCalendar


def is_deterministic(cal) -> bool:
    return isinstance(cal, DeterministicCalendar)


def dumps(cal) -> str:
    return json.dumps(cal.to_json(), indent=2, sort_keys=False)


def calendar_from_json(data: dict, family: AssortmentFamily):
    """Inverse of ``to_json`` given the family the calendar was built on."""
    name = data.get("policy", "calendar")
    meta = {k: v for k, v in data.items() if k not in ("policy", "kind", "calendar")}
    if data.get("kind", "deterministic") == "deterministic":
        return DeterministicCalendar(family, [family.index(s) for s in data["calendar"]], name, meta)
    z = np.zeros((len(data["calendar"]), len(family)))
    for t, period in enumerate(data["calendar"]):
        for entry in period:
            z[t, family.index(entry["assortment"])] += entry["prob"]
    return RandomizedCalendar(family, z, name, meta)

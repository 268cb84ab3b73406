"""Benchmark grids: policies x load factors x no-purchase weights, written as CSV."""

from __future__ import annotations

import csv
import io
import json
import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from . import lp as lpmod
from .config import build_instance, load_instance
from .derand import DEFAULT_K_MAX, DerandConfig, derandomize
from .errors import ValidationError
from .evaluate import optimal_dp, simulate
from .fixtures import ALPHAS, NO_PURCHASE_PAIRS, load_fixture, synthetic_instance
from .policies import build_policy

log = logging.getLogger(__name__)

POLICIES = ("lp-ub", "myopic", "lp-sol", "alg1", "alg2", "alg3", "alg5", "alg6",
            "derand-lp", "derand-alg2", "derand-alg3", "optimal-dp")
DERAND_BASE = {"derand-lp": "lp-sol", "derand-alg2": "alg2", "derand-alg3": "alg3"}
HEADER = ("instance", "alpha", "v0L", "v0H", "policy", "mean", "ci_half", "lp_ub", "pct_of_ub", "reps", "seed")
NA = "NA"


@dataclass(frozen=True)
class ExperimentSpec:
    """A grid of benchmark cells.

    Attributes:
        instance: ``{"synthetic": {"setting": ..., "gap": ...}}`` to sweep
            the mixture-MNL family over ``alphas`` x ``no_purchase``;
            ``{"fixture": name, "params": {...}}``; ``{"path": file}``; or an
            inline instance description.
        threads: Worker threads over grid cells (results do not depend on it).
    """

    instance: dict
    policies: tuple = ()
    alphas: tuple = ALPHAS
    no_purchase: tuple = NO_PURCHASE_PAIRS
    reps: int = 10_000
    seed: int = 0
    mode: str = "static"
    epsilon: float = 0.1
    k_max: int = DEFAULT_K_MAX
    threads: int = 1
    output: str | None = None

    def __post_init__(self):
        unknown = [p for p in self.policies if p not in POLICIES]
        if unknown:
            raise ValidationError(f"unknown policies {unknown}; choose from {', '.join(POLICIES)}")
        if self.reps < 1:
            raise ValidationError("reps must be positive")

    @classmethod
    def from_json(cls, data: dict, **overrides) -> "ExperimentSpec":
        data = {**data, **{k: v for k, v in overrides.items() if v is not None}}
        known = set(cls.__dataclass_fields__)
        extra = set(data) - known
        if extra:
            raise ValidationError(f"unknown experiment keys: {', '.join(sorted(extra))}")
        if "instance" not in data:
            raise ValidationError("experiment spec needs an 'instance'")
        for key in ("policies", "alphas"):
            if key in data:
                data[key] = tuple(data[key])
        if "no_purchase" in data:
            data["no_purchase"] = tuple(tuple(float(x) for x in pair) for pair in data["no_purchase"])
        return cls(**data)


def _cells(spec: ExperimentSpec) -> list:
    """``(label, alpha, v0, instance)`` per grid point, in spec order."""
    ref = spec.instance
    if "synthetic" in ref:
        syn = ref["synthetic"]
        setting, gap = syn.get("setting", "stationary"), syn.get("gap", "small")
        return [(f"synthetic-{setting}-{gap}", a, v0, synthetic_instance(setting, gap, a, v0))
                for v0 in spec.no_purchase for a in spec.alphas]
    if "fixture" in ref:
        inst = load_fixture(ref["fixture"], **ref.get("params", {})).instance
    elif "path" in ref:
        inst = load_instance(ref["path"])
    else:
        inst = build_instance(ref)
    return [(inst.name or "instance", None, None, inst)]


def _incompatible(policy: str, inst) -> str | None:
    if policy in ("alg5", "alg6") and inst.n_items != 1:
        return "needs a single item"
    if policy in ("alg1", "alg5") and not inst.stationary:
        return "needs stationary demand"
    if policy == "optimal-dp" and not inst.choice.single_purchase:
        return "needs integral single-purchase demand"
    return None


def _fmt(x, digits=4):
    return NA if x is None else f"{x:.{digits}f}"


def _run_cell(spec: ExperimentSpec, cell) -> list:
    label, alpha, v0, inst = cell
    sol = lpmod.solve_upper_bound(inst)
    ub = sol.objective
    rows = []
    base_cache: dict = {}
    for policy in spec.policies:
        mean = half = None
        why = _incompatible(policy, inst)
        if why:
            log.warning("%s on %s skipped: %s", policy, label, why)
        elif policy == "lp-ub":
            mean, half = ub, 0.0
        elif policy == "optimal-dp":
            mean, half = optimal_dp(inst, "dynamic" if spec.mode == "dynamic" else "static").root, 0.0
        else:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                if policy in DERAND_BASE:
                    base = DERAND_BASE[policy]
                    if base not in base_cache:
                        base_cache[base] = build_policy(base, inst, sol)
                    cfg = DerandConfig(epsilon=spec.epsilon, seed=spec.seed, k_max=spec.k_max, mode=spec.mode)
                    cal = derandomize(base_cache[base], inst, cfg)
                else:
                    cal = build_policy(policy, inst, sol, **({"mode": spec.mode, "seed": spec.seed} if policy == "alg5" else {}))
                    base_cache[policy] = cal
            st = simulate(cal, inst, spec.mode, spec.reps, spec.seed)
            mean, half = st.mean, st.half_width
        pct = None if mean is None or ub <= 0 else 100.0 * mean / ub
        v0L, v0H = (None, None) if v0 is None else v0
        rows.append((label, _fmt(alpha, 2), _fmt(v0L, 1), _fmt(v0H, 1), policy,
                     _fmt(mean), _fmt(half), _fmt(ub), _fmt(pct, 2), str(spec.reps), str(spec.seed)))
    return rows


def run_experiment(spec: ExperimentSpec) -> list:
    """Run every (instance, alpha, no-purchase, policy) cell; rows follow spec order."""
    cells = _cells(spec)
    if spec.threads > 1 and len(cells) > 1:
        with ThreadPoolExecutor(max_workers=spec.threads) as pool:
            chunks = list(pool.map(lambda c: _run_cell(spec, c), cells))
    else:
        chunks = [_run_cell(spec, c) for c in cells]
    rows = [r for chunk in chunks for r in chunk]
    if spec.output:
        with open(spec.output, "w", newline="") as fh:
            write_csv(rows, fh)
    return rows


def write_csv(rows, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(HEADER)
    w.writerows(rows)


def to_csv(rows) -> str:
    buf = io.StringIO()
    write_csv(rows, buf)
    return buf.getvalue()


def load_spec(path: str, **overrides) -> ExperimentSpec:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON ({exc})") from None
    return ExperimentSpec.from_json(data, **overrides)


TABLE_SPECS = {
    "stationary": {"synthetic": {"setting": "stationary", "gap": "small"}},
    "nonstationary-small": {"synthetic": {"setting": "nonstationary", "gap": "small"}},
    "nonstationary-big": {"synthetic": {"setting": "nonstationary", "gap": "big"}},
}

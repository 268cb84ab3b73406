"""Command-line interface.

Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings

from . import lp as lpmod
from .assumptions import (
    check_instance_cdf_order, check_instance_truncation, check_substitutability,
)
from .bounds import guarantee_report
from .calendar import RandomizedCalendar, calendar_from_json
from .config import load_instance
from .derand import DEFAULT_K_MAX, DerandConfig, derandomize_with_log
from .errors import NumericalError, StateSpaceTooLarge, ValidationError
from .evaluate import exact_expected_revenue, simulate
from .experiment import POLICIES, load_spec, run_experiment, to_csv
from .fixtures import list_fixtures, load_fixture, verify_fixture
from .policies import build_policy

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3
LP_KINDS = ("auto", "cdlp-n", "cdlp-s", "dlp-s", "dlp-n")
PLAN_POLICIES = tuple(p for p in POLICIES if p not in ("lp-ub", "optimal-dp"))


def _param(text: str):
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    key, raw = text.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key, value


def _add_instance_args(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--config", help="instance description (JSON)")
    g.add_argument("--fixture", help="bundled fixture name (see the 'fixtures' command)")
    p.add_argument("--param", action="append", type=_param, default=[], metavar="KEY=VALUE",
                   help="fixture parameter, e.g. --param alpha=0.6 (repeatable)")


def _add_run_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reps", type=int, default=10_000)
    p.add_argument("--mode", choices=("static", "dynamic"), default="static")
    p.add_argument("--threads", type=int, default=1)


def _add_derand_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--k-max", type=int, default=DEFAULT_K_MAX)
    p.add_argument("--k", type=int, default=None, help="fixed runs per candidate (overrides the formula)")
    p.add_argument("--variant", choices=("auto", "exact", "sampled"), default="auto")


def _instance(args):
    if args.config:
        return load_instance(args.config)
    return load_fixture(args.fixture, **dict(args.param)).instance


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _policy(args, inst, name):
    if name.startswith("derand-"):
        base = {"derand-lp": "lp-sol"}.get(name, name[len("derand-"):])
        cfg = DerandConfig(epsilon=args.epsilon, seed=args.seed, k=args.k, k_max=args.k_max,
                           mode=args.mode, variant=args.variant, threads=args.threads,
                           log_path=getattr(args, "log", None))
        return derandomize_with_log(build_policy(base, inst), inst, cfg)[0]
    opts = {"mode": args.mode, "seed": args.seed} if name == "alg5" else {}
    return build_policy(name, inst, **opts)


def cmd_solve(args) -> int:
    inst = _instance(args)
    kind = args.lp
    if kind == "auto":
        kind = "cdlp-s" if inst.stationary else "cdlp-n"
    build = {"cdlp-n": lpmod.build_cdlp_n, "cdlp-s": lpmod.build_cdlp_s,
             "dlp-s": lpmod.build_dlp_s, "dlp-n": lpmod.build_dlp_n}[kind]
    prog = build(inst)
    sol = lpmod.solve_lp(prog)
    if args.lp_file:
        with open(args.lp_file, "w") as fh:
            fh.write(prog.to_text())
    support = [{"label": list(lab), "value": float(sol.x[k])}
               for k, lab in enumerate(prog.labels) if sol.x[k] > lpmod.SUPPORT_TOL]
    if kind in ("cdlp-n", "cdlp-s"):
        for entry in support:
            entry["assortment"] = [list(p) for p in inst.family[entry["label"][-1]]]
    out = {"lp": kind, "objective": sol.objective, "contributions": [float(v) for v in sol.contributions],
           "support": support, "guarantees": guarantee_report(inst).to_json()}
    _emit(json.dumps(out, indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_plan(args) -> int:
    inst = _instance(args)
    cal = _policy(args, inst, args.policy)
    _emit(json.dumps(cal.to_json(), indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    inst = _instance(args)
    if args.calendar:
        with open(args.calendar) as fh:
            cal = calendar_from_json(json.load(fh), inst.family)
    else:
        cal = _policy(args, inst, args.policy)
    st = simulate(cal, inst, args.mode, args.reps, args.seed, threads=args.threads, trace_path=args.trace)
    out = {"policy": cal.name, **st.to_json()}
    if args.exact:
        try:
            out["exact"] = exact_expected_revenue(cal, inst, args.mode)
        except StateSpaceTooLarge as exc:
            out["exact"] = None
            out["exact_error"] = str(exc)
    _emit(json.dumps(out, indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_derandomize(args) -> int:
    inst = _instance(args)
    base = build_policy(args.policy, inst)
    if not isinstance(base, RandomizedCalendar):
        raise ValidationError(f"{args.policy} is already deterministic")
    cfg = DerandConfig(epsilon=args.epsilon, seed=args.seed, k=args.k, k_max=args.k_max, mode=args.mode,
                       variant=args.variant, threads=args.threads, log_path=args.log)
    cal, _ = derandomize_with_log(base, inst, cfg)
    _emit(json.dumps(cal.to_json(), indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_bench(args) -> int:
    spec = load_spec(args.spec, seed=args.seed, reps=args.reps, threads=args.threads,
                     epsilon=args.epsilon, k_max=args.k_max, mode=args.mode)
    rows = run_experiment(spec)
    text = to_csv(rows)
    _emit(text, args.out or spec.output)
    return EXIT_OK


def cmd_fixtures(args) -> int:
    if not args.name:
        for name in list_fixtures():
            print(name)
        return EXIT_OK
    fx = load_fixture(args.name, **dict(args.param))
    out = {"name": fx.name, "description": " ".join(fx.description.split()),
           "expected": {k: {"value": e.value, "origin": e.origin, "note": e.note} for k, e in fx.expected.items()}}
    status = EXIT_OK
    if args.verify:
        results = verify_fixture(fx)
        out["verified"] = {r.key: {"computed": r.computed, "ok": r.ok} for r in results}
        if not all(r.ok for r in results):
            status = EXIT_NUMERICAL
    _emit(json.dumps(out, indent=2) + "\n", args.out)
    return status


def cmd_check(args) -> int:
    inst = _instance(args)
    subs = check_substitutability(inst.choice, inst.family)
    trunc = check_instance_truncation(inst)
    report = {
        "substitutability": {"ok": not subs, "violations": [
            {"period": v.period, "larger": [list(p) for p in v.larger], "smaller": [list(p) for p in v.smaller],
             "product": list(v.product), "q_larger": v.q_larger, "q_smaller": v.q_smaller} for v in subs]},
        "truncation_ratio": {"ok": not trunc, "violations": [
            {"item": v.item, "high": [v.high[0], [list(p) for p in v.high[1]]],
             "low": [v.low[0], [list(p) for p in v.low[1]]], "worst_c": v.worst_c,
             "worst_margin": v.worst_margin, "same_assortment": v.same_assortment} for v in trunc]},
    }
    if inst.n_items == 1:
        crossing = check_instance_cdf_order(inst)
        report["cdf_order"] = {"ok": not crossing, "crossing_pairs": [list(c) for c in crossing]}
    _emit(json.dumps(report, indent=2) + "\n", args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="staticrm", description="Static price/assortment calendars.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="build and solve an LP relaxation")
    _add_instance_args(p)
    p.add_argument("--lp", choices=LP_KINDS, default="auto")
    p.add_argument("--lp-file", help="also write the LP in CPLEX LP format")
    p.add_argument("--out")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("plan", help="emit a policy's calendar as JSON")
    _add_instance_args(p)
    p.add_argument("--policy", choices=PLAN_POLICIES, required=True)
    _add_run_args(p)
    _add_derand_args(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("simulate", help="simulate a policy or a saved calendar")
    _add_instance_args(p)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--policy", choices=PLAN_POLICIES)
    g.add_argument("--calendar", help="calendar JSON written by 'plan'")
    _add_run_args(p)
    _add_derand_args(p)
    p.add_argument("--exact", action="store_true", help="also report the exact expected revenue")
    p.add_argument("--trace", help="write per-replication traces to this CSV")
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("derandomize", help="de-randomize a randomized policy")
    _add_instance_args(p)
    p.add_argument("--policy", choices=("lp-sol", "alg1", "alg2", "alg3"), default="lp-sol")
    _add_run_args(p)
    _add_derand_args(p)
    p.add_argument("--log", help="write the per-period decision log (JSON lines)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_derandomize)

    p = sub.add_parser("bench", help="run an experiment spec and write CSV")
    p.add_argument("--spec", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--reps", type=int)
    p.add_argument("--mode", choices=("static", "dynamic"))
    p.add_argument("--threads", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--k-max", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("fixtures", help="list fixtures, or show/verify one")
    p.add_argument("name", nargs="?")
    p.add_argument("--param", action="append", type=_param, default=[], metavar="KEY=VALUE")
    p.add_argument("--verify", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_fixtures)

    p = sub.add_parser("check-assumptions", help="check substitutability, truncation ratio and CDF order")
    _add_instance_args(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    if not args.verbose:
        warnings.simplefilter("ignore")
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (OSError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())

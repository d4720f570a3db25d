"""Command-line front end.

Subcommands: solve, verify, enumerate, count, discretize, bench, gen.
Exit codes: 0 success/optimal, 1 usage or data error, 2 resource-limited
partial result.  Defaults can be overridden through KSUBMAX_* environment
variables; every solve echoes its resolved configuration for
reproducibility.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__
from ._kernels import active_kernel_name
from .dcg import DcgConfig, FeasibleRegion, solve
from .instances import (
    InstanceSpec,
    RawReadings,
    discretize,
    load_instance,
    sample_instance,
    save_instance,
    synthetic_readings,
)
from .ksets import GroundSet
from .oracles import (
    coverage_oracle,
    entropy_oracle,
    modular_oracle,
    table_oracle,
)
from .verify import (
    InfeasibleRegionError,
    check_k_submodular,
    check_k_submodular_marginals,
    check_monotone,
    count_exact_feasible,
    count_feasible_upto,
    exhaustive_max,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_LIMITED = 2


def _env(name: str, default):
    raw = os.environ.get(f"KSUBMAX_{name}")
    if raw is None:
        return default
    if isinstance(default, float):
        return float(raw)
    if isinstance(default, int) and not isinstance(default, bool):
        return int(raw)
    return raw


def _parse_int_list(text: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in text.split(",") if tok.strip())


def _add_oracle_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--instance", help="entropy instance JSON produced by gen")
    p.add_argument(
        "--observations",
        help="entropy observations CSV (header location,sample,f1,...,fk)",
    )
    p.add_argument(
        "--oracle",
        choices=["entropy", "modular", "coverage", "table"],
        default="entropy",
        help="oracle kind (entropy reads --instance or --observations)",
    )
    p.add_argument("--weights", help="JSON [k][n] weight matrix for a modular oracle")
    p.add_argument("--covers", help="JSON coverage description")
    p.add_argument("--table", help="JSON table oracle {k, n, values}")


def _load_oracle(args):
    """Returns (oracle, region-or-None, metadata dict)."""
    if args.oracle == "entropy":
        if args.instance:
            spec, obs = load_instance(args.instance)
            oracle = entropy_oracle(obs)
            region = FeasibleRegion(per_type_bounds=spec.bounds)
            meta = {"kind": "entropy", "n": spec.n, "k": spec.k, "t": spec.t,
                    "B": list(spec.bounds), "instance": args.instance}
            return oracle, region, meta
        if args.observations:
            from .oracles import ObservationMatrix

            with open(args.observations) as fh:
                obs = ObservationMatrix.from_csv(fh.read())
            oracle = entropy_oracle(obs)
            meta = {"kind": "entropy", "n": obs.n_locations, "k": obs.k_features,
                    "t": obs.t_samples, "observations": args.observations}
            return oracle, None, meta
        raise ValueError("--oracle entropy requires --instance or --observations")
    if args.oracle == "modular":
        if not args.weights:
            raise ValueError("--oracle modular requires --weights")
        with open(args.weights) as fh:
            doc = json.load(fh)
        weights = doc["weights"] if isinstance(doc, dict) else doc
        oracle = modular_oracle(weights)
        meta = {"kind": "modular", "n": oracle.ground.n, "k": oracle.ground.k, "t": None}
        return oracle, None, meta
    if args.oracle == "coverage":
        if not args.covers:
            raise ValueError("--oracle coverage requires --covers")
        with open(args.covers) as fh:
            doc = json.load(fh)
        oracle = coverage_oracle(
            doc["universe_size"], doc["covers"], doc.get("item_weights")
        )
        meta = {"kind": "coverage", "n": oracle.ground.n, "k": oracle.ground.k, "t": None}
        return oracle, None, meta
    if not args.table:
        raise ValueError("--oracle table requires --table")
    with open(args.table) as fh:
        doc = json.load(fh)
    ground = GroundSet(n=doc["n"], k=doc["k"])
    values = {
        tuple(int(v) for v in key.split(",")): float(val)
        for key, val in doc["values"].items()
    }
    oracle = table_oracle(ground, values)
    meta = {"kind": "table", "n": ground.n, "k": ground.k, "t": None}
    return oracle, None, meta


def _region_from_args(args, ground: GroundSet, default: FeasibleRegion | None):
    if getattr(args, "B", None):
        return FeasibleRegion(per_type_bounds=_parse_int_list(args.B))
    if getattr(args, "total", None) is not None:
        return FeasibleRegion(total_bound=args.total)
    if default is not None:
        return default
    return FeasibleRegion()


def cmd_solve(args) -> int:
    oracle, default_region, meta = _load_oracle(args)
    region = _region_from_args(args, oracle.ground, default_region)
    config = DcgConfig(
        epsilon=args.epsilon, time_limit=args.time_limit, xi_policy=args.xi_policy
    )
    report = solve(oracle, region, config)
    meta["B"] = list(region.per_type_bounds) if region.per_type_bounds else None
    meta["evaluations"] = oracle.evaluations
    payload = {
        "report": report.to_dict(),
        "config": config.resolved(oracle),
        "oracle": meta,
        "kernel": active_kernel_name(),
    }
    if args.format == "json":
        print(json.dumps(payload, indent=2))
    elif args.format == "csv":
        print("n,t,B,time_s,cuts,nodes,end_gap")
        bounds = region.per_type_bounds
        print(report.csv_row(oracle.ground.n, meta.get("t"), bounds))
    else:
        print(f"status     : {report.status}")
        print(f"incumbent  : {report.incumbent}")
        print(f"value      : {report.lb:.9g}")
        print(f"bounds     : lb={report.lb:.9g} ub={report.ub:.9g} gap={report.gap:.3e}")
        print(f"cuts/nodes : {report.cuts_added}/{report.total_bb_nodes}")
        print(f"time       : {report.wall_time:.3f}s over {report.iterations} iterations")
    return EXIT_OK if report.status == "optimal" else EXIT_LIMITED


_CHECKS = {
    "ksub": check_k_submodular,
    "marginals": check_k_submodular_marginals,
    "monotone": check_monotone,
}


def cmd_verify(args) -> int:
    oracle, _, meta = _load_oracle(args)
    names = [tok.strip() for tok in args.checks.split(",") if tok.strip()]
    for name in names:
        if name not in _CHECKS:
            raise ValueError(f"unknown check {name!r}; pick from {sorted(_CHECKS)}")
    size = (oracle.ground.k + 1) ** oracle.ground.n
    if size > args.cap and not args.sample:
        raise ValueError(
            f"{size} k-sets exceed the cap of {args.cap}; rerun with --sample "
            "to use randomized pair sampling"
        )
    rng = np.random.default_rng(args.seed)
    checks = {}
    for name in names:
        checks[name] = _CHECKS[name](oracle, cap=args.cap, rng=rng)
    passed = all(rep.passed for rep in checks.values())
    payload = {
        "passed": passed,
        "checks": {
            name: json.loads(rep.to_json()) for name, rep in checks.items()
        },
    }
    if args.format == "json":
        print(json.dumps(payload, indent=2))
    else:
        for name, rep in checks.items():
            line = "pass" if rep.passed else f"FAIL witness={rep.witness}"
            extra = " (sampled)" if rep.sampled else ""
            print(f"{name:10s}: {line} [{rep.checked_pairs} checks]{extra}")
    return EXIT_OK if passed else EXIT_ERROR


def cmd_enumerate(args) -> int:
    oracle, default_region, meta = _load_oracle(args)
    region = _region_from_args(args, oracle.ground, default_region)
    try:
        res = exhaustive_max(oracle, region, budget=args.budget)
    except InfeasibleRegionError as exc:
        raise ValueError(str(exc))
    payload = {
        "value": res.value,
        "argmax": list(res.kset.labels),
        "argmax_notation": str(res.kset),
        "evaluations": res.evaluations,
        "complete": res.complete,
    }
    if args.format == "json":
        print(json.dumps(payload, indent=2))
    else:
        flag = "" if res.complete else " (incomplete: budget exhausted)"
        print(f"max value  : {res.value:.9g}{flag}")
        print(f"argmax     : {res.kset}")
        print(f"evaluations: {res.evaluations}")
    return EXIT_OK if res.complete else EXIT_LIMITED


def cmd_count(args) -> int:
    bounds = _parse_int_list(args.B)
    if args.upto:
        value = count_feasible_upto(args.n, args.k, bounds)
    else:
        value = count_exact_feasible(args.n, args.k, bounds)
    if args.format == "json":
        print(json.dumps({"count": str(value), "approx": float(value)}))
    else:
        print(value)
    return EXIT_OK


def cmd_discretize(args) -> int:
    with open(args.raw) as fh:
        raw = RawReadings.from_csv(fh.read())
    obs = discretize(raw, _parse_int_list(args.bins))
    text = obs.to_csv()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_gen(args) -> int:
    bins = _parse_int_list(args.bins) if args.bins else (2,) * args.k
    raw = synthetic_readings(
        n_locations=args.pool_locations,
        t_samples=args.pool_samples,
        k_features=args.k,
        seed=args.seed,
    )
    bounds = _parse_int_list(args.B) if args.B else (max(1, args.n // 10),) * args.k
    spec = InstanceSpec(
        n=args.n, t=args.t, k=args.k, bounds=bounds, bins=bins,
        rng_seed=args.seed, selected_locations=(), selected_samples=(),
    )
    obs, _, resolved = sample_instance(raw, spec)
    save_instance(args.out, resolved, obs)
    print(f"wrote {args.out} (n={args.n}, t={args.t}, k={args.k}, B={bounds})")
    return EXIT_OK


def cmd_bench(args) -> int:
    ns = _parse_int_list(args.n_list)
    ts = _parse_int_list(args.t_list)
    bins = _parse_int_list(args.bins) if args.bins else (2,) * args.k
    rows = ["n,t,B,trial,seed,time_s,cuts,nodes,end_gap,es_time_s"]
    pool = synthetic_readings(
        n_locations=args.pool_locations,
        t_samples=args.pool_samples,
        k_features=args.k,
        seed=args.seed,
    )
    for ci, n in enumerate(ns):
        for cj, t in enumerate(ts):
            if args.B == "auto":
                bounds = (max(1, n // 10),) * args.k
            else:
                bounds = _parse_int_list(args.B)
            for trial in range(args.trials):
                seed = args.seed * 100000 + (ci * len(ts) + cj) * 100 + trial
                spec = InstanceSpec(
                    n=n, t=t, k=args.k, bounds=bounds, bins=bins,
                    rng_seed=seed, selected_locations=(), selected_samples=(),
                )
                obs, region, _ = sample_instance(pool, spec)
                oracle = entropy_oracle(obs)
                config = DcgConfig(epsilon=args.epsilon, time_limit=args.time_limit)
                report = solve(oracle, region, config)
                es_txt = ""
                if args.with_es:
                    es_oracle = entropy_oracle(obs)
                    t0 = time.monotonic()
                    exhaustive_max(es_oracle, region)
                    es_txt = f"{time.monotonic() - t0:.3f}"
                b_txt = ";".join(str(b) for b in bounds)
                gap_txt = f"{report.gap:.3e}" if math.isfinite(report.gap) else ""
                rows.append(
                    f"{n},{t},{b_txt},{trial},{seed},{report.wall_time:.3f},"
                    f"{report.cuts_added},{report.total_bb_nodes},"
                    f"{gap_txt},{es_txt}"
                )
    text = "\n".join(rows) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ksubmax",
        description="Exact constrained k-submodular maximization",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument(
            "--format",
            choices=["json", "csv", "human"],
            default=_env("FORMAT", "json"),
        )
        p.add_argument("--seed", type=int, default=_env("SEED", 0))

    p = sub.add_parser("solve", help="run the constraint-generation solver")
    _add_oracle_args(p)
    p.add_argument("--B", help="per-type bounds, e.g. 2,2 (overrides the instance)")
    p.add_argument("--total", type=int, help="bound on total placements")
    p.add_argument("--epsilon", type=float, default=_env("EPSILON", 1e-6),
                   help="relative optimality gap")
    p.add_argument("--time-limit", type=float, default=_env("TIME_LIMIT", 3600.0),
                   help="seconds")
    p.add_argument("--xi-policy", choices=["auto", "exact", "zeta"],
                   default=_env("XI_POLICY", "auto"))
    common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="certify k-submodularity and monotonicity")
    _add_oracle_args(p)
    p.add_argument("--checks", default="ksub,marginals,monotone")
    p.add_argument("--cap", type=int, default=4096,
                   help="largest enumerable number of k-sets")
    p.add_argument("--sample", action="store_true",
                   help="allow randomized sampling past the cap")
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("enumerate", help="exhaustive-search baseline")
    _add_oracle_args(p)
    p.add_argument("--B", help="per-type bounds, e.g. 1,1")
    p.add_argument("--total", type=int)
    p.add_argument("--budget", type=int, help="evaluation budget")
    common(p)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("count", help="count feasible k-sets")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--B", required=True, help="subset sizes, e.g. 5,5")
    p.add_argument("--upto", action="store_true",
                   help="count sizes up to the bounds instead of exact sizes")
    common(p)
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("discretize", help="equal-width binning of raw readings")
    p.add_argument("--raw", required=True, help="long CSV location,sample,feature,value")
    p.add_argument("--bins", required=True, help="per-feature bin counts, e.g. 2,3")
    p.add_argument("--out", help="output CSV (stdout when omitted)")
    common(p)
    p.set_defaults(func=cmd_discretize)

    p = sub.add_parser("gen", help="generate a synthetic instance JSON")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--B", help="per-type bounds; default max(1, n // 10) each")
    p.add_argument("--bins", help="per-feature bin counts; default 2 each")
    p.add_argument("--pool-locations", type=int, default=54)
    p.add_argument("--pool-samples", type=int, default=400)
    p.add_argument("--out", required=True)
    common(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="benchmark matrix over synthetic instances")
    p.add_argument("--n-list", required=True, help="e.g. 6,8,10")
    p.add_argument("--t-list", required=True, help="e.g. 10,20")
    p.add_argument("--B", default="auto", help="'auto' for max(1, n // 10) each, or e.g. 2,2")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--bins", help="per-feature bin counts; default 2 each")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--epsilon", type=float, default=_env("EPSILON", 1e-6))
    p.add_argument("--time-limit", type=float, default=_env("TIME_LIMIT", 3600.0))
    p.add_argument("--with-es", action="store_true", help="time exhaustive search too")
    p.add_argument("--pool-locations", type=int, default=54)
    p.add_argument("--pool-samples", type=int, default=400)
    p.add_argument("--out", help="CSV path (stdout when omitted)")
    common(p)
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()

"""Experiment runner: simulate configurations, emit JSON reports and CSV
traces, run the trace checkers, and sweep (n, m) grids.

Exit codes: 0 on success with all requested checks passing, 1 when a
requested check fails (the failing check is named), 2 on configuration or
usage errors.  Output is byte-stable across runs: no timestamps, sorted
keys, exact rationals rendered as strings.
"""

import argparse
import csv
import json
import sys
from fractions import Fraction

from . import adversary, analysis
from .core import ConfigError, SimConfig, ceil_log2
from .engine import energy, run
from .fractional import anchors, run_fractional
from .protocols import ceil_sqrt

CHECKS = ("sync", "flatten", "continuity", "dynamic", "budget")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="radiosync",
        description="deterministic simulator for duty-cycled clock synchronization")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="simulate one configuration")
    _common_flags(run_p)
    run_p.add_argument("--check", default="",
                       help=f"comma-separated checks from {','.join(CHECKS)}")
    run_p.add_argument("--trace", metavar="FILE",
                       help="write a per-tick CSV trace (tick, radio-on ids, clocks)")
    run_p.add_argument("--out", metavar="FILE", help="write the JSON report here")

    sweep_p = sub.add_parser("sweep", help="run a grid of configurations")
    _common_flags(sweep_p, lists=True)
    sweep_p.add_argument("--out", metavar="FILE", help="write the CSV table here")
    return parser


def _common_flags(p, lists=False):
    if lists:
        p.add_argument("--n", required=True,
                       help="comma-separated uncertainty windows, e.g. 64,256,1024")
        p.add_argument("--m", required=True,
                       help="comma-separated processor counts, e.g. 4,16,64")
    else:
        p.add_argument("--n", required=True, type=int, help="uncertainty window in ticks")
        p.add_argument("--m", required=True, type=int, help="number of processors")
    p.add_argument("--algorithm", default="synchronize",
                   choices=["synchronize", "dynamic", "dynamic-synch", "naive", "pairwise"])
    p.add_argument("--wake", default="uniform",
                   help="uniform | random | clustered | explicit:FILE")
    p.add_argument("--seed", type=int, default=0, help="seed for the random generator")
    p.add_argument("--topology", default="complete",
                   help="complete | two-clique | l-connected:L | unit-disk | edges:FILE")
    p.add_argument("--k", type=int, default=None, help="override the schedule parameter")
    p.add_argument("--max-ticks", type=int, default=None, help="simulation horizon override")
    p.add_argument("--fractional", action="store_true",
                   help="sub-unit wake offsets; explicit wakes may be rationals like 7/2")


_WAKE_ALIASES = {
    "uniform": "uniform-spread",
    "random": "seeded-random",
    "clustered": "adversarial-clustered",
}


def _parse_wakes(spec: str, fractional: bool):
    if spec in _WAKE_ALIASES:
        return _WAKE_ALIASES[spec]
    if spec.startswith("explicit:"):
        path = spec.split(":", 1)[1]
        with open(path) as fh:
            lines = [ln.strip() for ln in fh if ln.strip()]
        if fractional:
            return [Fraction(ln) for ln in lines]
        return [int(ln) for ln in lines]
    raise ConfigError(f"unknown wake spec {spec!r}")


def _parse_topology(spec: str, m: int):
    if spec.startswith("edges:"):
        path = spec.split(":", 1)[1]
        edges = set()
        with open(path) as fh:
            for ln in fh:
                ln = ln.strip()
                if not ln:
                    continue
                u, v = (int(x) for x in ln.split())
                edges.add((min(u, v), max(u, v)))
        from .core import Topology

        return Topology(m=m, edges=frozenset(edges), kind="edge-list")
    return adversary.build_topology(spec, m)


def _build_config(args) -> SimConfig:
    algorithm = "dynamic-synch" if args.algorithm == "dynamic" else args.algorithm
    if args.n < 1:
        raise ConfigError("n must be >= 1")
    if args.m < 1:
        raise ConfigError("m must be >= 1")
    wakes = _parse_wakes(args.wake, args.fractional)
    topo = _parse_topology(args.topology, args.m)
    return SimConfig(n=args.n, m=args.m, wake_times=wakes, topology=topo,
                     algorithm=algorithm, k_override=args.k,
                     max_ticks=args.max_ticks, seed=args.seed,
                     fractional=args.fractional)


def _run_checks(trace, wanted, fractional):
    results = {}
    for name in wanted:
        if name == "sync":
            ok = trace.sync_complete_tick is not None and not trace.flags
            results[name] = {"passed": ok,
                             "sync_complete_tick": trace.sync_complete_tick,
                             "flags": sorted(trace.flags)}
        elif name == "flatten":
            rep = analysis.check_flatten(trace)
            results[name] = {"passed": rep.passed, "details": rep.details}
        elif name == "continuity":
            rep = analysis.check_final_continuity(trace)
            results[name] = {"passed": rep.passed, "details": rep.details}
        elif name == "dynamic":
            rep = analysis.check_dynamic(trace)
            results[name] = {"passed": rep.passed, "details": rep.details}
        elif name == "budget":
            limit = _energy_budget(trace)
            rep = energy(trace)
            results[name] = {"passed": rep.max_energy <= limit,
                             "max_energy": rep.max_energy, "budget": limit}
        else:
            raise ConfigError(f"unknown check {name!r}; choose from {CHECKS}")
    return results


def _energy_budget(trace) -> int:
    alg = trace.cfg["algorithm"]
    k = trace.k
    if alg == "synchronize":
        return (2 * k + 1) * (ceil_log2(trace.n) + 1)
    if alg == "dynamic-synch":
        return 4 * k + 2
    if alg == "naive":
        return trace.n + 1
    return 2 * ceil_sqrt(trace.n)


def _report(trace, checks, fractional) -> dict:
    rep = energy(trace)
    out = {
        "config": trace.cfg,
        "energy": rep.to_json(),
        "digest": trace.digest(),
        "flags": sorted(trace.flags),
        "checks": checks,
    }
    if fractional:
        out["timeline_anchors"] = {str(pid): str(a) for pid, a in sorted(anchors(trace).items())}
    cl = analysis.clusters(trace)
    out["clusters"] = [
        {"interval": [str(c.interval[0]), str(c.interval[1])],
         "members": sorted(c.members), "cwet": str(c.cwet), "cden": str(c.cden)}
        for c in cl[:200]
    ]
    return out


def _write_trace_csv(trace, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["tick", "radio_on",
                         *[f"tau_{i}" for i in range(1, trace.m + 1)]])
        for t in range(trace.horizon + 1):
            on = trace.on_sets.get(t, ())
            taus = [trace.tau_at(i, t) for i in range(1, trace.m + 1)]
            writer.writerow([t, " ".join(map(str, on)),
                             *["" if x is None else x for x in taus]])


def cmd_run(args) -> int:
    cfg = _build_config(args)
    wanted = [c for c in args.check.split(",") if c]
    for c in wanted:
        if c not in CHECKS:
            raise ConfigError(f"unknown check {c!r}; choose from {CHECKS}")
    trace = run_fractional(cfg) if cfg.fractional else run(cfg)
    checks = _run_checks(trace, wanted, cfg.fractional)
    report = _report(trace, checks, cfg.fractional)
    blob = json.dumps(report, sort_keys=True, indent=2) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(blob)
    else:
        sys.stdout.write(blob)
    if args.trace:
        if cfg.fractional:
            raise ConfigError("per-tick CSV traces are integer-mode only")
        _write_trace_csv(trace, args.trace)
    failed = sorted(name for name, res in checks.items() if not res["passed"])
    if failed:
        print(f"FAILED checks: {', '.join(failed)}", file=sys.stderr)
        return 1
    return 0


def cmd_sweep(args) -> int:
    ns = [int(x) for x in args.n.split(",") if x]
    ms = [int(x) for x in args.m.split(",") if x]
    if not ns or not ms:
        raise ConfigError("sweep needs at least one n and one m")
    algorithm = "dynamic-synch" if args.algorithm == "dynamic" else args.algorithm
    rows = []
    for n in ns:
        for m in ms:
            cfg = SimConfig(n=n, m=m, wake_times=_parse_wakes(args.wake, False),
                            topology=_parse_topology(args.topology, m),
                            algorithm=algorithm, k_override=args.k, seed=args.seed)
            trace = run(cfg)
            rep = energy(trace)
            rows.append({
                "n": n, "m": m, "k": trace.k, "algorithm": algorithm,
                "max_energy": rep.max_energy, "total_energy": rep.total_energy,
                "sync_tick": "" if rep.sync_complete_tick is None else rep.sync_complete_tick,
            })
    out = args.out or "sweep.csv"
    with open(out, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["n", "m", "k", "algorithm",
                                                "max_energy", "total_energy", "sync_tick"])
        writer.writeheader()
        writer.writerows(rows)
    print(f"wrote {len(rows)} rows to {out}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "run":
            code = cmd_run(args)
        else:
            code = cmd_sweep(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return code


if __name__ == "__main__":
    raise SystemExit(main())

"""Command-line interface.

Subcommands:
  run         simulate one scenario and write its CSV set
  sweep       run one of the experiment sweeps (buffer, zipf, capacity, admm)
  solve       run the allocation solver on a problem fixture file
  cache-plan  run the greedy cache planner on a stats file

Scenario files are key=value text mirroring the flags; explicit flags
override file values.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from pathlib import Path

import numpy as np

from edgecoop import admm, caching
from edgecoop.experiments import (
    experiment_admm_convergence,
    experiment_hit_ratio_vs_buffer,
    experiment_hit_ratio_vs_zipf,
    experiment_utility_vs_capacity,
    write_admm_convergence_csvs,
    write_buffer_sweep_csv,
    write_capacity_sweep_csv,
    write_zipf_sweep_csv,
)
from edgecoop.harness import run_scenario, write_metrics_csvs
from edgecoop.model import ChannelModel, shannon_rate
from edgecoop.scenario import load_scenario


def _add_scenario_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scenario", type=Path, help="key=value scenario file")
    p.add_argument("--seed", type=int)
    p.add_argument("--tasks", type=int, dest="tasks")
    p.add_argument("--kinds", type=int, dest="kinds")
    p.add_argument("--bs", type=int, dest="bs")
    p.add_argument("--groups", type=int, dest="groups")
    p.add_argument("--zipf", type=float, dest="zipf")
    p.add_argument("--buffer-frac", type=float, dest="buffer_frac")
    p.add_argument("--coe", type=float)
    p.add_argument("--rho", type=float)
    p.add_argument("--alpha2", type=float)
    p.add_argument("--iters", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--ticks", type=int)
    p.add_argument("--migration", choices=["on", "off"])
    p.add_argument("--cache", choices=["coop", "random", "none"])
    p.add_argument("--allocator", choices=["admm", "greedy"])
    p.add_argument("--out", type=Path, default=Path("out"), help="output directory")


def _scenario_from_args(args) -> "Scenario":
    overrides = {}
    for key in ("seed", "tasks", "kinds", "bs", "groups", "zipf", "buffer_frac",
                "coe", "rho", "alpha2", "iters", "tol", "ticks", "migration",
                "cache", "allocator"):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    return load_scenario(args.scenario, **overrides)


def _cmd_run(args) -> int:
    s = _scenario_from_args(args)
    metrics = run_scenario(s)
    written = write_metrics_csvs(metrics, args.out)
    print(f"wrote {', '.join(written)} to {args.out}")
    print(f"arrivals={metrics.arrivals} hit_ratio={metrics.hit_ratio:.4f} "
          f"processed={metrics.processed} dropped={metrics.dropped} "
          f"mean_utility={metrics.mean_utility:.4f} mean_entropy={metrics.mean_entropy:.4f}")
    return 0


def _cmd_sweep(args) -> int:
    s = _scenario_from_args(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.experiment == "buffer":
        rows = experiment_hit_ratio_vs_buffer(s)
        path = write_buffer_sweep_csv(rows, out)
        print(f"wrote {path}")
    elif args.experiment == "zipf":
        rows = experiment_hit_ratio_vs_zipf(s)
        path = write_zipf_sweep_csv(rows, out)
        print(f"wrote {path}")
    elif args.experiment == "capacity":
        rows = experiment_utility_vs_capacity(s)
        path = write_capacity_sweep_csv(rows, out)
        print(f"wrote {path}")
    else:
        traces, summary = experiment_admm_convergence(s)
        paths = write_admm_convergence_csvs(traces, summary, out)
        print(f"wrote {', '.join(str(p) for p in paths)}")
    return 0


def _cmd_solve(args) -> int:
    problem = admm.import_problem_csv(args.problem)
    cfg = admm.SolverConfig(rho=args.rho, alpha2=args.alpha2,
                            kappa=args.iters, tol=args.tol)
    res = admm.solve(problem, cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    admm.write_trace_csv(res.trace, out / "trace.csv")
    with open(out / "solution.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bs", "task", "x"])
        for i in range(problem.num_stations):
            for j in range(problem.num_tasks):
                writer.writerow([i, problem.tasks[j].id, repr(float(res.x[i, j]))])
    print(f"status={res.status.value} iterations={res.iterations} "
          f"objective={res.objective:.6f}")
    if res.deadline_violation > 0:
        print(f"deadline violation {res.deadline_violation:.3e}; "
              f"max multiplier {float(res.eps.max()):.3e}")
    return 0


def _read_stats_file(path):
    stations = {}
    kinds = {}
    metric_rows = {}
    miss_rows = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[0] != "section":
            raise ValueError("not a stats file: missing section header")
        for row in reader:
            if row[0] == "station":
                stations[int(row[1])] = (float(row[2]), float(row[3]), float(row[4]))
            elif row[0] == "kind":
                kinds[int(row[1])] = float(row[2])
            elif row[0] == "metric":
                metric_rows[(int(row[1]), int(row[2]))] = float(row[3])
            elif row[0] == "miss":
                miss_rows[(int(row[1]), int(row[2]))] = float(row[3])
            else:
                raise ValueError(f"unknown section row {row[0]!r}")
    if not stations or not kinds:
        raise ValueError("stats file needs station and kind sections")
    return stations, kinds, metric_rows, miss_rows


def _cmd_cache_plan(args) -> int:
    stations, kinds, metric_rows, miss_rows = _read_stats_file(args.stats)
    ch = ChannelModel()
    sids = sorted(stations)
    kids = sorted(kinds)
    n = len(sids)
    dis = np.zeros((n, n))
    v = np.ones((n, n))
    for a in range(n):
        for b in range(a + 1, n):
            pa, pb = stations[sids[a]], stations[sids[b]]
            d = max(math.dist((pa[0], pa[1]), (pb[0], pb[1])), 1.0)
            dis[a, b] = dis[b, a] = d
            rate = shannon_rate(ch, ch.tx_power_bs, d)
            v[a, b] = v[b, a] = rate
    sizes = np.array([kinds[k] for k in kids])
    miss = np.zeros((n, len(kids)))
    p = np.zeros((n, len(kids)))
    for a, sid in enumerate(sids):
        for b, kid in enumerate(kids):
            p[a, b] = metric_rows.get((sid, kid), 0.0)
            miss[a, b] = miss_rows.get((sid, kid), float(sizes[b] / 1e7))
    graph = caching.TransferGraph(dis=dis, v=v, miss_cost=miss)
    cap = np.array([stations[s][2] for s in sids])
    before = caching.cache_objective(caching.CacheMatrix.empty(n, sizes, cap), graph, p)
    plan = caching.greedy_plan(graph, p, sizes, cap)
    after = caching.cache_objective(plan, graph, p)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    plan.export_csv(out / "plan.csv")
    print(f"placed {int(plan.ca.sum())} objects; objective {before:.6f} -> {after:.6f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="edgecoop",
        description="cooperative edge-computing resource management toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate one scenario")
    _add_scenario_flags(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="run an experiment sweep")
    p_sweep.add_argument("--experiment", required=True,
                         choices=["buffer", "zipf", "capacity", "admm"])
    _add_scenario_flags(p_sweep)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_solve = sub.add_parser("solve", help="solve an allocation problem file")
    p_solve.add_argument("--problem", type=Path, required=True)
    p_solve.add_argument("--rho", type=float, default=2.0)
    p_solve.add_argument("--alpha2", type=float, default=0.5)
    p_solve.add_argument("--iters", type=int, default=200)
    p_solve.add_argument("--tol", type=float, default=1e-3)
    p_solve.add_argument("--out", type=Path, default=Path("out"))
    p_solve.set_defaults(func=_cmd_solve)

    p_plan = sub.add_parser("cache-plan", help="plan a cache from a stats file")
    p_plan.add_argument("--stats", type=Path, required=True)
    p_plan.add_argument("--out", type=Path, default=Path("out"))
    p_plan.set_defaults(func=_cmd_cache_plan)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

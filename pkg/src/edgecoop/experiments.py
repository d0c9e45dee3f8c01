"""Experiment drivers: parameter sweeps emitting CSV rows.

Each driver is deterministic given the base scenario (independent runs in a
sweep could execute in parallel; they are run sequentially here and joined
into one row list before writing).
"""

from __future__ import annotations

import csv
import dataclasses
from pathlib import Path

import numpy as np

from edgecoop import admm
from edgecoop.harness import run_scenario
from edgecoop.model import ChannelModel, Task, shannon_rate
from edgecoop.scenario import Scenario

BUFFER_FRACTIONS = tuple(round(0.1 * k, 1) for k in range(1, 9))
ZIPF_EXPONENTS = tuple(round(0.2 * k, 1) for k in range(1, 11))


def _with(s: Scenario, **kw) -> Scenario:
    return dataclasses.replace(s, **kw)


def experiment_hit_ratio_vs_buffer(base: Scenario,
                                   fractions=BUFFER_FRACTIONS) -> list[tuple[float, float, float]]:
    """Cooperative vs random-cache hit ratio across buffer sizes, paired on
    the same seed so both strategies see identical workloads."""
    rows = []
    for frac in fractions:
        coop = run_scenario(_with(base, buffer_fraction=frac, cache="coop"))
        rand = run_scenario(_with(base, buffer_fraction=frac, cache="random"))
        rows.append((float(frac), coop.hit_ratio, rand.hit_ratio))
    return rows


def experiment_hit_ratio_vs_zipf(base: Scenario,
                                 xis=ZIPF_EXPONENTS) -> list[tuple[float, float, float]]:
    """Hit ratios across workload skew; higher exponents concentrate demand
    on few kinds, which caching exploits."""
    rows = []
    for xi in xis:
        coop = run_scenario(_with(base, zipf_xi=xi, cache="coop"))
        rand = run_scenario(_with(base, zipf_xi=xi, cache="random"))
        rows.append((float(xi), coop.hit_ratio, rand.hit_ratio))
    return rows


def allocation_instance(rng: np.random.Generator, num_tasks: int, num_stations: int,
                        coe: float = 0.5, capacity_margin: float = 1.5,
                        ch: ChannelModel | None = None) -> admm.AllocationProblem:
    """A stand-alone allocation problem with workload-style parameters."""
    ch = ch or ChannelModel()
    tasks = []
    for j in range(num_tasks):
        u = float(rng.uniform(5000, 10000))
        tasks.append(Task(id=j, u=u, c=18000.0 * u, r=float(rng.uniform(1000, 5000)),
                          t_max=float(rng.uniform(15, 30)), kind=0))
    f = rng.uniform(1e10, 1e11, size=num_stations)
    f[0] = f.max() * 1.1
    total_c = sum(t.c for t in tasks)
    total_u = sum(t.u for t in tasks)
    m_c = np.full(num_stations, total_c * capacity_margin)
    m_u = np.full(num_stations, total_u * capacity_margin)
    rates = np.array([[shannon_rate(ch, ch.tx_power_user, float(rng.uniform(10, 250)))
                       for _ in range(num_tasks)] for _ in range(num_stations)])
    return admm.build_problem(tasks, f, m_c, m_u, rates, coe, ch)


def experiment_utility_vs_capacity(base: Scenario, num_levels: int = 10,
                                   num_tasks: int = 12, num_stations: int = 3
                                   ) -> list[tuple[float, float]]:
    """Converged allocation utility as the per-station compute budget sweeps
    one decade upward from a binding level; larger budgets only enlarge the
    feasible set, so utility falls and then flattens once nothing binds."""
    rng = np.random.default_rng(base.seed)
    problem = allocation_instance(rng, num_tasks, num_stations, coe=base.coe)
    base_budget = float(problem.c.sum()) / num_stations * 1.05
    cfg = admm.SolverConfig(rho=base.rho, alpha2=base.alpha2,
                            kappa=max(base.iters, 1000), tol=min(base.tol, 1e-4))
    rows = []
    for mult in np.linspace(1.0, 10.0, num_levels):
        problem.m_c = np.full(num_stations, base_budget * float(mult))
        res = admm.solve(problem, cfg)
        rows.append((base_budget * float(mult), res.objective))
    return rows


def experiment_admm_convergence(base: Scenario, task_counts=(5, 10, 20),
                                num_stations: int = 3
                                ) -> tuple[dict[int, list[admm.SolveRecord]],
                                           list[tuple[int, int, float]]]:
    """Residual traces per task count, plus (tasks, crossing_iteration,
    objective) summary rows; crossing is the first iteration with both
    feasibility residuals under the scenario tolerance."""
    traces: dict[int, list[admm.SolveRecord]] = {}
    summary = []
    for nh in task_counts:
        rng = np.random.default_rng(base.seed + nh)
        problem = allocation_instance(rng, nh, num_stations, coe=base.coe)
        cfg = admm.SolverConfig(rho=base.rho, alpha2=base.alpha2,
                                kappa=max(base.iters, 50), tol=base.tol)
        res = admm.solve(problem, cfg)
        traces[nh] = res.trace
        crossing = next((rec.k for rec in res.trace
                         if max(rec.primal_residual, rec.constraint_residual) < base.tol),
                        res.iterations)
        summary.append((nh, crossing, res.objective))
    return traces, summary


# ---------------------------------------------------------------------------
# CSV writers
# ---------------------------------------------------------------------------

def _write_rows(path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])


def write_buffer_sweep_csv(rows, out_dir) -> Path:
    path = Path(out_dir) / "buffer_sweep.csv"
    _write_rows(path, ["fraction", "coop_hit", "random_hit"], rows)
    return path


def write_zipf_sweep_csv(rows, out_dir) -> Path:
    path = Path(out_dir) / "zipf_sweep.csv"
    _write_rows(path, ["xi", "coop_hit", "random_hit"], rows)
    return path


def write_capacity_sweep_csv(rows, out_dir) -> Path:
    path = Path(out_dir) / "capacity_sweep.csv"
    _write_rows(path, ["capacity", "utility"], rows)
    return path


def write_admm_convergence_csvs(traces, summary, out_dir) -> list[Path]:
    out = Path(out_dir)
    paths = []
    for nh, trace in sorted(traces.items()):
        path = out / f"admm_trace_tasks{nh}.csv"
        admm.write_trace_csv(trace, path)
        paths.append(path)
    path = out / "admm_summary.csv"
    _write_rows(path, ["tasks", "crossing_iteration", "objective"], summary)
    paths.append(path)
    return paths

"""Deterministic simulation loop tying caching, migration and allocation
together, plus the baseline strategies.

Per tick: age and drop stale work, admit Zipf arrivals (each arrival probes
its home station's cache and only misses continue), let each group's
Q-controller pick an action, allocate the processing groups' batches over
their stations, and accumulate metrics.  The cooperative cache plan is
refreshed at every popularity window boundary from freshly fitted
semi-Markov chains; the random baseline refills with uniform kinds on the
same cadence.

The loop is single-threaded; every random draw comes from generators
spawned off the scenario seed (separate streams for topology, arrivals,
policy and the random-cache baseline, so paired strategy comparisons see
identical workloads).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from edgecoop import admm, caching, migration, popularity
from edgecoop.model import (BaseStation, ChannelModel, CostWeights, Group, Role,
                            Task, priority, shannon_rate)
from edgecoop.scenario import Scenario

REFERENCE_USER_DISTANCE = 80.0  # metres, for planner-side miss cost estimates


# ---------------------------------------------------------------------------
# topology
# ---------------------------------------------------------------------------

@dataclass
class Topology:
    stations: list[BaseStation]
    groups: list[Group]
    group_of: list[int]              # station id -> group id
    kind_sizes: np.ndarray           # bits per kind
    kind_cycles: np.ndarray
    graph: caching.TransferGraph
    channel: ChannelModel
    m_c_tick: np.ndarray             # per-station compute budget per tick
    m_u_tick: np.ndarray             # per-station storage budget per tick


def build_topology(s: Scenario, rng: np.random.Generator) -> Topology:
    """Stations in vertical strips (one per group, macro station at the
    strip centre and fastest), kind catalog, transfer graph and budgets."""
    ch = ChannelModel()
    strip = s.area / s.num_groups
    per_group = [s.num_bs // s.num_groups] * s.num_groups
    for g in range(s.num_bs % s.num_groups):
        per_group[g] += 1

    stations: list[BaseStation] = []
    groups: list[Group] = []
    group_of: list[int] = []
    kind_sizes = rng.uniform(5000.0, 10000.0, size=s.num_kinds)
    catalog_bits = float(kind_sizes.sum())
    cache_space = s.buffer_fraction * catalog_bits

    sid = 0
    for g in range(s.num_groups):
        x0 = g * strip
        f_sbs = rng.uniform(1e9, 5e9, size=max(per_group[g] - 1, 0))
        f_mbs = 6e9  # macro station outclasses every small cell
        mbs_id = sid
        stations.append(BaseStation(
            id=sid, role=Role.MBS, f=f_mbs, m_c=f_mbs, m_u=1e8, s=cache_space,
            position=(x0 + strip / 2.0, s.area / 2.0)))
        group_of.append(g)
        sid += 1
        sbs_ids = []
        for f in f_sbs:
            stations.append(BaseStation(
                id=sid, role=Role.SBS, f=float(f), m_c=float(f), m_u=1e8, s=cache_space,
                position=(float(rng.uniform(x0, x0 + strip)),
                          float(rng.uniform(0.0, s.area)))))
            group_of.append(g)
            sbs_ids.append(sid)
            sid += 1
        groups.append(Group(id=g, mbs=mbs_id, sbs_list=sbs_ids))

    n = len(stations)
    dis = np.zeros((n, n))
    v = np.ones((n, n))
    for i in range(n):
        for m in range(i + 1, n):
            d = math.dist(stations[i].position, stations[m].position)
            d = max(d, 1.0)
            dis[i, m] = dis[m, i] = d
            rate = shannon_rate(ch, ch.tx_power_bs, d)
            v[i, m] = v[m, i] = rate
    kind_cycles = kind_sizes * s.workload_cycles_per_bit
    miss = np.zeros((n, s.num_kinds))
    user_rate = np.array([shannon_rate(ch, ch.tx_power_user, REFERENCE_USER_DISTANCE)
                          for _ in range(n)])
    for i in range(n):
        miss[i, :] = kind_sizes / user_rate[i]
    graph = caching.TransferGraph(dis=dis, v=v, miss_cost=miss)

    # per-tick budgets sized against the expected offered load
    expected_cycles = (s.num_tasks / s.ticks) * float(kind_cycles.mean())
    f_all = np.array([bs.f for bs in stations])
    m_c = s.capacity_factor * expected_cycles * f_all / f_all.sum()
    m_c = np.maximum(m_c, kind_cycles.max() * 1.05)  # every station can take one task
    expected_bits = (s.num_tasks / s.ticks) * float(kind_sizes.mean())
    m_u = np.full(n, max(2.0 * expected_bits, 4.0 * float(kind_sizes.max())))
    return Topology(stations, groups, group_of, kind_sizes, kind_cycles,
                    graph, ch, m_c, m_u)


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------

@dataclass
class TickRow:
    tick: int
    arrivals: int
    hits: int
    neighbor_hits: int
    misses: int
    processed: int
    dropped: int
    utility: float
    entropy: float | None
    f_max: float


@dataclass
class MetricsFrame:
    ticks: list[TickRow] = field(default_factory=list)
    lookup_events: list[tuple[int, int, int, int, str]] = field(default_factory=list)
    assignment_events: list[tuple[int, int, int, int, float, float, bool]] = field(default_factory=list)
    migration_rows: list[migration.EpisodeRow] = field(default_factory=list)
    utilities: list[float] = field(default_factory=list)
    arrivals: int = 0
    lookups: int = 0
    hits: int = 0
    neighbor_hits: int = 0
    misses: int = 0
    processed: int = 0
    processed_late: int = 0
    dropped: int = 0
    pending_end: int = 0
    total_energy: float = 0.0
    total_delay: float = 0.0
    served_delay_count: int = 0
    action_counts: dict[str, int] = field(default_factory=dict)
    f_max: float = 0.0

    @property
    def hit_ratio(self) -> float:
        return self.hits / self.lookups if self.lookups else 0.0

    @property
    def any_cache_hit_ratio(self) -> float:
        return (self.hits + self.neighbor_hits) / self.lookups if self.lookups else 0.0

    @property
    def mean_delay(self) -> float:
        return self.total_delay / self.served_delay_count if self.served_delay_count else 0.0

    @property
    def mean_utility(self) -> float:
        return float(np.mean(self.utilities)) if self.utilities else 0.0

    @property
    def mean_entropy(self) -> float:
        vals = [row.entropy for row in self.ticks if row.entropy is not None]
        return float(np.mean(vals)) if vals else 0.0

    def ledger_balanced(self) -> bool:
        served = self.hits + self.neighbor_hits
        return self.arrivals == served + self.processed + self.dropped + self.pending_end


# ---------------------------------------------------------------------------
# popularity tracking (incremental, window-by-window)
# ---------------------------------------------------------------------------

class PopularityTracker:
    """Maintains upload statistics, fits the state ladder once two full
    windows exist, and accumulates run-length encoded state transitions per
    kind so replanning never rescans history."""

    def __init__(self, s: Scenario, num_stations: int):
        self.delta_t = s.delta_t
        self.predict_dt = s.predict_dt
        self.num_kinds = s.num_kinds
        self.num_stations = num_stations
        self.stats = popularity.UploadStats(delta_t=s.delta_t)
        self.ladder: popularity.StateLadder | None = None
        self.horizon = 8
        # per (station, kind): current run (state, length) and finished triples
        self._pop_runs: dict[tuple[int, int], tuple[int, int]] = {}
        self._rop_runs: dict[tuple[int, int], tuple[int, int]] = {}
        self._pop_triples: dict[int, list[tuple[int, int, int]]] = {k: [] for k in range(s.num_kinds)}
        self._rop_triples: dict[int, list[tuple[int, int, int]]] = {k: [] for k in range(s.num_kinds)}
        self.cur_pop = np.zeros((num_stations, s.num_kinds), dtype=int)
        self.cur_rop = np.zeros((num_stations, s.num_kinds), dtype=int)
        self.clamp_events = 0
        self.fpp_evaluations = 0

    def record(self, bs: int, kind: int, tick: int) -> None:
        self.stats.record(bs, kind, tick)

    def window_end(self, t: int) -> None:
        """Classify the window just closed and extend the run-length codes."""
        if t < 2 * self.delta_t:
            return
        if self.ladder is None:
            # fit thresholds on informative observations only: per-station
            # demand is sparse, and a ladder fitted over the zero pile would
            # collapse and classify everything alike
            pop_vals, rop_vals = [], []
            for bs in range(self.num_stations):
                for kind in range(self.num_kinds):
                    for tw in range(2 * self.delta_t, t + 1, self.delta_t):
                        pop = popularity.static_popularity(self.stats, bs, kind, tw)
                        if pop > 0.0:
                            pop_vals.append(pop)
                        cur = self.stats.kind_uploads(bs, kind, tw)
                        prev = self.stats.kind_uploads(bs, kind, tw - self.delta_t)
                        if cur > 0 or prev > 0:
                            rop_vals.append(popularity.retention_rate(
                                self.stats, bs, kind, tw, cap=4.0))
            if len(pop_vals) < 8 or len(rop_vals) < 8:
                return  # stay cold until enough demand was observed
            self.ladder = popularity.StateLadder.from_observations(pop_vals, rop_vals)
        cap = self.ladder.rop_levels[0]
        for bs in range(self.num_stations):
            for kind in range(self.num_kinds):
                pop_s = popularity.classify(
                    popularity.static_popularity(self.stats, bs, kind, t), self.ladder, "pop")
                rop_s = popularity.classify(
                    popularity.retention_rate(self.stats, bs, kind, t, cap=cap), self.ladder, "rop")
                self.cur_pop[bs, kind] = pop_s
                self.cur_rop[bs, kind] = rop_s
                for runs, triples, state in (
                        (self._pop_runs, self._pop_triples, pop_s),
                        (self._rop_runs, self._rop_triples, rop_s)):
                    key = (bs, kind)
                    cur = runs.get(key)
                    if cur is None:
                        runs[key] = (state, 1)
                    elif cur[0] == state:
                        runs[key] = (state, cur[1] + 1)
                    else:
                        triples[kind].append((cur[0], state, cur[1]))
                        runs[key] = (state, 1)

    def metric_matrix(self) -> np.ndarray | None:
        """Fresh placement weights, or None before the ladder exists."""
        if self.ladder is None:
            return None
        p = np.zeros((self.num_stations, self.num_kinds))
        for kind in range(self.num_kinds):
            pop_chain = popularity.SemiMarkovChain.fit(
                self.ladder.num_pop_states, self._pop_triples[kind], self.horizon)
            rop_chain = popularity.SemiMarkovChain.fit(
                self.ladder.num_rop_states, self._rop_triples[kind], self.horizon)
            for bs in range(self.num_stations):
                p[bs, kind] = popularity.caching_metric(
                    pop_chain, rop_chain, int(self.cur_pop[bs, kind]),
                    int(self.cur_rop[bs, kind]), self.predict_dt)
            self.clamp_events += pop_chain.clamp_events + rop_chain.clamp_events
            self.fpp_evaluations += pop_chain.evaluations + rop_chain.evaluations
        return p


def random_cache_plan(topo: Topology, rng: np.random.Generator) -> caching.CacheMatrix:
    """Baseline: fill each station with uniformly random distinct kinds."""
    n = len(topo.stations)
    cap = np.array([bs.s for bs in topo.stations])
    ca = caching.CacheMatrix.empty(n, topo.kind_sizes, cap)
    for i in range(n):
        order = rng.permutation(topo.kind_sizes.shape[0])
        used = 0.0
        for j in order:
            size = float(topo.kind_sizes[j])
            if used + size <= cap[i] + 1e-9:
                ca.ca[i, int(j)] = 1
                used += size
    return ca


def greedy_assign(problem: admm.AllocationProblem) -> np.ndarray:
    """Baseline allocator: each task takes the cheapest station that still
    has compute and storage budget left, in task order."""
    nbs, nh = problem.num_stations, problem.num_tasks
    x = np.zeros((nbs, nh))
    c_left = problem.m_c.astype(float).copy()
    u_left = problem.m_u.astype(float).copy()
    for j in range(nh):
        order = sorted(range(nbs), key=lambda i: (problem.w[i, j], i))
        pick = order[0]
        for i in order:
            if c_left[i] >= problem.c[j] and u_left[i] >= problem.u[j]:
                pick = i
                break
        x[pick, j] = 1.0
        c_left[pick] -= problem.c[j]
        u_left[pick] -= problem.u[j]
    return x


# ---------------------------------------------------------------------------
# the run loop
# ---------------------------------------------------------------------------

@dataclass
class _Pending:
    task: Task
    position: tuple[float, float]
    age: int = 0


def run_scenario(s: Scenario) -> MetricsFrame:
    """Simulate one scenario; deterministic for a fixed scenario value."""
    seeds = np.random.SeedSequence(s.seed).spawn(5)
    rng_topo = np.random.default_rng(seeds[0])
    rng_arrivals = np.random.default_rng(seeds[1])
    rng_policy = np.random.default_rng(seeds[2])
    rng_cache = np.random.default_rng(seeds[3])

    topo = build_topology(s, rng_topo)
    n_stations = len(topo.stations)
    ch = topo.channel
    weights = CostWeights(coe=s.coe, alpha1=0.5)
    workload = popularity.ZipfWorkload(xi=s.zipf_xi, num_kinds=s.num_kinds,
                                       rng_seed=int(seeds[4].generate_state(1)[0]))
    tracker = PopularityTracker(s, n_stations)
    policy = migration.QPolicy(s.num_groups)
    rewards = migration.RewardConfig()
    solver_cfg = admm.SolverConfig(rho=s.rho, alpha2=s.alpha2, kappa=s.iters, tol=s.tol)

    # both strategies install their first plan at the same window boundary,
    # so paired comparisons share the cold start
    cache_plan: caching.CacheMatrix | None = None

    queues: list[list[_Pending]] = [[] for _ in range(s.num_groups)]
    arrived_this_tick: list[int] = [0] * s.num_groups
    group_capacity = np.array([sum(topo.m_c_tick[i] for i in grp.stations)
                               for grp in topo.groups])
    positions = np.array([bs.position for bs in topo.stations])

    metrics = MetricsFrame()
    mean_arrivals = s.num_tasks / s.ticks
    next_task_id = 0
    f_max = 0.0

    def congested(g: int) -> bool:
        demand = sum(p.task.c for p in queues[g])
        return demand > s.congestion_alpha * group_capacity[g]

    def group_state(g: int, phase: migration.Phase) -> migration.GroupState:
        return migration.GroupState(phase, congested(g))

    phases = [migration.Phase.DETECT] * s.num_groups

    def rates_to_group(batch: list[_Pending], grp: Group) -> np.ndarray:
        out = np.zeros((len(grp.stations), len(batch)))
        for col, pending in enumerate(batch):
            for row, sid in enumerate(grp.stations):
                d = max(math.dist(pending.position, topo.stations[sid].position), 1.0)
                out[row, col] = shannon_rate(ch, ch.tx_power_user, d)
        return out

    def allocate(g: int, tick: int) -> tuple[int, int, float, float, float]:
        """Process as much queued work as this tick's budget allows.
        Returns (processed, late, utility, energy, delay_sum)."""
        grp = topo.groups[g]
        budget = float(group_capacity[g])
        batch: list[_Pending] = []
        while queues[g] and queues[g][0].task.c <= budget:
            entry = queues[g].pop(0)
            budget -= entry.task.c
            batch.append(entry)
        if not batch:
            return 0, 0, 0.0, 0.0, 0.0
        rates_home = []
        f_best = max(topo.stations[sid].f for sid in grp.stations)
        for pending in batch:
            d = max(math.dist(pending.position,
                              topo.stations[grp.mbs].position), 1.0)
            rates_home.append(shannon_rate(ch, ch.tx_power_user, d))
        order = sorted(
            range(len(batch)),
            key=lambda idx: (-priority(batch[idx].task, rates_home[idx], f_best, ch, weights),
                             batch[idx].task.id))
        batch = [batch[idx] for idx in order]
        tasks = [p.task for p in batch]
        rates = rates_to_group(batch, grp)
        f = np.array([topo.stations[sid].f for sid in grp.stations])
        m_c = np.array([topo.m_c_tick[sid] for sid in grp.stations])
        m_u = np.array([topo.m_u_tick[sid] for sid in grp.stations])
        m_u = np.maximum(m_u, sum(t.u for t in tasks) * 1.2 / len(grp.stations) + max(t.u for t in tasks))
        problem = admm.build_problem(tasks, f, m_c, m_u, rates, s.coe, ch)
        if s.allocator == "admm":
            res = admm.solve(problem, solver_cfg)
            assign, _ = admm.round_assignment(problem, res.x)
        else:
            assign = [int(np.argmax(col)) for col in greedy_assign(problem).T]
        x_real = np.zeros((len(grp.stations), len(tasks)))
        for j, i in enumerate(assign):
            x_real[i, j] = 1.0
        utility = problem.objective(x_real)

        processed = late = 0
        energy_sum = 0.0
        delay_sum = 0.0
        backlog: dict[int, float] = {}
        for j, i in enumerate(assign):
            sid = grp.stations[i]
            t = tasks[j]
            rate = float(rates[i, j])
            exec_s = t.c / f[i]
            up_s = t.u / rate
            down_s = t.r / rate
            wait = backlog.get(i, 0.0)
            backlog[i] = wait + exec_s + up_s
            delay = wait + up_s + exec_s + down_s
            waited = batch[j].age * s.tick_seconds
            ok = waited + delay <= t.t_max
            processed += 1
            late += not ok
            energy_sum += ch.tx_power_user * up_s + ch.kappa * f[i] ** 2 * t.c
            delay_sum += delay
            metrics.assignment_events.append(
                (tick, g, t.id, sid, delay, utility, bool(ok)))
        return processed, late, utility, energy_sum, delay_sum

    for tick in range(1, s.ticks + 1):
        # age and drop stale work
        dropped_now = 0
        for g in range(s.num_groups):
            kept: list[_Pending] = []
            for entry in queues[g]:
                entry.age += 1
                if entry.age * s.tick_seconds > entry.task.t_max:
                    dropped_now += 1
                else:
                    kept.append(entry)
            queues[g] = kept
        metrics.dropped += dropped_now

        # arrivals and cache probes
        n_arr = int(rng_arrivals.poisson(mean_arrivals))
        kinds = workload.sample(n_arr)
        hits = neigh = miss = 0
        arrived_this_tick = [0] * s.num_groups
        for kind in kinds:
            kind = int(kind)
            px = s.area * float(rng_arrivals.random()) ** (1.0 / (1.0 - s.hotspot_skew))
            py = s.area * float(rng_arrivals.random())
            home = int(np.argmin(((positions - np.array([px, py])) ** 2).sum(axis=1)))
            g = topo.group_of[home]
            task = Task(id=next_task_id, u=float(topo.kind_sizes[kind]),
                        c=float(topo.kind_cycles[kind]),
                        r=0.2 * float(topo.kind_sizes[kind]),
                        t_max=float(15.0 + 15.0 * rng_arrivals.random()), kind=kind)
            next_task_id += 1
            metrics.arrivals += 1
            arrived_this_tick[g] += 1
            tracker.record(home, kind, tick)
            outcome = "miss"
            if s.cache != "none" and cache_plan is not None:
                res = caching.lookup(cache_plan, topo.graph, kind, home)
                if res.outcome is caching.Outcome.HIT:
                    outcome = "hit"
                    hits += 1
                    metrics.served_delay_count += 1
                elif res.outcome is caching.Outcome.NEIGHBOR_HIT:
                    outcome = "neighbor_hit"
                    neigh += 1
                    transfer = task.u / float(topo.graph.v[home, res.source])
                    metrics.total_delay += transfer
                    metrics.served_delay_count += 1
            metrics.lookups += 1
            metrics.lookup_events.append((tick, task.id, kind, home, outcome))
            if outcome == "miss":
                miss += 1
                queues[g].append(_Pending(task, (px, py)))
        metrics.hits += hits
        metrics.neighbor_hits += neigh
        metrics.misses += miss

        # cache replanning at window boundaries
        if tick % s.delta_t == 0:
            tracker.window_end(tick)
            if s.cache == "coop":
                p = tracker.metric_matrix()
                if p is not None:
                    backlog_cycles = [sum(e.task.c for e in queues[topo.group_of[i]])
                                      for i in range(n_stations)]
                    miss_cost = topo.graph.miss_cost.copy()
                    for i in range(n_stations):
                        gi = topo.group_of[i]
                        miss_cost[i, :] += backlog_cycles[i] / group_capacity[gi]
                    graph = caching.TransferGraph(topo.graph.dis, topo.graph.v, miss_cost)
                    cap = np.array([bs.s for bs in topo.stations])
                    cache_plan = caching.greedy_plan(graph, p, topo.kind_sizes, cap)
            elif s.cache == "random":
                cache_plan = random_cache_plan(topo, rng_cache)

        # migration decisions and processing
        tick_utility = 0.0
        processed_now = 0
        q_snapshot = policy.q.copy()
        eps_t = s.eps_min + (s.eps_max - s.eps_min) * tick / s.ticks
        for g in range(s.num_groups):
            state = group_state(g, phases[g])
            if s.migration:
                action = migration.select_action(policy, g, state.index, eps_t, rng_policy)
            else:
                action = migration.Phase.PROCESS
            label = migration.Phase(action).name.lower()
            metrics.action_counts[label] = metrics.action_counts.get(label, 0) + 1
            reward = 0.0
            if action == migration.Phase.DETECT:
                reward = rewards.r_detect if arrived_this_tick[g] > 0 else -rewards.r_detect
            elif action == migration.Phase.TRANSMIT:
                if s.migration and s.num_groups > 1 and queues[g]:
                    batch = math.ceil(len(queues[g]) / 2)
                    target, best_v = -1, -math.inf
                    for other in range(s.num_groups):
                        if other == g:
                            continue
                        val = float(q_snapshot[other, group_state(other, phases[other]).index, :].max())
                        if val > best_v:
                            target, best_v = other, val
                    moved = [queues[g].pop(0) for _ in range(batch)]
                    queues[target].extend(moved)
                    reward = rewards.r_transmit
            else:
                was_congested = congested(g)
                processed, late, utility, energy_sum, delay_sum = allocate(g, tick)
                metrics.processed += processed
                metrics.processed_late += late
                metrics.total_energy += energy_sum
                metrics.total_delay += delay_sum
                metrics.served_delay_count += processed
                tick_utility += utility
                processed_now += processed
                if processed:
                    metrics.utilities.append(utility)
                success = processed > 0 and late == 0
                if not was_congested:
                    reward = rewards.r_process if success else -rewards.r_process1
                else:
                    reward = -rewards.r_process2 if success else 0.0
            phases[g] = migration.Phase(action)
            if s.migration:
                neighbor_values = q_snapshot[:, state.index, :].max(axis=1)
                migration.q_update(policy, g, state.index, int(action), reward,
                                   neighbor_values)
            loads = np.array([len(q) for q in queues], dtype=float)
            ent = migration.entropy(loads) if loads.sum() > 0 else None
            if ent is not None:
                f_max = max(f_max, ent)
            metrics.migration_rows.append(migration.EpisodeRow(
                tick, g, str(state), label, reward, int(loads[g]), ent, f_max))

        loads = np.array([len(q) for q in queues], dtype=float)
        ent = migration.entropy(loads) if loads.sum() > 0 else None
        metrics.ticks.append(TickRow(
            tick=tick, arrivals=n_arr, hits=hits, neighbor_hits=neigh, misses=miss,
            processed=processed_now, dropped=dropped_now, utility=tick_utility,
            entropy=ent, f_max=f_max))

    metrics.pending_end = sum(len(q) for q in queues)
    metrics.f_max = f_max
    return metrics


# ---------------------------------------------------------------------------
# CSV output
# ---------------------------------------------------------------------------

def write_metrics_csvs(metrics: MetricsFrame, out_dir) -> list[str]:
    """Write the run's CSV set; returns the file names written."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    path = out / "summary.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["arrivals", "lookups", "hits", "neighbor_hits", "misses",
                         "processed", "processed_late", "dropped", "pending_end",
                         "hit_ratio", "any_cache_hit_ratio", "mean_delay",
                         "total_energy", "mean_utility", "mean_entropy", "f_max"])
        writer.writerow([metrics.arrivals, metrics.lookups, metrics.hits,
                         metrics.neighbor_hits, metrics.misses, metrics.processed,
                         metrics.processed_late, metrics.dropped, metrics.pending_end,
                         repr(metrics.hit_ratio), repr(metrics.any_cache_hit_ratio),
                         repr(metrics.mean_delay), repr(metrics.total_energy),
                         repr(metrics.mean_utility), repr(metrics.mean_entropy),
                         repr(metrics.f_max)])
    written.append(path.name)

    path = out / "ticks.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["tick", "arrivals", "hits", "neighbor_hits", "misses",
                         "processed", "dropped", "utility", "entropy", "f_max"])
        for row in metrics.ticks:
            writer.writerow([row.tick, row.arrivals, row.hits, row.neighbor_hits,
                             row.misses, row.processed, row.dropped, repr(row.utility),
                             "" if row.entropy is None else repr(row.entropy),
                             repr(row.f_max)])
    written.append(path.name)

    path = out / "migration.csv"
    migration.export_episode_csv(metrics.migration_rows, path)
    written.append(path.name)

    path = out / "lookups.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["tick", "task_id", "kind", "bs", "outcome"])
        for row in metrics.lookup_events:
            writer.writerow(list(row))
    written.append(path.name)

    path = out / "assignments.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["tick", "group", "task_id", "bs_id", "delay", "utility",
                         "met_deadline"])
        for tick, g, tid, sid, delay, utility, ok in metrics.assignment_events:
            writer.writerow([tick, g, tid, sid, repr(delay), repr(utility), int(ok)])
    written.append(path.name)
    return written

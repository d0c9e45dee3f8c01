"""Cooperative Q-learning task migration between groups.

Each group is in one of three phases (detecting arrivals, processing its
queue, transmitting to a neighbour) and is additionally flagged congested
when its queued compute demand exceeds its per-tick capacity.  One logical
controller per group; within a tick groups act in ascending id order against
immutable start-of-tick snapshots of the neighbour Q tables and loads, so
episodes are deterministic given the seed.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from edgecoop.model import Task


class Phase(IntEnum):
    DETECT = 0
    PROCESS = 1
    TRANSMIT = 2


ACTIONS = (Phase.DETECT, Phase.PROCESS, Phase.TRANSMIT)
NUM_ACTIONS = len(ACTIONS)
NUM_STATES = 2 * len(Phase)


@dataclass(frozen=True)
class GroupState:
    phase: Phase
    congested: bool

    @property
    def index(self) -> int:
        return int(self.phase) * 2 + int(self.congested)

    def __str__(self) -> str:
        return f"{self.phase.name.lower()}{'+cong' if self.congested else ''}"


@dataclass(frozen=True)
class RewardConfig:
    """Reward magnitudes; signs are applied per the action outcome."""

    r_detect: float = 1.0
    r_transmit: float = 1.0
    r_process: float = 2.0
    r_process1: float = 1.0  # penalty: uncongested processing failure
    r_process2: float = 1.0  # penalty: processing while congested

    def __post_init__(self) -> None:
        for name in ("r_detect", "r_transmit", "r_process", "r_process1", "r_process2"):
            if getattr(self, name) <= 0:
                raise ValueError(f"reward magnitude {name} must be positive")

    @property
    def r_max(self) -> float:
        return max(self.r_detect, self.r_transmit, self.r_process,
                   self.r_process1, self.r_process2)


class QPolicy:
    """Per-group Q tables with cooperative value sharing.

    weights[g, g'] is how much group g listens to neighbour g'; each row is
    zero on the diagonal and sums to one (uniform by default).
    """

    def __init__(self, num_groups: int, beta: float = 0.1, gamma: float = 0.9,
                 weights: np.ndarray | None = None):
        if num_groups < 1:
            raise ValueError("need at least one group")
        if not 0.0 < beta <= 1.0:
            raise ValueError(f"learning rate must lie in (0, 1], got {beta}")
        if not 0.0 <= gamma < 1.0:
            raise ValueError(f"discount must lie in [0, 1), got {gamma}")
        self.num_groups = num_groups
        self.beta = beta
        self.gamma = gamma
        self.q = np.zeros((num_groups, NUM_STATES, NUM_ACTIONS))
        if weights is None:
            weights = np.zeros((num_groups, num_groups))
            if num_groups > 1:
                weights[:] = 1.0 / (num_groups - 1)
                np.fill_diagonal(weights, 0.0)
        self.weights = np.asarray(weights, dtype=float)
        if self.weights.shape != (num_groups, num_groups):
            raise ValueError("weight matrix must be (groups, groups)")

    def value(self, group: int, state_index: int) -> float:
        """Highest attainable Q at a state: the shared state value."""
        return float(self.q[group, state_index, :].max())


def task_share(load: np.ndarray, g: int) -> float:
    """Group g's fraction of all queued tasks."""
    total = float(np.sum(load))
    if total == 0:
        raise ZeroDivisionError("no tasks in any group")
    return float(load[g]) / total


def entropy(load: np.ndarray) -> float:
    """Shannon entropy (nats) of the task-load distribution; log |G| at
    uniform load, 0 when one group holds everything."""
    total = float(np.sum(load))
    if total == 0:
        raise ZeroDivisionError("no tasks in any group")
    h = 0.0
    for n in np.asarray(load, dtype=float):
        p = n / total
        if p > 0.0:
            h -= p * math.log(p)
    return h


def q_update(policy: QPolicy, group: int, state_index: int, action: int,
             reward: float, neighbor_values: np.ndarray) -> float:
    """Blend the old estimate with the reward plus the weighted neighbour
    state values; returns the new table entry."""
    if not 0 <= state_index < NUM_STATES or not 0 <= action < NUM_ACTIONS:
        raise ValueError(f"invalid state/action ({state_index}, {action})")
    w = policy.weights[group]
    others = np.arange(policy.num_groups) != group
    if policy.num_groups > 1:
        if abs(float(w[others].sum()) - 1.0) > 1e-9 or float(w[group]) != 0.0:
            raise ValueError("neighbour weights must be zero on self and sum to 1")
        coop = float(np.dot(w[others], np.asarray(neighbor_values, dtype=float)[others]))
    else:
        coop = 0.0
    old = float(policy.q[group, state_index, action])
    new = (1.0 - policy.beta) * old + policy.beta * (reward + policy.gamma * coop)
    policy.q[group, state_index, action] = new
    return new


def select_action(policy: QPolicy, group: int, state_index: int, epsilon_t: float,
                  rng: np.random.Generator, greedy_when_below: bool = True) -> int:
    """Draw delta in (0, 1); at delta <= epsilon_t take the learned best
    action, otherwise a uniformly random one.

    greedy_when_below=False flips to the conventional epsilon-greedy
    reading (random when below the threshold).
    """
    if not 0.0 <= epsilon_t <= 1.0:
        raise ValueError(f"epsilon must lie in [0, 1], got {epsilon_t}")
    delta = float(rng.random())
    take_greedy = (delta <= epsilon_t) if greedy_when_below else (delta > epsilon_t)
    if take_greedy:
        return int(np.argmax(policy.q[group, state_index, :]))
    return int(rng.integers(0, NUM_ACTIONS))


# ---------------------------------------------------------------------------
# the migration world
# ---------------------------------------------------------------------------

@dataclass
class _QueuedTask:
    task: Task
    age: int = 0  # ticks waited since detection


@dataclass
class MigrationWorld:
    """Multi-group queueing state the controller acts on.

    arrivals[t][g] lists the tasks reaching group g's detection area at tick
    t (0-based).  capacity[g] is the cycles the group can process per tick;
    frequency[g] the effective CPU frequency used for deadline estimates.
    """

    arrivals: list[list[list[Task]]]
    capacity: np.ndarray
    frequency: np.ndarray
    tick_seconds: float = 1.0
    congestion_alpha: float = 1.0
    rewards: RewardConfig = field(default_factory=RewardConfig)
    migration_enabled: bool = True

    def __post_init__(self) -> None:
        self.capacity = np.asarray(self.capacity, dtype=float)
        self.frequency = np.asarray(self.frequency, dtype=float)
        self.num_groups = self.capacity.shape[0]
        self.incoming: list[list[Task]] = [[] for _ in range(self.num_groups)]
        self.queues: list[list[_QueuedTask]] = [[] for _ in range(self.num_groups)]
        self.phases = [Phase.DETECT] * self.num_groups
        self.total_arrived = 0
        self.total_processed = 0
        self.total_transmitted = 0
        self.processed_success = 0

    def spawn(self, tick: int) -> None:
        """Deliver tick's arrivals into each group's detection area."""
        if tick - 1 < len(self.arrivals):
            for g, batch in enumerate(self.arrivals[tick - 1]):
                self.incoming[g].extend(batch)
                self.total_arrived += len(batch)

    def queued_cycles(self, g: int) -> float:
        return sum(q.task.c for q in self.queues[g])

    def congested(self, g: int) -> bool:
        return self.queued_cycles(g) > self.congestion_alpha * self.capacity[g]

    def state(self, g: int) -> GroupState:
        return GroupState(self.phases[g], self.congested(g))

    def loads(self) -> np.ndarray:
        return np.array([len(self.queues[g]) + len(self.incoming[g])
                         for g in range(self.num_groups)], dtype=float)

    def age_all(self) -> None:
        for queue in self.queues:
            for entry in queue:
                entry.age += 1


def apply_action(world: MigrationWorld, policy: QPolicy, g: int, action: int
                 ) -> tuple[float, GroupState]:
    """Execute one action for group g; returns (reward, next state).

    Detection admits waiting arrivals (positive only when something was
    there to admit).  Transmission ships half the queue, rounded up, to the
    neighbour whose state value for the receiving state is highest.
    Processing consumes queue entries within the tick's cycle budget;
    success means every consumed task still met its deadline.
    """
    r = world.rewards
    congested = world.congested(g)
    if action == Phase.DETECT:
        moved = len(world.incoming[g])
        world.queues[g].extend(_QueuedTask(t) for t in world.incoming[g])
        world.incoming[g].clear()
        reward = r.r_detect if moved > 0 else -r.r_detect
    elif action == Phase.TRANSMIT:
        reward = 0.0
        if world.migration_enabled and world.num_groups > 1 and world.queues[g]:
            batch = math.ceil(len(world.queues[g]) / 2)
            target = _transmit_target(world, policy, g)
            moved = [world.queues[g].pop(0) for _ in range(batch)]
            world.queues[target].extend(moved)
            world.total_transmitted += len(moved)
            reward = r.r_transmit
    elif action == Phase.PROCESS:
        budget = float(world.capacity[g])
        done: list[_QueuedTask] = []
        while world.queues[g] and world.queues[g][0].task.c <= budget:
            entry = world.queues[g].pop(0)
            budget -= entry.task.c
            done.append(entry)
        success = bool(done)
        for entry in done:
            waited = entry.age * world.tick_seconds
            exec_s = entry.task.c / float(world.frequency[g])
            if waited + exec_s > entry.task.t_max:
                success = False
        world.total_processed += len(done)
        if success:
            world.processed_success += len(done)
        if not congested:
            reward = r.r_process if success else -r.r_process1
        else:
            reward = -r.r_process2 if success else 0.0
    else:
        raise ValueError(f"unknown action {action}")
    world.phases[g] = Phase(action)
    return reward, world.state(g)


def _transmit_target(world: MigrationWorld, policy: QPolicy, g: int) -> int:
    """Neighbour with the highest state value for its receiving state,
    ties to the lowest group id."""
    best, best_v = -1, -math.inf
    for other in range(world.num_groups):
        if other == g:
            continue
        v = policy.value(other, world.state(other).index)
        if v > best_v:
            best, best_v = other, v
    return best


@dataclass
class EpisodeRow:
    tick: int
    group: int
    state: str
    action: str
    reward: float
    num_tasks: int
    entropy: float | None
    f_max: float


def run_migration_episode(world: MigrationWorld, policy: QPolicy, T: int,
                          rng: np.random.Generator,
                          eps_min: float = 0.1, eps_max: float = 0.95,
                          greedy_when_below: bool = True,
                          force_action: int | None = None) -> list[EpisodeRow]:
    """Run T ticks of the controller loop and return the per-(tick, group)
    trace.  force_action pins every group to one action (the no-migration
    baseline forces processing)."""
    if T < 1:
        raise ValueError("episode length must be >= 1")
    trace: list[EpisodeRow] = []
    f_max = 0.0
    for t in range(1, T + 1):
        world.spawn(t)
        eps_t = eps_min + (eps_max - eps_min) * t / T
        q_snapshot = policy.q.copy()
        for g in range(world.num_groups):
            state = world.state(g)
            if force_action is not None:
                action = force_action
            else:
                action = select_action(policy, g, state.index, eps_t, rng,
                                       greedy_when_below)
            reward, _ = apply_action(world, policy, g, action)
            loads = world.loads()
            if loads.sum() > 0:
                f_cur = entropy(loads)
                f_max = max(f_max, f_cur)
            else:
                f_cur = None
            neighbor_values = q_snapshot[:, state.index, :].max(axis=1)
            q_update(policy, g, state.index, action, reward, neighbor_values)
            trace.append(EpisodeRow(t, g, str(state), Phase(action).name.lower(),
                                    reward, int(loads[g]), f_cur, f_max))
        world.age_all()
    return trace


def export_episode_csv(trace: list[EpisodeRow], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "group_id", "state", "action", "reward",
                         "num_tasks", "entropy", "f_max"])
        for row in trace:
            writer.writerow([row.tick, row.group, row.state, row.action,
                             repr(row.reward), row.num_tasks,
                             "" if row.entropy is None else repr(row.entropy),
                             repr(row.f_max)])

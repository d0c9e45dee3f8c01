"""Domain records and the delay / energy / priority formulas.

Units are bits, CPU cycles, seconds, joules, metres and watts throughout.
All operations here are pure functions of their inputs and safe to call
concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence


class Role(Enum):
    MBS = "mbs"
    SBS = "sbs"


@dataclass(frozen=True)
class Task:
    """An offloadable job.

    u is the input size in bits, c the CPU cycles it needs, r the result
    size in bits, t_max the deadline in seconds and kind the workload type
    index used by the popularity / caching machinery.
    """

    id: int
    u: float
    c: float
    r: float
    t_max: float
    kind: int = 0

    def __post_init__(self) -> None:
        if self.u <= 0:
            raise ValueError(f"task {self.id}: input size must be positive, got {self.u}")
        if self.c <= 0:
            raise ValueError(f"task {self.id}: cycle count must be positive, got {self.c}")
        if self.r < 0:
            raise ValueError(f"task {self.id}: result size must be nonnegative, got {self.r}")
        if self.t_max <= 0:
            raise ValueError(f"task {self.id}: deadline must be positive, got {self.t_max}")


@dataclass
class BaseStation:
    """A base station with an attached edge server.

    f is the CPU frequency (cycles/s), m_c the per-window compute budget in
    cycles, m_u the storage budget in bits, s the cache space in bits and
    r_used the cache space currently consumed.  queue holds ids of tasks
    waiting at this station, in service order.
    """

    id: int
    role: Role
    f: float
    m_c: float
    m_u: float
    s: float
    r_used: float = 0.0
    position: tuple[float, float] = (0.0, 0.0)
    queue: list[int] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.f <= 0:
            raise ValueError(f"station {self.id}: CPU frequency must be positive")
        if self.s < 0 or not 0 <= self.r_used <= max(self.s, 0.0):
            raise ValueError(f"station {self.id}: used cache space outside [0, s]")

    @property
    def cache_free(self) -> float:
        return self.s - self.r_used


@dataclass
class Group:
    """One macro base station plus the small cells it coordinates."""

    id: int
    mbs: int
    sbs_list: list[int]
    num_tasks: int = 0

    def __post_init__(self) -> None:
        if self.mbs in self.sbs_list:
            raise ValueError(f"group {self.id}: station {self.mbs} listed as both MBS and SBS")
        if self.num_tasks < 0:
            raise ValueError(f"group {self.id}: task count must be nonnegative")

    @property
    def stations(self) -> list[int]:
        return [self.mbs, *self.sbs_list]


@dataclass(frozen=True)
class ChannelModel:
    """Radio and computation-energy constants.

    noise_psd is the noise power spectral density in W/Hz, kappa the
    computation energy efficiency coefficient and f_local the CPU frequency
    of the local device a task would otherwise run on.
    """

    bandwidth: float = 20e6
    tx_power_user: float = 0.1
    tx_power_bs: float = 40.0
    noise_psd: float = 10 ** (-172.0 / 10.0) / 1000.0
    path_loss_exp: float = 4.0
    kappa: float = 1e-26
    f_local: float = 1e9

    def __post_init__(self) -> None:
        for name in ("bandwidth", "tx_power_user", "tx_power_bs", "noise_psd",
                     "path_loss_exp", "kappa", "f_local"):
            if getattr(self, name) <= 0:
                raise ValueError(f"channel parameter {name} must be positive")


@dataclass(frozen=True)
class CostWeights:
    """coe trades delay against energy; alpha1 trades compute speedup
    against upload speed in the priority score."""

    coe: float = 0.5
    alpha1: float = 0.5

    def __post_init__(self) -> None:
        if not 0.0 <= self.coe <= 1.0:
            raise ValueError(f"coe must lie in [0, 1], got {self.coe}")
        if not 0.0 <= self.alpha1 <= 1.0:
            raise ValueError(f"alpha1 must lie in [0, 1], got {self.alpha1}")


def shannon_rate(ch: ChannelModel, tx_power: float, distance: float) -> float:
    """Link rate in bits/s over an AWGN channel with power-law path loss."""
    if distance <= 0:
        raise ValueError(f"distance must be positive, got {distance}")
    if tx_power < 0:
        raise ValueError(f"tx power must be nonnegative, got {tx_power}")
    noise = ch.noise_psd * ch.bandwidth
    snr = tx_power * distance ** (-ch.path_loss_exp) / noise
    return ch.bandwidth * math.log2(1.0 + snr)


def exec_time(task: Task, f: float) -> float:
    """Seconds to execute the task at CPU frequency f."""
    if f <= 0:
        raise ValueError(f"CPU frequency must be positive, got {f}")
    return task.c / f


def down_time(task: Task, rate: float) -> float:
    """Seconds to return the result over a link of the given rate."""
    if rate <= 0:
        raise ValueError(f"link rate must be positive, got {rate}")
    return task.r / rate


def queue_time(tasks_ahead: Sequence[Task], rates_ahead: Sequence[float], f: float) -> float:
    """Wait caused by the tasks already queued: their uploads plus their
    execution, at the station's frequency f."""
    if len(tasks_ahead) != len(rates_ahead):
        raise ValueError(
            f"queue/rate length mismatch: {len(tasks_ahead)} vs {len(rates_ahead)}")
    if f <= 0:
        raise ValueError(f"CPU frequency must be positive, got {f}")
    total = 0.0
    for t, v in zip(tasks_ahead, rates_ahead):
        if v <= 0:
            raise ValueError(f"link rate must be positive, got {v}")
        total += t.c / f + t.u / v
    return total


def total_delay(
    task: Task,
    f: float,
    rate: float,
    tasks_ahead: Sequence[Task] = (),
    rates_ahead: Sequence[float] = (),
) -> float:
    """Queueing wait plus execution plus result download for one task."""
    return queue_time(tasks_ahead, rates_ahead, f) + exec_time(task, f) + down_time(task, rate)


def energy(task: Task, rate: float, f: float, ch: ChannelModel) -> float:
    """Joules spent uploading the input and executing the task.

    Upload power is the user terminal's transmit power; compute energy
    scales with the cube of the frequency over the execution time, which
    collapses to kappa * f^2 * c.
    """
    if rate <= 0:
        raise ValueError(f"link rate must be positive, got {rate}")
    if f <= 0:
        raise ValueError(f"CPU frequency must be positive, got {f}")
    upload = ch.tx_power_user * task.u / rate
    compute = ch.kappa * f ** 3 * exec_time(task, f)
    return upload + compute


def priority(task: Task, rate: float, f_remote: float, ch: ChannelModel, w: CostWeights) -> float:
    """Serving priority: remote-execution speedup blended with upload speed.

    Higher scores are served earlier.  Ties are broken by ascending task id
    (see order_by_priority) so runs are reproducible.
    """
    if rate <= 0:
        raise ValueError(f"link rate must be positive, got {rate}")
    if f_remote <= 0:
        raise ValueError(f"remote CPU frequency must be positive, got {f_remote}")
    speedup = task.c / ch.f_local - task.c / f_remote
    upload_speed = rate / task.u
    return (1.0 - w.alpha1) * speedup + w.alpha1 * upload_speed


def order_by_priority(
    tasks: Sequence[Task],
    rates: Sequence[float],
    f_remote: float,
    ch: ChannelModel,
    w: CostWeights,
) -> list[Task]:
    """Tasks sorted by descending priority score, ties by ascending id."""
    if len(tasks) != len(rates):
        raise ValueError(f"task/rate length mismatch: {len(tasks)} vs {len(rates)}")
    scored = [(priority(t, v, f_remote, ch, w), t) for t, v in zip(tasks, rates)]
    scored.sort(key=lambda pair: (-pair[0], pair[1].id))
    return [t for _, t in scored]

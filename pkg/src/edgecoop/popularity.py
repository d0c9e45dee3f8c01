"""Upload statistics, POP/ROP state ladders and semi-Markov prediction.

Time is bucketed into windows of ``delta_t`` simulation ticks.  Ticks are
integers starting at 1; bucket ``k`` holds the ticks in ``(k*dt, (k+1)*dt]``
so a window ending at an aligned ``t`` maps to exactly one bucket.

Popularity and retention values are classified onto descending threshold
ladders; the resulting state sequences feed a discrete-time semi-Markov
kernel from which first-passage probabilities to the top class are computed.
The product of the two first-passage probabilities is the caching metric the
greedy planner consumes.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np


class InsufficientHistoryError(ValueError):
    """Raised when a statistic needs more complete windows than exist."""


# ---------------------------------------------------------------------------
# upload statistics
# ---------------------------------------------------------------------------

@dataclass
class UploadStats:
    """Per-(station, kind) upload counters bucketed by window.

    Single-writer (the simulator tick), multi-reader.
    """

    delta_t: int = 10
    counts: dict[tuple[int, int, int], int] = field(default_factory=dict)
    totals: dict[tuple[int, int], int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.delta_t < 1:
            raise ValueError(f"window width must be >= 1 tick, got {self.delta_t}")

    def bucket_of(self, tick: int) -> int:
        if tick < 1:
            raise ValueError(f"ticks start at 1, got {tick}")
        return (tick - 1) // self.delta_t

    def record(self, bs: int, kind: int, tick: int, n: int = 1) -> None:
        b = self.bucket_of(tick)
        self.counts[(bs, kind, b)] = self.counts.get((bs, kind, b), 0) + n
        self.totals[(bs, b)] = self.totals.get((bs, b), 0) + n

    def _window_bucket(self, t: int) -> int:
        if t < self.delta_t or t % self.delta_t != 0:
            raise ValueError(
                f"window end {t} not aligned to {self.delta_t}-tick buckets")
        return t // self.delta_t - 1

    def kind_uploads(self, bs: int, kind: int, t: int) -> int:
        """Uploads of one kind at one station in the window ending at t."""
        return self.counts.get((bs, kind, self._window_bucket(t)), 0)

    def total_uploads(self, bs: int, t: int) -> int:
        """Uploads of every kind at one station in the window ending at t."""
        return self.totals.get((bs, self._window_bucket(t)), 0)


def static_popularity(stats: UploadStats, bs: int, kind: int, t: int) -> float:
    """Share of the station's uploads that were this kind, in (t-dt, t].

    Returns 0 when the station saw no uploads at all in the window.
    """
    total = stats.total_uploads(bs, t)
    if total == 0:
        return 0.0
    return stats.kind_uploads(bs, kind, t) / total


def retention_rate(stats: UploadStats, bs: int, kind: int, t: int,
                   cap: float = math.inf) -> float:
    """Upload count in (t-dt, t] over the count in (t-2dt, t-dt].

    0/0 is read as a steady 1.0; k/0 is capped (pass the top ROP threshold
    as the cap so the value still classifies).  Needs two full windows.
    """
    if t < 2 * stats.delta_t:
        raise InsufficientHistoryError(
            f"retention at t={t} needs {2 * stats.delta_t} ticks of history")
    cur = stats.kind_uploads(bs, kind, t)
    prev = stats.kind_uploads(bs, kind, t - stats.delta_t)
    if prev == 0:
        return 1.0 if cur == 0 else cap
    return cur / prev


# ---------------------------------------------------------------------------
# state ladders
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StateLadder:
    """Descending thresholds splitting values into popularity / retention
    classes.  Class 0 is the most popular (highest retention) class; values
    exactly on a threshold go to the higher class."""

    pop_levels: tuple[float, ...] = (0.75, 0.5, 0.25)
    rop_levels: tuple[float, ...] = (0.75, 0.5, 0.25)

    def __post_init__(self) -> None:
        for levels in (self.pop_levels, self.rop_levels):
            if not levels:
                raise ValueError("ladder needs at least one threshold")
            if any(a <= b for a, b in zip(levels, levels[1:])):
                raise ValueError(f"thresholds must be strictly decreasing: {levels}")

    @property
    def num_pop_states(self) -> int:
        return len(self.pop_levels) + 1

    @property
    def num_rop_states(self) -> int:
        return len(self.rop_levels) + 1

    @staticmethod
    def from_observations(pop_values, rop_values, num_classes: int = 4) -> "StateLadder":
        """Quantile thresholds fitted to observed value distributions."""
        if num_classes < 2:
            raise ValueError("need at least two classes")
        qs = [1.0 - i / num_classes for i in range(1, num_classes)]

        def levels(values):
            arr = np.asarray(list(values), dtype=float)
            if arr.size == 0:
                raise ValueError("no observations to fit thresholds from")
            raw = [float(np.quantile(arr, q)) for q in qs]
            # enforce strict descent; degenerate quantiles get nudged apart
            out = []
            for i, v in enumerate(raw):
                if out and v >= out[-1]:
                    v = out[-1] - max(1e-9, abs(out[-1]) * 1e-9)
                out.append(v)
            return tuple(out)

        return StateLadder(pop_levels=levels(pop_values), rop_levels=levels(rop_values))


def classify(value: float, ladder: StateLadder, which: str) -> int:
    """Class index of a popularity ('pop') or retention ('rop') value."""
    if which == "pop":
        levels = ladder.pop_levels
    elif which == "rop":
        levels = ladder.rop_levels
    else:
        raise ValueError(f"which must be 'pop' or 'rop', got {which!r}")
    for idx, threshold in enumerate(levels):
        if value >= threshold:
            return idx
    return len(levels)


# ---------------------------------------------------------------------------
# semi-Markov kernel and first-passage probabilities
# ---------------------------------------------------------------------------

class SemiMarkovChain:
    """Discrete-time semi-Markov kernel over one state ladder.

    ``z[p, q, dt]`` is the cumulative probability that the first jump out of
    state p lands in q within dt windows (dt = 1..horizon, flat beyond).
    Immutable after fitting; first-passage evaluation memoizes internally
    and clamps out-of-range values, counting the clamp events.
    """

    def __init__(self, z: np.ndarray):
        z = np.asarray(z, dtype=float)
        if z.ndim != 3 or z.shape[0] != z.shape[1] or z.shape[2] < 1:
            raise ValueError(f"kernel must have shape (n, n, horizon), got {z.shape}")
        if np.any(z < -1e-12) or np.any(z > 1.0 + 1e-12):
            raise ValueError("kernel entries must lie in [0, 1]")
        if np.any(np.diff(z, axis=2) < -1e-12):
            raise ValueError("kernel must be nondecreasing in dt")
        row_mass = z[:, :, -1].sum(axis=1)
        if np.any(row_mass > 1.0 + 1e-9):
            raise ValueError("total jump mass out of a state exceeds 1")
        self.z = z
        self.num_states = z.shape[0]
        self.horizon = z.shape[2]
        self.clamp_events = 0
        self.evaluations = 0
        self._memo: dict[tuple[int, int, int], float] = {}

    def _check_state(self, s: int) -> None:
        if not 0 <= s < self.num_states:
            raise ValueError(f"unknown state {s} (chain has {self.num_states})")

    def cumulative(self, p: int, q: int, dt: int) -> float:
        """Probability the first jump p -> q happens within dt windows."""
        self._check_state(p)
        self._check_state(q)
        if dt < 1:
            raise ValueError(f"dt must be >= 1, got {dt}")
        return float(self.z[p, q, min(dt, self.horizon) - 1])

    def first_transition_prob(self, p: int, q: int, dt: int) -> float:
        """Probability the first jump p -> q happens at exactly dt windows."""
        if dt == 1:
            return self.cumulative(p, q, 1)
        return self.cumulative(p, q, dt) - self.cumulative(p, q, dt - 1)

    def first_passage_prob(self, cur: int, target: int, dt: int) -> float:
        """Probability of sitting at the target class after dt windows,
        accumulated over first-jump decompositions.

        dt = 0 is the initial condition: 1 iff already at the target.  From
        the target state the survival mass (no jump away yet) counts, plus
        jump-away-and-return paths; from other states all first jumps are
        convolved with the remaining horizon.  Raw values are clamped to
        [0, 1] and clamp events counted.
        """
        self._check_state(cur)
        self._check_state(target)
        if dt < 0:
            raise ValueError(f"dt must be >= 0, got {dt}")
        return self._fpp(cur, target, dt)

    def _fpp(self, cur: int, target: int, dt: int) -> float:
        if dt == 0:
            return 1.0 if cur == target else 0.0
        key = (cur, target, dt)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        if cur == target:
            total = 1.0
            for r in range(self.num_states):
                if r == cur:
                    continue
                total -= self.cumulative(cur, r, dt)
            for r in range(self.num_states):
                if r == cur:
                    continue
                for x in range(1, dt + 1):
                    w = self.first_transition_prob(cur, r, x)
                    if w != 0.0:
                        total += w * self._fpp(r, target, dt - x)
        else:
            total = 0.0
            for r in range(self.num_states):
                for x in range(1, dt + 1):
                    w = self.first_transition_prob(cur, r, x)
                    if w != 0.0:
                        total += w * self._fpp(r, target, dt - x)
        self.evaluations += 1
        clamped = min(1.0, max(0.0, total))
        if abs(clamped - total) > 1e-12:
            self.clamp_events += 1
        self._memo[key] = clamped
        return clamped

    @property
    def clamp_rate(self) -> float:
        return self.clamp_events / self.evaluations if self.evaluations else 0.0

    # -- fitting ------------------------------------------------------------

    @staticmethod
    def fit(num_states: int, transitions, horizon: int) -> "SemiMarkovChain":
        """Empirical cumulative kernel from (p, q, sojourn) triples.

        Target-state frequencies get add-one smoothing (over q != p, keeping
        the no-self-jump structure); each pseudo-observation spreads its
        sojourn uniformly over 1..horizon so the kernel stays nondecreasing
        and sums to one at the horizon.
        """
        if num_states < 1:
            raise ValueError("need at least one state")
        if horizon < 1:
            raise ValueError("horizon must be >= 1")
        z = np.zeros((num_states, num_states, horizon), dtype=float)
        outgoing = np.zeros(num_states, dtype=float)
        for p, q, sojourn in transitions:
            if not (0 <= p < num_states and 0 <= q < num_states):
                raise ValueError(f"transition references unknown state: ({p}, {q})")
            if p == q:
                continue  # run-length encoding should never emit self-jumps
            if sojourn < 1:
                raise ValueError(f"sojourn must be >= 1 window, got {sojourn}")
            s = min(int(sojourn), horizon)
            z[p, q, s - 1:] += 1.0
            outgoing[p] += 1.0
        uniform = np.arange(1, horizon + 1, dtype=float) / horizon
        for p in range(num_states):
            denom = outgoing[p] + (num_states - 1)
            if denom == 0.0:
                continue
            for q in range(num_states):
                if q == p:
                    continue
                z[p, q, :] = (z[p, q, :] + uniform) / denom
        return SemiMarkovChain(z)

    @staticmethod
    def fit_from_sequences(num_states: int, sequences, horizon: int) -> "SemiMarkovChain":
        """Fit from per-window state sequences (run-length encoded here)."""
        triples = []
        for seq in sequences:
            seq = list(seq)
            if len(seq) < 2:
                continue
            prev = seq[0]
            run = 1
            for s in seq[1:]:
                if s == prev:
                    run += 1
                else:
                    triples.append((prev, s, run))
                    prev = s
                    run = 1
        return SemiMarkovChain.fit(num_states, triples, horizon)


def caching_metric(pop_chain: SemiMarkovChain, rop_chain: SemiMarkovChain,
                   pop_state: int, rop_state: int, dt: int) -> float:
    """Joint chance of reaching the top popularity and top retention class
    within dt windows; the planner's placement weight, in [0, 1]."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    return (pop_chain.first_passage_prob(pop_state, 0, dt)
            * rop_chain.first_passage_prob(rop_state, 0, dt))


# ---------------------------------------------------------------------------
# Zipf workloads
# ---------------------------------------------------------------------------

@dataclass
class ZipfWorkload:
    """Task-kind sampler with P(kind k) proportional to (k+1)^-xi."""

    xi: float
    num_kinds: int
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.xi < 0:
            raise ValueError(f"Zipf exponent must be nonnegative, got {self.xi}")
        if self.num_kinds < 1:
            raise ValueError("need at least one kind")
        ranks = np.arange(1, self.num_kinds + 1, dtype=float)
        mass = ranks ** (-self.xi)
        self._probs = mass / mass.sum()
        self._rng = np.random.default_rng(self.rng_seed)

    def probabilities(self) -> np.ndarray:
        return self._probs.copy()

    def sample(self, n: int) -> np.ndarray:
        """n i.i.d. kind indices (0-based), deterministic given the seed."""
        if n < 0:
            raise ValueError(f"sample size must be nonnegative, got {n}")
        return self._rng.choice(self.num_kinds, size=n, p=self._probs)


def zipf_sample(workload: ZipfWorkload, n: int) -> np.ndarray:
    return workload.sample(n)


# ---------------------------------------------------------------------------
# planner glue: fitted chains and the metric matrix
# ---------------------------------------------------------------------------

def kind_state_sequences(stats: UploadStats, ladder: StateLadder, bs: int,
                         kind: int, t_end: int) -> tuple[list[int], list[int]]:
    """Per-window (pop, rop) class sequences at one station, up to t_end."""
    dt = stats.delta_t
    pops: list[int] = []
    rops: list[int] = []
    t = 2 * dt  # earliest window with enough history for retention
    while t <= t_end:
        pop_v = static_popularity(stats, bs, kind, t)
        rop_v = retention_rate(stats, bs, kind, t, cap=ladder.rop_levels[0])
        pops.append(classify(pop_v, ladder, "pop"))
        rops.append(classify(rop_v, ladder, "rop"))
        t += dt
    return pops, rops


def fit_kind_chains(stats: UploadStats, ladder: StateLadder, bs_ids, kind: int,
                    t_end: int, horizon: int = 8) -> tuple[SemiMarkovChain, SemiMarkovChain]:
    """Pooled POP and ROP kernels for one kind across stations."""
    pop_seqs = []
    rop_seqs = []
    for bs in bs_ids:
        pops, rops = kind_state_sequences(stats, ladder, bs, kind, t_end)
        pop_seqs.append(pops)
        rop_seqs.append(rops)
    pop_chain = SemiMarkovChain.fit_from_sequences(ladder.num_pop_states, pop_seqs, horizon)
    rop_chain = SemiMarkovChain.fit_from_sequences(ladder.num_rop_states, rop_seqs, horizon)
    return pop_chain, rop_chain


def metric_matrix(stats: UploadStats, ladder: StateLadder, bs_ids, kinds,
                  t_end: int, predict_dt: int = 1, horizon: int = 8) -> np.ndarray:
    """Caching metric per (station, kind) from freshly fitted chains."""
    p = np.zeros((len(bs_ids), len(kinds)), dtype=float)
    for j, kind in enumerate(kinds):
        pop_chain, rop_chain = fit_kind_chains(stats, ladder, bs_ids, kind, t_end, horizon)
        for i, bs in enumerate(bs_ids):
            pop_v = static_popularity(stats, bs, kind, t_end)
            rop_v = retention_rate(stats, bs, kind, t_end, cap=ladder.rop_levels[0])
            pop_s = classify(pop_v, ladder, "pop")
            rop_s = classify(rop_v, ladder, "rop")
            p[i, j] = caching_metric(pop_chain, rop_chain, pop_s, rop_s, predict_dt)
    return p


# ---------------------------------------------------------------------------
# CSV fixtures
# ---------------------------------------------------------------------------

def export_chains(path, chains: dict[int, SemiMarkovChain]) -> None:
    """Write fitted kernels as (kind, p, q, dt, Z) rows."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["kind", "p", "q", "dt", "Z"])
        for kind in sorted(chains):
            chain = chains[kind]
            for p in range(chain.num_states):
                for q in range(chain.num_states):
                    for dt in range(1, chain.horizon + 1):
                        writer.writerow([kind, p, q, dt, repr(float(chain.z[p, q, dt - 1]))])


def import_chains(path) -> dict[int, SemiMarkovChain]:
    """Rebuild kernels from a (kind, p, q, dt, Z) table."""
    rows: dict[int, dict[tuple[int, int, int], float]] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            kind = int(row["kind"])
            rows.setdefault(kind, {})[
                (int(row["p"]), int(row["q"]), int(row["dt"]))] = float(row["Z"])
    chains: dict[int, SemiMarkovChain] = {}
    for kind, entries in rows.items():
        n = max(p for p, _, _ in entries) + 1
        horizon = max(dt for _, _, dt in entries)
        z = np.zeros((n, n, horizon))
        for (p, q, dt), value in entries.items():
            z[p, q, dt - 1] = value
        chains[kind] = SemiMarkovChain(z)
    return chains

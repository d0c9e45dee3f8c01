"""Greedy cooperative cache planning and runtime cache lookup.

Kinds are the cacheable objects; each has a representative input size in
bits.  A placement's benefit is the exact decrease it causes in the
popularity-weighted transmission-cost objective: every station is charged,
per kind, either nothing (holds it), the inter-station transfer from the
nearest holder, or the miss cost (queue/upload estimate supplied by the
caller) when nobody holds it.

Planning is a pure function from inputs to a cache matrix; lookups are
read-only.  Plan swaps happen atomically at window boundaries in the
harness.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class Outcome(Enum):
    HIT = "hit"
    NEIGHBOR_HIT = "neighbor_hit"
    MISS = "miss"


@dataclass(frozen=True)
class LookupResult:
    outcome: Outcome
    source: int | None = None  # station serving a neighbour hit


@dataclass
class TransferGraph:
    """Pairwise station geometry and link rates, plus per-(station, kind)
    miss costs in seconds.

    dis must be symmetric with a zero diagonal; v[i, m] is the transfer rate
    between stations i and m in bits/s; miss_cost[i, j] is what station i
    pays when kind j is cached nowhere.
    """

    dis: np.ndarray
    v: np.ndarray
    miss_cost: np.ndarray

    def __post_init__(self) -> None:
        self.dis = np.asarray(self.dis, dtype=float)
        self.v = np.asarray(self.v, dtype=float)
        self.miss_cost = np.asarray(self.miss_cost, dtype=float)
        n = self.dis.shape[0]
        if self.dis.shape != (n, n) or self.v.shape != (n, n):
            raise ValueError("distance and rate matrices must be square and same size")
        if self.miss_cost.shape[0] != n:
            raise ValueError("miss cost rows must match station count")
        if np.any(np.diag(self.dis) != 0.0):
            raise ValueError("self-distances must be zero")
        if not np.allclose(self.dis, self.dis.T):
            raise ValueError("distance matrix must be symmetric")
        off = ~np.eye(n, dtype=bool)
        if np.any(self.dis[off] <= 0.0):
            raise ValueError("distances between distinct stations must be positive")
        if np.any(self.v[off] <= 0.0):
            raise ValueError("pairwise rates must be positive")

    @property
    def num_stations(self) -> int:
        return self.dis.shape[0]

    def nearest_holder(self, i: int, holders: np.ndarray) -> int:
        """Closest station to i among holders (excluding i), ties by id."""
        best = -1
        best_d = np.inf
        for m in np.flatnonzero(holders):
            if m == i:
                continue
            d = self.dis[m, i]
            if d < best_d:
                best_d = d
                best = int(m)
        return best


@dataclass
class CacheMatrix:
    """Binary placement matrix over (station, kind) plus used space."""

    ca: np.ndarray
    kind_sizes: np.ndarray
    capacity: np.ndarray
    placements: list[tuple[int, int, float]] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.ca = np.asarray(self.ca, dtype=np.uint8)
        self.kind_sizes = np.asarray(self.kind_sizes, dtype=float)
        self.capacity = np.asarray(self.capacity, dtype=float)
        if self.ca.shape != (self.capacity.shape[0], self.kind_sizes.shape[0]):
            raise ValueError("placement matrix shape must be (stations, kinds)")
        if np.any((self.ca != 0) & (self.ca != 1)):
            raise ValueError("placements must be binary")
        self.check_capacity()

    @staticmethod
    def empty(num_stations: int, kind_sizes, capacity) -> "CacheMatrix":
        sizes = np.asarray(kind_sizes, dtype=float)
        return CacheMatrix(np.zeros((num_stations, sizes.shape[0]), dtype=np.uint8),
                           sizes, np.asarray(capacity, dtype=float))

    @property
    def used(self) -> np.ndarray:
        return self.ca @ self.kind_sizes

    def check_capacity(self) -> None:
        used = self.used
        if np.any(used > self.capacity + 1e-9):
            bad = int(np.argmax(used - self.capacity))
            raise ValueError(
                f"station {bad} over cache capacity: {used[bad]} > {self.capacity[bad]}")

    def export_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["bs_id", "kind_id"])
            for i, j in zip(*np.nonzero(self.ca)):
                writer.writerow([int(i), int(j)])


def transfer_cost(ca: CacheMatrix, graph: TransferGraph, kind: int, bs: int
                  ) -> tuple[int, float]:
    """(case, seconds) for station bs to obtain kind.

    Case 1: held locally, zero cost.  Case 2: held elsewhere, transfer from
    the nearest holder.  Case 3: held nowhere, the miss cost.
    """
    if ca.ca[bs, kind]:
        return 1, 0.0
    holders = ca.ca[:, kind].astype(bool)
    if not holders.any():
        return 3, float(graph.miss_cost[bs, kind])
    m = graph.nearest_holder(bs, holders)
    return 2, float(ca.kind_sizes[kind] / graph.v[bs, m])


def lookup(ca: CacheMatrix, graph: TransferGraph, kind: int, bs: int) -> LookupResult:
    """Runtime cache probe used by the harness for hit accounting."""
    if ca.ca[bs, kind]:
        return LookupResult(Outcome.HIT)
    holders = ca.ca[:, kind].astype(bool)
    if holders.any():
        return LookupResult(Outcome.NEIGHBOR_HIT, graph.nearest_holder(bs, holders))
    return LookupResult(Outcome.MISS)


def cache_objective(ca: CacheMatrix, graph: TransferGraph, p: np.ndarray) -> float:
    """Popularity-weighted total transmission cost of a placement."""
    total = 0.0
    for j in range(ca.kind_sizes.shape[0]):
        for i in range(graph.num_stations):
            _, cost = transfer_cost(ca, graph, j, i)
            total += float(p[i, j]) * cost
    return total


def placement_benefit(ca: CacheMatrix, graph: TransferGraph, p: np.ndarray,
                      kind: int, bs: int) -> float:
    """Objective decrease from additionally caching kind at bs.

    Zero when the station already holds the kind or lacks the space.  When
    nobody holds it yet, every station trades its miss cost for a transfer
    (the new holder pays nothing); when holders exist, stations switch to
    the new holder only if it is nearer.
    """
    if ca.ca[bs, kind]:
        return 0.0
    size = float(ca.kind_sizes[kind])
    if ca.used[bs] + size > ca.capacity[bs] + 1e-9:
        return 0.0
    holders = ca.ca[:, kind].astype(bool)
    gain = 0.0
    for m in range(graph.num_stations):
        if holders[m]:
            continue
        if holders.any():
            before = size / graph.v[m, graph.nearest_holder(m, holders)]
        else:
            before = float(graph.miss_cost[m, kind])
        if m == bs:
            after = 0.0
        elif holders.any():
            after = min(before, size / graph.v[m, bs])
        else:
            after = size / graph.v[m, bs]
        gain += float(p[m, kind]) * (before - after)
    return gain


def _benefit_column(ca_col: np.ndarray, graph: TransferGraph, p_col: np.ndarray,
                    size: float, miss_col: np.ndarray, used: np.ndarray,
                    cap: np.ndarray, dis_masked: np.ndarray) -> np.ndarray:
    """Benefit of placing one kind at every feasible station (-inf elsewhere)."""
    nbs = graph.num_stations
    holders = ca_col.astype(bool)
    non_holders = ~holders
    if holders.any():
        dis_h = dis_masked[:, holders]
        nearest = np.flatnonzero(holders)[np.argmin(dis_h, axis=1)]
        before = size / graph.v[np.arange(nbs), nearest]
    else:
        before = miss_col.astype(float).copy()
    weights = p_col * non_holders
    out = np.full(nbs, -np.inf)
    for i in range(nbs):
        if holders[i] or used[i] + size > cap[i] + 1e-9:
            continue
        trans_i = size / graph.v[:, i]
        after = np.minimum(before, trans_i) if holders.any() else trans_i.copy()
        after[i] = 0.0
        out[i] = float(np.dot(weights, before - after))
    return out


def greedy_plan(graph: TransferGraph, p: np.ndarray, kind_sizes, capacity) -> CacheMatrix:
    """Repeatedly place the single highest-benefit feasible (station, kind)
    pair until no placement helps or no station has residual space.

    Ties on the maximal benefit break lexicographically by (station, kind)
    so plans are deterministic.  The returned matrix records the accepted
    placements in order.

    A placement only changes its own kind's column (new holder) and station
    feasibility (less space), so the benefit matrix is updated incrementally
    rather than rebuilt per step.
    """
    sizes = np.asarray(kind_sizes, dtype=float)
    cap = np.asarray(capacity, dtype=float)
    p = np.asarray(p, dtype=float)
    if np.any(p < -1e-12) or np.any(p > 1.0 + 1e-12):
        raise ValueError("metric values must lie in [0, 1]")
    nbs = graph.num_stations
    nkinds = sizes.shape[0]
    ca = CacheMatrix.empty(nbs, sizes, cap)
    used = np.zeros(nbs)
    dis_masked = np.where(np.eye(nbs, dtype=bool), np.inf, graph.dis)

    g = np.empty((nbs, nkinds))
    for j in range(nkinds):
        g[:, j] = _benefit_column(ca.ca[:, j], graph, p[:, j], float(sizes[j]),
                                  graph.miss_cost[:, j], used, cap, dis_masked)
    while True:
        flat = int(np.argmax(g))  # first maximum in row-major order = (bs, kind) tie-break
        best = float(g.flat[flat])
        if not np.isfinite(best) or best <= 0.0:
            break
        i, j = np.unravel_index(flat, g.shape)
        ca.ca[i, j] = 1
        used[i] += sizes[j]
        ca.placements.append((int(i), int(j), best))
        # station i lost space: infeasible cells there drop out
        g[i, sizes > cap[i] - used[i] + 1e-9] = -np.inf
        # the placed kind's holder set changed: recompute its column
        g[:, j] = _benefit_column(ca.ca[:, j], graph, p[:, j], float(sizes[j]),
                                  graph.miss_cost[:, j], used, cap, dis_masked)
    ca.check_capacity()
    return ca


def export_plan_csv(ca: CacheMatrix, path) -> None:
    ca.export_csv(path)

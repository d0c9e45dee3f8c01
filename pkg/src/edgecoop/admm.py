"""Intra-group task allocation by multi-block consensus ADMM.

The program minimizes a coe-weighted sum of total delay (queueing, upload,
execution, download) and energy over fractional assignments x[i, j] of task
j to station i, subject to per-task simplex constraints, per-station compute
and storage budgets and per-task deadlines.  The queue terms make earlier
tasks' assignments appear in later tasks' delays, which collapses to a
linear objective with a per-task multiplicity weight; x is duplicated into
an auxiliary copy y so the blocks separate, with a multiplier enforcing
x = y.

Block updates are closed-form scalar quadratic minimizers applied in
Gauss-Seidel order (current sweep for earlier stations, previous iterate
for later ones), projected to [0, 1]; inequality multipliers take projected
ascent steps.  After each column sweep a Gaussian back substitution step
solves the unit upper-triangular correction system over the non-first
station blocks plus the column's equality multiplier, which is what makes
the >=3-block splitting convergent.

Internally the cost row is normalized by its largest entry and each
capacity / deadline row to unit Euclidean norm (pure row equilibration:
the feasible set and the optimum are untouched, but residuals become
dimensionless so one penalty parameter works across instance scales).
Reported objectives and residuals are always in original units.

Two standard stabilizers are applied on top of the raw iteration: the
primal pair starts at the cost-greedy vertex (one-hot cheapest station per
task) instead of uniform, and the solution is read out as the trailing-half
running average of the iterates, which is the form in which this kind of
splitting carries its convergence rate and which irons out the limit cycle
the projected multiplier steps can fall into on instances whose capacity
constraints bind at a fractional optimum.  Stopping requires the averaged
pair to hold all feasibility residuals below tol for several consecutive
iterations.

The solver is single-threaded per problem instance (the sweeps are order
dependent); distinct instances share no state.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.optimize import linprog

from edgecoop.model import ChannelModel, Task


class NumericalError(RuntimeError):
    """Non-finite value produced mid-solve; carries the iteration index."""


# Ceiling on the scaled inequality multipliers.  A feasible row's dual sits
# at O(1) in equilibrated units; an infeasible row would ramp its multiplier
# forever and drag the equality constraints with it.  Saturation lets the
# rest of the system settle, and the saturated magnitude is the reported
# infeasibility diagnostic.
MULTIPLIER_CAP = 50.0


class SolveStatus(Enum):
    CONVERGED = "converged"
    ITERATION_CAP = "iteration_cap"
    CONVERGED_INFEASIBLE = "converged_infeasible"  # residuals met, deadline not


@dataclass(frozen=True)
class SolverConfig:
    rho: float = 2.0
    alpha2: float = 0.5
    kappa: int = 200
    tol: float = 1e-3
    dwell: int = 5          # consecutive in-tolerance iterations before stopping
    init: str = "greedy"    # or "uniform"

    def __post_init__(self) -> None:
        if self.rho <= 0:
            raise ValueError(f"penalty must be positive, got {self.rho}")
        if not 0.0 < self.alpha2 < 1.0:
            raise ValueError(f"corrector must lie in (0, 1), got {self.alpha2}")
        if self.kappa < 1:
            raise ValueError("iteration cap must be >= 1")
        if self.tol <= 0:
            raise ValueError("tolerance must be positive")
        if self.dwell < 1:
            raise ValueError("dwell must be >= 1")
        if self.init not in ("greedy", "uniform"):
            raise ValueError(f"unknown init {self.init!r}")


@dataclass
class AllocationProblem:
    """Precomputed per-(station, task) coefficients of the allocation program.

    Tasks must already be in service (priority) order; the queue multiplicity
    of task j is the number of tasks behind it.
    """

    tasks: list[Task]
    f: np.ndarray        # station CPU frequencies, cycles/s
    m_c: np.ndarray      # station compute budgets, cycles
    m_u: np.ndarray      # station storage budgets, bits
    rates: np.ndarray    # (stations, tasks) user uplink rates, bits/s
    coe: float
    t_exec: np.ndarray = field(init=False)
    t_up: np.ndarray = field(init=False)
    t_down: np.ndarray = field(init=False)
    e: np.ndarray = field(init=False)
    w: np.ndarray = field(init=False)        # linear objective coefficient
    a: np.ndarray = field(init=False)        # per-cell deadline coefficient
    c: np.ndarray = field(init=False)        # task cycles
    u: np.ndarray = field(init=False)        # task input bits
    t_max: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        if not self.tasks:
            raise ValueError("allocation needs at least one task")
        if not 0.0 <= self.coe <= 1.0:
            raise ValueError(f"coe must lie in [0, 1], got {self.coe}")
        nbs, nh = self.rates.shape
        if nbs != self.f.shape[0] or nh != len(self.tasks):
            raise ValueError("rate matrix must be (stations, tasks)")
        if np.any(self.rates <= 0) or np.any(self.f <= 0):
            raise ValueError("rates and frequencies must be positive")
        if np.any(self.m_c <= 0) or np.any(self.m_u <= 0):
            raise ValueError("capacities must be positive")

    @property
    def num_stations(self) -> int:
        return self.f.shape[0]

    @property
    def num_tasks(self) -> int:
        return len(self.tasks)

    def objective(self, x: np.ndarray) -> float:
        """Weighted delay + energy at assignment x (linear in x)."""
        return float(np.sum(self.w * x))

    def deadline_lhs(self, x: np.ndarray, j: int) -> float:
        """Total delay task j experiences under x, summed over stations:
        earlier tasks' execution and upload, then its own cell terms."""
        b = self.t_exec[:, :j] + self.t_up[:, :j]
        return float(np.sum(b * x[:, :j]) + np.dot(self.a[:, j], x[:, j]))

    def deadline_lhs_all(self, x: np.ndarray) -> np.ndarray:
        return np.array([self.deadline_lhs(x, j) for j in range(self.num_tasks)])


def build_problem(tasks, f, m_c, m_u, rates, coe, ch: ChannelModel) -> AllocationProblem:
    """Assemble the coefficient matrices for priority-ordered tasks.

    w[i, j] carries the full linear weight of x[i, j] in the objective: its
    own delay and energy plus its execution/upload terms repeated once per
    task queued behind it.
    """
    prob = AllocationProblem(
        tasks=list(tasks),
        f=np.asarray(f, dtype=float),
        m_c=np.asarray(m_c, dtype=float),
        m_u=np.asarray(m_u, dtype=float),
        rates=np.asarray(rates, dtype=float),
        coe=float(coe),
    )
    nh = prob.num_tasks
    prob.c = np.array([t.c for t in prob.tasks])
    prob.u = np.array([t.u for t in prob.tasks])
    prob.t_max = np.array([t.t_max for t in prob.tasks])
    r = np.array([t.r for t in prob.tasks])
    prob.t_exec = np.outer(1.0 / prob.f, prob.c)
    prob.t_up = prob.u[None, :] / prob.rates
    prob.t_down = r[None, :] / prob.rates
    prob.e = ch.tx_power_user * prob.t_up + ch.kappa * (prob.f ** 2)[:, None] * prob.c[None, :]
    mult = (nh - 1) - np.arange(nh)  # tasks queued behind task j
    delay = (prob.t_exec + prob.t_down + prob.t_up
             + mult[None, :] * (prob.t_exec + prob.t_up))
    prob.w = prob.coe * delay + (1.0 - prob.coe) * prob.e
    prob.a = prob.t_up + prob.t_exec + prob.t_down
    return prob


def gaussian_back_substitution(v_cur: np.ndarray, v_tilde: np.ndarray,
                               alpha2: float) -> np.ndarray:
    """Correct one column's predictor sequence.

    The sequence is (station blocks 2..n, equality multiplier).  The
    correction solves the unit upper-triangular system U d = alpha2 *
    (v_tilde - v_cur), where block row a couples all later blocks and the
    multiplier row stands alone, then returns v_cur + d.
    """
    v_cur = np.asarray(v_cur, dtype=float)
    v_tilde = np.asarray(v_tilde, dtype=float)
    if v_cur.shape != v_tilde.shape or v_cur.ndim != 1:
        raise ValueError(f"sequence shapes differ: {v_cur.shape} vs {v_tilde.shape}")
    if not 0.0 < alpha2 < 1.0:
        raise ValueError(f"corrector must lie in (0, 1), got {alpha2}")
    r = alpha2 * (v_tilde - v_cur)
    d = np.zeros_like(r)
    d[-1] = r[-1]
    tail = 0.0
    for a in range(len(r) - 2, -1, -1):
        d[a] = r[a] - tail
        tail += d[a]
    return v_cur + d


def dual_update(lam: np.ndarray, rho: float, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Consensus multiplier ascent: lam + rho * (x - y), elementwise."""
    return lam + rho * (x - y)


@dataclass
class SolveRecord:
    k: int
    objective: float
    primal_residual: float
    constraint_residual: float
    dual_residual: float
    correction_gap: float
    x: np.ndarray
    eps: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray
    delta: np.ndarray


@dataclass
class SolveResult:
    x: np.ndarray
    y: np.ndarray
    lam: np.ndarray
    v: np.ndarray
    z: np.ndarray
    status: SolveStatus
    iterations: int
    objective: float
    trace: list[SolveRecord]
    deadline_violation: float
    eps: np.ndarray
    delta: np.ndarray
    theta: np.ndarray


def solve(problem: AllocationProblem, config: SolverConfig = SolverConfig()) -> SolveResult:
    """Run the corrected multi-block splitting until the averaged iterates
    hold every feasibility residual below tol, or the iteration cap hits.

    The returned x and y, the trace residuals and the reported objective all
    refer to the trailing-half averaged pair (see the module docstring)."""
    nbs, nh = problem.num_stations, problem.num_tasks
    rho, alpha2 = config.rho, config.alpha2

    # row equilibration (see module docstring)
    w_scale = float(np.max(np.abs(problem.w)))
    w_hat = problem.w / w_scale if w_scale > 0 else problem.w.copy()
    b = problem.t_exec + problem.t_up
    dl_norm = np.array([math.sqrt(float((b[:, :j] ** 2).sum() + (problem.a[:, j] ** 2).sum()))
                        for j in range(nh)])
    dl_norm[dl_norm == 0.0] = 1.0
    a_hat = problem.a / dl_norm[None, :]
    c_norm = math.sqrt(float((problem.c ** 2).sum()))
    u_norm = math.sqrt(float((problem.u ** 2).sum()))
    c_hat = np.tile(problem.c / c_norm, (nbs, 1))
    u_hat = np.tile(problem.u / u_norm, (nbs, 1))
    mc_hat = problem.m_c / c_norm
    mu_hat = problem.m_u / u_norm
    tmax_hat = problem.t_max / dl_norm

    if config.init == "greedy":
        x = np.zeros((nbs, nh))
        x[np.argmin(problem.w, axis=0), np.arange(nh)] = 1.0
    else:
        x = np.full((nbs, nh), 1.0 / nbs)
    y = x.copy()
    lam = np.zeros((nbs, nh))
    v = np.zeros(nh)
    z = np.zeros(nh)
    beta = np.zeros((nbs, nh))
    gamma = np.zeros((nbs, nh))
    mu = np.zeros((nbs, nh))
    sigma = np.zeros((nbs, nh))
    eps = np.zeros(nh)
    delta = np.zeros(nbs)
    theta = np.zeros(nbs)
    prefix_x = [np.zeros((nbs, nh))]
    prefix_y = [np.zeros((nbs, nh))]

    def scaled_deadline(xm: np.ndarray, j: int) -> float:
        return float(np.sum(b[:, :j] / dl_norm[j] * xm[:, :j])
                     + np.dot(a_hat[:, j], xm[:, j]))

    trace: list[SolveRecord] = []
    status = SolveStatus.ITERATION_CAP
    it = 0
    streak = 0
    xbar, ybar = x.copy(), y.copy()
    for k in range(1, config.kappa + 1):
        it = k
        gap = 0.0

        # ---- x side -------------------------------------------------------
        for j in range(nh):
            col_prev = x[:, j].copy()
            for i in range(nbs):
                s_other = float(x[:, j].sum()) - float(x[i, j])
                num = (-w_hat[i, j] - lam[i, j] + rho * y[i, j] - v[j]
                       - rho * (s_other - 1.0)
                       + beta[i, j] - gamma[i, j]
                       - eps[j] * a_hat[i, j] - delta[i] * c_hat[i, j])
                xi = min(1.0, max(0.0, num / (2.0 * rho)))
                x[i, j] = xi
                gamma[i, j] = max(0.0, gamma[i, j] + rho * (xi - 1.0))
                beta[i, j] = max(0.0, beta[i, j] - rho * xi)
            eps[j] = min(MULTIPLIER_CAP,
                         max(0.0, eps[j] + rho * (scaled_deadline(x, j) - tmax_hat[j])))
            v_tilde = v[j] + rho * (float(x[:, j].sum()) - 1.0)
            seq_cur = np.append(col_prev[1:], v[j])
            seq_tilde = np.append(x[1:, j], v_tilde)
            gap = max(gap, float(np.max(np.abs(seq_tilde - seq_cur))))
            corrected = gaussian_back_substitution(seq_cur, seq_tilde, alpha2)
            if nbs > 1:
                x[1:, j] = np.clip(corrected[:-1], 0.0, 1.0)
            v[j] = corrected[-1]
        delta = np.minimum(MULTIPLIER_CAP, np.maximum(
            0.0, delta + rho * ((c_hat * x).sum(axis=1) - mc_hat)))

        # ---- y side -------------------------------------------------------
        for j in range(nh):
            col_prev = y[:, j].copy()
            for i in range(nbs):
                s_other = float(y[:, j].sum()) - float(y[i, j])
                num = (lam[i, j] + rho * x[i, j] - z[j]
                       - rho * (s_other - 1.0)
                       + mu[i, j] - sigma[i, j]
                       - theta[i] * u_hat[i, j])
                yi = min(1.0, max(0.0, num / (2.0 * rho)))
                y[i, j] = yi
                sigma[i, j] = max(0.0, sigma[i, j] + rho * (yi - 1.0))
                mu[i, j] = max(0.0, mu[i, j] - rho * yi)
            z_tilde = z[j] + rho * (float(y[:, j].sum()) - 1.0)
            seq_cur = np.append(col_prev[1:], z[j])
            seq_tilde = np.append(y[1:, j], z_tilde)
            gap = max(gap, float(np.max(np.abs(seq_tilde - seq_cur))))
            corrected = gaussian_back_substitution(seq_cur, seq_tilde, alpha2)
            if nbs > 1:
                y[1:, j] = np.clip(corrected[:-1], 0.0, 1.0)
            z[j] = corrected[-1]
        theta = np.minimum(MULTIPLIER_CAP, np.maximum(
            0.0, theta + rho * ((u_hat * y).sum(axis=1) - mu_hat)))

        lam = dual_update(lam, rho, x, y)

        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y)) and np.all(np.isfinite(lam))):
            raise NumericalError(f"non-finite value at iteration {k}")

        prefix_x.append(prefix_x[-1] + x)
        prefix_y.append(prefix_y[-1] + y)
        half = k // 2
        ybar_prev = ybar
        xbar = (prefix_x[k] - prefix_x[half]) / (k - half)
        ybar = (prefix_y[k] - prefix_y[half]) / (k - half)

        primal = float(np.max(np.abs(xbar - ybar)))
        constraint = float(np.max(np.abs(xbar.sum(axis=0) - 1.0)))
        cap_violation = max(
            float(np.max((xbar @ problem.c) / problem.m_c - 1.0)),
            float(np.max((xbar @ problem.u) / problem.m_u - 1.0)), 0.0)
        dual_res = rho * float(np.max(np.abs(ybar - ybar_prev)))
        trace.append(SolveRecord(
            k=k, objective=problem.objective(xbar), primal_residual=primal,
            constraint_residual=constraint, dual_residual=dual_res,
            correction_gap=gap, x=xbar.copy(), eps=eps.copy(), beta=beta.copy(),
            gamma=gamma.copy(), delta=delta.copy()))
        if max(primal, constraint, cap_violation) < config.tol:
            streak += 1
            if streak >= config.dwell:
                status = SolveStatus.CONVERGED
                break
        else:
            streak = 0

    violation = float(np.max(problem.deadline_lhs_all(xbar) / problem.t_max - 1.0))
    if status is SolveStatus.CONVERGED and violation > config.tol:
        status = SolveStatus.CONVERGED_INFEASIBLE
    return SolveResult(x=xbar, y=ybar, lam=lam, v=v, z=z, status=status, iterations=it,
                       objective=problem.objective(xbar), trace=trace,
                       deadline_violation=max(violation, 0.0), eps=eps.copy(),
                       delta=delta.copy(), theta=theta.copy())


def write_trace_csv(trace: list[SolveRecord], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "objective", "primal_residual",
                         "constraint_residual", "dual_residual"])
        for rec in trace:
            writer.writerow([rec.k, repr(rec.objective), repr(rec.primal_residual),
                             repr(rec.constraint_residual), repr(rec.dual_residual)])


# ---------------------------------------------------------------------------
# independent ground truth and integral rounding
# ---------------------------------------------------------------------------

MAX_ORACLE_CELLS = 24


def lp_oracle(problem: AllocationProblem) -> tuple[float, np.ndarray]:
    """Exact optimum of the (linear) program on a desk-scale instance,
    via an LP solve over the same polytope.  Independent of the splitting
    solver; used as test ground truth."""
    nbs, nh = problem.num_stations, problem.num_tasks
    if nbs * nh > MAX_ORACLE_CELLS:
        raise ValueError(f"instance too large for the oracle: {nbs * nh} cells")

    def idx(i, j):
        return i * nh + j

    n = nbs * nh
    a_eq = np.zeros((nh, n))
    for j in range(nh):
        for i in range(nbs):
            a_eq[j, idx(i, j)] = 1.0
    b_eq = np.ones(nh)

    rows = []
    rhs = []
    for i in range(nbs):  # compute budget
        row = np.zeros(n)
        for j in range(nh):
            row[idx(i, j)] = problem.c[j]
        rows.append(row)
        rhs.append(problem.m_c[i])
    for i in range(nbs):  # storage budget
        row = np.zeros(n)
        for j in range(nh):
            row[idx(i, j)] = problem.u[j]
        rows.append(row)
        rhs.append(problem.m_u[i])
    b = problem.t_exec + problem.t_up
    for j in range(nh):  # deadline
        row = np.zeros(n)
        for jp in range(j):
            for i in range(nbs):
                row[idx(i, jp)] = b[i, jp]
        for i in range(nbs):
            row[idx(i, j)] = problem.a[i, j]
        rows.append(row)
        rhs.append(problem.t_max[j])

    res = linprog(problem.w.reshape(-1), A_ub=np.array(rows), b_ub=np.array(rhs),
                  A_eq=a_eq, b_eq=b_eq, bounds=(0.0, 1.0), method="highs")
    if not res.success:
        raise RuntimeError(f"oracle LP failed: {res.message}")
    return float(res.fun), res.x.reshape(nbs, nh)


def round_assignment(problem: AllocationProblem, x: np.ndarray
                     ) -> tuple[list[int], bool]:
    """Integral assignment: largest x wins per task, then a capacity-aware
    repair pass moves the weakest assignments off overloaded stations.
    Returns (station per task, whether all budgets ended up respected)."""
    nbs, nh = problem.num_stations, problem.num_tasks
    assign = [int(np.argmax(x[:, j])) for j in range(nh)]

    def loads():
        c_load = np.zeros(nbs)
        u_load = np.zeros(nbs)
        for j, i in enumerate(assign):
            c_load[i] += problem.c[j]
            u_load[i] += problem.u[j]
        return c_load, u_load

    for _ in range(4 * nh):
        c_load, u_load = loads()
        over = [i for i in range(nbs)
                if c_load[i] > problem.m_c[i] + 1e-9 or u_load[i] > problem.m_u[i] + 1e-9]
        if not over:
            return assign, True
        i = over[0]
        movable = sorted((x[i, j], j) for j in range(nh) if assign[j] == i)
        moved = False
        for _, j in movable:
            candidates = sorted(range(nbs), key=lambda m: (-x[m, j], m))
            for m in candidates:
                if m == i:
                    continue
                if (c_load[m] + problem.c[j] <= problem.m_c[m] + 1e-9
                        and u_load[m] + problem.u[j] <= problem.m_u[m] + 1e-9):
                    assign[j] = m
                    moved = True
                    break
            if moved:
                break
        if not moved:
            return assign, False
    c_load, u_load = loads()
    ok = bool(np.all(c_load <= problem.m_c + 1e-9) and np.all(u_load <= problem.m_u + 1e-9))
    return assign, ok


# ---------------------------------------------------------------------------
# empirical convergence report
# ---------------------------------------------------------------------------

@dataclass
class ConvergenceReport:
    gap_vanishes: bool
    residuals_vanish: bool
    lyapunov_nonincreasing: bool
    violations: list[str]

    @property
    def ok(self) -> bool:
        return self.gap_vanishes and self.residuals_vanish and self.lyapunov_nonincreasing


def empirical_convergence_check(trace: list[SolveRecord], tol: float = 1e-3,
                                smooth_window: int = 5) -> ConvergenceReport:
    """Post-hoc checks on a finished trace: the predictor-corrector gap
    decays, the feasibility residuals reach tol, and a smoothed quadratic
    distance to the final point (primal plus inequality multipliers) does
    not climb over the trailing half.  Failures are reported, not raised."""
    violations: list[str] = []
    if not trace:
        return ConvergenceReport(False, False, False, ["empty trace"])

    gaps = np.array([rec.correction_gap for rec in trace])
    peak = float(gaps.max())
    tail_gap = float(gaps[-max(1, len(gaps) // 10):].mean())
    gap_ok = peak == 0.0 or tail_gap <= max(0.05 * peak, 1e-6)
    if not gap_ok:
        violations.append(
            f"correction gap stagnates: tail {tail_gap:.3e} vs peak {peak:.3e}")

    last = trace[-1]
    res_ok = max(last.primal_residual, last.constraint_residual) <= tol
    if not res_ok:
        violations.append(
            f"residuals stagnate: primal {last.primal_residual:.3e}, "
            f"constraint {last.constraint_residual:.3e} (tol {tol:.1e})")

    final = trace[-1]
    lyap = []
    for rec in trace:
        val = 0.5 * float(np.sum((rec.x - final.x) ** 2))
        val += 0.5 * float(np.sum((rec.eps - final.eps) ** 2))
        val += 0.5 * float(np.sum((rec.beta - final.beta) ** 2))
        val += 0.5 * float(np.sum((rec.gamma - final.gamma) ** 2))
        val += 0.5 * float(np.sum((rec.delta - final.delta) ** 2))
        lyap.append(val)
    tail = np.array(lyap[len(lyap) // 2:])
    if len(tail) >= 2 * smooth_window:
        kernel = np.ones(smooth_window) / smooth_window
        smoothed = np.convolve(tail, kernel, mode="valid")
        slack = 0.10 * float(smoothed.max()) + 1e-12
        increases = np.diff(smoothed) > slack
        lyap_ok = not bool(increases.any())
    else:
        lyap_ok = True
    if not lyap_ok:
        violations.append("surrogate distance to the converged point increases "
                          "over the trailing half")
    return ConvergenceReport(gap_ok, res_ok, lyap_ok, violations)


# ---------------------------------------------------------------------------
# problem fixtures on disk
# ---------------------------------------------------------------------------

def export_problem_csv(problem: AllocationProblem, path) -> None:
    """Sectioned CSV fixture: tasks, stations, rates and weights."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["section", "a", "b", "c", "d", "e"])
        writer.writerow(["params", repr(problem.coe), "", "", "", ""])
        for t in problem.tasks:
            writer.writerow(["task", t.id, repr(t.u), repr(t.c), repr(t.r), repr(t.t_max)])
        for i in range(problem.num_stations):
            writer.writerow(["station", i, repr(float(problem.f[i])),
                             repr(float(problem.m_c[i])), repr(float(problem.m_u[i])), ""])
        for i in range(problem.num_stations):
            for j in range(problem.num_tasks):
                writer.writerow(["rate", i, j, repr(float(problem.rates[i, j])), "", ""])


def import_problem_csv(path, ch: ChannelModel | None = None) -> AllocationProblem:
    ch = ch or ChannelModel()
    coe = 0.5
    tasks: list[Task] = []
    stations: list[tuple[float, float, float]] = []
    rate_entries: dict[tuple[int, int], float] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[0] != "section":
            raise ValueError("not a problem fixture: missing section header")
        for row in reader:
            kind = row[0]
            if kind == "params":
                coe = float(row[1])
            elif kind == "task":
                tasks.append(Task(id=int(row[1]), u=float(row[2]), c=float(row[3]),
                                  r=float(row[4]), t_max=float(row[5])))
            elif kind == "station":
                stations.append((float(row[2]), float(row[3]), float(row[4])))
            elif kind == "rate":
                rate_entries[(int(row[1]), int(row[2]))] = float(row[3])
            else:
                raise ValueError(f"unknown section row {kind!r}")
    if not tasks or not stations:
        raise ValueError("fixture needs at least one task and one station")
    rates = np.zeros((len(stations), len(tasks)))
    for (i, j), val in rate_entries.items():
        rates[i, j] = val
    f = np.array([s[0] for s in stations])
    m_c = np.array([s[1] for s in stations])
    m_u = np.array([s[2] for s in stations])
    return build_problem(tasks, f, m_c, m_u, rates, coe, ch)

"""Shared instance builders for the test suite."""

import numpy as np

from edgecoop.admm import build_problem
from edgecoop.model import ChannelModel, Task, shannon_rate

CH = ChannelModel()


def table2_problem(rng, num_tasks, num_stations, coe=0.5, tight=False):
    """Allocation instance with workload-style parameter ranges: 5-10 kbit
    inputs at 18000 cycles/bit, 15-30 s deadlines, 10-100 GHz stations.

    tight=True draws per-station budgets at 50-90% of the total demand so
    capacity constraints bind at the optimum; otherwise budgets are slack.
    """
    tasks = []
    for j in range(num_tasks):
        u = float(rng.uniform(5000, 10000))
        tasks.append(Task(id=j, u=u, c=18000.0 * u, r=float(rng.uniform(1000, 5000)),
                          t_max=float(rng.uniform(15, 30)), kind=0))
    f = rng.uniform(1e10, 1e11, size=num_stations)
    f[0] = f.max() * 1.1  # the macro station is the fastest
    total_c = sum(t.c for t in tasks)
    total_u = sum(t.u for t in tasks)
    if tight:
        m_c = rng.uniform(0.5, 0.9, size=num_stations) * total_c
        m_u = rng.uniform(0.5, 0.9, size=num_stations) * total_u
    else:
        m_c = np.full(num_stations, total_c * 1.5)
        m_u = np.full(num_stations, total_u * 1.5)
    rates = np.array([[shannon_rate(CH, CH.tx_power_user, float(rng.uniform(10, 250)))
                       for _ in range(num_tasks)] for _ in range(num_stations)])
    return build_problem(tasks, f, m_c, m_u, rates, coe, CH)

"""Cooperative resource management for multi-group mobile edge computing.

The package has three algorithmic cores and a simulation harness gluing them
together:

* ``model``       -- domain records (tasks, base stations, channel) and the
                     delay / energy / priority formulas everything else uses.
* ``popularity``  -- per-BS upload statistics, POP/ROP state ladders, a
                     semi-Markov first-passage predictor and Zipf workloads.
* ``caching``     -- greedy cooperative cache planning driven by the
                     popularity metric, plus runtime cache lookup.
* ``migration``   -- cooperative Q-learning controller that lets congested
                     groups shed work to their neighbours.
* ``admm``        -- intra-group task allocation via multi-block consensus
                     ADMM with a Gaussian back substitution correction step.
* ``harness``     -- deterministic tick loop, baselines and experiment sweeps
                     emitting CSV traces (see also ``cli``).
"""

from edgecoop.model import (
    BaseStation,
    ChannelModel,
    CostWeights,
    Group,
    Task,
    down_time,
    energy,
    exec_time,
    priority,
    queue_time,
    shannon_rate,
    total_delay,
)

__all__ = [
    "BaseStation",
    "ChannelModel",
    "CostWeights",
    "Group",
    "Task",
    "down_time",
    "energy",
    "exec_time",
    "priority",
    "queue_time",
    "shannon_rate",
    "total_delay",
]

__version__ = "0.1.0"

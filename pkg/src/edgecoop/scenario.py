"""Scenario configuration and the key=value scenario file format."""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path


@dataclass
class Scenario:
    """Everything a simulation run needs; fixed seed means bit-reproducible.

    num_tasks is the expected total arrivals over the run (per-tick arrivals
    are Poisson with mean num_tasks / ticks).  buffer_fraction sizes each
    station's cache as a fraction of the whole catalog's bits.
    hotspot_skew in [0, 1) concentrates arrival positions toward one side of
    the area so groups see uneven load.
    """

    num_tasks: int = 1000
    num_kinds: int = 20
    num_bs: int = 9
    num_groups: int = 3
    buffer_fraction: float = 0.4
    zipf_xi: float = 0.5
    coe: float = 0.5
    seed: int = 0
    ticks: int = 200
    rho: float = 2.0
    alpha2: float = 0.5
    iters: int = 200
    tol: float = 1e-3
    cache: str = "coop"        # coop | random | none
    migration: bool = True
    allocator: str = "admm"    # admm | greedy
    delta_t: int = 10
    predict_dt: int = 1
    congestion_alpha: float = 1.0
    hotspot_skew: float = 0.5
    capacity_factor: float = 1.2
    eps_min: float = 0.1
    eps_max: float = 0.95
    area: float = 200.0
    workload_cycles_per_bit: float = 18000.0
    tick_seconds: float = 1.0

    def __post_init__(self) -> None:
        for name in ("num_tasks", "num_kinds", "num_bs", "num_groups", "ticks"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.num_groups > self.num_bs:
            raise ValueError("cannot have more groups than stations")
        if not 0.0 <= self.buffer_fraction <= 1.0:
            raise ValueError("buffer_fraction must lie in [0, 1]")
        if not 0.0 <= self.hotspot_skew < 1.0:
            raise ValueError("hotspot_skew must lie in [0, 1)")
        if not 0.0 <= self.coe <= 1.0:
            raise ValueError("coe must lie in [0, 1]")
        if self.zipf_xi < 0:
            raise ValueError("zipf exponent must be nonnegative")
        if self.cache not in ("coop", "random", "none"):
            raise ValueError(f"unknown cache strategy {self.cache!r}")
        if self.allocator not in ("admm", "greedy"):
            raise ValueError(f"unknown allocator {self.allocator!r}")
        if self.delta_t < 1:
            raise ValueError("delta_t must be >= 1 tick")


# scenario-file keys mirror the CLI flag names where one exists
_FLAG_ALIASES = {
    "tasks": "num_tasks",
    "kinds": "num_kinds",
    "bs": "num_bs",
    "groups": "num_groups",
    "zipf": "zipf_xi",
    "buffer_frac": "buffer_fraction",
}

_BOOL_TRUE = {"on", "true", "yes", "1"}
_BOOL_FALSE = {"off", "false", "no", "0"}


def _field_types() -> dict[str, type]:
    return {f.name: f.type for f in fields(Scenario)}


def parse_scenario_file(path) -> dict:
    """Read key=value lines (# comments allowed) into override kwargs."""
    text = Path(path).read_text()
    overrides: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        overrides[key] = value
    return coerce_overrides(overrides)


def coerce_overrides(raw: dict) -> dict:
    """Map flag-style keys onto Scenario fields with proper types."""
    types = _field_types()
    out: dict = {}
    for key, value in raw.items():
        name = _FLAG_ALIASES.get(key, key)
        if name not in types:
            raise ValueError(f"unknown scenario key {key!r}")
        if isinstance(value, str):
            kind = types[name]
            if kind in (int, "int"):
                value = int(value)
            elif kind in (float, "float"):
                value = float(value)
            elif kind in (bool, "bool"):
                low = value.lower()
                if low in _BOOL_TRUE:
                    value = True
                elif low in _BOOL_FALSE:
                    value = False
                else:
                    raise ValueError(f"cannot read boolean from {value!r}")
        out[name] = value
    return out


def load_scenario(path=None, **flag_overrides) -> Scenario:
    """Scenario from an optional file plus flag overrides (flags win)."""
    kwargs = parse_scenario_file(path) if path else {}
    kwargs.update(coerce_overrides({k: v for k, v in flag_overrides.items()
                                    if v is not None}))
    return Scenario(**kwargs)

"""Shared domain types, configuration validation, and the schedule parameter.

Everything here is exact integer arithmetic; no floats anywhere so that
simulation traces are bit-reproducible.
"""

import math
import random
from dataclasses import dataclass, replace
from fractions import Fraction


class ConfigError(ValueError):
    """A simulation configuration violates an invariant."""


ALGORITHMS = ("synchronize", "dynamic-synch", "naive", "pairwise")

# Algorithms defined for single-hop (complete) topologies only.
SINGLE_HOP_ONLY = ("synchronize", "dynamic-synch")

WAKE_GENERATORS = ("uniform-spread", "seeded-random", "adversarial-clustered")


def compute_k(n: int, m: int) -> int:
    """Schedule parameter: ceil(sqrt(8*n/m)), computed exactly.

    Smallest positive integer k with k*k*m >= 8*n; no floating point.
    """
    if n < 1 or m < 1:
        raise ConfigError("n and m must be >= 1")
    a = -(-8 * n // m)  # ceil(8n/m); ceil-sqrt of a rational equals that of its ceiling
    return math.isqrt(a - 1) + 1


@dataclass(frozen=True)
class Topology:
    """Simple undirected graph on processors 1..m (edges as sorted pairs)."""

    m: int
    edges: frozenset[tuple[int, int]]
    kind: str = "edge-list"

    def __post_init__(self):
        for u, v in self.edges:
            if not (1 <= u < v <= self.m):
                raise ConfigError(f"bad edge ({u},{v}) for m={self.m}")

    def neighbors(self, u: int) -> set[int]:
        out = set()
        for a, b in self.edges:
            if a == u:
                out.add(b)
            elif b == u:
                out.add(a)
        return out

    def adjacency(self) -> dict[int, frozenset[int]]:
        adj: dict[int, set[int]] = {i: set() for i in range(1, self.m + 1)}
        for a, b in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        return {i: frozenset(s) for i, s in adj.items()}

    @property
    def is_complete(self) -> bool:
        return len(self.edges) == self.m * (self.m - 1) // 2


def complete_topology(m: int) -> Topology:
    edges = frozenset((u, v) for u in range(1, m + 1) for v in range(u + 1, m + 1))
    return Topology(m=m, edges=edges, kind="complete")


@dataclass(frozen=True)
class SimConfig:
    """One simulation: window n, m processors, wakes, topology, algorithm.

    wake_times may be an explicit list or a generator name; validate_config
    expands generators and normalizes the earliest wake to 0.  In fractional
    mode wakes are exact rationals (Fraction), otherwise ints.
    """

    n: int
    m: int
    wake_times: list | tuple | str = "uniform-spread"
    topology: Topology | str = "complete"
    algorithm: str = "synchronize"
    k_override: int | None = None
    max_ticks: int | None = None
    seed: int = 0
    fractional: bool = False


def default_horizon(n: int, k: int, algorithm: str, policy_span: int) -> int:
    """Last simulated tick, from each algorithm's completion guarantee."""
    if algorithm == "synchronize":
        log_n = max(0, (n - 1).bit_length())  # ceil(log2 n), 0 for n == 1
        return log_n * 4 * n + 2 * n + k * k + k + 1
    if algorithm == "dynamic-synch":
        return 4 * n + k * k + k + 2
    return 2 * n + policy_span


def ceil_log2(n: int) -> int:
    if n < 1:
        raise ConfigError("n must be >= 1")
    return max(0, (n - 1).bit_length())


def generate_wakes(kind: str, n: int, m: int, seed: int) -> list[int]:
    if kind == "uniform-spread":
        if m == 1:
            return [0]
        return [(i * n) // (m - 1) for i in range(m)]
    if kind == "seeded-random":
        rng = random.Random(seed)
        return [rng.randint(0, n) for _ in range(m)]
    if kind == "adversarial-clustered":
        head = -(-m // 2)  # ceil(m/2) wake at 0, the rest at n
        return [0] * head + [n] * (m - head)
    raise ConfigError(f"unknown wake generator {kind!r}")


def _as_wake(value, fractional: bool):
    if fractional:
        if isinstance(value, str):
            return Fraction(value)
        return Fraction(value)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"wake time {value!r} is not an integer (use fractional mode for rationals)")
    return value


def validate_config(cfg: SimConfig) -> SimConfig:
    """Expand generators, normalize wakes so min == 0, check all invariants.

    Returns a new, fully explicit config; raises ConfigError with a
    descriptive message on the first violated invariant.  Idempotent.
    """
    if cfg.n < 1:
        raise ConfigError("n must be >= 1")
    if cfg.m < 1:
        raise ConfigError("m must be >= 1")
    if cfg.algorithm not in ALGORITHMS:
        raise ConfigError(f"unknown algorithm {cfg.algorithm!r}; choose from {ALGORITHMS}")
    if cfg.k_override is not None and cfg.k_override < 1:
        raise ConfigError("k_override must be >= 1")
    if cfg.max_ticks is not None and cfg.max_ticks < 0:
        raise ConfigError("max_ticks must be >= 0")

    if isinstance(cfg.wake_times, str):
        if cfg.fractional:
            raise ConfigError("fractional mode requires explicit wake times")
        wakes = generate_wakes(cfg.wake_times, cfg.n, cfg.m, cfg.seed)
    else:
        wakes = [_as_wake(w, cfg.fractional) for w in cfg.wake_times]
    if len(wakes) != cfg.m:
        raise ConfigError(f"expected {cfg.m} wake times, got {len(wakes)}")

    lo = min(wakes)
    wakes = [w - lo for w in wakes]
    hi = max(wakes)
    if hi > cfg.n:
        raise ConfigError(f"wake spread {hi} exceeds n={cfg.n}")
    if any(w < 0 for w in wakes):
        raise ConfigError("wake times must be non-negative")
    if cfg.fractional:
        wakes = [Fraction(w) for w in wakes]
        if any(w >= cfg.n + 1 for w in wakes):
            raise ConfigError("fractional wakes must lie in [0, n]")

    topo = cfg.topology
    if isinstance(topo, str):
        if topo != "complete":
            raise ConfigError(
                f"topology {topo!r} must be built explicitly (see adversary.build_topology)")
        topo = complete_topology(cfg.m)
    if topo.m != cfg.m:
        raise ConfigError(f"topology has {topo.m} vertices, config has m={cfg.m}")
    if cfg.algorithm in SINGLE_HOP_ONLY and not topo.is_complete:
        raise ConfigError(f"algorithm {cfg.algorithm!r} requires the complete topology")

    return replace(cfg, wake_times=list(wakes), topology=topo)

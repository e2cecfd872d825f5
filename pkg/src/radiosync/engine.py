"""Deterministic global-tick simulation engine.

One tick is one communication round.  Within a tick, delivery runs in four
sub-phases so that request/response exchanges happen inside a single tick
(matching the round structure of the protocol handlers) while staying fully
deterministic:

  A  every radio-on processor emits its state-determined messages
     (clock beacon, discovery/initial, queue hand-off, flatten report);
  B  handlers consume the A-inbox in ascending sender id and may emit
     reactions (queue-position responses);
  C  handlers consume the B-inbox and may emit (round-k leadership
     responses, decided only after all same-tick responses were seen);
  D  handlers consume the C-inbox; no further emission is allowed.

Messages are delivered only between radio-on topology neighbours, within
the tick they are sent.  Radio-on sets come exclusively from scheduled
policies; a tick counts once for energy however many policies cover it.
"""

import hashlib
import json
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction

from .core import SimConfig, default_horizon, validate_config
from . import protocols


@dataclass
class Message:
    """A delivered message.  Every message piggybacks the sender's (tau, j).

    q is the sender's sub-unit clock offset and qp the receiver-specific
    slot-start difference; both stay zero on the integer engine.
    """

    kind: str  # sync | init | resp | pass | report
    sender: int
    tau: int
    j: int
    payload: tuple = ()
    q: Fraction = Fraction(0)
    qp: Fraction = Fraction(0)


@dataclass
class PolicyRecord:
    """A policy instance as actually laid down in global time.

    Bits at global ticks earlier than effective_from were requested in the
    past and are dropped (the radio cannot be switched retroactively); this
    only happens for reschedules of already-merged heavy clusters.
    """

    owner: int
    kind: str  # basic | stage2 | naive | pairwise | dyn-initial | dyn-block | dyn-step5
    bits: tuple
    initial_len: int
    nominal_start: int
    effective_from: int
    phase: int | None = None
    meta: dict = field(default_factory=dict)

    @property
    def span_end(self):
        return self.nominal_start + len(self.bits) - 1

    @property
    def active_start(self):
        return max(self.nominal_start, self.effective_from)

    @property
    def fully_past(self) -> bool:
        return self.active_start > self.span_end

    def active_on_ticks(self):
        lo = self.effective_from
        for pos, b in enumerate(self.bits):
            if b:
                g = self.nominal_start + pos
                if g >= lo:
                    yield g

    def to_json(self):
        return {
            "owner": self.owner,
            "kind": self.kind,
            "bits": "".join(str(b) for b in self.bits),
            "initial_len": self.initial_len,
            "nominal_start": str(self.nominal_start),
            "effective_from": str(self.effective_from),
            "phase": self.phase,
            "meta": {k: str(v) for k, v in sorted(self.meta.items())},
        }


@dataclass
class Stage2Record:
    owner: int
    tick: int
    frozen_j: int
    member_ids: tuple
    len_c: int
    ell: int
    mu: int
    next_local: int
    next_global: int
    phase: int
    clamped: bool

    def to_json(self):
        return {
            "owner": self.owner,
            "tick": str(self.tick),
            "frozen_j": str(self.frozen_j),
            "member_ids": list(self.member_ids),
            "len_c": str(self.len_c),
            "ell": self.ell,
            "mu": self.mu,
            "next_local": str(self.next_local),
            "next_global": str(self.next_global),
            "phase": self.phase,
            "clamped": self.clamped,
        }


@dataclass
class EnergyReport:
    """Radio-on tick counts plus the synchronization completion tick."""

    per_processor: dict
    max_energy: int
    total_energy: int
    sync_complete_tick: int | None

    def to_json(self):
        return {
            "per_processor": {str(k): v for k, v in sorted(self.per_processor.items())},
            "max_energy": self.max_energy,
            "total_energy": self.total_energy,
            "sync_complete_tick": self.sync_complete_tick,
        }


@dataclass
class SimTrace:
    """Everything observable about one run; a pure function of the config."""

    cfg: dict
    n: int
    m: int
    k: int
    horizon: int
    wakes: list
    policies: list = field(default_factory=list)
    on_sets: dict = field(default_factory=dict)
    clock_events: list = field(default_factory=list)  # (tick, owner, tau, q)
    stage2: list = field(default_factory=list)
    dyn_events: list = field(default_factory=list)
    edge_contacts: dict = field(default_factory=dict)  # (u,v) -> (tick, diff)
    messages: dict | None = None  # tick -> [(sender, kind, payload, receivers)]
    flags: list = field(default_factory=list)
    energy_counts: dict = field(default_factory=dict)
    sync_complete_tick: int | None = None
    final_clocks: dict = field(default_factory=dict)  # owner -> (tau, q) at horizon

    def deterministic_view(self) -> dict:
        return {
            "cfg": self.cfg,
            "horizon": str(self.horizon),
            "wakes": [str(w) for w in self.wakes],
            "policies": [p.to_json() for p in self.policies],
            "on_sets": {str(t): list(s) for t, s in sorted(self.on_sets.items())},
            "clock_events": [
                [str(t), o, str(tau), str(q)] for t, o, tau, q in self.clock_events
            ],
            "stage2": [r.to_json() for r in self.stage2],
            "dyn_events": [[str(t), kind, owner, [str(x) for x in payload]]
                           for t, kind, owner, payload in self.dyn_events],
            "edge_contacts": {
                f"{u}-{v}": [str(t), str(d)] for (u, v), (t, d) in sorted(self.edge_contacts.items())
            },
            "flags": sorted(self.flags),
            "energy": {str(o): c for o, c in sorted(self.energy_counts.items())},
            "sync_complete_tick": None if self.sync_complete_tick is None
            else str(self.sync_complete_tick),
            "final_clocks": {str(o): [str(a), str(b)] for o, (a, b) in sorted(self.final_clocks.items())},
        }

    def digest(self) -> str:
        blob = json.dumps(self.deterministic_view(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()

    def tau_series(self, owner: int) -> list:
        """(tick, tau) step function for one processor, from clock events."""
        return [(t, tau) for t, o, tau, _q in self.clock_events if o == owner]

    def tau_at(self, owner: int, tick) -> int | None:
        """Displayed clock of `owner` at `tick` (None before wake)."""
        best = None
        for t, o, tau, _q in self.clock_events:
            if o == owner and t <= tick:
                best = (t, tau)
        if best is None:
            return None
        return best[1] + (tick - best[0])


class _ProcCtx:
    """Per-processor view handed to a protocol handler."""

    def __init__(self, world, pid):
        self.world = world
        self.id = pid
        self.wake = None
        self._delta = None  # tau(t) = t + delta
        self._jsteps = []  # [(effective_tick, jdelta)], ascending
        self.q_frac = Fraction(0)

    # clock / counter reads ------------------------------------------------
    def tau(self, t):
        return t + self._delta

    def j(self, t):
        jd = None
        for eff, val in self._jsteps:
            if eff <= t:
                jd = val
            else:
                break
        if jd is None:
            return self.tau(t)
        return t + jd

    # state changes ---------------------------------------------------------
    def adopt(self, t, tau_v, j_v=None, q_v=None, q_prime=None):
        """Set the clock (and optionally the progress counter) from a peer."""
        old = self._delta
        old_q = self.q_frac
        old_key = None if old is None else old + old_q
        self._delta = tau_v - t
        if j_v is not None:
            self._push_jstep(t, j_v - t)
        if q_v is not None:
            # fractional bookkeeping: q := q_v + q', then one normalization step
            q = q_v + q_prime
            if q > Fraction(1, 2):
                self._delta += 1
                q -= 1
            elif q < Fraction(-1, 2):
                self._delta -= 1
                q += 1
            self.q_frac = q
        if self._delta != old or self.q_frac != old_q:
            self.world._clock_change(self.id, old_key, self._delta + self.q_frac)
            self.world.trace.clock_events.append((t, self.id, self.tau(t), self.q_frac))

    def _push_jstep(self, eff, val):
        while self._jsteps and self._jsteps[-1][0] >= eff:
            self._jsteps.pop()
        self._jsteps.append((eff, val))

    def set_j_anchor(self, effective_tick, nominal_start):
        """J counts ticks since nominal_start, from effective_tick onwards."""
        self._push_jstep(effective_tick, -nominal_start)

    # scheduling -------------------------------------------------------------
    def schedule(self, kind, bits, initial_len, nominal_start, phase=None, meta=None):
        return self.world._schedule(self.id, kind, bits, initial_len,
                                    nominal_start, phase, meta or {})

    # trace hooks ------------------------------------------------------------
    def record_stage2(self, rec):
        self.world.trace.stage2.append(rec)

    def dyn_event(self, t, kind, payload=()):
        self.world.trace.dyn_events.append((t, kind, self.id, tuple(payload)))

    def flag(self, text):
        self.world.trace.flags.append(text)

    def edge_contact(self, t, other, diff):
        key = (min(self.id, other), max(self.id, other))
        if key not in self.world.trace.edge_contacts:
            self.world.trace.edge_contacts[key] = (t, diff)

    @property
    def n(self):
        return self.world.n

    @property
    def m(self):
        return self.world.m

    @property
    def k(self):
        return self.world.k


class World:
    """Mutable simulation state; `step` advances exactly one global tick."""

    def __init__(self, cfg: SimConfig, record_messages: bool | None = None):
        cfg = validate_config(cfg)
        self.cfg = cfg
        self.n = cfg.n
        self.m = cfg.m
        self.algorithm = cfg.algorithm
        self.k = protocols.schedule_k(cfg)
        span = protocols.base_policy_span(cfg, self.k)
        self.horizon = (cfg.max_ticks if cfg.max_ticks is not None
                        else default_horizon(cfg.n, self.k, cfg.algorithm, span))
        self.adj = cfg.topology.adjacency()
        self.tick = 0

        if record_messages is None:
            record_messages = self.m * (self.horizon + 1) <= 200_000
        self.trace = SimTrace(
            cfg=_cfg_echo(cfg, self.k, self.horizon),
            n=self.n, m=self.m, k=self.k, horizon=self.horizon,
            wakes=list(cfg.wake_times),
            messages={} if record_messages else None,
        )
        self.trace.energy_counts = {i: 0 for i in range(1, self.m + 1)}

        self._on_map: dict[int, set] = defaultdict(set)
        self._wake_at: dict[int, list] = defaultdict(list)
        for pid, w in enumerate(cfg.wake_times, start=1):
            self._wake_at[w].append(pid)

        self.ctxs = {i: _ProcCtx(self, i) for i in range(1, self.m + 1)}
        self.procs = {i: protocols.make_protocol(cfg.algorithm, self.ctxs[i], self)
                      for i in range(1, self.m + 1)}
        self._awake: set[int] = set()

        # incremental synchronization tracking: tau(t) = t + delta, so the
        # clocks agree exactly when every awake delta agrees
        self._delta_counter: Counter = Counter()
        self._last_unequal = -1
        self._max_wake = max(cfg.wake_times) if cfg.wake_times else 0
        self._in_wake_hook = False

    # -- scheduling ----------------------------------------------------------
    def _schedule(self, owner, kind, bits, initial_len, nominal_start, phase, meta):
        if not bits or bits[-1] != 1:
            raise ValueError("policy strings must end with an on-tick")
        effective = self.tick if self._in_wake_hook else self.tick + 1
        rec = PolicyRecord(owner=owner, kind=kind, bits=tuple(bits),
                           initial_len=initial_len, nominal_start=nominal_start,
                           effective_from=effective, phase=phase, meta=meta)
        self.trace.policies.append(rec)
        for g in rec.active_on_ticks():
            if g <= self.horizon:
                self._on_map[g].add(owner)
        return rec

    def _clock_change(self, pid, old_delta, new_delta):
        if old_delta is not None:
            self._delta_counter[old_delta] -= 1
            if self._delta_counter[old_delta] == 0:
                del self._delta_counter[old_delta]
        self._delta_counter[new_delta] += 1

    # -- tick loop -----------------------------------------------------------
    def step(self):
        """Advance one tick: wake, compute radio-on set, exchange, account."""
        t = self.tick
        for pid in self._wake_at.get(t, ()):
            ctx = self.ctxs[pid]
            ctx.wake = t
            ctx._delta = None
            self._awake.add(pid)
            self._in_wake_hook = True
            ctx.adopt(t, 0)  # clocks start at zero on wake
            self.procs[pid].on_wake(t)
            self._in_wake_hook = False

        on = self._on_map.get(t)
        if on:
            on_sorted = sorted(on)
            self.trace.on_sets[t] = tuple(on_sorted)
            for pid in on_sorted:
                self.trace.energy_counts[pid] += 1

            inbox = self._exchange(t, on_sorted, "transmissions", None)
            inbox = self._exchange(t, on_sorted, "react", inbox)
            inbox = self._exchange(t, on_sorted, "react2", inbox)
            leftover = self._exchange(t, on_sorted, "absorb", inbox)
            if any(leftover.values()):
                raise RuntimeError("absorb phase must not emit messages")
            for pid in on_sorted:
                self.procs[pid].tick_end(t)

        if t == 2 * self.n:
            for pid in sorted(self._awake):
                self.procs[pid].audit(t)

        if len(self._awake) < self.m or len(self._delta_counter) != 1:
            self._last_unequal = t
        self.tick += 1

    def _exchange(self, t, on_sorted, phase_name, inbox):
        """Run one sub-phase; returns the inbox produced for the next one."""
        produced: dict[int, list] = {pid: [] for pid in on_sorted}
        for pid in on_sorted:
            handler = getattr(self.procs[pid], phase_name)
            out = handler(t) if inbox is None else handler(t, inbox[pid])
            if not out:
                continue
            receivers = [v for v in sorted(self.adj[pid]) if v in produced]
            if self.trace.messages is not None:
                self.trace.messages.setdefault(t, []).extend(
                    (pid, msg.kind, msg.payload, tuple(receivers)) for msg in out)
            for v in receivers:
                produced[v].extend(out)
        for pid in produced:
            produced[pid].sort(key=lambda msg: (msg.sender, msg.kind, msg.payload))
        return produced

    def run(self):
        while self.tick <= self.horizon:
            self.step()
        equal = len(self._awake) == self.m and len(self._delta_counter) == 1
        self.trace.sync_complete_tick = self._last_unequal + 1 if equal else None
        for pid in range(1, self.m + 1):
            ctx = self.ctxs[pid]
            if ctx._delta is not None:
                self.trace.final_clocks[pid] = (self.horizon + ctx._delta, ctx.q_frac)
        return self.trace


def _cfg_echo(cfg, k, horizon):
    return {
        "n": cfg.n,
        "m": cfg.m,
        "algorithm": cfg.algorithm,
        "k": k,
        "k_override": cfg.k_override,
        "seed": cfg.seed,
        "fractional": cfg.fractional,
        "horizon": str(horizon),
        "wake_times": [str(w) for w in cfg.wake_times],
        "topology": {
            "kind": cfg.topology.kind,
            "m": cfg.topology.m,
            "edges": sorted(list(e) for e in cfg.topology.edges),
        },
    }


def step(world: World) -> World:
    """Advance the world by one tick (functional-style convenience)."""
    world.step()
    return world


def run(cfg: SimConfig) -> SimTrace:
    """Simulate one configuration to its horizon and return the full trace."""
    return World(cfg).run()


def energy(trace: SimTrace) -> EnergyReport:
    """Account radio-on ticks from a completed trace."""
    per = dict(trace.energy_counts)
    total = sum(per.values())
    mx = max(per.values()) if per else 0
    return EnergyReport(per_processor=per, max_energy=mx, total_energy=total,
                        sync_complete_tick=trace.sync_complete_tick)

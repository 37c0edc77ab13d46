"""Hybrid flow/jump simulator for pulse-coupled phase agents.

Each agent carries a phase in [0,1] that grows at rate 1/T.  When a phase
hits 1 the agent fires: its own phase resets to 0 and, depending on the
trigger model, a pulse is delivered to its out-neighbors, which then apply
the configured update rule.  Firings are processed one per jump; several
agents sitting at 1 simultaneously fire as consecutive jumps at the same
continuous time, in ascending vertex order (configurable to seeded-random
order).

Random-stream contract: one PCG64 generator is created from the config
seed via SeedSequence.  It is consumed in a fixed order: first the initial
phases (when drawn uniformly), then per jump (a) the firing-order draw if
order is random and several agents are pending, (b) the trigger draw (a
full mask for the vertex model, one draw per out-edge of the firer for
the edge model), (c) tie-break draws for receivers sitting exactly at
their threshold, in ascending receiver order.  Identical (config, seed)
therefore replays identical runs, independent of batch parallelism.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .errors import SequenceExhausted, SimulationError, ValidationError, ZenoError
from .feasible import GraphSequence, TriggerMask, active_vertices
from .graph import Digraph

# phases within this distance of 1 are snapped to exactly 1 after a flow,
# so float accumulation cannot step over the jump set
SNAP_TOL = 1e-12

_TIES = ("to_one", "to_zero", "random")


def _as_threshold_tuple(r, n: Optional[int] = None) -> Union[float, tuple]:
    arr = np.asarray(r, dtype=float)
    if arr.ndim == 0:
        val = float(arr)
        if not 0.0 < val < 1.0:
            raise ValidationError(f"threshold must lie in (0,1), got {val}")
        return val
    vals = tuple(float(x) for x in arr)
    for v in vals:
        if not 0.0 < v < 1.0:
            raise ValidationError(f"threshold must lie in (0,1), got {v}")
    if n is not None and len(vals) != n:
        raise ValidationError(f"need {n} thresholds, got {len(vals)}")
    return vals


@dataclass(frozen=True)
class BinaryRule:
    """Threshold rule: a pulse maps the receiver's phase to 0 below its
    threshold, to 1 above it, and to the tie-policy value exactly at it.
    """

    r: Union[float, tuple]
    tie: str = "to_one"

    def __post_init__(self) -> None:
        object.__setattr__(self, "r", _as_threshold_tuple(self.r))
        if self.tie not in _TIES:
            raise ValidationError(f"tie must be one of {_TIES}, got {self.tie!r}")

    def threshold(self, agent: int) -> float:
        """Threshold of a 1-based agent id."""
        if isinstance(self.r, tuple):
            return self.r[agent - 1]
        return self.r

    def r_min(self) -> float:
        return min(self.r) if isinstance(self.r, tuple) else self.r


@dataclass(frozen=True)
class PiecewiseLinearRule:
    """Continuous comparison rule: phase z maps to m1*z for z <= 1/2 and to
    m2*z + 1 - m2 above, so 1 stays a fixed point.  Slopes must lie in
    (0, 0.5].
    """

    m1: float
    m2: float

    def __post_init__(self) -> None:
        for name, m in (("m1", self.m1), ("m2", self.m2)):
            if not 0.0 < m <= 0.5:
                raise ValidationError(f"{name} must lie in (0, 0.5], got {m}")


UpdateRule = Union[BinaryRule, PiecewiseLinearRule]


@dataclass(frozen=True)
class Deterministic:
    """Scripted trigger: jump k consumes mask k of the sequence."""

    seq: GraphSequence


@dataclass(frozen=True)
class VertexBernoulli:
    """One coin per firing decides whether all out-edges of the firer carry
    the pulse.  A full mask (one bit per active vertex) is drawn per jump so
    recorded runs expose the whole sampled subgraph sequence.
    """

    probs: Union[float, tuple]

    def __post_init__(self) -> None:
        arr = np.asarray(self.probs, dtype=float)
        vals = (float(arr),) if arr.ndim == 0 else tuple(float(x) for x in arr)
        for p in vals:
            if not 0.0 < p < 1.0:
                raise ValidationError(f"trigger probability must lie in (0,1), got {p}")
        object.__setattr__(self, "probs", vals[0] if arr.ndim == 0 else vals)


@dataclass(frozen=True)
class EdgeBernoulli:
    """Independent coin per out-edge of the firer."""

    p: float

    def __post_init__(self) -> None:
        if not 0.0 < self.p < 1.0:
            raise ValidationError(f"trigger probability must lie in (0,1), got {self.p}")


TriggerModel = Union[Deterministic, VertexBernoulli, EdgeBernoulli]


@dataclass(frozen=True)
class StopCondition:
    """Run termination: V <= sync_eps (None disables the sync stop), a cap
    on continuous time, or a cap on jump count.
    """

    sync_eps: Optional[float] = 0.0
    max_continuous_time: Optional[float] = None
    max_jumps: Optional[int] = 1_000_000

    def __post_init__(self) -> None:
        if self.sync_eps is not None and self.sync_eps < 0:
            raise ValidationError("sync_eps must be >= 0")
        if self.max_continuous_time is not None and self.max_continuous_time <= 0:
            raise ValidationError("max_continuous_time must be positive")
        if self.max_jumps is not None and self.max_jumps <= 0:
            raise ValidationError("max_jumps must be positive")


@dataclass(frozen=True)
class SimConfig:
    """Everything a run depends on; two equal configs replay identically."""

    graph: Digraph
    period: float
    rule: UpdateRule
    trigger: TriggerModel
    initial: Union[str, tuple]
    seed: int = 0
    stop: StopCondition = StopCondition()
    firing_order: str = "ascending"

    def __post_init__(self) -> None:
        if self.period <= 0:
            raise ValidationError(f"period must be positive, got {self.period}")
        if self.firing_order not in ("ascending", "random"):
            raise ValidationError("firing_order must be 'ascending' or 'random'")
        if isinstance(self.initial, str):
            if self.initial != "uniform":
                raise ValidationError("initial must be 'uniform' or a phase vector")
        else:
            vals = tuple(float(x) for x in np.asarray(self.initial, dtype=float))
            if len(vals) != self.graph.n:
                raise ValidationError(
                    f"initial has {len(vals)} phases, graph has {self.graph.n}"
                )
            for v in vals:
                if not 0.0 <= v <= 1.0:
                    raise ValidationError(f"initial phase {v} outside [0,1]")
            object.__setattr__(self, "initial", vals)
        if isinstance(self.rule, BinaryRule) and isinstance(self.rule.r, tuple):
            if len(self.rule.r) != self.graph.n:
                raise ValidationError("per-agent thresholds must have length n")
        if isinstance(self.trigger, VertexBernoulli) and isinstance(
            self.trigger.probs, tuple
        ):
            if len(self.trigger.probs) != self.graph.n:
                raise ValidationError("per-agent probabilities must have length n")


@dataclass(frozen=True)
class JumpEvent:
    """One firing: hybrid time (t, k), the firer, the trigger decision, and
    the synchrony measure just before and just after.
    """

    t: float
    k: int
    firer: int
    mask_used: Union[TriggerMask, tuple, None]
    v_before: float
    v_after: float
    tau_before: Optional[tuple] = None
    tau_after: Optional[tuple] = None


@dataclass
class HybridArc:
    """Recorded run: events indexed by jump count k, in hybrid time order."""

    config: SimConfig
    record: str
    initial: tuple
    events: list
    final: tuple
    t_final: float
    jumps: int
    sync_time: Optional[float]
    terminated_by: str


def _lyapunov_v(tau: np.ndarray) -> float:
    """1 minus the largest circular gap of the sorted phases (0 and 1
    identified).  Exactly 0.0 on synchronized states.
    """
    s = np.sort(tau)
    wrap = (1.0 - float(s[-1])) + float(s[0])
    if s.size == 1:
        return 0.0
    gap = max(float(np.max(np.diff(s))), wrap)
    return 1.0 - gap


def as_phases(tau, n: Optional[int] = None) -> np.ndarray:
    """Validate and copy a phase vector (entries in [0,1])."""
    arr = np.array(tau, dtype=float)
    if arr.ndim != 1 or arr.size < 1:
        raise ValidationError("phase vector must be 1-dimensional and nonempty")
    if n is not None and arr.size != n:
        raise ValidationError(f"expected {n} phases, got {arr.size}")
    if not ((arr >= 0.0) & (arr <= 1.0)).all():
        raise ValidationError("phases must lie in [0,1]")
    return arr


def time_to_next_fire(tau, T: float) -> float:
    """Flow duration until the largest phase reaches 1: T*(1 - max tau)."""
    arr = as_phases(tau)
    mx = float(arr.max())
    if mx >= 1.0:
        raise ValidationError("an agent is already at phase 1; jump first")
    return T * (1.0 - mx)


def flow(tau, dt: float, T: float) -> np.ndarray:
    """Advance all phases by dt/T, snapping entries within SNAP_TOL of 1."""
    arr = as_phases(tau)
    if dt < 0:
        raise ValidationError("dt must be nonnegative")
    if dt == 0:
        return arr
    out = arr + dt / T
    if float(out.max()) > 1.0 + SNAP_TOL:
        raise ValidationError("dt overshoots the next firing")
    out[out >= 1.0 - SNAP_TOL] = 1.0
    return out


def phase_update(
    tau_j: float,
    rule: UpdateRule,
    rng: Optional[np.random.Generator] = None,
    agent: Optional[int] = None,
) -> float:
    """Map a receiver's phase through the update rule.

    agent selects the per-agent threshold when the binary rule carries a
    vector; rng is consumed only by the random tie policy.
    """
    if not 0.0 <= tau_j <= 1.0:
        raise ValidationError(f"phase {tau_j} outside [0,1]")
    if isinstance(rule, PiecewiseLinearRule):
        if tau_j <= 0.5:
            return rule.m1 * tau_j
        return rule.m2 * tau_j + (1.0 - rule.m2)
    if isinstance(rule.r, tuple) and agent is None:
        raise ValidationError("per-agent thresholds need the agent id")
    r = rule.threshold(agent) if agent is not None else rule.r
    if tau_j < r:
        return 0.0
    if tau_j > r:
        return 1.0
    if rule.tie == "to_one":
        return 1.0
    if rule.tie == "to_zero":
        return 0.0
    if rng is None:
        raise ValidationError("random tie policy needs an rng")
    return 1.0 if rng.random() < 0.5 else 0.0


def apply_jump(
    tau,
    firer: int,
    receivers: Iterable[int],
    rule: UpdateRule,
    rng: Optional[np.random.Generator] = None,
) -> np.ndarray:
    """Execute one firing: the firer resets to 0 and each receiver (an
    out-neighbor the pulse actually reaches) goes through the update rule.
    """
    arr = as_phases(tau)
    if not 1 <= firer <= arr.size:
        raise ValidationError(f"firer {firer} out of range")
    if arr[firer - 1] != 1.0:
        raise ValidationError(f"firer {firer} is at {arr[firer - 1]}, not at 1")
    arr[firer - 1] = 0.0
    for j in sorted(receivers):
        arr[j - 1] = phase_update(float(arr[j - 1]), rule, rng, agent=j)
    return arr


class Simulation:
    """Mutable run state; step() executes exactly one jump."""

    def __init__(self, config: SimConfig, record: str = "phases"):
        if record not in ("phases", "events", "none"):
            raise ValidationError("record must be phases|events|none")
        self.config = config
        self.record = record
        g = config.graph
        self.n = g.n
        self.rng = np.random.default_rng(np.random.SeedSequence(int(config.seed)))
        self.active = active_vertices(g)
        self.nstar = len(self.active)
        self._pos = {v: i for i, v in enumerate(self.active)}
        self._out = [g.out_neighbors(v) for v in g.vertices]
        if isinstance(config.trigger, Deterministic):
            seq = config.trigger.seq
            if seq.masks and len(seq.masks[0]) != self.nstar:
                raise ValidationError(
                    f"mask length {len(seq.masks[0])} != active count {self.nstar}"
                )
        if isinstance(config.trigger, VertexBernoulli):
            p = config.trigger.probs
            full = np.full(self.n, p) if isinstance(p, float) else np.asarray(p)
            self._pvec = full[[v - 1 for v in self.active]]
        if config.initial == "uniform":
            u = self.rng.random(self.n)
            while (u == 0.0).any():  # keep phases strictly inside (0,1)
                z = u == 0.0
                u[z] = self.rng.random(int(z.sum()))
            self.tau = u
        else:
            self.tau = np.array(config.initial, dtype=float)
        self.initial = tuple(float(x) for x in self.tau)
        self.t = 0.0
        self.k = 0
        self.v = _lyapunov_v(self.tau)
        self.events: list = []
        if isinstance(config.rule, BinaryRule):
            self._window_cap = self.n * (math.floor(1.0 / config.rule.r_min()) + 1)
        else:
            # one firing needs >T/2 of climb above 1/2, so <=2 per agent per
            # window; 3n leaves slack for boundary counting
            self._window_cap = 3 * self.n
        self._fire_times: deque = deque()

    def _flow_in_place(self, dt: float) -> None:
        if dt <= 0:
            return
        self.tau += dt / self.config.period
        self.tau[self.tau >= 1.0 - SNAP_TOL] = 1.0
        if float(self.tau.max()) > 1.0:
            raise SimulationError("flow overshot phase 1")
        self.t += dt

    def _draw_trigger(self, firer: int):
        """Returns (mask_used, receivers) and consumes rng/cursor."""
        trig = self.config.trigger
        outn = self._out[firer - 1]
        if isinstance(trig, Deterministic):
            mask = trig.seq.mask_at(self.k)
            if mask is None:
                raise SequenceExhausted(
                    f"trigger sequence exhausted at jump {self.k + 1}"
                )
            fired = firer in self._pos and mask.bits[self._pos[firer]] == 1
            return mask, (outn if fired else ())
        if isinstance(trig, VertexBernoulli):
            draws = self.rng.random(self.nstar) < self._pvec
            fired = firer in self._pos and bool(draws[self._pos[firer]])
            if self.record == "none":
                mask = None  # skip mask materialization in bulk runs
            else:
                mask = TriggerMask(tuple(int(b) for b in draws))
            return mask, (outn if fired else ())
        if not outn:
            return (), ()
        draws = self.rng.random(len(outn)) < trig.p
        delivered = tuple(j for j, hit in zip(outn, draws) if hit)
        return tuple((firer, j) for j in delivered), delivered

    def step(self) -> JumpEvent:
        """Flow to the next firing instant (if no agent is pending) and
        execute one jump.
        """
        mx = float(self.tau.max())
        if mx < 1.0:
            self._flow_in_place(self.config.period * (1.0 - mx))
        pending = np.flatnonzero(self.tau == 1.0)
        if pending.size == 0:
            raise SimulationError("flow did not reach the jump set")
        if self.config.firing_order == "random" and pending.size > 1:
            firer = int(pending[self.rng.integers(pending.size)]) + 1
        else:
            firer = int(pending[0]) + 1
        mask_used, receivers = self._draw_trigger(firer)
        v_before = self.v
        tau_before = None
        if self.record == "phases":
            tau_before = tuple(float(x) for x in self.tau)
        rule = self.config.rule
        self.tau[firer - 1] = 0.0
        for j in receivers:
            self.tau[j - 1] = phase_update(float(self.tau[j - 1]), rule, self.rng, agent=j)
        if not ((self.tau >= 0.0) & (self.tau <= 1.0)).all():
            raise SimulationError("phase left [0,1]")
        self.k += 1
        self.v = _lyapunov_v(self.tau)
        self._fire_times.append(self.t)
        lo = self.t - self.config.period
        while self._fire_times[0] < lo:
            self._fire_times.popleft()
        if len(self._fire_times) > self._window_cap:
            raise ZenoError(
                f"{len(self._fire_times)} jumps within one period "
                f"(admissible {self._window_cap}) at t={self.t}"
            )
        tau_after = (
            tuple(float(x) for x in self.tau) if self.record == "phases" else None
        )
        ev = JumpEvent(
            t=self.t,
            k=self.k,
            firer=firer,
            mask_used=mask_used,
            v_before=v_before,
            v_after=self.v,
            tau_before=tau_before,
            tau_after=tau_after,
        )
        if self.record != "none":
            self.events.append(ev)
        return ev


def step(sim: Simulation) -> JumpEvent:
    """Functional wrapper over Simulation.step."""
    return sim.step()


def simulate(config: SimConfig, record: str = "phases") -> HybridArc:
    """Run until a stop condition fires and return the recorded arc.

    Stop conditions, checked in order: V <= sync_eps (at t=0 or right
    after a jump), the jump cap, then the time cap; a jump landing exactly
    on the time cap is still processed.
    """
    sim = Simulation(config, record=record)
    stop = config.stop
    sync_time: Optional[float] = None
    terminated = None
    if stop.sync_eps is not None and sim.v <= stop.sync_eps:
        sync_time = 0.0
        terminated = "sync"
    else:
        while True:
            if stop.max_jumps is not None and sim.k >= stop.max_jumps:
                terminated = "max_jumps"
                break
            mx = float(sim.tau.max())
            t_next = sim.t if mx >= 1.0 else sim.t + config.period * (1.0 - mx)
            if (
                stop.max_continuous_time is not None
                and t_next > stop.max_continuous_time
            ):
                sim._flow_in_place(stop.max_continuous_time - sim.t)
                sim.t = stop.max_continuous_time
                terminated = "max_time"
                break
            ev = sim.step()
            if stop.sync_eps is not None and ev.v_after <= stop.sync_eps:
                sync_time = ev.t
                terminated = "sync"
                break
    return HybridArc(
        config=config,
        record=record,
        initial=sim.initial,
        events=sim.events,
        final=tuple(float(x) for x in sim.tau),
        t_final=sim.t,
        jumps=sim.k,
        sync_time=sync_time,
        terminated_by=terminated,
    )


def _mask_to_jsonable(mask_used):
    if mask_used is None:
        return None
    if isinstance(mask_used, TriggerMask):
        return mask_used.to_string()
    return [list(e) for e in mask_used]


def config_to_dict(config: SimConfig) -> dict:
    """JSON-ready echo of a config, including the rng discipline."""
    rule = config.rule
    if isinstance(rule, BinaryRule):
        rule_d = {
            "kind": "binary",
            "r": list(rule.r) if isinstance(rule.r, tuple) else rule.r,
            "tie": rule.tie,
        }
    else:
        rule_d = {"kind": "piecewise_linear", "m1": rule.m1, "m2": rule.m2}
    trig = config.trigger
    if isinstance(trig, Deterministic):
        trig_d = {
            "model": "deterministic",
            "masks": [m.to_string() for m in trig.seq.masks],
            "repeat": trig.seq.repeat,
        }
    elif isinstance(trig, VertexBernoulli):
        trig_d = {
            "model": "vertex_bernoulli",
            "p": list(trig.probs) if isinstance(trig.probs, tuple) else trig.probs,
        }
    else:
        trig_d = {"model": "edge_bernoulli", "p": trig.p}
    return {
        "graph": {"n": config.graph.n, "edges": [list(e) for e in config.graph.edges]},
        "period": config.period,
        "rule": rule_d,
        "trigger": trig_d,
        "initial": "uniform" if config.initial == "uniform" else list(config.initial),
        "seed": int(config.seed),
        "stop": {
            "sync_eps": config.stop.sync_eps,
            "max_continuous_time": config.stop.max_continuous_time,
            "max_jumps": config.stop.max_jumps,
        },
        "firing_order": config.firing_order,
        "rng": "numpy PCG64 via SeedSequence(seed)",
    }


def arc_to_dict(arc: HybridArc) -> dict:
    return {
        "config_echo": config_to_dict(arc.config),
        "events": [
            {
                "t": ev.t,
                "k": ev.k,
                "firer": ev.firer,
                "mask": _mask_to_jsonable(ev.mask_used),
                "tau_after": list(ev.tau_after) if ev.tau_after is not None else None,
            }
            for ev in arc.events
        ],
        "initial": list(arc.initial),
        "final": list(arc.final),
        "t_final": arc.t_final,
        "sync_time": arc.sync_time,
        "jumps": arc.jumps,
        "terminated_by": arc.terminated_by,
    }


def write_arc_json(arc: HybridArc, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(arc_to_dict(arc), fh, indent=2)
        fh.write("\n")


def write_arc_csv(arc: HybridArc, path: str) -> None:
    """Compact per-event table: t,k,firer,V (V measured just after)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("t,k,firer,V\n")
        for ev in arc.events:
            fh.write(f"{ev.t!r},{ev.k},{ev.firer},{ev.v_after!r}\n")

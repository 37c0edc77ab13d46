"""Synchrony diagnostics and closed-form convergence bounds.

The central quantity is V(tau) = 1 - (largest circular gap of the sorted
phases, with 0 and 1 identified).  V is 0 exactly on synchronized states,
is constant while phases flow, and never increases across jumps under the
binary rule.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .engine import HybridArc, _lyapunov_v, as_phases
from .errors import ValidationError
from .graph import DepthPartition, Digraph, graph_depth

# circle-identified equality tolerance for exact-membership tests
SYNC_TOL = 1e-12


@dataclass(frozen=True)
class BoundReport:
    """Closed-form tail bound P(sync time > n*T_star) <= rho**n.

    ell_star is the per-layer repeat count, L_star = dep * ell_star the
    string length behind the bound, T_star = (dep*ell_star + 1)*T.  rho is
    reported as a float (it can round to exactly 1.0 when the success
    probability underflows); log10_success keeps the exact magnitude of
    1 - rho available.
    """

    ell_star: int
    l_star: int
    dep: int
    t_star: float
    rho: float
    log10_success: float

    def tail(self, n: int) -> float:
        """Bound on P(sync time > n * t_star)."""
        if n < 0:
            raise ValidationError("n must be >= 0")
        return self.rho**n

    def tail_at_time(self, s: float) -> float:
        """Bound on P(sync time > s): rho**floor(s / t_star)."""
        if s < 0:
            raise ValidationError("time must be >= 0")
        return self.rho ** math.floor(s / self.t_star)


def lyapunov_v(tau) -> float:
    """V(tau) in [0, 1 - 1/N]; 0 iff the phases are synchronized."""
    return _lyapunov_v(as_phases(tau))


def is_sync(tau, eps: float) -> bool:
    """Synchronization test.

    eps=0 asks for exact membership in the synchronized set (all phases
    equal on the circle, which includes every 0/1 pattern); equality is
    circle-identified within SYNC_TOL.  eps>0 is the relaxed criterion
    V(tau) <= eps.
    """
    if eps < 0:
        raise ValidationError("eps must be >= 0")
    v = lyapunov_v(tau)
    return v <= SYNC_TOL if eps == 0 else v <= eps


def partial_depth(tau, part: DepthPartition, eps: float = 0.0) -> int:
    """Largest q such that all vertices of depth <= q are mutually synced.

    Depth 0 always holds (a single phase is synced with itself).  The
    sets are nested, so the scan stops at the first failing layer.
    """
    arr = as_phases(tau)
    if eps < 0:
        raise ValidationError("eps must be >= 0")
    best = 0
    for q in range(1, part.q_star + 1):
        idx = sorted(v - 1 for v in part.union_through(q))
        v_sub = _lyapunov_v(arr[idx])
        ok = v_sub <= SYNC_TOL if eps == 0 else v_sub <= eps
        if not ok:
            break
        best = q
    return best


def sync_time(arc: HybridArc, eps: float = 0.0) -> Optional[float]:
    """First hybrid time at which the arc satisfies is_sync.

    V is constant during flows, so the initial state and the post-jump
    states are the only candidates.  None if the arc never gets there.
    """
    if eps < 0:
        raise ValidationError("eps must be >= 0")
    thresh = SYNC_TOL if eps == 0 else eps
    if _lyapunov_v(np.asarray(arc.initial)) <= thresh:
        return 0.0
    for ev in arc.events:
        if ev.v_after <= thresh:
            return ev.t
    return None


def jump_window_counts(arc: HybridArc, T: float) -> tuple[int, int]:
    """Min and max jump counts over length-T windows sliding along the arc.

    The count of the half-open window (a, a+T] is piecewise constant in a,
    stepping up where an event enters (a = t - T) and down where one
    leaves (a = t), so evaluating at the arc start plus every such
    breakpoint inside the span is exhaustive.
    """
    if T <= 0:
        raise ValidationError("T must be positive")
    if arc.t_final < T:
        raise ValidationError(
            f"arc spans {arc.t_final}, shorter than one period {T}"
        )
    times = [ev.t for ev in arc.events]
    windows = {(0.0, T)}
    for t in times:
        if t + T <= arc.t_final:
            windows.add((t, t + T))  # window just after t drops the event
        if t - T >= 0.0:
            windows.add((t - T, t))  # trailing window where t just entered
    counts = []
    for lo, hi in windows:
        left = bisect.bisect_right(times, lo)
        right = bisect.bisect_right(times, hi)
        counts.append(right - left)
    return min(counts), max(counts)


def theorem3_bound(g: Digraph, probs, r, T: float) -> BoundReport:
    """Tail bound for vertex-Bernoulli triggering on a rooted digraph.

    probs is a scalar p or one probability per agent (the heterogeneous
    variant uses min p for the success factor and max p for the silence
    factor); r is the comparison-threshold scalar or vector.  The success
    probability (p_low * (1-p_high)^(dep-1))**(N*ell_star) is computed in
    log space so deep or large graphs degrade to rho = 1.0 instead of
    overflowing.
    """
    if T <= 0:
        raise ValidationError("T must be positive")
    parr = np.asarray(probs, dtype=float)
    pvals = [float(parr)] if parr.ndim == 0 else [float(x) for x in parr]
    if parr.ndim == 1 and len(pvals) != g.n:
        raise ValidationError(f"need {g.n} probabilities, got {len(pvals)}")
    for p in pvals:
        if not 0.0 < p < 1.0:
            raise ValidationError(f"probability {p} outside (0,1)")
    rarr = np.asarray(r, dtype=float)
    rvals = [float(rarr)] if rarr.ndim == 0 else [float(x) for x in rarr]
    if rarr.ndim == 1 and len(rvals) != g.n:
        raise ValidationError(f"need {g.n} thresholds, got {len(rvals)}")
    for rv in rvals:
        if not 0.0 < rv < 1.0:
            raise ValidationError(f"threshold {rv} outside (0,1)")
    dep = graph_depth(g)  # raises if not rooted
    r_min = min(rvals)
    p_low = min(pvals)
    p_high = max(pvals)
    ell_star = g.n * (math.floor(1.0 / r_min) + 1)
    l_star = dep * ell_star
    t_star = (dep * ell_star + 1) * T
    exponent = g.n * ell_star
    log_success = exponent * (math.log(p_low) + (dep - 1) * math.log1p(-p_high))
    rho = -math.expm1(log_success)
    return BoundReport(
        ell_star=ell_star,
        l_star=l_star,
        dep=dep,
        t_star=t_star,
        rho=rho,
        log10_success=log_success / math.log(10.0),
    )

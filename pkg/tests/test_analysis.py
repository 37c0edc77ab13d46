"""Synchrony measure, partial-depth diagnostics, window counts, bounds.

Oracle values: V((0, 0.5)) = 0.5 because both circular gaps are 0.5;
V((0, 0.1, 0.9)) = 0.2 because the largest gap is 0.8 (from 0.1 up to
0.9); the complete 3-vertex bound has ell* = 3*(2+1) = 9, T* = 10T and
rho = 1 - 0.5**27, all hand-computable from the formula.
"""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pcosync.analysis import (
    SYNC_TOL,
    BoundReport,
    is_sync,
    jump_window_counts,
    lyapunov_v,
    partial_depth,
    sync_time,
    theorem3_bound,
)
from pcosync.engine import (
    BinaryRule,
    Deterministic,
    SimConfig,
    StopCondition,
    VertexBernoulli,
    simulate,
)
from pcosync.errors import ValidationError
from pcosync.feasible import GraphSequence, TriggerMask
from pcosync.graph import build_digraph, depth_partition, generate


class TestLyapunovV:
    def test_synchronized_states_are_exactly_zero(self):
        assert lyapunov_v((0.3, 0.3, 0.3)) == 0.0
        assert lyapunov_v((0.0, 0.0)) == 0.0
        assert lyapunov_v((1.0, 1.0)) == 0.0
        assert lyapunov_v((0.0, 1.0, 0.0)) == 0.0  # 0 and 1 identified
        assert lyapunov_v((0.7,)) == 0.0

    def test_single_agent_any_phase(self):
        for x in (0.0, 0.25, 1.0):
            assert lyapunov_v((x,)) == 0.0

    def test_hand_values(self):
        assert lyapunov_v((0.0, 0.5)) == pytest.approx(0.5, abs=1e-15)
        assert lyapunov_v((0.0, 0.1, 0.9)) == pytest.approx(0.2, abs=1e-15)
        assert lyapunov_v((0.2, 0.4, 0.6, 0.8)) == pytest.approx(0.6, abs=1e-15)

    def test_permutation_invariant(self):
        assert lyapunov_v((0.9, 0.1, 0.5)) == lyapunov_v((0.1, 0.5, 0.9))

    @settings(max_examples=80, deadline=None)
    @given(
        st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=1, max_size=9),
        st.floats(min_value=0.0, max_value=1.0),
    )
    def test_rotation_invariant(self, tau, shift):
        rotated = [math.fmod(x + shift, 1.0) for x in tau]
        assert lyapunov_v(rotated) == pytest.approx(lyapunov_v(tau), abs=1e-9)

    @settings(max_examples=120, deadline=None)
    @given(st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=1, max_size=10))
    def test_range(self, tau):
        v = lyapunov_v(tau)
        assert 0.0 <= v <= 1.0 - 1.0 / len(tau) + 1e-12


class TestIsSync:
    def test_exact_mode(self):
        assert is_sync((0.4, 0.4), 0.0)
        assert is_sync((0.0, 1.0), 0.0)
        assert not is_sync((0.4, 0.5), 0.0)

    def test_relaxed_mode(self):
        assert is_sync((0.0, 0.04), 0.05)
        assert not is_sync((0.0, 0.06), 0.05)

    def test_negative_eps_rejected(self):
        with pytest.raises(ValidationError):
            is_sync((0.5, 0.5), -0.01)

    def test_exact_mode_matches_zero_v(self):
        grid = [0.0, 0.25, 0.5, 0.75, 1.0]
        for a in grid:
            for b in grid:
                for c in grid:
                    tau = (a, b, c)
                    assert is_sync(tau, 0.0) == (lyapunov_v(tau) <= SYNC_TOL)


class TestPartialDepth:
    def test_reference_graph(self, four_node_chain_with_back_edge):
        part = depth_partition(four_node_chain_with_back_edge, 1)
        # layers {1},{2},{3},{4}: depth q needs vertices 1..q+1 aligned
        assert partial_depth((0.2, 0.2, 0.7, 0.9), part) == 1
        assert partial_depth((0.2, 0.2, 0.2, 0.9), part) == 2
        assert partial_depth((0.2, 0.2, 0.2, 0.2), part) == 3
        assert partial_depth((0.2, 0.5, 0.2, 0.2), part) == 0

    def test_wrapped_pair_counts(self, four_node_chain_with_back_edge):
        part = depth_partition(four_node_chain_with_back_edge, 1)
        assert partial_depth((0.0, 1.0, 0.5, 0.5), part) >= 1

    def test_relaxed_eps(self, four_node_chain_with_back_edge):
        part = depth_partition(four_node_chain_with_back_edge, 1)
        tau = (0.20, 0.22, 0.9, 0.9)
        assert partial_depth(tau, part) == 0
        assert partial_depth(tau, part, eps=0.05) == 1

    def test_complete_graph(self):
        part = depth_partition(generate("complete", 4), 1)
        assert partial_depth((0.3, 0.3, 0.3, 0.3), part) == 1
        assert partial_depth((0.3, 0.3, 0.3, 0.8), part) == 0


def _two_agent_arc(mask_strings, initial=(0.8, 0.4), **stop_kw):
    seq = GraphSequence(tuple(TriggerMask.from_string(s) for s in mask_strings))
    cfg = SimConfig(
        graph=generate("complete", 2),
        period=1.0,
        rule=BinaryRule(0.5),
        trigger=Deterministic(seq),
        initial=initial,
        seed=0,
        stop=StopCondition(**stop_kw) if stop_kw else StopCondition(),
    )
    return simulate(cfg)


class TestSyncTime:
    def test_at_time_zero(self):
        arc = _two_agent_arc(["11"], initial=(0.5, 0.5))
        assert sync_time(arc) == 0.0

    def test_first_jump(self):
        arc = _two_agent_arc(["11"])
        assert sync_time(arc) == pytest.approx(0.2, abs=1e-12)

    def test_never(self):
        arc = _two_agent_arc(["00"], sync_eps=None, max_jumps=1)
        assert sync_time(arc) is None

    def test_relaxed_eps_is_earlier_or_equal(self):
        cfg = SimConfig(
            graph=generate("cycle", 6),
            period=1.0,
            rule=BinaryRule(0.5),
            trigger=VertexBernoulli(0.5),
            initial="uniform",
            seed=8,
            stop=StopCondition(sync_eps=0.0, max_continuous_time=500.0),
        )
        arc = simulate(cfg)
        exact = sync_time(arc, eps=0.0)
        relaxed = sync_time(arc, eps=0.2)
        assert exact is not None and relaxed is not None
        assert relaxed <= exact

    def test_negative_eps_rejected(self):
        arc = _two_agent_arc(["11"])
        with pytest.raises(ValidationError):
            sync_time(arc, eps=-1.0)


class TestJumpWindowCounts:
    def test_uncoupled_agent_every_window_has_one(self):
        cfg = SimConfig(
            graph=build_digraph(1, []),
            period=1.0,
            rule=BinaryRule(0.5),
            trigger=VertexBernoulli(0.5),
            initial=(0.0,),
            seed=0,
            stop=StopCondition(sync_eps=None, max_continuous_time=3.0),
        )
        arc = simulate(cfg, record="events")
        assert jump_window_counts(arc, 1.0) == (1, 1)

    def test_short_arc_rejected(self):
        cfg = SimConfig(
            graph=build_digraph(1, []),
            period=1.0,
            rule=BinaryRule(0.5),
            trigger=VertexBernoulli(0.5),
            initial=(0.5,),
            seed=0,
            stop=StopCondition(sync_eps=None, max_continuous_time=0.75),
        )
        arc = simulate(cfg, record="events")
        with pytest.raises(ValidationError):
            jump_window_counts(arc, 1.0)

    def test_nonpositive_period_rejected(self):
        arc = _two_agent_arc(["00", "00"], sync_eps=None, max_jumps=2)
        with pytest.raises(ValidationError):
            jump_window_counts(arc, 0.0)

    def test_max_catches_straddling_window(self):
        # events at 0.5 and 1.4: no window anchored at an event time sees
        # both, but the trailing window (0.4, 1.4] does
        from pcosync.engine import HybridArc, JumpEvent

        events = [
            JumpEvent(t=t, k=i + 1, firer=1, mask_used=None, v_before=0.5, v_after=0.5)
            for i, t in enumerate([0.5, 1.4])
        ]
        arc = HybridArc(
            config=None,
            record="events",
            initial=(0.5,),
            events=events,
            final=(0.5,),
            t_final=2.4,
            jumps=2,
            sync_time=None,
            terminated_by="max_time",
        )
        assert jump_window_counts(arc, 1.0) == (0, 2)

    def test_binary_rule_bounds_hold(self):
        for seed in range(25):
            cfg = SimConfig(
                graph=generate("cycle", 5),
                period=1.0,
                rule=BinaryRule(0.5),
                trigger=VertexBernoulli(0.5),
                initial="uniform",
                seed=seed,
                stop=StopCondition(sync_eps=None, max_continuous_time=6.0),
            )
            arc = simulate(cfg, record="events")
            lo, hi = jump_window_counts(arc, 1.0)
            assert lo >= 1
            assert hi <= 5 * (math.floor(1.0 / 0.5) + 1)


class TestTheorem3Bound:
    def test_complete_three(self):
        g = generate("complete", 3)
        rep = theorem3_bound(g, 0.5, 0.5, 1.0)
        assert rep.dep == 1
        assert rep.ell_star == 9  # 3 * (floor(2) + 1)
        assert rep.l_star == 9
        assert rep.t_star == 10.0
        # success = (0.5 * 1)^(3*9) = 2^-27, exactly representable
        assert rep.rho == 1.0 - 0.5**27
        assert rep.log10_success == pytest.approx(27 * math.log10(0.5), rel=1e-12)

    def test_reference_graph(self, four_node_chain_with_back_edge):
        g = four_node_chain_with_back_edge
        rep = theorem3_bound(g, 0.5, 1.0 / 8.0, 1.0)
        assert rep.dep == 3
        assert rep.ell_star == 36
        assert rep.l_star == 108
        assert rep.t_star == 109.0
        # success = (0.5 * 0.5^2)^(4*36) = 0.125^144
        expected = math.exp(144 * math.log(0.125))
        assert (1.0 - rep.rho) == pytest.approx(expected, rel=1e-12)
        assert rep.log10_success == pytest.approx(144 * math.log10(0.125), rel=1e-12)

    def test_heterogeneous_probs(self):
        g = generate("path", 2)
        rep = theorem3_bound(g, [0.4, 0.6], 0.5, 2.0)
        # dep=1 from root 1; ell* = 2*3 = 6; success = 0.4^(2*6)
        assert rep.dep == 1
        assert rep.t_star == (6 + 1) * 2.0
        assert (1.0 - rep.rho) == pytest.approx(0.4**12, rel=1e-12)

    def test_underflow_keeps_log_magnitude(self):
        g = generate("path", 40)
        rep = theorem3_bound(g, 0.5, 0.01, 1.0)
        assert rep.rho == 1.0  # success probability underflows as a float
        assert rep.log10_success < -1000
        assert math.isfinite(rep.log10_success)

    def test_tail_and_tail_at_time(self):
        rep = BoundReport(
            ell_star=9, l_star=9, dep=1, t_star=10.0, rho=0.5, log10_success=math.log10(0.5)
        )
        assert rep.tail(0) == 1.0
        assert rep.tail(3) == 0.125
        assert rep.tail_at_time(9.99) == 1.0
        assert rep.tail_at_time(10.0) == 0.5
        assert rep.tail_at_time(35.0) == 0.125
        with pytest.raises(ValidationError):
            rep.tail(-1)
        with pytest.raises(ValidationError):
            rep.tail_at_time(-0.1)

    def test_validation(self, four_node_chain_with_back_edge):
        g = four_node_chain_with_back_edge
        with pytest.raises(ValidationError):
            theorem3_bound(g, 0.5, 0.5, 0.0)
        with pytest.raises(ValidationError):
            theorem3_bound(g, 1.0, 0.5, 1.0)
        with pytest.raises(ValidationError):
            theorem3_bound(g, 0.5, 0.0, 1.0)
        with pytest.raises(ValidationError):
            theorem3_bound(build_digraph(2, []), 0.5, 0.5, 1.0)  # not rooted
        with pytest.raises(ValidationError):
            theorem3_bound(g, [0.5, 0.5], 0.5, 1.0)  # wrong length


class TestMonotonicityOnRuns:
    def test_v_never_increases_under_binary_rule(self):
        for seed in range(20):
            cfg = SimConfig(
                graph=generate("d_regular", 6, d=2),
                period=1.0,
                rule=BinaryRule(0.5),
                trigger=VertexBernoulli(0.5),
                initial="uniform",
                seed=seed,
                stop=StopCondition(sync_eps=0.0, max_continuous_time=300.0),
            )
            arc = simulate(cfg, record="events")
            prev = None
            for ev in arc.events:
                assert ev.v_after <= ev.v_before + 1e-12
                if prev is not None:
                    # V is constant along the flow between jumps
                    assert ev.v_before == pytest.approx(prev, abs=1e-12)
                prev = ev.v_after

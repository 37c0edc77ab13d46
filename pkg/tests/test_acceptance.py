"""Acceptance gate: ten end-to-end criteria with pinned tolerances.

Each test prints exactly one `[acceptance] criterion NN name: PASS|FAIL`
line straight to the terminal (bypassing capture) and then asserts the
same condition, so a FAIL line always comes with a failing test.

Runtime budgets are asserted where the criterion has one; everything is
seeded from one module-level master seed, so the whole gate is
reproducible bit for bit.
"""

from __future__ import annotations

import json
import math
import time

import numpy as np
import pytest

from pcosync import cli
from pcosync.analysis import (
    jump_window_counts,
    lyapunov_v,
    theorem3_bound,
)
from pcosync.engine import (
    BinaryRule,
    PiecewiseLinearRule,
    SimConfig,
    StopCondition,
    VertexBernoulli,
    simulate,
)
from pcosync.feasible import active_vertices, enumerate_masks, mask_probability, sync_string
from pcosync.graph import build_digraph, generate, write_edge_list
from pcosync.montecarlo import compare, run_batch, slope_sweep, uniform_phases
from pcosync.seeds import derive_seed, spawn_rng

MASTER = 20260814

FIG_GRAPH_EDGES = [(1, 2), (2, 3), (3, 2), (3, 4)]

_cache: dict = {}


def _report(capsys, num: int, name: str, ok: bool, detail: str = "") -> None:
    line = f"[acceptance] criterion {num:02d} {name}: {'PASS' if ok else 'FAIL'}"
    if detail:
        line += f" ({detail})"
    with capsys.disabled():
        print(line, flush=True)


def _random_thresholds(rng, n: int) -> tuple:
    return tuple(float(x) for x in rng.uniform(0.01, 0.99, size=n))


def _build_window_arcs() -> list:
    """1000 seeded binary-rule runs across every generator, N <= 20."""
    kinds = ("complete", "path", "cycle", "d_regular", "random_rooted")
    out = []
    for i in range(1000):
        meta = spawn_rng(MASTER, "c1", i)
        kind = kinds[int(meta.integers(len(kinds)))]
        if kind == "d_regular":
            n = int(meta.integers(3, 21))
            g = generate(kind, n, d=int(meta.integers(1, n)))
        elif kind == "random_rooted":
            n = int(meta.integers(2, 21))
            g = generate(
                kind, n, extra_edge_prob=0.3, seed=derive_seed(MASTER, "c1", i, "graph")
            )
        else:
            n = int(meta.integers(2, 21))
            g = generate(kind, n)
        r = _random_thresholds(meta, g.n)
        cfg = SimConfig(
            graph=g,
            period=1.0,
            rule=BinaryRule(r),
            trigger=VertexBernoulli(0.5),
            initial="uniform",
            seed=derive_seed(MASTER, "c1", i, "sim"),
            stop=StopCondition(sync_eps=None, max_continuous_time=6.0),
        )
        arc = simulate(cfg, record="events")
        cap = g.n * (math.floor(1.0 / min(r)) + 1)
        out.append((arc, cap))
    return out


def _window_arcs() -> list:
    if "window" not in _cache:
        _cache["window"] = _build_window_arcs()
    return _cache["window"]


def _build_invariance_arcs() -> list:
    """200 binary-rule runs started inside the synchronized set."""
    out = []
    for i in range(200):
        meta = spawn_rng(MASTER, "c2", i)
        n = int(meta.integers(2, 11))
        kind = ("complete", "cycle", "path")[i % 3]
        g = generate(kind, n)
        pattern = i % 4
        if pattern == 0:
            tau0 = (0.0,) * n
        elif pattern == 1:
            tau0 = (1.0,) * n
        elif pattern == 2:
            tau0 = (float(meta.uniform(0.0, 1.0)),) * n
        else:
            tau0 = tuple(float(b) for b in meta.integers(0, 2, size=n))
        cfg = SimConfig(
            graph=g,
            period=1.0,
            rule=BinaryRule(_random_thresholds(meta, n)),
            trigger=VertexBernoulli(0.5),
            initial=tau0,
            seed=derive_seed(MASTER, "c2", i, "sim"),
            stop=StopCondition(sync_eps=None, max_continuous_time=5.0),
        )
        out.append(simulate(cfg, record="events"))
    return out


def _invariance_arcs() -> list:
    if "invariance" not in _cache:
        _cache["invariance"] = _build_invariance_arcs()
    return _cache["invariance"]


def _string_check_arcs() -> list:
    """20 fully recorded string-verification arcs on the reference graph."""
    if "string" not in _cache:
        g = build_digraph(4, FIG_GRAPH_EDGES)
        arcs = []
        for i in range(1, 21):
            tau0 = uniform_phases(spawn_rng(MASTER, "c4", i, "init"), 4)
            _, arc = cli.run_string_check(g, 1, 0.125, 1.0, tau0, return_arc=True)
            arcs.append(arc)
        _cache["string"] = arcs
    return _cache["string"]


def test_criterion_01_window_bounds(capsys):
    t0 = time.perf_counter()
    violations = 0
    for arc, cap in _window_arcs():
        lo, hi = jump_window_counts(arc, 1.0)
        if lo < 1 or hi > cap:
            violations += 1
    elapsed = time.perf_counter() - t0
    ok = violations == 0 and elapsed < 60.0
    _report(
        capsys, 1, "window-bounds", ok,
        f"runs=1000 violations={violations} elapsed={elapsed:.1f}s budget=60s",
    )
    assert violations == 0
    assert elapsed < 60.0


def test_criterion_02_forward_invariance(capsys):
    bad = 0
    events = 0
    for arc in _invariance_arcs():
        if lyapunov_v(np.asarray(arc.initial)) != 0.0:
            bad += 1
        for ev in arc.events:
            events += 1
            if ev.v_before != 0.0 or ev.v_after != 0.0:
                bad += 1
    ok = bad == 0
    _report(
        capsys, 2, "forward-invariance", ok,
        f"runs=200 jumps={events} exact-zero violations={bad}",
    )
    assert bad == 0


def test_criterion_03_string_check(capsys, tmp_path):
    t0 = time.perf_counter()
    g = build_digraph(4, FIG_GRAPH_EDGES)
    zeta = sync_string(g, 1, 0.125)
    lengths_ok = (zeta.ell_star, zeta.l_star, zeta.q_star) == (36, 108, 3)
    gpath = tmp_path / "graph.txt"
    write_edge_list(g, gpath)
    out = tmp_path / "sc.json"
    rc = cli.main(
        [
            "string-check",
            "--graph", f"file:{gpath}",
            "--r", "0.125",
            "--ics", "100",
            "--seed", str(MASTER),
            "--out", str(out),
        ]
    )
    data = json.loads(out.read_text())
    runs_ok = (
        rc == 0
        and data["ell_star"] == 36
        and data["l_star"] == 108
        and data["all_synced_within_bound"] is True
        and data["all_milestones_ok"] is True
        and len(data["runs"]) == 100
        and all(r["sync_time"] <= (1 + 108) * 1.0 + 1e-9 for r in data["runs"])
    )
    elapsed = time.perf_counter() - t0
    ok = lengths_ok and runs_ok and elapsed < 10.0
    _report(
        capsys, 3, "string-check", ok,
        f"ell*=36 L*=108 ics=100 elapsed={elapsed:.1f}s budget=10s",
    )
    assert lengths_ok
    assert runs_ok
    assert elapsed < 10.0


def test_criterion_04_lyapunov_monotone(capsys):
    arcs = (
        [arc for arc, _ in _window_arcs()] + _invariance_arcs() + _string_check_arcs()
    )
    jump_violations = 0
    flow_violations = 0
    jumps = 0
    for arc in arcs:
        prev = None
        for ev in arc.events:
            jumps += 1
            if ev.v_after > ev.v_before + 1e-12:
                jump_violations += 1
            if prev is not None and abs(ev.v_before - prev) > 1e-12:
                flow_violations += 1
            prev = ev.v_after
    ok = jump_violations == 0 and flow_violations == 0
    _report(
        capsys, 4, "lyapunov-monotone", ok,
        f"arcs={len(arcs)} jumps={jumps} "
        f"jump-violations={jump_violations} flow-violations={flow_violations}",
    )
    assert jump_violations == 0
    assert flow_violations == 0


def test_criterion_05_tail_bound(capsys):
    t0 = time.perf_counter()
    g = generate("cycle", 6)
    template = SimConfig(
        graph=g,
        period=1.0,
        rule=BinaryRule(0.5),
        trigger=VertexBernoulli(0.5),
        initial="uniform",
        seed=0,
        stop=StopCondition(sync_eps=0.0, max_continuous_time=500.0),
    )
    res = run_batch(template, runs=1000, master_seed=MASTER)
    bound = theorem3_bound(g, 0.5, 0.5, 1.0)
    all_synced = res.success_count == 1000
    times = [rec.sync_time for rec in res.records]
    tail_ok = True
    details = []
    for n in (1, 2, 3):
        frac = sum(1 for t in times if t > n * bound.t_star) / len(times)
        limit = bound.tail(n) + 3.0 * math.sqrt(
            bound.tail(n) * (1.0 - bound.tail(n)) / len(times)
        )
        details.append(f"n={n}:{frac:.3f}<={limit:.3f}")
        if frac > min(1.0, limit):
            tail_ok = False
    elapsed = time.perf_counter() - t0
    ok = all_synced and tail_ok and bound.t_star == 91.0 and elapsed < 60.0
    _report(
        capsys, 5, "tail-bound", ok,
        f"synced={res.success_count}/1000 T*={bound.t_star} "
        + " ".join(details)
        + f" elapsed={elapsed:.1f}s budget=60s",
    )
    assert all_synced
    assert bound.t_star == 91.0
    assert tail_ok
    assert elapsed < 60.0


def test_criterion_06_measure_normalization(capsys):
    graphs = [
        build_digraph(4, FIG_GRAPH_EDGES),
        generate("complete", 4),
        generate("path", 13),  # N* = 12
        generate("cycle", 12),
        generate("random_rooted", 10, extra_edge_prob=0.3, seed=MASTER),
        build_digraph(1, []),
        build_digraph(3, []),
    ]
    worst = 0.0
    cases = 0
    for g in graphs:
        nstar = len(active_vertices(g))
        prob_sets = [0.37]
        if nstar:
            prob_sets.append(np.linspace(0.05, 0.95, nstar))
        for probs in prob_sets:
            total = sum(mask_probability(m, probs) for m in enumerate_masks(g))
            worst = max(worst, abs(total - 1.0))
            cases += 1
    ok = worst <= 1e-12
    _report(
        capsys, 6, "measure-normalization", ok,
        f"graphs={len(graphs)} cases={cases} worst-deviation={worst:.2e} tol=1e-12",
    )
    assert worst <= 1e-12


def test_criterion_07_first_jump_probability(capsys):
    template = SimConfig(
        graph=generate("complete", 2),
        period=1.0,
        rule=BinaryRule(0.5),
        trigger=VertexBernoulli(0.5),
        initial=(0.8, 0.4),
        seed=0,
        stop=StopCondition(sync_eps=0.0, max_continuous_time=500.0),
    )
    res = run_batch(template, runs=10_000, master_seed=MASTER)
    hits = sum(
        1 for rec in res.records if rec.jumps == 1 and rec.sync_time is not None
    )
    freq = hits / 10_000
    ok = abs(freq - 0.5) < 0.02
    _report(
        capsys, 7, "first-jump-probability", ok,
        f"runs=10000 freq={freq:.4f} target=0.5 tol=0.02",
    )
    assert abs(freq - 0.5) < 0.02


def test_criterion_08_rule_comparison(capsys):
    t0 = time.perf_counter()
    rows = compare(
        rules=[("binary", BinaryRule(0.5)), ("linear", PiecewiseLinearRule(0.3261, 0.46))],
        families=["complete", "path", "cycle", "d_regular:5"],
        n_grid=[10, 20, 30],
        runs_per_cell=50,
        master_seed=MASTER,
        eps=0.05,
    )
    means: dict = {}
    for row in rows:
        means.setdefault((row.family, row.n), {})[row.rule] = row.mean_sync_time
    losing_cells = [
        cell for cell, by_rule in means.items() if by_rule["binary"] > by_rule["linear"]
    ]
    elapsed = time.perf_counter() - t0
    ok = len(means) == 12 and not losing_cells and elapsed < 300.0
    _report(
        capsys, 8, "rule-comparison", ok,
        f"cells=12 runs-per-cell=50 binary-slower-cells={len(losing_cells)} "
        f"elapsed={elapsed:.0f}s budget=300s",
    )
    assert len(means) == 12
    assert not losing_cells, f"binary mean above linear in {losing_cells}"
    assert elapsed < 300.0


def test_criterion_09_slope_sweep(capsys):
    t0 = time.perf_counter()
    rows = slope_sweep(
        m_grid=[0.0, 0.25, 0.5],
        families=["complete", "path", "cycle", "d_regular:5"],
        n=50,
        runs_per_cell=50,
        master_seed=MASTER,
        eps=0.05,
    )
    by_family: dict = {}
    for row in rows:
        by_family.setdefault(row.family, {})[row.rule] = row.mean_sync_time
    not_minimal = [
        fam
        for fam, by_m in by_family.items()
        if by_m["m=0"] > min(by_m.values())
    ]
    elapsed = time.perf_counter() - t0
    ok = len(by_family) == 4 and not not_minimal and elapsed < 600.0
    summary = " ".join(
        f"{fam}:m0={by_m['m=0']:.3g}" for fam, by_m in sorted(by_family.items())
    )
    _report(
        capsys, 9, "slope-sweep", ok,
        f"{summary} non-minimal-families={len(not_minimal)} "
        f"elapsed={elapsed:.0f}s budget=600s",
    )
    assert len(by_family) == 4
    assert not not_minimal, f"m=0 not minimal for {not_minimal}"
    assert elapsed < 600.0


def test_criterion_10_determinism(capsys, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    mismatches = []

    def identical(*paths):
        blobs = [(tmp_path / p).read_bytes() for p in paths]
        return all(b == blobs[0] for b in blobs)

    assert cli.main(
        ["simulate", "--graph", "cycle:6", "--seed", "42", "--out", "a1.json"]
    ) == 0
    assert cli.main(
        ["simulate", "--graph", "cycle:6", "--seed", "42", "--out", "a2.json"]
    ) == 0
    if not identical("a1.json", "a2.json"):
        mismatches.append("simulate")

    mc = ["montecarlo", "--graph", "cycle:6", "--runs", "20", "--seed", "42", "--no-plot"]
    assert cli.main(mc + ["--out-batch", "b1.csv", "--out-tail", "t1.csv"]) == 0
    assert cli.main(mc + ["--out-batch", "b2.csv", "--out-tail", "t2.csv"]) == 0
    assert cli.main(
        mc + ["--jobs", "2", "--out-batch", "b3.csv", "--out-tail", "t3.csv"]
    ) == 0
    if not identical("b1.csv", "b2.csv", "b3.csv"):
        mismatches.append("montecarlo-batch")
    if not identical("t1.csv", "t2.csv", "t3.csv"):
        mismatches.append("montecarlo-tail")

    cmp_args = [
        "compare",
        "--rules", "binary,linear:0.3261:0.46",
        "--families", "complete,path",
        "--n", "5",
        "--runs", "3",
        "--seed", "42",
        "--no-plot",
    ]
    assert cli.main(cmp_args + ["--out", "c1.csv"]) == 0
    assert cli.main(cmp_args + ["--out", "c2.csv"]) == 0
    if not identical("c1.csv", "c2.csv"):
        mismatches.append("compare")

    gpath = tmp_path / "graph.txt"
    write_edge_list(build_digraph(4, FIG_GRAPH_EDGES), gpath)
    sc = [
        "string-check",
        "--graph", f"file:{gpath}",
        "--r", "0.125",
        "--ics", "5",
        "--seed", "42",
    ]
    assert cli.main(sc + ["--out", "s1.json"]) == 0
    assert cli.main(sc + ["--out", "s2.json"]) == 0
    if not identical("s1.json", "s2.json"):
        mismatches.append("string-check")

    ok = not mismatches
    _report(
        capsys, 10, "determinism", ok,
        "artifacts byte-identical across repeats and worker counts"
        if ok
        else f"mismatched: {mismatches}",
    )
    assert not mismatches

"""Seeded batch campaigns: sync-time tail estimation, paired rule
comparison across graph families, and the slope sweep.

Every run's stream is derived from (master_seed, campaign path) with
seeds.derive_seed, so results are independent of execution order and of
the worker count.  Comparison campaigns are paired: within one
(family, n, run) cell every rule sees the same initial condition and the
same simulation seed, which makes identical rules produce bit-identical
columns.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional, Sequence, Union

import numpy as np

from .analysis import BoundReport
from .engine import (
    BinaryRule,
    PiecewiseLinearRule,
    SimConfig,
    StopCondition,
    UpdateRule,
    VertexBernoulli,
    _lyapunov_v,
    simulate,
)
from .errors import ValidationError
from .graph import Digraph, generate
from .seeds import derive_seed, spawn_rng

DEFAULT_MAX_PERIODS = 500.0
DEFAULT_MAX_JUMPS = 1_000_000


@dataclass(frozen=True)
class RunRecord:
    run: int
    seed: int
    sync_time: Optional[float]
    jumps: int
    final_v: float


@dataclass(frozen=True)
class BatchResult:
    """Per-run records plus aggregates over the runs that synchronized."""

    records: tuple
    runs: int
    success_count: int
    mean: Optional[float]
    median: Optional[float]


@dataclass(frozen=True)
class CompareRow:
    """One (family, n, rule) cell; times holds the per-run sync times
    (censored at the time cap) in run order.
    """

    family: str
    n: int
    rule: str
    mean_sync_time: float
    runs: int
    eps: float
    times: tuple


def uniform_phases(rng: np.random.Generator, n: int) -> np.ndarray:
    """n i.i.d. phases uniform on the open interval (0,1)."""
    u = rng.random(n)
    while (u == 0.0).any():
        z = u == 0.0
        u[z] = rng.random(int(z.sum()))
    return u


def rule_label(rule: UpdateRule) -> str:
    # labels land in CSV fields, so keep them comma-free
    if isinstance(rule, BinaryRule):
        r = "per-agent" if isinstance(rule.r, tuple) else f"{rule.r:g}"
        if rule.tie != "to_one":
            return f"binary(r={r};tie={rule.tie})"
        return f"binary(r={r})"
    return f"linear(m1={rule.m1:g};m2={rule.m2:g})"


def build_family(spec: str, n: int, master_seed: int = 0) -> Digraph:
    """Instantiate a graph-family spec at size n.

    Specs: complete | path | cycle | d_regular:D | random_rooted:PROB.
    The random family is seeded from (master_seed, "graph", spec, n).
    """
    parts = spec.split(":")
    kind = parts[0]
    try:
        if kind in ("complete", "path", "cycle"):
            if len(parts) != 1:
                raise ValidationError(f"family {kind} takes no parameter")
            return generate(kind, n)
        if kind == "d_regular":
            if len(parts) != 2:
                raise ValidationError("family d_regular:D needs one parameter")
            return generate(kind, n, d=int(parts[1]))
        if kind == "random_rooted":
            if len(parts) != 2:
                raise ValidationError("family random_rooted:PROB needs one parameter")
            return generate(
                kind,
                n,
                extra_edge_prob=float(parts[1]),
                seed=derive_seed(master_seed, "graph", spec, n),
            )
    except ValueError as exc:
        raise ValidationError(f"bad family spec {spec!r}: {exc}") from exc
    raise ValidationError(f"unknown family spec {spec!r}")


def _one_batch_run(template: SimConfig, master_seed: int, run: int) -> RunRecord:
    seed_r = derive_seed(master_seed, "batch", run)
    cfg = replace(template, seed=seed_r)
    arc = simulate(cfg, record="none")
    return RunRecord(
        run=run,
        seed=seed_r,
        sync_time=arc.sync_time,
        jumps=arc.jumps,
        final_v=_lyapunov_v(np.asarray(arc.final)),
    )


def _batch_task(args) -> RunRecord:
    template, master_seed, run = args
    return _one_batch_run(template, master_seed, run)


def run_batch(
    template: SimConfig,
    runs: int,
    master_seed: int,
    jobs: int = 1,
) -> BatchResult:
    """Execute `runs` independent runs of the template config.

    Run r's seed is derived from (master_seed, "batch", r), so any subset
    can be replayed standalone by passing that seed to simulate.  A
    template without a continuous-time cap gets the default cap of
    500 periods (pass math.inf to really disable it).
    """
    if runs < 1:
        raise ValidationError("runs must be >= 1")
    if template.stop.max_continuous_time is None:
        stop = replace(
            template.stop,
            max_continuous_time=DEFAULT_MAX_PERIODS * template.period,
        )
        template = replace(template, stop=stop)
    indices = range(1, runs + 1)
    if jobs <= 1:
        records = [_one_batch_run(template, master_seed, r) for r in indices]
    else:
        tasks = [(template, master_seed, r) for r in indices]
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            records = list(ex.map(_batch_task, tasks, chunksize=max(1, runs // (4 * jobs))))
    good = [rec.sync_time for rec in records if rec.sync_time is not None]
    return BatchResult(
        records=tuple(records),
        runs=runs,
        success_count=len(good),
        mean=float(np.mean(good)) if good else None,
        median=float(np.median(good)) if good else None,
    )


def empirical_tail(
    times: Sequence[float], unit: float, total: Optional[int] = None
) -> list[tuple[int, float]]:
    """Empirical P(sync time > n*unit) for n = 1 .. ceil(max/unit).

    Nonincreasing by construction; the last bin reaches 0 when every run
    synchronized.  For censored campaigns pass the observed times plus the
    full run count as total: the tail then floors at the censored
    fraction.
    """
    if unit <= 0:
        raise ValidationError("unit must be positive")
    vals = [float(t) for t in times]
    if not vals:
        raise ValidationError("empty sync-time list")
    if total is None:
        total = len(vals)
    if total < len(vals):
        raise ValidationError("total cannot be below the number of observed times")
    n_max = max(1, math.ceil(max(vals) / unit))
    out = []
    for n in range(1, n_max + 1):
        covered = sum(1 for t in vals if t <= n * unit)
        out.append((n, 1.0 - covered / total))
    return out


def _compare_cell_run(
    master_seed: int,
    family: str,
    n: int,
    run: int,
    graph: Digraph,
    labeled_rules: tuple,
    eps: float,
    period: float,
    trigger_p: float,
    max_periods: float,
    max_jumps: int,
) -> tuple:
    """All rules on one shared initial condition; returns times in rule order."""
    init_rng = spawn_rng(master_seed, "cmp", family, n, run, "init")
    tau0 = tuple(float(x) for x in uniform_phases(init_rng, n))
    sim_seed = derive_seed(master_seed, "cmp", family, n, run, "sim")
    cap = max_periods * period
    times = []
    for _, rule in labeled_rules:
        cfg = SimConfig(
            graph=graph,
            period=period,
            rule=rule,
            trigger=VertexBernoulli(trigger_p),
            initial=tau0,
            seed=sim_seed,
            stop=StopCondition(
                sync_eps=eps, max_continuous_time=cap, max_jumps=max_jumps
            ),
        )
        arc = simulate(cfg, record="none")
        times.append(arc.sync_time if arc.sync_time is not None else cap)
    return (family, n, run, tuple(times))


def _compare_task(args) -> tuple:
    return _compare_cell_run(*args)


def _label_rules(rules) -> tuple:
    labeled = []
    for item in rules:
        if isinstance(item, tuple):
            labeled.append((str(item[0]), item[1]))
        else:
            labeled.append((rule_label(item), item))
    labels = [lab for lab, _ in labeled]
    if len(set(labels)) != len(labels):
        raise ValidationError(f"rule labels must be unique, got {labels}")
    return tuple(labeled)


def compare(
    rules,
    families: Sequence[str],
    n_grid: Sequence[int],
    runs_per_cell: int,
    master_seed: int,
    eps: float = 0.05,
    *,
    period: float = 1.0,
    trigger_p: float = 0.5,
    max_periods: float = DEFAULT_MAX_PERIODS,
    max_jumps: int = DEFAULT_MAX_JUMPS,
    jobs: int = 1,
) -> list[CompareRow]:
    """Paired mean sync-time table over (rule, family, n) cells.

    rules is a list of UpdateRule values or (label, rule) pairs.  Within a
    cell every rule runs from the same initial phases with the same seed;
    runs that never reach V <= eps are censored at the time cap and enter
    the mean at that value.
    """
    if runs_per_cell < 1:
        raise ValidationError("runs_per_cell must be >= 1")
    labeled = _label_rules(rules)
    tasks = []
    for family in families:
        for n in n_grid:
            g = build_family(family, int(n), master_seed)
            for run in range(1, runs_per_cell + 1):
                tasks.append(
                    (
                        master_seed,
                        family,
                        int(n),
                        run,
                        g,
                        labeled,
                        eps,
                        period,
                        trigger_p,
                        max_periods,
                        max_jumps,
                    )
                )
    if jobs <= 1:
        results = [_compare_cell_run(*t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_compare_task, tasks, chunksize=1))
    by_cell: dict = {}
    for family, n, run, times in results:
        by_cell.setdefault((family, n), {})[run] = times
    rows = []
    for family in families:
        for n in n_grid:
            cell = by_cell[(family, int(n))]
            per_rule = list(zip(*(cell[r] for r in sorted(cell))))
            for (label, _), times in zip(labeled, per_rule):
                rows.append(
                    CompareRow(
                        family=family,
                        n=int(n),
                        rule=label,
                        mean_sync_time=float(np.mean(times)),
                        runs=runs_per_cell,
                        eps=eps,
                        times=tuple(times),
                    )
                )
    return rows


def slope_sweep(
    m_grid: Sequence[float],
    families: Sequence[str],
    n: int,
    runs_per_cell: int,
    master_seed: int,
    eps: float = 0.05,
    **kwargs,
) -> list[CompareRow]:
    """Mean sync time as the comparison slope sweeps m_grid at fixed n.

    m=0 runs the binary rule with r=0.5 (the limiting case of the linear
    map); any m>0 runs the linear rule with m1=m2=m.  Seeds follow the
    compare derivation, so an m=0 column reproduces the matching binary
    compare column exactly.
    """
    rules = []
    for m in m_grid:
        m = float(m)
        if not 0.0 <= m <= 0.5:
            raise ValidationError(f"slope {m} outside [0, 0.5]")
        if m == 0.0:
            rules.append((f"m={m:g}", BinaryRule(r=0.5)))
        else:
            rules.append((f"m={m:g}", PiecewiseLinearRule(m1=m, m2=m)))
    return compare(
        rules, families, [int(n)], runs_per_cell, master_seed, eps=eps, **kwargs
    )


def _write_meta(fh, meta: Optional[dict]) -> None:
    if meta:
        for key in sorted(meta):
            fh.write(f"# {key}: {json.dumps(meta[key], sort_keys=True)}\n")


def write_batch_csv(result: BatchResult, path: str, meta: Optional[dict] = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        _write_meta(fh, meta)
        fh.write("run,seed,sync_time,jumps,final_V\n")
        for rec in result.records:
            st = "" if rec.sync_time is None else repr(rec.sync_time)
            fh.write(f"{rec.run},{rec.seed},{st},{rec.jumps},{rec.final_v!r}\n")


def write_tail_csv(
    tail: Sequence[tuple[int, float]],
    unit: float,
    path: str,
    bound: Optional[BoundReport] = None,
    meta: Optional[dict] = None,
) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        _write_meta(fh, meta)
        fh.write("n,threshold_time,empirical_tail,theorem3_bound\n")
        for n, p in tail:
            thr = n * unit
            b = "" if bound is None else repr(bound.tail_at_time(thr))
            fh.write(f"{n},{thr!r},{p!r},{b}\n")


def write_compare_csv(
    rows: Sequence[CompareRow], path: str, meta: Optional[dict] = None
) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        _write_meta(fh, meta)
        fh.write("family,n,rule,mean_sync_time,runs,eps\n")
        for row in rows:
            fh.write(
                f"{row.family},{row.n},{row.rule},{row.mean_sync_time!r},"
                f"{row.runs},{row.eps!r}\n"
            )

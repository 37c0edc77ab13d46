"""Command-line front end.

Subcommands: simulate (single run to JSON), montecarlo (batch + tail CSV),
compare (paired rule table, also the slope sweep), string-check
(deterministic synchronization-string verification), bound (closed-form
tail bound).  Exit codes: 0 success, 2 validation error, 3 runtime error.

The master seed comes from --seed, defaulting to the PCOSYNC_SEED
environment variable.  A JSON config file given with --config supplies
defaults for any long flag (keys use underscores).  Every artifact embeds
the resolved configuration and the master seed.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from typing import Optional, Sequence

import numpy as np

from . import analysis, engine, feasible, graph, montecarlo
from .engine import (
    BinaryRule,
    Deterministic,
    EdgeBernoulli,
    PiecewiseLinearRule,
    SimConfig,
    StopCondition,
    VertexBernoulli,
    config_to_dict,
    simulate,
    write_arc_csv,
    write_arc_json,
)
from .errors import SimulationError, ValidationError
from .feasible import GraphSequence, TriggerMask
from .montecarlo import uniform_phases
from .seeds import derive_seed, spawn_rng

_GRAPH_ALIASES = {
    "random-rooted": "random_rooted",
    "regular": "d_regular",
    "d-regular": "d_regular",
}


def _normalize_graph_spec(spec: str) -> str:
    parts = spec.split(":", 1)
    kind = _GRAPH_ALIASES.get(parts[0], parts[0])
    return kind if len(parts) == 1 else f"{kind}:{parts[1]}"


def _build_graph(spec: str, master_seed: int) -> graph.Digraph:
    spec = _normalize_graph_spec(spec)
    return graph.parse_graph_spec(spec, seed=derive_seed(master_seed, "graph", spec))


def _parse_thresholds(spec: str, n: int, master_seed: int):
    """--r value: 'uniform', a scalar, or a comma list of per-agent values."""
    if spec == "uniform":
        rng = spawn_rng(master_seed, "thresholds")
        return tuple(float(x) for x in uniform_phases(rng, n))
    try:
        if "," in spec:
            vals = tuple(float(x) for x in spec.split(","))
        else:
            return float(spec)
    except ValueError as exc:
        raise ValidationError(f"bad --r value {spec!r}") from exc
    if len(vals) != n:
        raise ValidationError(f"--r needs {n} values, got {len(vals)}")
    return vals


def _parse_rule(token: str, r_value, tie: str):
    if token == "binary":
        return BinaryRule(r=r_value, tie=tie)
    if token.startswith("linear:"):
        parts = token.split(":")
        if len(parts) != 3:
            raise ValidationError("linear rule is linear:M1:M2")
        try:
            return PiecewiseLinearRule(m1=float(parts[1]), m2=float(parts[2]))
        except ValueError as exc:
            raise ValidationError(f"bad rule token {token!r}") from exc
    raise ValidationError(f"unknown rule {token!r} (binary or linear:M1:M2)")


def _parse_trigger(spec: str, n: int):
    parts = spec.split(":")
    if parts[0] == "vertex":
        if len(parts) != 2:
            raise ValidationError("vertex trigger is vertex:P or vertex:p1,p2,...")
        try:
            probs = tuple(float(x) for x in parts[1].split(","))
        except ValueError as exc:
            raise ValidationError(f"bad trigger {spec!r}") from exc
        if len(probs) == 1:
            return VertexBernoulli(probs[0])
        if len(probs) != n:
            raise ValidationError(f"need {n} probabilities, got {len(probs)}")
        return VertexBernoulli(probs)
    if parts[0] == "edge":
        if len(parts) != 2:
            raise ValidationError("edge trigger is edge:P")
        try:
            return EdgeBernoulli(float(parts[1]))
        except ValueError as exc:
            raise ValidationError(f"bad trigger {spec!r}") from exc
    if parts[0] == "file":
        if len(parts) not in (2, 3):
            raise ValidationError("deterministic trigger is file:PATH[:repeat]")
        repeat = len(parts) == 3
        if repeat and parts[2] != "repeat":
            raise ValidationError("deterministic trigger is file:PATH[:repeat]")
        seq = feasible.read_mask_file(parts[1])
        if repeat:
            seq = GraphSequence(seq.masks, repeat=True)
        return Deterministic(seq)
    raise ValidationError(f"unknown trigger {spec!r}")


def _parse_initial(spec: str, n: int):
    if spec == "uniform":
        return "uniform"
    try:
        vals = tuple(float(x) for x in spec.split(","))
    except ValueError as exc:
        raise ValidationError(f"bad --initial value {spec!r}") from exc
    if len(vals) != n:
        raise ValidationError(f"--initial needs {n} phases, got {len(vals)}")
    return vals


def _parse_eps(spec: str) -> Optional[float]:
    if spec == "none":
        return None
    try:
        return float(spec)
    except ValueError as exc:
        raise ValidationError(f"bad --eps value {spec!r}") from exc


def _parse_int_grid(spec: str) -> list[int]:
    """'10:100:10' inclusive range, '10,20,30' list, or a single value."""
    try:
        if ":" in spec:
            start, stop, step = (int(x) for x in spec.split(":"))
            if step <= 0 or stop < start:
                raise ValidationError(f"bad grid {spec!r}")
            return list(range(start, stop + 1, step))
        if "," in spec:
            return [int(x) for x in spec.split(",")]
        return [int(spec)]
    except ValueError as exc:
        raise ValidationError(f"bad grid {spec!r}") from exc


def _parse_float_grid(spec: str) -> list[float]:
    try:
        if ":" in spec:
            start, stop, step = (float(x) for x in spec.split(":"))
            if step <= 0 or stop < start:
                raise ValidationError(f"bad grid {spec!r}")
            out = []
            k = 0
            while True:
                v = start + k * step
                if v > stop + 1e-9:
                    break
                out.append(round(v, 12))
                k += 1
            return out
        if "," in spec:
            return [float(x) for x in spec.split(",")]
        return [float(spec)]
    except ValueError as exc:
        raise ValidationError(f"bad grid {spec!r}") from exc


def _require_rooted(g: graph.Digraph) -> None:
    if not graph.roots(g):
        raise ValidationError("graph is not rooted")


def _sibling_png(path: str) -> str:
    base, ext = os.path.splitext(path)
    return base + ".png"


# ---------------------------------------------------------------- simulate


def cmd_simulate(args) -> int:
    master = args.seed
    g = _build_graph(args.graph, master)
    if args.require_rooted:
        _require_rooted(g)
    r_value = _parse_thresholds(args.r, g.n, master)
    rule = _parse_rule(args.rule, r_value, args.tie)
    trigger = _parse_trigger(args.trigger, g.n)
    initial = _parse_initial(args.initial, g.n)
    stop = StopCondition(
        sync_eps=_parse_eps(args.eps),
        max_continuous_time=args.max_time,
        max_jumps=args.max_jumps,
    )
    cfg = SimConfig(
        graph=g,
        period=args.T,
        rule=rule,
        trigger=trigger,
        initial=initial,
        seed=master,
        stop=stop,
        firing_order=args.firing_order,
    )
    arc = simulate(cfg, record=args.record)
    write_arc_json(arc, args.out)
    if args.csv:
        write_arc_csv(arc, args.csv)
    final_v = analysis.lyapunov_v(np.asarray(arc.final))
    st = "none" if arc.sync_time is None else repr(arc.sync_time)
    print(f"sync_time={st} jumps={arc.jumps} final_V={final_v!r}")
    print(f"terminated_by={arc.terminated_by} arc={args.out}")
    return 0


# -------------------------------------------------------------- montecarlo


def cmd_montecarlo(args) -> int:
    master = args.seed
    if args.runs < 1:
        raise ValidationError("--runs must be >= 1")
    if args.bin <= 0:
        raise ValidationError("--bin must be positive")
    g = _build_graph(args.graph, master)
    if args.require_rooted:
        _require_rooted(g)
    r_value = _parse_thresholds(args.r, g.n, master)
    rule = _parse_rule(args.rule, r_value, args.tie)
    trigger = _parse_trigger(args.trigger, g.n)
    max_time = args.max_time if args.max_time is not None else 500.0 * args.T
    stop = StopCondition(
        sync_eps=_parse_eps(args.eps),
        max_continuous_time=max_time,
        max_jumps=args.max_jumps,
    )
    template = SimConfig(
        graph=g,
        period=args.T,
        rule=rule,
        trigger=trigger,
        initial="uniform",
        seed=0,
        stop=stop,
    )
    result = montecarlo.run_batch(template, args.runs, master, jobs=args.jobs)
    finite = [rec.sync_time for rec in result.records if rec.sync_time is not None]
    bound = None
    if (
        isinstance(rule, BinaryRule)
        and isinstance(trigger, VertexBernoulli)
        and graph.roots(g)
    ):
        bound = analysis.theorem3_bound(g, trigger.probs, rule.r, args.T)
    meta = {
        "config": config_to_dict(template),
        "master_seed": master,
        "runs": args.runs,
        "bin": args.bin,
    }
    montecarlo.write_batch_csv(result, args.out_batch, meta=meta)
    if finite:
        tail = montecarlo.empirical_tail(finite, args.bin, total=args.runs)
        montecarlo.write_tail_csv(tail, args.bin, args.out_tail, bound=bound, meta=meta)
        if not args.no_plot:
            from . import plots

            plots.plot_tail(tail, args.bin, _sibling_png(args.out_tail), bound=bound)
    else:
        print("warning: no run synchronized; tail CSV not written", file=sys.stderr)
    mean = "none" if result.mean is None else f"{result.mean:.6g}"
    print(
        f"runs={result.runs} synced={result.success_count} mean={mean} "
        f"batch={args.out_batch}" + (f" tail={args.out_tail}" if finite else "")
    )
    return 0


# ----------------------------------------------------------------- compare


def cmd_compare(args) -> int:
    master = args.seed
    if args.runs < 1:
        raise ValidationError("--runs must be >= 1")
    families = [_normalize_graph_spec(f) for f in args.families.split(",")]
    n_grid = _parse_int_grid(args.n)
    if args.slope_sweep:
        if len(n_grid) != 1:
            raise ValidationError("--slope-sweep needs a single --n value")
        m_grid = _parse_float_grid(args.slope_sweep)
        rows = montecarlo.slope_sweep(
            m_grid,
            families,
            n_grid[0],
            args.runs,
            master,
            eps=args.eps,
            period=args.T,
            trigger_p=args.p,
            max_periods=args.max_periods,
            max_jumps=args.max_jumps,
            jobs=args.jobs,
        )
    else:
        if args.r == "uniform" or "," in args.r:
            raise ValidationError("compare uses a scalar --r (shared thresholds)")
        try:
            r_scalar = float(args.r)
        except ValueError as exc:
            raise ValidationError(f"bad --r value {args.r!r}") from exc
        rules = [
            (tok, _parse_rule(tok, r_scalar, args.tie))
            for tok in args.rules.split(",")
        ]
        rows = montecarlo.compare(
            rules,
            families,
            n_grid,
            args.runs,
            master,
            eps=args.eps,
            period=args.T,
            trigger_p=args.p,
            max_periods=args.max_periods,
            max_jumps=args.max_jumps,
            jobs=args.jobs,
        )
    meta = {
        "master_seed": master,
        "families": families,
        "n_grid": n_grid,
        "runs_per_cell": args.runs,
        "eps": args.eps,
        "period": args.T,
        "trigger_p": args.p,
        "max_periods": args.max_periods,
        "max_jumps": args.max_jumps,
        "slope_sweep": args.slope_sweep or None,
        "rules": None if args.slope_sweep else args.rules,
    }
    montecarlo.write_compare_csv(rows, args.out, meta=meta)
    if not args.no_plot:
        from . import plots

        plots.plot_compare(rows, _sibling_png(args.out))
    print(f"cells={len(rows)} table={args.out}")
    return 0


# ------------------------------------------------------------ string-check


def _predicted_next_firer(tau: np.ndarray) -> int:
    mx = float(tau.max())
    if mx >= 1.0:
        pend = np.flatnonzero(tau == 1.0)
    else:
        pend = np.flatnonzero(tau >= mx - engine.SNAP_TOL)
    return int(pend[0]) + 1


def run_string_check(
    g: graph.Digraph,
    root: int,
    r_value,
    T: float,
    initial,
    prefix: Optional[GraphSequence] = None,
    return_arc: bool = False,
) -> dict:
    """Drive one initial condition through prefix + sync string + padding.

    Runs zero-pulse (or user prefix) jumps until the root is the next
    agent to fire, so the string's first mask is consumed by the root's
    own firing; then plays the full synchronization string followed by
    all-ones padding, and reports layer-boundary times, partial depths,
    and the sync time against the (1 + q* ell*)T bound.  With return_arc
    the fully recorded arc comes back alongside the report.
    """
    ss = feasible.sync_string(g, root, r_value)
    part = graph.depth_partition(g, root)
    rule = BinaryRule(r=r_value)
    nstar = len(feasible.active_vertices(g))
    if prefix is not None and prefix.masks and len(prefix.masks[0]) != nstar:
        raise ValidationError(
            f"prefix masks have length {len(prefix.masks[0])}, need {nstar}"
        )
    zeros = TriggerMask((0,) * nstar)
    ones = TriggerMask((1,) * nstar)
    pos = {v: i for i, v in enumerate(feasible.active_vertices(g))}
    t_bound = (1 + ss.q_star * ss.ell_star) * T

    tau = engine.as_phases(initial, g.n)
    consumed: list[TriggerMask] = []
    if analysis.lyapunov_v(tau) > 0.0:
        # phase A: let agents fire under the prefix until the root is next
        t = 0.0
        cap = (len(prefix.masks) if prefix else 0) + 20 * g.n * (
            math.floor(1.0 / min(np.atleast_1d(np.asarray(r_value, dtype=float)))) + 1
        )
        while _predicted_next_firer(tau) != root:
            if len(consumed) >= cap:
                raise SimulationError("root never became the next firer")
            k = len(consumed)
            mask = None
            if prefix is not None:
                mask = prefix.mask_at(k)
            if mask is None:
                mask = zeros
            if float(tau.max()) < 1.0:
                dt = engine.time_to_next_fire(tau, T)
                tau = engine.flow(tau, dt, T)
                t += dt
            firer = int(np.flatnonzero(tau == 1.0)[0]) + 1
            receivers = (
                g.out_neighbors(firer)
                if firer in pos and mask.bits[pos[firer]] == 1
                else ()
            )
            tau = engine.apply_jump(tau, firer, receivers, rule)
            consumed.append(mask)

    k0 = len(consumed)
    pad = [ones] * (ss.ell_star + 2 * g.n)
    xi = GraphSequence(tuple(consumed) + ss.sequence.masks + tuple(pad))
    cfg = SimConfig(
        graph=g,
        period=T,
        rule=rule,
        trigger=Deterministic(xi),
        initial=tuple(float(x) for x in np.asarray(initial, dtype=float)),
        seed=0,
        stop=StopCondition(
            sync_eps=0.0,
            max_continuous_time=2.0 * t_bound + T,
            max_jumps=len(xi.masks),
        ),
    )
    arc = simulate(cfg, record="phases")
    synced = arc.sync_time is not None
    boundaries = []
    for q in range(ss.q_star):
        k_b = k0 + (q + 1) * ss.ell_star
        entry: dict = {"layer": q, "jump": k_b}
        if k_b <= len(arc.events):
            ev = arc.events[k_b - 1]
            depth = analysis.partial_depth(np.asarray(ev.tau_after), part, eps=0.0)
            entry.update(t=ev.t, partial_depth=depth, ok=depth >= q + 1)
        else:
            # run stopped early: it can only have stopped synchronized
            entry.update(t=None, partial_depth=part.q_star, ok=synced)
        boundaries.append(entry)
    within = synced and arc.sync_time <= t_bound + 1e-9
    report = {
        "root": root,
        "ell_star": ss.ell_star,
        "l_star": ss.l_star,
        "q_star": ss.q_star,
        "prefix_jumps": k0,
        "boundaries": boundaries,
        "synced": synced,
        "sync_time": arc.sync_time,
        "t_bound": t_bound,
        "within_bound": within,
        "jumps": arc.jumps,
        "final_v": analysis.lyapunov_v(np.asarray(arc.final)),
    }
    if return_arc:
        return report, arc
    return report


def cmd_string_check(args) -> int:
    master = args.seed
    g = _build_graph(args.graph, master)
    rs = graph.roots(g)
    if not rs:
        raise ValidationError("graph is not rooted")
    root = args.root if args.root is not None else min(rs)
    if root not in rs:
        raise ValidationError(f"vertex {root} is not a root of the graph")
    r_value = _parse_thresholds(args.r, g.n, master)
    prefix = feasible.read_mask_file(args.prefix_file) if args.prefix_file else None
    if args.initial != "uniform" and args.ics != 1:
        raise ValidationError("an explicit --initial requires --ics 1")
    reports = []
    for i in range(1, args.ics + 1):
        if args.initial == "uniform":
            rng = spawn_rng(master, "sc", i, "init")
            tau0 = uniform_phases(rng, g.n)
        else:
            tau0 = np.asarray(_parse_initial(args.initial, g.n), dtype=float)
        rep = run_string_check(g, root, r_value, args.T, tau0, prefix=prefix)
        rep["ic"] = i
        rep["initial"] = [float(x) for x in tau0]
        reports.append(rep)
    all_sync = all(r["synced"] and r["within_bound"] for r in reports)
    milestones = all(all(b["ok"] for b in r["boundaries"]) for r in reports)
    out = {
        "config": {
            "graph": {"n": g.n, "edges": [list(e) for e in g.edges]},
            "root": root,
            "r": list(r_value) if isinstance(r_value, tuple) else r_value,
            "T": args.T,
            "ics": args.ics,
            "master_seed": master,
        },
        "ell_star": reports[0]["ell_star"],
        "l_star": reports[0]["l_star"],
        "q_star": reports[0]["q_star"],
        "t_bound": reports[0]["t_bound"],
        "all_synced_within_bound": all_sync,
        "all_milestones_ok": milestones,
        "runs": reports,
    }
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(out, fh, indent=2)
        fh.write("\n")
    print(
        f"ell_star={out['ell_star']} L_star={out['l_star']} q_star={out['q_star']} "
        f"ics={args.ics} all_synced_within_bound={all_sync} "
        f"milestones_ok={milestones} report={args.out}"
    )
    return 0


# ------------------------------------------------------------------- bound


def cmd_bound(args) -> int:
    master = args.seed
    g = _build_graph(args.graph, master)
    r_value = _parse_thresholds(args.r, g.n, master)
    rep = analysis.theorem3_bound(g, args.p, r_value, args.T)
    payload = {
        "graph": {"n": g.n, "edges": [list(e) for e in g.edges]},
        "p": args.p,
        "r": list(r_value) if isinstance(r_value, tuple) else r_value,
        "T": args.T,
        "master_seed": master,
        "ell_star": rep.ell_star,
        "l_star": rep.l_star,
        "dep": rep.dep,
        "t_star": rep.t_star,
        "rho": rep.rho,
        "log10_success": rep.log10_success,
    }
    text = json.dumps(payload, indent=2)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)
    return 0


# -------------------------------------------------------------------- main


def _default_seed() -> int:
    try:
        return int(os.environ.get("PCOSYNC_SEED", "0"))
    except ValueError:
        return 0


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with default values for long flags")
    p.add_argument(
        "--seed",
        type=int,
        default=None,
        help="master seed (default: PCOSYNC_SEED environment variable or 0)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pcosync",
        description="Pulse-coupled oscillator network simulator and analysis tools",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("simulate", help="single run, arc written as JSON")
    _add_common(ps)
    ps.add_argument("--graph", required=True, help="family:params or file:path")
    ps.add_argument("--T", type=float, default=1.0, help="oscillation period")
    ps.add_argument("--rule", default="binary", help="binary or linear:M1:M2")
    ps.add_argument("--r", default="0.5", help="threshold: value, list, or uniform")
    ps.add_argument("--tie", default="to_one", choices=["to_one", "to_zero", "random"])
    ps.add_argument(
        "--trigger", default="vertex:0.5", help="vertex:P | edge:P | file:PATH[:repeat]"
    )
    ps.add_argument("--initial", default="uniform", help="uniform or comma list")
    ps.add_argument("--eps", default="0", help="sync threshold on V, or 'none'")
    ps.add_argument("--max-time", type=float, default=None)
    ps.add_argument("--max-jumps", type=int, default=1_000_000)
    ps.add_argument("--firing-order", default="ascending", choices=["ascending", "random"])
    ps.add_argument("--record", default="phases", choices=["phases", "events", "none"])
    ps.add_argument("--require-rooted", action="store_true")
    ps.add_argument("--out", default="arc.json")
    ps.add_argument("--csv", default=None, help="also write per-event CSV")
    ps.set_defaults(func=cmd_simulate)

    pm = sub.add_parser("montecarlo", help="batch campaign with tail CSV")
    _add_common(pm)
    pm.add_argument("--graph", required=True)
    pm.add_argument("--runs", type=int, required=True)
    pm.add_argument("--bin", type=float, default=5.0, help="tail bin width (time)")
    pm.add_argument("--T", type=float, default=1.0)
    pm.add_argument("--rule", default="binary")
    pm.add_argument("--r", default="uniform")
    pm.add_argument("--tie", default="to_one", choices=["to_one", "to_zero", "random"])
    pm.add_argument("--trigger", default="vertex:0.5")
    pm.add_argument("--eps", default="0")
    pm.add_argument("--max-time", type=float, default=None, help="default 500*T")
    pm.add_argument("--max-jumps", type=int, default=1_000_000)
    pm.add_argument("--require-rooted", action="store_true")
    pm.add_argument("--jobs", type=int, default=1)
    pm.add_argument("--out-tail", default="tail.csv")
    pm.add_argument("--out-batch", default="batch.csv")
    pm.add_argument("--no-plot", action="store_true")
    pm.set_defaults(func=cmd_montecarlo)

    pc = sub.add_parser("compare", help="paired rule comparison / slope sweep")
    _add_common(pc)
    pc.add_argument(
        "--rules",
        default="binary,linear:0.3261:0.46",
        help="comma list of binary | linear:M1:M2",
    )
    pc.add_argument(
        "--families",
        default="complete,path,cycle,regular:5",
        help="comma list of graph families",
    )
    pc.add_argument("--n", default="10:100:10", help="size grid start:stop:step")
    pc.add_argument("--runs", type=int, default=50)
    pc.add_argument("--eps", type=float, default=0.05)
    pc.add_argument("--T", type=float, default=1.0)
    pc.add_argument("--p", type=float, default=0.5, help="vertex trigger probability")
    pc.add_argument("--r", default="0.5", help="binary threshold (scalar)")
    pc.add_argument("--tie", default="to_one", choices=["to_one", "to_zero", "random"])
    pc.add_argument("--max-periods", type=float, default=500.0)
    pc.add_argument("--max-jumps", type=int, default=1_000_000)
    pc.add_argument("--slope-sweep", default=None, help="slope grid, e.g. 0:0.5:0.05")
    pc.add_argument("--jobs", type=int, default=1)
    pc.add_argument("--out", default="compare.csv")
    pc.add_argument("--no-plot", action="store_true")
    pc.set_defaults(func=cmd_compare)

    pk = sub.add_parser("string-check", help="verify the synchronization string")
    _add_common(pk)
    pk.add_argument("--graph", required=True)
    pk.add_argument("--root", type=int, default=None, help="default: smallest root")
    pk.add_argument("--r", default="uniform")
    pk.add_argument("--T", type=float, default=1.0)
    pk.add_argument("--ics", type=int, default=1, help="number of initial conditions")
    pk.add_argument("--initial", default="uniform")
    pk.add_argument("--prefix-file", default=None, help="mask file consumed first")
    pk.add_argument("--out", default="string_check.json")
    pk.set_defaults(func=cmd_string_check)

    pb = sub.add_parser("bound", help="closed-form sync-time tail bound")
    _add_common(pb)
    pb.add_argument("--graph", required=True)
    pb.add_argument("--p", type=float, default=0.5)
    pb.add_argument("--r", default="0.5")
    pb.add_argument("--T", type=float, default=1.0)
    pb.add_argument("--out", default=None)
    pb.set_defaults(func=cmd_bound)

    return parser


def _apply_config_file(parser: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    """Use --config JSON values as defaults for the chosen subcommand."""
    probe = argparse.ArgumentParser(add_help=False)
    probe.add_argument("--config", default=None)
    known, _ = probe.parse_known_args(argv)
    if known.config is None:
        return argv
    try:
        with open(known.config, "r", encoding="utf-8") as fh:
            values = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read config file {known.config}: {exc}") from exc
    if not isinstance(values, dict):
        raise ValidationError("config file must hold a JSON object")
    if not argv:
        raise ValidationError("config file needs a subcommand on the command line")
    sub_name = argv[0]
    sub_actions = next(
        a for a in parser._actions if isinstance(a, argparse._SubParsersAction)
    )
    if sub_name not in sub_actions.choices:
        return argv
    sub = sub_actions.choices[sub_name]
    dests = {a.dest for a in sub._actions}
    unknown = set(values) - dests
    if unknown:
        raise ValidationError(f"unknown config keys: {sorted(unknown)}")
    sub.set_defaults(**values)
    return argv


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config_file(parser, argv)
        args = parser.parse_args(argv)
        if args.seed is None:
            args.seed = _default_seed()
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SimulationError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

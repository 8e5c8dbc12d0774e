"""Cell-by-cell execution of an :class:`ExperimentSpec`.

A cell is one (n, graph seed, replica) triple.  Its stream seed is a stable
mix of (spec seed, n, graph seed, replica), so results do not depend on
which worker runs the cell or in what order.  Records are appended to a
JSON-lines file by the parent process only.
"""

from __future__ import annotations

import json
import math
import os
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from functools import lru_cache
from pathlib import Path
from typing import Callable

import numpy as np

from .. import __version__
from ..coupling import GENERATOR_NAME, EventStream, derive_seed
from ..dynamics import (
    ISING,
    NOISY_MAJORITY,
    POTTS_DOMINATING,
    POTTS_GLAUBER,
    TwoSpinChain,
    UpdateRule,
    magnetization_potts,
    parse_init,
    run_chains,
    run_grand_coupled,
    run_potts_triple,
    run_rigid_pair,
)
from ..errors import InvariantViolation
from ..graph import Graph, complete_graph, cycle_graph, generate_random_regular, petersen_graph, read_graph
from ..observers import MagnetizationTrace, OccupationCounter
from ..spacetime import scan_store
from .spec import ExperimentSpec

INIT_NOTE = "biased inits place their plus (or state-1) vertices uniformly at random, seeded by the stream seed"


def worker_count() -> int:
    env = os.environ.get("SPINLAB_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def build_rule(rule: dict, d: int | None) -> UpdateRule:
    kind = rule.get("kind", ISING)
    if kind == ISING:
        return UpdateRule.ising(float(rule["beta"]))
    if kind == POTTS_DOMINATING:
        return UpdateRule.potts_dominating(float(rule["beta_p"]), int(rule["q"]), d)
    if kind == NOISY_MAJORITY:
        return UpdateRule.noisy_majority(float(rule["p"]))
    if kind == POTTS_GLAUBER:
        return UpdateRule.potts_glauber(float(rule["beta_p"]), int(rule["q"]))
    raise ValueError(f"unknown rule kind {kind!r}")


def fixture_graph(name: str) -> Graph:
    if name == "K4":
        return complete_graph(4)
    if name == "petersen":
        return petersen_graph()
    if name.startswith("cycle:"):
        return cycle_graph(int(name.split(":", 1)[1]))
    if name.startswith("K"):
        return complete_graph(int(name[1:]))
    raise ValueError(f"unknown graph fixture {name!r}")


@lru_cache(maxsize=8)
def _cached_graph(n: int, d: int, seed: int) -> Graph:
    return generate_random_regular(n, d, seed)


def cell_graph(spec: ExperimentSpec, n: int, graph_seed: int) -> Graph:
    if spec.graph.get("fixture"):
        return fixture_graph(spec.graph["fixture"])
    if spec.graph.get("file"):
        return read_graph(spec.graph["file"])
    return _cached_graph(n, int(spec.graph["d"]), graph_seed)


def jsonable(x):
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return jsonable(x.tolist())
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


# ---------------------------------------------------------------- experiments


def _extinction(spec, g, n, seed, horizon):
    rule = build_rule(spec.rule, g.d)
    x0 = parse_init(spec.init, n, seed)
    chain = TwoSpinChain(g, rule, x0, track_clusters=True)
    store = chain.store
    n_minus0 = store.n_minus
    scans = [0]

    def after_flip(ci, v, t):
        if spec.check == "paranoid":
            scans[0] += scan_store(store, chain.spins, g).total

    if store.legacy_alive == 0:
        ext, events = 0.0, 0
    else:
        res = run_chains([chain], EventStream(seed, n), horizon, until=lambda t: store.legacy_alive == 0,
                         after_flip=after_flip)
        ext, events = res.stopped_at, res.events
    scans[0] += scan_store(store, chain.spins, g).total
    obs = {"n_minus0": n_minus0, "extinction_time": ext, "extinct": ext is not None,
           "final_m": chain.magnetization, "events": events, "flips": chain.flips,
           "legacy_size_end": store.legacy_size}
    return obs, {"store_scan": scans[0]}


def _grand_coupling(spec, g, n, seed, horizon):
    rule = build_rule(spec.rule, g.d)
    names = spec.params.get("inits", ["all_minus", spec.init, "all_plus"])
    inits = [parse_init(s, n, seed) for s in names]
    res = run_grand_coupled(g, rule, inits, EventStream(seed, n), horizon)
    obs = {"inits": names, "final_m": [float(x.mean()) for x in res.final], "events": res.events,
           "flips": res.flips}
    return obs, {"order": res.order_violations}


def _rigid(spec, g, n, seed, horizon, standard):
    rule = build_rule(spec.rule, g.d)
    p = spec.params
    res = run_rigid_pair(g, rule, EventStream(seed, n), horizon, R=p.get("R"),
                         paranoid=spec.check == "paranoid", check_every=int(p.get("check_every", 1000)),
                         strict=False, standard=p.get("standard", standard))
    archive = res.store.archive
    obs = {"R": res.R, "treelike": res.treelike, "max_projection": res.max_projection,
           "tau_R": res.tau_R, "reached_R": res.tau_R is not None, "rejections": res.rejections,
           "events": res.events, "structure_checks": res.structure_checks,
           "domination_checks": res.domination_checks,
           "dead_projection_sizes": [c.projection_size for c in archive],
           "dead_peak_regions": [c.peak_region for c in archive],
           "rigid_m": float(res.rigid.mean()), "standard_m": float(res.standard.mean())}
    viol = {"domination": res.domination_violations, "structure_minus": res.structure_violations[0],
            "structure_plus": res.structure_violations[1], "store_scan": res.scan_violations}
    return obs, viol


def _drift(spec, g, n, seed, horizon):
    rule = build_rule(spec.rule, g.d)
    x0 = parse_init(spec.init, n, seed)
    target = spec.params.get("target")
    floor = spec.params.get("floor")
    chain = TwoSpinChain(g, rule, x0)
    trace = MagnetizationTrace(x0, cadence=spec.cadence)
    state = {"min": chain.magnetization}

    def after_flip(ci, v, t):
        m = chain.magnetization
        if m < state["min"]:
            state["min"] = m

    hit = {"t": 0.0 if target is not None and chain.magnetization >= target else None}

    def after_event(v, t):
        if target is not None and hit["t"] is None and chain.magnetization >= target:
            hit["t"] = t

    # without a floor to watch, stop as soon as the target is hit
    stop_early = target is not None and floor is None
    events = 0
    if not (stop_early and hit["t"] is not None):
        res = run_chains([chain], EventStream(seed, n), horizon, observers=[trace],
                         until=(lambda t: hit["t"] is not None) if stop_early else None,
                         after_flip=after_flip, after_event=after_event)
        events = res.events
    hit = hit["t"]
    obs = {"m0": float(np.mean(x0)), "hit_time": hit, "reached": hit is not None, "min_m": state["min"],
           "final_m": chain.magnetization, "events": events, "trace_t": trace.times, "trace_m": trace.values}
    if floor is not None:
        obs["stayed_above"] = state["min"] > floor
    return obs, {}


def _potts(spec, g, n, seed, horizon):
    r = spec.rule
    q = int(r["q"])
    y0 = parse_init(spec.init, n, seed, q=q)
    res = run_potts_triple(g, y0, float(r["beta_p"]), q, EventStream(seed, n), horizon, strict=False,
                           paranoid=spec.check == "paranoid", check_every=int(spec.params.get("check_every", 1000)))
    obs = {"extinction_time": res.extinction_time, "extinct": res.extinction_time is not None,
           "max_disagreement": res.max_disagreement, "events": res.events,
           "non_one0": int((y0 != 1).sum()), "m_y_init": magnetization_potts(res.y_init, q),
           "m_y_one": magnetization_potts(res.y_one, q), "m_x": float(res.x.mean())}
    viol = {"disagreement_outside_legacy": res.disagreement_violations,
            "support": res.support_violations,
            "post_extinction_disagreement": res.post_extinction_disagreements,
            "store_scan": res.scan_violations}
    return obs, viol


def _stationarity(spec, g, n, seed, horizon):
    from ..analysis.gibbs import exact_gibbs, tv_distance

    rule = build_rule(spec.rule, g.d)
    if rule.kind != ISING:
        raise ValueError("the stationarity oracle runs two-spin Ising only")
    events = spec.params.get("events")
    if events is not None:
        horizon = 1.01 * float(events) / n
    x0 = parse_init(spec.init, n, seed)
    occ = OccupationCounter(x0)
    res = run_grand_coupled(g, rule, [x0], EventStream(seed, n), horizon, observers=[occ]) if horizon > 0 else None
    emp = occ.result()
    exact = exact_gibbs(g, rule)
    tv = tv_distance(emp, exact) if emp.sum() > 0 else 1.0
    return {"tv": tv, "events": res.events if res else 0}, {}


def _lemmas(spec, g, n, seed, horizon):
    from .suites import lemma_suite

    reports = lemma_suite(quick=spec.params.get("quick", False))
    return ({"reports": [r.to_dict() for r in reports]},
            {"lemma_failures": sum(1 for r in reports if not r.passed)})


EXPERIMENT_FUNCS: dict[str, Callable] = {
    "extinction_scaling": _extinction,
    "grand_coupling": _grand_coupling,
    "rigid_tails": lambda *a: _rigid(*a, standard=True),
    "tau_R_survival": lambda *a: _rigid(*a, standard=False),
    "magnetization_drift": _drift,
    "potts_coupling": _potts,
    "stationarity_oracle": _stationarity,
    "lemma_suite": _lemmas,
}


# ---------------------------------------------------------------- cells


def cells(spec: ExperimentSpec) -> list[tuple[int, int, int]]:
    if spec.name == "lemma_suite":
        return [(0, 0, 0)]
    if spec.graph.get("fixture"):
        n = fixture_graph(spec.graph["fixture"]).n
        return [(n, 0, r) for r in range(spec.replicas)]
    return [(n, gs, r) for n in spec.ns for gs in spec.graph_seeds for r in range(spec.replicas)]


def run_cell(spec: ExperimentSpec, cell: tuple[int, int, int]) -> dict:
    n, graph_seed, replica = cell
    stream_seed = derive_seed(spec.seed, n, graph_seed, replica)
    record = {
        "experiment": spec.name, "spec_seed": spec.seed, "n": n, "d": spec.graph.get("d"),
        "graph_seed": graph_seed, "replica": replica, "stream_seed": stream_seed,
        "generator": GENERATOR_NAME, "rule": spec.rule, "init": spec.init, "init_note": INIT_NOTE,
        "check": spec.check, "params": spec.params, "version": __version__,
    }
    start = time.perf_counter()
    try:
        g = None if spec.name == "lemma_suite" else cell_graph(spec, n, graph_seed)
        if g is not None:
            record["d"] = g.d
            record["n"] = n = g.n
        horizon = spec.horizon_for(n) if n else 0.0
        record["horizon"] = horizon
        obs, viol = EXPERIMENT_FUNCS[spec.name](spec, g, n, stream_seed, horizon)
        record["observables"] = jsonable(obs)
        record["violations"] = jsonable(viol)
        record["error"] = None
    except InvariantViolation as exc:
        record["observables"] = {}
        record["violations"] = {"aborted": 1}
        record["error"] = {"type": type(exc).__name__, "message": str(exc), "diagnostic": jsonable(exc.diagnostic)}
    except Exception as exc:  # recorded per cell, the sweep continues
        record["observables"] = {}
        record["violations"] = {}
        record["error"] = {"type": type(exc).__name__, "message": str(exc),
                           "traceback": traceback.format_exc(limit=5)}
    record["violation_total"] = int(sum(v for v in record["violations"].values() if isinstance(v, (int, float))))
    record["wall_clock"] = time.perf_counter() - start
    return record


def _run_cell_args(args):
    spec_dict, cell = args
    return run_cell(ExperimentSpec.from_dict(spec_dict), cell)


def run_experiment(spec: ExperimentSpec, workers: int | None = None, write: bool = True) -> list[dict]:
    """Run every cell and append one JSON line per cell to ``spec.records_path``."""
    todo = cells(spec)
    workers = workers or worker_count()
    if workers <= 1 or len(todo) <= 1:
        results = (run_cell(spec, c) for c in todo)
        pool = None
    else:
        pool = ProcessPoolExecutor(max_workers=workers)
        results = pool.map(_run_cell_args, [(spec.to_dict(), c) for c in todo])
    records = []
    fh = None
    try:
        if write:
            spec.records_path.parent.mkdir(parents=True, exist_ok=True)
            fh = open(spec.records_path, "a")
        for rec in results:
            records.append(rec)
            if fh is not None:
                fh.write(json.dumps(rec, sort_keys=True) + "\n")
                fh.flush()
    finally:
        if fh is not None:
            fh.close()
        if pool is not None:
            pool.shutdown()
    return records


def observable_bytes(record: dict) -> bytes:
    """Canonical serialisation of what must repeat exactly across reruns."""
    return json.dumps(record.get("observables", {}), sort_keys=True).encode()


def load_records(path) -> list[dict]:
    path = Path(path)
    if path.is_dir():
        path = path / "records.jsonl"
    if not path.exists():
        return []
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]

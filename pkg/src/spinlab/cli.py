"""Command-line entry point: ``spinlab <command> ...``."""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .coupling import GENERATOR_NAME, EventStream
from .dynamics import POTTS_GLAUBER, TwoSpinChain, UpdateRule, magnetization_potts, parse_init, run_chains, run_potts_single
from .errors import SpinlabError
from .graph import (
    check_majority_expansion,
    estimate_lambda2,
    generate_random_regular,
    is_one_locally_treelike,
    locality_radius,
    read_graph,
    write_graph,
)
from .harness.runner import jsonable, run_experiment
from .harness.spec import ExperimentSpec
from .harness.summary import summarize
from .observers import ClusterTrace, MagnetizationTrace

AUDIT_CHECKS = ("treelike", "lambda2", "expansion")
RULES = ("ising", "potts_dominating", "noisy_majority", "potts_glauber")


def _emit(obj) -> None:
    print(json.dumps(jsonable(obj), indent=2, sort_keys=True))


# ------------------------------------------------------------------ graph


def cmd_graph_gen(args) -> int:
    g = generate_random_regular(args.n, args.d, args.seed)
    write_graph(g, args.out)
    print(f"wrote {args.out}: n={g.n} d={g.d} seed={args.seed}")
    return 0


def cmd_graph_audit(args) -> int:
    g = read_graph(args.input)
    checks = [c.strip() for c in args.checks.split(",") if c.strip()]
    unknown = set(checks) - set(AUDIT_CHECKS)
    if unknown:
        raise SystemExit(f"unknown checks: {sorted(unknown)}")
    R = args.radius if args.radius is not None else locality_radius(g.n, g.d)
    out = {"n": g.n, "d": g.d, "seed": g.seed}
    ok = True
    if "treelike" in checks:
        rep = is_one_locally_treelike(g, R)
        out["treelike"] = {"R": R, "ok": rep.ok, "bad_vertices": rep.violations[:20]}
        ok &= rep.ok
    if "lambda2" in checks:
        est = estimate_lambda2(g)
        bound = 2 * np.sqrt(g.d - 1)
        out["lambda2"] = {"value": est.value, "iterations": est.iterations, "converged": est.converged,
                          "ramanujan_bound": bound}
    if "expansion" in checks:
        rng = np.random.default_rng(args.seed)
        size = max(1, int(args.gamma0 * g.n))
        failures = 0
        for _ in range(args.samples):
            S = rng.choice(g.n, size=int(rng.integers(1, size + 1)), replace=False).tolist()
            failures += not check_majority_expansion(g, S, args.gamma0).passed
        out["expansion"] = {"samples": args.samples, "max_set": size, "failures": failures}
        ok &= failures == 0
    out["ok"] = bool(ok)
    _emit(out)
    return 0 if ok else 1


# ------------------------------------------------------------------ run


def _rule_from_args(args, d: int) -> UpdateRule:
    if args.rule == "ising":
        return UpdateRule.ising(args.beta)
    if args.rule == "potts_dominating":
        return UpdateRule.potts_dominating(args.beta_p, args.q, d)
    if args.rule == "noisy_majority":
        return UpdateRule.noisy_majority(args.p)
    return UpdateRule.potts_glauber(args.beta_p, args.q)


def cmd_run(args) -> int:
    g = read_graph(args.graph)
    rule = _rule_from_args(args, g.d)
    observers = {o.strip() for o in args.observers.split(",") if o.strip()}
    unknown = observers - {"mag", "clusters"}
    if unknown:
        raise SystemExit(f"unknown observers: {sorted(unknown)}")
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    stream = EventStream(args.seed, g.n)
    start = time.perf_counter()
    record = {"graph": str(args.graph), "n": g.n, "d": g.d, "rule": rule.params(), "init": args.init,
              "horizon": args.horizon, "seed": args.seed, "generator": GENERATOR_NAME, "version": __version__}
    files = []
    if rule.kind == POTTS_GLAUBER:
        if "clusters" in observers:
            raise SystemExit("cluster observers need a two-spin rule")
        y0 = parse_init(args.init, g.n, args.seed, q=rule.q)
        ch, events, _ = run_potts_single(g, rule, y0, stream, args.horizon)
        record["observables"] = {"events": events, "final_m": magnetization_potts(ch.states, rule.q)}
    else:
        x0 = parse_init(args.init, g.n, args.seed)
        chain = TwoSpinChain(g, rule, x0, track_clusters="clusters" in observers)
        obs = []
        mag = clus = None
        if "mag" in observers:
            mag = MagnetizationTrace(x0, cadence=args.cadence)
            obs.append(mag)
        if "clusters" in observers:
            clus = ClusterTrace(chain.store, cadence=args.cadence)
            obs.append(clus)
        res = run_chains([chain], stream, args.horizon, obs)
        record["observables"] = {"events": res.events, "flips": res.flips[0], "final_m": chain.magnetization}
        if mag is not None:
            p = out.with_name(out.stem + "_mag.csv")
            r = mag.result()
            with open(p, "w") as fh:
                fh.write("t,m\n")
                fh.writelines(f"{t!r},{m!r}\n" for t, m in zip(r["t"], r["m"]))
            files.append(str(p))
        if clus is not None:
            p = out.with_name(out.stem + "_clusters.csv")
            clus.write_csv(p)
            record["observables"]["clusters_end"] = chain.store.summary()
            files.append(str(p))
    record["files"] = files
    record["wall_clock"] = time.perf_counter() - start
    with open(out, "a") as fh:
        fh.write(json.dumps(jsonable(record), sort_keys=True) + "\n")
    print(f"appended record to {out}" + "".join(f"\nwrote {f}" for f in files))
    return 0


# ------------------------------------------------------------------ experiment


def cmd_experiment_run(args) -> int:
    spec = ExperimentSpec.from_json(args.spec)
    records = run_experiment(spec, workers=args.workers)
    bad = sum(1 for r in records if r.get("violation_total", 0) or r.get("error"))
    print(f"{len(records)} cells written to {spec.records_path}; {bad} with violations or errors")
    return 1 if bad else 0


def cmd_experiment_summarize(args) -> int:
    s = summarize(args.input, args.out, figures=not args.no_figures)
    out = Path(args.out) if args.out else (Path(args.input) if Path(args.input).is_dir() else Path(args.input).parent)
    print((out / "report.txt").read_text(), end="")
    return 1 if s.failed else 0


# ------------------------------------------------------------------ verify


def cmd_verify(args) -> int:
    from .harness.suites import invariants_suite, lemma_suite

    reports = []
    if args.suite in ("lemmas", "all"):
        reports += lemma_suite(quick=args.quick)
    if args.suite in ("invariants", "all"):
        reports += invariants_suite(quick=args.quick, seed=args.seed)
    failed = 0
    for r in reports:
        failed += not r.passed
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.check:<28} margin={r.worst_margin:.6g}  "
              f"{json.dumps(jsonable(r.params), sort_keys=True)}")
    if args.json:
        Path(args.json).write_text(json.dumps([jsonable(r.to_dict()) for r in reports], indent=2))
    print(f"{len(reports) - failed}/{len(reports)} checks passed")
    return 1 if failed else 0


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spinlab", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    graph = sub.add_parser("graph", help="generate or audit random regular graphs")
    gsub = graph.add_subparsers(dest="graph_command", required=True)
    gen = gsub.add_parser("gen", help="sample a uniform simple d-regular graph")
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--d", type=int, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=cmd_graph_gen)
    audit = gsub.add_parser("audit", help="structural checks on a graph file")
    audit.add_argument("--in", dest="input", required=True)
    audit.add_argument("--radius", type=int, default=None, help="defaults to the locality radius of n, d")
    audit.add_argument("--checks", default=",".join(AUDIT_CHECKS))
    audit.add_argument("--gamma0", type=float, default=1e-2)
    audit.add_argument("--samples", type=int, default=200, help="random sets for the expansion check")
    audit.add_argument("--seed", type=int, default=0)
    audit.set_defaults(func=cmd_graph_audit)

    run = sub.add_parser("run", help="simulate one trajectory")
    run.add_argument("--graph", required=True)
    run.add_argument("--rule", choices=RULES, default="ising")
    run.add_argument("--beta", type=float, default=3.0)
    run.add_argument("--beta-p", dest="beta_p", type=float, default=None)
    run.add_argument("--q", type=int, default=3)
    run.add_argument("--p", type=float, default=0.0)
    run.add_argument("--init", default="all_plus")
    run.add_argument("--horizon", type=float, required=True)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--observers", default="mag")
    run.add_argument("--cadence", type=float, default=0.1)
    run.add_argument("--out", required=True, help="JSON-lines records file; traces go next to it")
    run.set_defaults(func=cmd_run)

    exp = sub.add_parser("experiment", help="run or summarize a configured sweep")
    esub = exp.add_subparsers(dest="experiment_command", required=True)
    erun = esub.add_parser("run")
    erun.add_argument("--spec", required=True)
    erun.add_argument("--workers", type=int, default=None)
    erun.set_defaults(func=cmd_experiment_run)
    esum = esub.add_parser("summarize")
    esum.add_argument("--in", dest="input", required=True)
    esum.add_argument("--out", default=None, help="output directory, default next to the records")
    esum.add_argument("--no-figures", action="store_true")
    esum.set_defaults(func=cmd_experiment_summarize)

    ver = sub.add_parser("verify", help="run the lemma or invariant suites")
    ver.add_argument("--suite", choices=("lemmas", "invariants", "all"), default="all")
    ver.add_argument("--quick", action="store_true")
    ver.add_argument("--seed", type=int, default=0)
    ver.add_argument("--json", default=None, help="also write the reports as JSON")
    ver.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "rule", None) in ("potts_dominating", "potts_glauber") and args.beta_p is None:
        raise SystemExit("--beta-p is required for Potts rules")
    try:
        return args.func(args)
    except SpinlabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

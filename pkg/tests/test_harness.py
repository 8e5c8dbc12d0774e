import csv
import json
import math

import pytest

from spinlab.errors import DegenerateInput
from spinlab.harness import ExperimentSpec, load_records, run_cell, run_experiment, summarize
from spinlab.harness.runner import cells, observable_bytes
from spinlab.harness.summary import SUMMARY_COLUMNS


def small(name="extinction_scaling", tmp=None, **kw):
    base = {"name": name, "seed": 2, "graph": {"n": [100, 200], "d": 7, "seeds": [0, 1]},
            "rule": {"kind": "ising", "beta": 3.0}, "init": "biased:0.9", "horizon": "3log",
            "output": str(tmp / name) if tmp else "runs/x"}
    base.update(kw)
    return ExperimentSpec.from_dict(base)


def test_spec_validation():
    with pytest.raises(ValueError):
        ExperimentSpec(name="nope")
    with pytest.raises(ValueError):
        ExperimentSpec(name="rigid_tails", replicas=0)
    with pytest.raises(ValueError):
        ExperimentSpec(name="rigid_tails", graph={"n": [101], "d": 7, "seeds": [0]})
    with pytest.raises(ValueError):
        ExperimentSpec(name="rigid_tails", horizon=-1.0)
    with pytest.raises(ValueError):
        ExperimentSpec(name="rigid_tails", horizon="ten")
    with pytest.raises(ValueError):
        ExperimentSpec.from_dict({"name": "rigid_tails", "colour": "red"})
    s = ExperimentSpec(name="extinction_scaling", horizon="10log")
    assert s.horizon_for(1000) == pytest.approx(10 * math.log(1000))


def test_cells_grid(tmp_path):
    s = small(tmp=tmp_path, replicas=2)
    assert len(cells(s)) == 2 * 2 * 2
    assert cells(ExperimentSpec(name="lemma_suite")) == [(0, 0, 0)]


def test_rerun_is_byte_identical(tmp_path):
    s = small(tmp=tmp_path)
    a = run_experiment(s, workers=1, write=False)
    b = run_experiment(s, workers=1, write=False)
    assert [observable_bytes(r) for r in a] == [observable_bytes(r) for r in b]
    assert all(r["error"] is None for r in a)


def test_serial_and_parallel_agree(tmp_path):
    s = small("grand_coupling", tmp=tmp_path, horizon=2.0, replicas=2)
    serial = run_experiment(s, workers=1, write=False)
    parallel = run_experiment(s, workers=2, write=False)
    strip = lambda rs: [{k: v for k, v in r.items() if k != "wall_clock"} for r in rs]
    assert strip(serial) == strip(parallel)


def test_horizon_zero_records_initial_state(tmp_path):
    s = small(tmp=tmp_path, horizon=0.0)
    for r in run_experiment(s, workers=1, write=False):
        o = r["observables"]
        assert o["events"] == 0 and o["flips"] == 0
        assert o["final_m"] == pytest.approx(0.9, abs=0.02)


def test_errors_are_captured_per_cell(tmp_path):
    s = small("potts_coupling", tmp=tmp_path, rule={"kind": "potts_glauber", "q": 3}, horizon=1.0)
    recs = run_experiment(s, workers=1)
    assert len(recs) == 4
    assert all(r["error"]["type"] == "KeyError" for r in recs)
    assert len(load_records(tmp_path / "potts_coupling")) == 4


def test_records_append(tmp_path):
    s = small(tmp=tmp_path, horizon=0.5)
    run_experiment(s, workers=1)
    run_experiment(s, workers=1)
    assert len(load_records(s.records_path)) == 8


@pytest.mark.parametrize("name,extra", [
    ("rigid_tails", {"rule": {"kind": "ising", "beta": 0.2}, "params": {"R": 1}, "check": "paranoid"}),
    ("tau_R_survival", {}),
    ("magnetization_drift", {"params": {"target": 0.95, "floor": 0.5}}),
    ("potts_coupling", {"rule": {"kind": "potts_glauber", "beta_p": 2 + math.log(2), "q": 3}}),
    ("grand_coupling", {"rule": {"kind": "noisy_majority", "p": 0.05}}),
])
def test_experiment_kinds_run_clean(tmp_path, name, extra):
    s = small(name, tmp=tmp_path, horizon=2.0, **extra)
    for r in run_experiment(s, workers=1, write=False):
        assert r["error"] is None and r["violation_total"] == 0, r


def test_stationarity_cell():
    s = ExperimentSpec.from_dict({"name": "stationarity_oracle", "graph": {"fixture": "K4"},
                                  "rule": {"kind": "ising", "beta": 0.5}, "horizon": 0, "params": {"events": 200_000}})
    r = run_cell(s, cells(s)[0])
    assert r["n"] == 4 and r["observables"]["events"] >= 200_000
    assert r["observables"]["tv"] < 0.02


def _fake(exp, n, values, viol=0, error=None, horizon=10.0):
    return [{"experiment": exp, "n": n, "rule": {"kind": "ising", "beta": 3.0}, "horizon": horizon,
             "observables": {"x": v, "label": "s", "flag": v is not None and v > 2}, "violation_total": viol, "error": error}
            for v in values]


def _write(path, recs):
    path.mkdir(parents=True, exist_ok=True)
    with open(path / "records.jsonl", "w") as fh:
        for r in recs:
            fh.write(json.dumps(r) + "\n")


def test_summary_single_record(tmp_path):
    _write(tmp_path, _fake("rigid_tails", 10, [4.5]))
    s = summarize(tmp_path, figures=False)
    row = next(r for r in s.rows if r["observable"] == "x")
    assert row["median"] == row["q10"] == row["q90"] == 4.5 and not s.failed
    with open(tmp_path / "summary.csv") as fh:
        assert tuple(next(csv.reader(fh))) == SUMMARY_COLUMNS


def test_summary_known_medians(tmp_path):
    _write(tmp_path, _fake("rigid_tails", 10, [1, 2, 3, 4, 5]) + _fake("rigid_tails", 20, [10, 30, None]))
    s = summarize(tmp_path, figures=False)
    rows = {(r["n"], r["observable"]): r for r in s.rows}
    assert rows[(10, "x")]["median"] == 3 and rows[(10, "x")]["q10"] == pytest.approx(1.4)
    assert rows[(20, "x")]["median"] == 20 and rows[(20, "x")]["missing"] == 1
    assert rows[(10, "flag")]["median"] == 1.0
    assert (10, "label") not in rows


def test_summary_flags_violations(tmp_path):
    _write(tmp_path, _fake("rigid_tails", 10, [1, 2], viol=1))
    s = summarize(tmp_path, figures=False)
    assert s.failed and s.violation_total == 2
    assert "status: FAIL" in (tmp_path / "report.txt").read_text()


def test_summary_errors_fail(tmp_path):
    _write(tmp_path, _fake("rigid_tails", 10, [1], error={"type": "X"}))
    assert summarize(tmp_path, figures=False).failed


def test_summary_empty(tmp_path):
    with pytest.raises(DegenerateInput):
        summarize(tmp_path)


def test_summary_extinction_fit_and_figures(tmp_path):
    recs = []
    for n in (64, 128, 256, 512):
        recs += [{**r, "observables": {"extinction_time": 2 * math.log(n) + off}}
                 for r, off in zip(_fake("extinction_scaling", n, [0, 0, 0]), (-0.1, 0.0, 0.1))]
    _write(tmp_path, recs)
    s = summarize(tmp_path, tmp_path / "out")
    fit = s.fits["extinction_scaling"]
    assert fit["slope"] == pytest.approx(2.0) and fit["residual"] < 1e-9
    assert (tmp_path / "out" / "extinction_scaling.png").stat().st_size > 0

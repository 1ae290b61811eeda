import math

import numpy as np
import pytest

from mfrac import EstimatorConfig, HolderFunction, InvalidArgumentError
from mfrac.bench import (BenchSpec, RmseReport, _aggregate, method_from_dict, rmse, run_benchmark,
                         scenario_seeds, spec_from_dict, trace_tables)
from mfrac.estimate import EstimateSeries


def series(h_hat, t):
    return EstimateSeries(t, np.asarray(h_hat, float), np.ones(t.size, int), EstimatorConfig.gqv())


def test_rmse_examples(sinusoid):
    t = np.arange(1, 100) / 100
    truth = sinusoid(t)
    assert rmse(series(truth, t), sinusoid) == 0.0
    assert rmse(series(truth + 0.1, t), sinusoid) == pytest.approx(0.1, abs=1e-14)
    alt = truth + 0.1 * (-1.0) ** np.arange(t.size)
    assert rmse(series(alt, t), sinusoid) == pytest.approx(0.1, abs=1e-14)


def test_rmse_skips_missing(sinusoid):
    t = np.arange(1, 5) / 5
    h = sinusoid(t) + 0.2
    h[1] = np.nan
    assert rmse(series(h, t), sinusoid) == pytest.approx(0.2, abs=1e-14)
    with pytest.raises(InvalidArgumentError):
        rmse(series(np.full(4, np.nan), t), sinusoid)


@pytest.mark.parametrize("kw", [dict(scenarios=0), dict(sizes=[16]), dict(sizes=[]),
                                dict(forms=["cube"]),
                                dict(methods=[EstimatorConfig.gqv(), EstimatorConfig.gqv(3)])])
def test_spec_validation(kw):
    with pytest.raises(InvalidArgumentError):
        BenchSpec(**kw)


def test_spec_defaults():
    spec = BenchSpec()
    assert spec.sizes == list(range(100, 1001, 100)) and spec.scenarios == 100
    assert [m.label for m in spec.methods] == ["GQV", "LGQV(2)", "LGQV(3)", "LGQV(4)", "LGQV(5)", "OSC"]
    assert spec.holder == HolderFunction.sinusoid()


def test_spec_roundtrip():
    spec = BenchSpec(sizes=[64], scenarios=3, master_seed=5)
    again = spec_from_dict(spec.to_dict())
    assert again.to_dict() == spec.to_dict() and again.digest() == spec.digest()


def test_method_from_dict():
    assert method_from_dict({"method": "lgqv", "q": 3}).label == "LGQV(3)"
    assert method_from_dict({"method": "osc"}).osc_beta == 0.3
    with pytest.raises(InvalidArgumentError):
        method_from_dict({"method": "gqv", "radius": 2})


def test_scenario_seeds_distinct():
    seeds = {scenario_seeds(1, f, n, s) for f in ("identity", "exp") for n in (100, 200) for s in range(50)}
    flat = [x for pair in seeds for x in pair]
    assert len(set(flat)) == len(flat) == 400


def test_aggregate_stats():
    st = _aggregate([0.1, 0.3, float("nan"), 0.2])
    assert st["avg"] == pytest.approx(0.2) and st["std"] == pytest.approx(0.1)
    assert st["min"] == 0.1 and st["max"] == 0.3 and st["failures"] == 1
    assert st["unreliable"] is True
    assert _aggregate([0.1] * 10)["unreliable"] is False


@pytest.fixture(scope="module")
def small_spec():
    return BenchSpec(forms=["identity", "exp", "w_times_x"], sizes=[64, 128], scenarios=4,
                     master_seed=99)


def test_report_shape_and_invariants(small_spec):
    rep = run_benchmark(small_spec, threads=1)
    assert len(rep.rows) == 3 * 2 * 6
    for row in rep.rows:
        assert row["min"] <= row["avg"] <= row["max"] and row["std"] >= 0
        assert row["scenarios"] == 4
    assert rep.provenance["config_digest"] == small_spec.digest()
    assert rep.cell("exp", "LGQV(2)", 128)["n"] == 128
    with pytest.raises(KeyError):
        rep.cell("exp", "LGQV(2)", 256)


def test_report_deterministic_and_thread_free(small_spec):
    a = run_benchmark(small_spec, threads=1)
    b = run_benchmark(small_spec, threads=1)
    c = run_benchmark(small_spec, threads=4)
    assert a.to_csv() == b.to_csv() == c.to_csv()
    assert a.to_json() == c.to_json()


def test_cells_independent_of_other_cells(small_spec):
    full = run_benchmark(small_spec, threads=1)
    only = run_benchmark(BenchSpec(forms=["exp"], sizes=[128], scenarios=4, master_seed=99), threads=1)
    for row in only.rows:
        assert row == full.cell("exp", row["method"], 128)


def test_failures_counted():
    # OSC cannot run below 39 grid steps, so every scenario fails there
    spec = BenchSpec(forms=["identity"], sizes=[32], scenarios=3, master_seed=1,
                     methods=[EstimatorConfig.gqv(), EstimatorConfig.oscillation()])
    rep = run_benchmark(spec, threads=1)
    osc = rep.cell("identity", "OSC", 32)
    assert osc["failures"] == 3 and osc["unreliable"] and math.isnan(osc["avg"])
    assert rep.cell("identity", "GQV", 32)["failures"] == 0
    assert rep.provenance["excluded"] == 3
    assert ",OSC,32,,,,,3,3,true" in rep.to_csv()


def test_trace_tables(small_spec):
    tables = trace_tables(small_spec, n=64)
    text = tables[("identity", "LGQV(2)")]
    lines = text.splitlines()
    assert lines[0] == "t,h_true,h_hat" and len(lines) == 64


def test_lgqv_rmse_falls_with_n():
    spec = BenchSpec(forms=["identity"], sizes=[200, 1000], scenarios=100, master_seed=20200101,
                     methods=[EstimatorConfig.lgqv(2)])
    rep = run_benchmark(spec, threads=4)
    assert rep.cell("identity", "LGQV(2)", 1000)["avg"] < rep.cell("identity", "LGQV(2)", 200)["avg"]


def test_threads_env(monkeypatch):
    from mfrac.bench import resolve_threads
    monkeypatch.setenv("MFRAC_THREADS", "3")
    assert resolve_threads() == 3
    assert resolve_threads(2) == 2
    with pytest.raises(InvalidArgumentError):
        resolve_threads(0)

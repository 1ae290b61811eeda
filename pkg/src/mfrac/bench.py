"""Monte-Carlo RMSE benchmark of the Hölder exponent estimators."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError, MfracError
from .estimate import EstimateSeries, EstimatorConfig, estimate
from .paths import HolderFunction
from .seeding import derive_seed
from .simulate import PHI_TAGS, PhiForm, apply_phi, simulate_mbm

log = logging.getLogger(__name__)

UNRELIABLE_FAILURE_RATE = 0.10


def default_methods():
    return [EstimatorConfig.gqv(), *(EstimatorConfig.lgqv(q) for q in (2, 3, 4, 5)),
            EstimatorConfig.oscillation()]


@dataclass
class BenchSpec:
    holder: HolderFunction = field(default_factory=HolderFunction.sinusoid)
    forms: list = field(default_factory=lambda: list(PHI_TAGS))
    sizes: list = field(default_factory=lambda: list(range(100, 1001, 100)))
    scenarios: int = 100
    methods: list = field(default_factory=default_methods)
    master_seed: int = 0

    def __post_init__(self):
        if int(self.scenarios) < 1:
            raise InvalidArgumentError("scenarios must be >= 1")
        if not self.sizes or any(int(n) < 32 for n in self.sizes):
            raise InvalidArgumentError("every size must be >= 32")
        if not self.forms or not self.methods:
            raise InvalidArgumentError("need at least one form and one method")
        for tag in self.forms:
            if tag not in PHI_TAGS:
                raise InvalidArgumentError(f"unknown transform {tag!r}")
        labels = [m.label for m in self.methods]
        if len(set(labels)) != len(labels):
            raise InvalidArgumentError(f"duplicate method labels {labels}")
        self.scenarios = int(self.scenarios)
        self.sizes = [int(n) for n in self.sizes]

    def to_dict(self):
        return {"holder": self.holder.to_dict(), "forms": list(self.forms),
                "sizes": list(self.sizes), "scenarios": self.scenarios,
                "methods": [m.to_dict() for m in self.methods],
                "master_seed": int(self.master_seed)}

    def digest(self):
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


def rmse(est: EstimateSeries, truth: HolderFunction) -> float:
    """Root-mean-squared error of ``est`` against ``truth`` over non-missing points."""
    ok = ~est.missing
    if not ok.any():
        raise InvalidArgumentError("estimate has no non-missing points")
    err = est.h_hat[ok] - truth(np.asarray(est.t_grid)[ok])
    return float(np.sqrt(np.mean(err * err)))


def scenario_seeds(master, form, n, s):
    return derive_seed(master, "mbm", form, n, s), derive_seed(master, "aux", form, n, s)


def _run_scenario(spec: BenchSpec, form, n, s, keep_trace=False):
    seed, aux = scenario_seeds(spec.master_seed, form, n, s)
    x = simulate_mbm(spec.holder, n, seed)
    z = apply_phi(x, PhiForm(form, aux if form in ("w_times_x", "w2_plus_x2") else None))
    out, traces = [], {}
    for cfg in spec.methods:
        try:
            est = estimate(z, cfg)
            out.append(rmse(est, spec.holder))
            if keep_trace:
                traces[cfg.label] = est
        except MfracError as exc:
            log.debug("scenario (%s, %d, %d) %s failed: %s", form, n, s, cfg.label, exc)
            out.append(float("nan"))
    return out, traces


def _run_cell(args):
    spec_doc, form, n = args
    spec = spec_from_dict(spec_doc)
    return [_run_scenario(spec, form, n, s)[0] for s in range(spec.scenarios)]


@dataclass
class RmseReport:
    rows: list
    provenance: dict

    def cell(self, form, method, n):
        for row in self.rows:
            if row["form"] == form and row["method"] == method and row["n"] == n:
                return row
        raise KeyError((form, method, n))

    COLUMNS = ("form", "method", "n", "avg", "std", "max", "min", "scenarios", "failures", "unreliable")

    def to_csv(self, target=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.COLUMNS)
        for row in self.rows:
            w.writerow([_fmt(row[c]) for c in self.COLUMNS])
        text = buf.getvalue()
        if target is not None:
            with open(target, "w") as fh:
                fh.write(text)
        return text

    def to_json(self, target=None) -> str:
        rows = [{k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in r.items()}
                for r in self.rows]
        text = json.dumps({"rows": rows, "provenance": self.provenance}, indent=2, sort_keys=True)
        if target is not None:
            with open(target, "w") as fh:
                fh.write(text + "\n")
        return text


def _fmt(v):
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return "" if math.isnan(v) else repr(v)
    return v


def _aggregate(values):
    vals = np.asarray([v for v in values if not math.isnan(v)])
    failures = len(values) - vals.size
    if vals.size == 0:
        stats = dict(avg=float("nan"), std=float("nan"), max=float("nan"), min=float("nan"))
    else:
        stats = dict(avg=float(np.mean(vals)),
                     std=float(np.std(vals, ddof=1)) if vals.size > 1 else 0.0,
                     max=float(np.max(vals)), min=float(np.min(vals)))
    stats.update(scenarios=len(values), failures=failures,
                 unreliable=failures > UNRELIABLE_FAILURE_RATE * len(values))
    return stats


def resolve_threads(threads=None):
    if threads is None:
        env = os.environ.get("MFRAC_THREADS")
        threads = env if env else (os.cpu_count() or 1)
    try:
        threads = int(threads)
    except (TypeError, ValueError):
        raise InvalidArgumentError(f"threads must be an integer, got {threads!r}") from None
    if threads < 1:
        raise InvalidArgumentError("threads must be >= 1")
    return threads


def run_benchmark(spec: BenchSpec, threads=None) -> RmseReport:
    """Simulate, transform, estimate and aggregate every (form, method, n) cell.

    Each scenario draws from seeds keyed on (master_seed, form, n, index), so
    the report does not depend on ``threads`` or on which other cells run.
    """
    threads = resolve_threads(threads)
    cells = [(form, n) for form in spec.forms for n in spec.sizes]
    doc = spec.to_dict()
    jobs = [(doc, form, n) for form, n in cells]
    if threads == 1 or len(jobs) == 1:
        results = [_run_cell(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(threads, len(jobs))) as pool:
            results = list(pool.map(_run_cell, jobs))
    rows = []
    for (form, n), per_scenario in zip(cells, results):
        for k, cfg in enumerate(spec.methods):
            stats = _aggregate([r[k] for r in per_scenario])
            rows.append({"form": form, "method": cfg.label, "n": n, **stats})
    provenance = {"master_seed": int(spec.master_seed), "config_digest": spec.digest(),
                  "spec": doc, "excluded": sum(r["failures"] for r in rows)}
    return RmseReport(rows, provenance)


def trace_tables(spec: BenchSpec, n=None, scenario=0):
    """Per-(form, method) CSV text of H-hat against the true H for one scenario."""
    n = n or max(spec.sizes)
    out = {}
    for form in spec.forms:
        _, traces = _run_scenario(spec, form, n, scenario, keep_trace=True)
        for label, est in traces.items():
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(["t", "h_true", "h_hat"])
            for t, hh in zip(est.t_grid, est.h_hat):
                w.writerow([repr(float(t)), repr(float(spec.holder(t))),
                            "" if math.isnan(hh) else repr(float(hh))])
            out[(form, label)] = buf.getvalue()
    return out


# ----------------------------------------------------------------------
# config documents

def method_from_dict(doc) -> EstimatorConfig:
    doc = dict(doc)
    method = doc.pop("method")
    clip = doc.pop("clip_range", None)
    kw = {} if clip is None else {"clip_range": tuple(clip)}
    if method == "lgqv":
        return EstimatorConfig.lgqv(doc.pop("q", 2), **kw, **_no_extra(doc))
    if method == "gqv":
        return EstimatorConfig.gqv(doc.pop("q", 2), doc.pop("gamma", 0.7), **kw, **_no_extra(doc))
    if method in ("oscillation", "osc"):
        return EstimatorConfig.oscillation(doc.pop("alpha", 0.1), doc.pop("beta", 0.3),
                                           **kw, **_no_extra(doc))
    raise InvalidArgumentError(f"unknown method {method!r}")


def _no_extra(doc):
    if doc:
        raise InvalidArgumentError(f"unexpected method keys {sorted(doc)}")
    return {}


def spec_from_dict(doc) -> BenchSpec:
    """Build a BenchSpec from a config document or from ``BenchSpec.to_dict`` output."""
    holder = doc.get("holder", "sin:0.5:0.3:1")
    holder = HolderFunction.parse(holder) if isinstance(holder, str) else HolderFunction.from_dict(holder)
    methods = doc.get("methods")
    if methods is None:
        methods = default_methods()
    else:
        methods = [EstimatorConfig.from_dict(m) if "osc_alpha" in m else method_from_dict(m)
                   for m in methods]
    kw = {k: doc[k] for k in ("forms", "sizes", "scenarios", "master_seed") if k in doc}
    return BenchSpec(holder=holder, methods=methods, **kw)

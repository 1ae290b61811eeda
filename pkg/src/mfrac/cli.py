"""Command-line entry point: ``mfrac {simulate,estimate,bench,theory,analyze,fixture}``.

Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import datetime as dt
import hashlib
import json
import logging
import sys
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .bench import method_from_dict, resolve_threads, run_benchmark, spec_from_dict, trace_tables
from .errors import InvalidArgumentError, MfracError
from .estimate import EstimatorConfig, estimate
from .findata import PeriodSplit, analyze, synthetic_fixture
from .paths import HolderFunction, SamplePath
from .simulate import PHI_TAGS, PhiForm, apply_phi, simulate_fbm, simulate_mbm
from .theory import c_tilde_table

log = logging.getLogger("mfrac")

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# -- argument types ----------------------------------------------------

def _open_unit(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 < v < 1.0:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1), got {v}")
    return v


def _positive_int(minimum):
    def parse(text):
        try:
            v = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
        if v < minimum:
            raise argparse.ArgumentTypeError(f"must be >= {minimum}, got {v}")
        return v
    return parse


def _holder(text):
    try:
        return HolderFunction.parse(text)
    except InvalidArgumentError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _int_range(text):
    try:
        lo, hi = (int(x) for x in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}") from None
    if not 1 <= lo <= hi <= 12:
        raise argparse.ArgumentTypeError("need 1 <= LO <= HI <= 12")
    return list(range(lo, hi + 1))


def _float_grid(text):
    try:
        lo, hi, step = (float(x) for x in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI:STEP, got {text!r}") from None
    if step <= 0 or hi < lo:
        raise argparse.ArgumentTypeError("need LO <= HI and STEP > 0")
    count = int(round((hi - lo) / step)) + 1
    grid = [round(lo + k * step, 12) for k in range(count)]
    if any(not 0.0 < g < 1.0 for g in grid):
        raise argparse.ArgumentTypeError("grid values must lie in (0, 1)")
    return grid


# -- output helpers ----------------------------------------------------

def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _write_manifest(out: Path, files):
    entries = []
    for f in sorted(files):
        digest = hashlib.sha256((out / f).read_bytes()).hexdigest()
        entries.append({"file": f, "sha256": digest})
    _write(out / "manifest.json", json.dumps({"files": entries}, indent=2) + "\n")


def _load_config(path, schema_name):
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    schema = json.loads(resources.files("mfrac").joinpath("schemas", schema_name).read_text())
    try:
        jsonschema.validate(doc, schema, format_checker=jsonschema.FormatChecker())
    except jsonschema.ValidationError as exc:
        raise UsageError(f"config {path} violates {schema_name}: {exc.message}") from None
    return doc


# -- subcommands -------------------------------------------------------

def cmd_simulate(args):
    if args.process == "mbm":
        if args.holder is None:
            raise UsageError("--process mbm needs --holder")
        x = simulate_mbm(args.holder, args.n, args.seed)
    else:
        if args.holder is not None:
            raise UsageError("--holder only applies to --process mbm")
        h = 0.5 if args.process == "bm" else args.h
        if h is None:
            raise UsageError("--process fbm needs --h")
        x = simulate_fbm(h, args.n, args.seed)
    if args.phi != "identity" or args.aux_seed is not None:
        aux = args.aux_seed
        if args.phi in ("w_times_x", "w2_plus_x2") and aux is None:
            aux = args.seed + 1
        try:
            form = PhiForm(args.phi, aux)
        except InvalidArgumentError as exc:
            raise UsageError(str(exc)) from None
        x = apply_phi(x, form)
    out = Path(args.out)
    _write(out, x.to_csv())
    _write(out.with_suffix(".json"), x.to_json() + "\n")
    return EXIT_OK


def _estimator_from_args(args):
    if args.method == "lgqv":
        return EstimatorConfig.lgqv(args.q)
    if args.method == "gqv":
        return EstimatorConfig.gqv(args.q, args.gamma)
    return EstimatorConfig.oscillation(args.alpha, args.beta)


def cmd_estimate(args):
    try:
        path = SamplePath.from_csv(Path(args.input))
        config = _estimator_from_args(args)
    except OSError as exc:
        raise UsageError(f"cannot read {args.input}: {exc}") from None
    series = estimate(path, config)
    out = Path(args.out)
    _write(out, series.to_csv())
    _write(out.with_suffix(".json"), series.to_json() + "\n")
    return EXIT_OK


def cmd_bench(args):
    doc = _load_config(args.config, "bench.schema.json")
    if args.seed is not None:
        doc["master_seed"] = args.seed
    out = Path(args.out or doc.get("out") or "bench-out")
    try:
        spec = spec_from_dict(doc)
    except InvalidArgumentError as exc:
        raise UsageError(str(exc)) from None
    try:
        threads = resolve_threads(args.threads if args.threads is not None else doc.get("threads"))
    except InvalidArgumentError as exc:
        raise UsageError(str(exc)) from None
    report = run_benchmark(spec, threads=threads)
    files = ["rmse.csv", "rmse.json"]
    _write(out / "rmse.csv", report.to_csv())
    _write(out / "rmse.json", report.to_json() + "\n")
    if args.traces or doc.get("traces"):
        for (form, label), text in sorted(trace_tables(spec).items()):
            name = f"traces/{form}__{label.replace('(', '').replace(')', '')}.csv"
            _write(out / name, text)
            files.append(name)
    _write_manifest(out, files)
    return EXIT_OK


def cmd_theory(args):
    out = Path(args.out)
    _write(out / "c_tilde.csv", c_tilde_table(args.q_range, args.alpha_grid,
                                              with_integral=not args.closed_only))
    _write_manifest(out, ["c_tilde.csv"])
    return EXIT_OK


def cmd_analyze(args):
    doc = _load_config(args.config, "analyze.schema.json")
    manifest_path = args.manifest or doc.get("manifest")
    if manifest_path is None:
        raise UsageError("no manifest given (config key 'manifest' or --manifest)")
    manifest_path = Path(manifest_path)
    if not manifest_path.is_absolute() and args.manifest is None:
        manifest_path = Path(args.config).parent / manifest_path
    try:
        manifest = json.loads(manifest_path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read manifest {manifest_path}: {exc}") from None
    split = PeriodSplit(dt.date.fromisoformat(doc.get("within_start", "2007-01-01")),
                        dt.date.fromisoformat(doc.get("within_end", "2008-12-31")))
    methods = doc.get("methods") or [{"method": "gqv"}, {"method": "lgqv"}, {"method": "oscillation"}]
    configs = [method_from_dict(m) for m in methods]
    result = analyze(manifest, configs, split, burnin=doc.get("burnin", 100),
                     log=args.log or doc.get("log", False), level=doc.get("level", 0.05),
                     base_dir=manifest_path.parent)
    out = Path(args.out or doc.get("out") or "analyze-out")
    _write(out / "summary.csv", result.to_csv())
    _write(out / "tests.json", result.tests_json() + "\n")
    _write_manifest(out, ["summary.csv", "tests.json"])
    return EXIT_OK


def cmd_fixture(args):
    synthetic_fixture(args.out, days=args.days, h=args.h, seed=args.seed)
    return EXIT_OK


# -- parser ------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(prog="mfrac", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"mfrac {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--threads", type=_positive_int(1), default=None,
                       help="worker processes (default: $MFRAC_THREADS or all cores)")

    p = sub.add_parser("simulate", help="simulate a Bm / fBm / mBm path")
    p.add_argument("--process", choices=("bm", "fbm", "mbm"), required=True, help="process to sample")
    p.add_argument("--h", type=_open_unit, help="Hurst index for fbm")
    p.add_argument("--holder", type=_holder,
                   help="H(t) for mbm: const:H, sin:h0:amp:freq or table:t=h,...")
    p.add_argument("--n", type=_positive_int(2), required=True, help="grid size N (N+1 samples)")
    p.add_argument("--seed", type=_positive_int(0), required=True, help="random seed")
    p.add_argument("--phi", choices=PHI_TAGS, default="identity", help="pointwise transform")
    p.add_argument("--aux-seed", type=_positive_int(0), default=None,
                   help="seed of the independent Brownian path for W-forms (default seed+1)")
    p.add_argument("--out", required=True, help="CSV path; metadata goes to the .json sibling")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="estimate H(t) of a path CSV")
    p.add_argument("--in", dest="input", required=True, help="path CSV with columns t,value")
    p.add_argument("--method", choices=("lgqv", "gqv", "osc"), required=True, help="estimator")
    p.add_argument("--q", type=_positive_int(1), default=2, help="difference order (lgqv/gqv)")
    p.add_argument("--gamma", type=_open_unit, default=0.7, help="classic GQV radius exponent")
    p.add_argument("--alpha", type=_open_unit, default=0.1, help="oscillation lower exponent")
    p.add_argument("--beta", type=_open_unit, default=0.3, help="oscillation upper exponent")
    p.add_argument("--out", required=True, help="CSV path; full JSON goes to the .json sibling")
    common(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("bench", help="Monte-Carlo RMSE benchmark")
    p.add_argument("--config", required=True, help="bench config JSON (docs/schema/bench.schema.json)")
    p.add_argument("--seed", type=_positive_int(0), default=None, help="override master_seed")
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--traces", action="store_true", help="also write H-hat trace CSVs")
    common(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("theory", help="table of the increment variance constant")
    p.add_argument("--q-range", type=_int_range, default=list(range(1, 6)), help="LO:HI")
    p.add_argument("--alpha-grid", type=_float_grid, default=_float_grid("0.1:0.9:0.1"),
                   help="LO:HI:STEP inside (0, 1)")
    p.add_argument("--closed-only", action="store_true", help="skip the quadrature column")
    p.add_argument("--out", required=True, help="output directory")
    common(p)
    p.set_defaults(func=cmd_theory)

    p = sub.add_parser("analyze", help="per-period Hölder summaries of price series")
    p.add_argument("--config", required=True, help="analyze config JSON (docs/schema/analyze.schema.json)")
    p.add_argument("--manifest", default=None, help="override the config's manifest path")
    p.add_argument("--log", action="store_true", help="estimate on log-prices")
    p.add_argument("--out", default=None, help="output directory")
    common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("fixture", help="write a synthetic price fixture and manifest")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--days", type=_positive_int(300), default=1600, help="trading days per series")
    p.add_argument("--h", type=_open_unit, default=0.5, help="Hurst index of the log-prices")
    p.add_argument("--seed", type=_positive_int(0), default=0, help="random seed")
    common(p)
    p.set_defaults(func=cmd_fixture)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"mfrac {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MfracError as exc:
        print(f"mfrac {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

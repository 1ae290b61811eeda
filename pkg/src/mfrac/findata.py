"""Price-series ingestion and the per-period roughness workflow.

Series from several markets are aligned on common trading days, rescaled to
start at 1, trimmed of a post-listing burn-in, split into prior / within /
post crisis periods, and summarized by the time-averaged Hölder exponent of
each period.  Markets are compared with Welch's two-sample t test.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from .errors import InvalidArgumentError, MfracError, ParseError
from .estimate import EstimatorConfig, estimate, min_grid_n
from .paths import SamplePath

SUMMARY_COLUMNS = ("ticker", "market", "period", "method", "avg_H", "n_obs")
PERIODS = ("prior", "within", "post")


@dataclass
class PriceSeries:
    ticker: str
    market: str
    dates: list
    prices: np.ndarray

    def __post_init__(self):
        self.prices = np.asarray(self.prices, dtype=float)
        if len(self.dates) != self.prices.size:
            raise InvalidArgumentError("dates and prices differ in length")
        if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
            raise InvalidArgumentError("dates must be strictly increasing")
        if np.any(~(self.prices > 0.0)):
            raise InvalidArgumentError("prices must be positive")

    def __len__(self):
        return self.prices.size

    def subset(self, keep):
        keep = set(keep)
        idx = [i for i, d in enumerate(self.dates) if d in keep]
        return PriceSeries(self.ticker, self.market, [self.dates[i] for i in idx], self.prices[idx])


@dataclass(frozen=True)
class PeriodSplit:
    within_start: dt.date = dt.date(2007, 1, 1)
    within_end: dt.date = dt.date(2008, 12, 31)

    def __post_init__(self):
        if self.within_start > self.within_end:
            raise InvalidArgumentError("within_start must not be after within_end")

    def label(self, day):
        if day < self.within_start:
            return "prior"
        if day > self.within_end:
            return "post"
        return "within"


def load_price_csv(source, ticker="", market="") -> PriceSeries:
    """Read a ``date,price`` CSV (ISO dates) into a validated PriceSeries."""
    if isinstance(source, (str, Path)) and Path(source).exists():
        text = Path(source).read_text()
    elif hasattr(source, "read"):
        text = source.read()
    else:
        text = str(source)
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != ["date", "price"]:
        raise ParseError("expected header 'date,price'", line=1)
    dates, prices = [], []
    for lineno, row in enumerate(reader, start=2):
        if not row or not "".join(row).strip():
            continue
        if len(row) != 2:
            raise ParseError(f"expected 2 fields, got {len(row)}", line=lineno)
        try:
            day = dt.date.fromisoformat(row[0].strip())
            price = float(row[1])
        except ValueError as exc:
            raise ParseError(str(exc), line=lineno) from None
        if not (math.isfinite(price) and price > 0.0):
            raise ParseError(f"price must be positive, got {row[1].strip()}", line=lineno)
        if dates and day <= dates[-1]:
            raise ParseError(f"date {day} does not follow {dates[-1]}", line=lineno)
        dates.append(day)
        prices.append(price)
    if not dates:
        raise ParseError("no observations")
    return PriceSeries(ticker, market, dates, prices)


def align_common_days(series):
    """Restrict every series to the dates present in all of them."""
    if len(series) < 2:
        raise InvalidArgumentError("alignment needs at least two series")
    common = set(series[0].dates)
    for s in series[1:]:
        common &= set(s.dates)
    if not common:
        raise InvalidArgumentError("series share no trading day")
    return [s.subset(common) for s in series]


def rescale_to_unit(series: PriceSeries, log=False) -> SamplePath:
    """Price path started at 1 by cumulating log-returns, on the trading-time grid."""
    if len(series) < 2:
        raise InvalidArgumentError("need at least two observations")
    logp = np.log(series.prices)
    cum = np.concatenate([[0.0], np.cumsum(np.diff(logp))])
    values = cum if log else np.exp(cum)
    return SamplePath(values, {"ticker": series.ticker, "market": series.market,
                               "start": series.dates[0].isoformat(),
                               "end": series.dates[-1].isoformat(), "log": bool(log)})


def drop_burnin(path: SamplePath, count: int = 100) -> SamplePath:
    """Drop the first ``count`` observations; the rest is re-gridded on [0, 1]."""
    if count < 0:
        raise InvalidArgumentError("burn-in count must be >= 0")
    if len(path) <= count + 32:
        raise InvalidArgumentError(
            f"{len(path)} observations leave fewer than 33 after a burn-in of {count}")
    if count == 0:
        return path
    return path.with_values(path.values[count:], burnin=int(count))


def _segment_estimate(values, config):
    seg = SamplePath(values)
    n = seg.grid_n
    if config.method == "lgqv" and n % 2:
        # LGQV needs an even grid; drop the last observation
        seg = SamplePath(values[:-1])
    if seg.grid_n < min_grid_n(config):
        return None
    try:
        return estimate(seg, config)
    except MfracError:
        return None


def period_summaries(path: SamplePath, dates, split: PeriodSplit, configs, ticker="", market=""):
    """Time-averaged H-hat per (period, method); missing where a period is too short."""
    if len(dates) != len(path):
        raise InvalidArgumentError("dates and path differ in length")
    labels = [split.label(d) for d in dates]
    rows, samples = [], {}
    for period in PERIODS:
        idx = [i for i, lab in enumerate(labels) if lab == period]
        if not idx:
            continue
        values = path.values[idx[0]: idx[-1] + 1]
        for cfg in configs:
            est = _segment_estimate(values, cfg) if len(values) >= 2 else None
            avg = est.mean() if est is not None else float("nan")
            rows.append({"ticker": ticker, "market": market, "period": period,
                         "method": cfg.label, "avg_H": avg, "n_obs": len(values)})
            if est is not None and not math.isnan(avg):
                samples[(period, cfg.label)] = est.h_hat[~est.missing]
    return rows, samples


@dataclass(frozen=True)
class WelchResult:
    statistic: float
    dof: float
    p_value: float
    reject: bool
    level: float

    def to_dict(self):
        return {"statistic": self.statistic, "dof": self.dof, "p_value": self.p_value,
                "reject": self.reject, "level": self.level}


def welch_t_test(sample_a, sample_b, level: float = 0.05) -> WelchResult:
    """Two-sided Welch t test of equal means."""
    a = np.asarray(sample_a, dtype=float)
    b = np.asarray(sample_b, dtype=float)
    if a.size < 2 or b.size < 2:
        raise InvalidArgumentError("each sample needs at least two values")
    va, vb = a.var(ddof=1) / a.size, b.var(ddof=1) / b.size
    if va == 0.0 or vb == 0.0:
        raise InvalidArgumentError("a sample has zero variance")
    se2 = va + vb
    stat = float((a.mean() - b.mean()) / math.sqrt(se2))
    dof = float(se2**2 / (va**2 / (a.size - 1) + vb**2 / (b.size - 1)))
    p = float(2.0 * stats.t.sf(abs(stat), dof))
    return WelchResult(stat, dof, p, p < level, float(level))


# ----------------------------------------------------------------------
# whole-manifest workflow

@dataclass
class AnalysisResult:
    rows: list
    tests: list = field(default_factory=list)

    def to_csv(self, target=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS)
        for r in self.rows:
            w.writerow([r["ticker"], r["market"], r["period"], r["method"],
                        "" if math.isnan(r["avg_H"]) else repr(float(r["avg_H"])), r["n_obs"]])
        text = buf.getvalue()
        if target is not None:
            Path(target).write_text(text)
        return text

    def tests_json(self, target=None) -> str:
        text = json.dumps({"tests": self.tests}, indent=2, sort_keys=True)
        if target is not None:
            Path(target).write_text(text + "\n")
        return text


def analyze(manifest: dict, configs, split=PeriodSplit(), burnin=100, log=False, level=0.05,
            base_dir=Path(".")) -> AnalysisResult:
    """Run the per-ticker pipeline over a ``ticker -> {market -> csv}`` manifest."""
    rows, tests = [], []
    for ticker in sorted(manifest):
        files = manifest[ticker]
        series = [load_price_csv(Path(base_dir) / files[m], ticker, m) for m in sorted(files)]
        if len(series) > 1:
            series = align_common_days(series)
        per_market = {}
        for s in series:
            path = drop_burnin(rescale_to_unit(s, log=log), burnin)
            dates = s.dates[burnin:]
            r, samples = period_summaries(path, dates, split, configs, ticker, s.market)
            rows.extend(r)
            per_market[s.market] = samples
        for m1, m2 in itertools.combinations(sorted(per_market), 2):
            for key in sorted(set(per_market[m1]) & set(per_market[m2])):
                try:
                    res = welch_t_test(per_market[m1][key], per_market[m2][key], level)
                except InvalidArgumentError as exc:
                    tests.append({"ticker": ticker, "period": key[0], "method": key[1],
                                  "market_a": m1, "market_b": m2, "error": str(exc)})
                    continue
                tests.append({"ticker": ticker, "period": key[0], "method": key[1],
                              "market_a": m1, "market_b": m2, **res.to_dict()})
    return AnalysisResult(rows, tests)


def synthetic_fixture(directory, tickers=("AAA", "BBB"), markets=("US", "HK", "CN"),
                      start=dt.date(2004, 1, 5), days=1600, h=0.5, seed=0):
    """Write exp-transformed fBm price CSVs plus a manifest; returns the manifest path.

    Calendars differ per market by a few dropped weekdays so alignment has
    something to do.
    """
    from .seeding import derive_seed
    from .simulate import simulate_fbm

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    weekdays = []
    day = start
    while len(weekdays) < days:
        if day.weekday() < 5:
            weekdays.append(day)
        day += dt.timedelta(days=1)
    manifest = {}
    for ticker in tickers:
        manifest[ticker] = {}
        for k, market in enumerate(markets):
            holidays = set(weekdays[7 + 11 * k:: 53])
            cal = [d for d in weekdays if d not in holidays]
            x = simulate_fbm(h, len(cal) - 1, derive_seed(seed, "fixture", ticker, market)).values
            prices = 10.0 * np.exp(x)
            name = f"{ticker}_{market}.csv"
            with open(directory / name, "w") as fh:
                fh.write("date,price\n")
                for d, p in zip(cal, prices):
                    fh.write(f"{d.isoformat()},{float(p)!r}\n")
            manifest[ticker][market] = name
    target = directory / "manifest.json"
    target.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return target

"""Pointwise Hölder exponent estimators: LGQV, classic GQV and oscillation.

All three work on a path observed on the uniform grid ``u / N``.  LGQV
compares localized generalized quadratic variations at resolutions ``N`` and
``N / 2``; classic GQV reads the exponent off the log-size of a single
variation; the oscillation method regresses log max-min oscillation on log
window size.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.ndimage import maximum_filter1d, minimum_filter1d

from .errors import DegenerateError, InvalidArgumentError
from .increments import IncrementSequence, generalized_increments, make_difference_sequence
from .paths import SamplePath

METHODS = ("lgqv", "gqv", "oscillation")
_EPS = 1e-9

FLAG_CLIPPED = "clipped"
FLAG_DEGENERATE = "degenerate"
FLAG_BOUNDARY = "boundary"


@dataclass(frozen=True)
class EstimatorConfig:
    method: str
    increments: IncrementSequence | None = None
    gqv_gamma: float = 0.7
    osc_alpha: float = 0.1
    osc_beta: float = 0.3
    clip_range: tuple = (0.001, 0.999)

    def __post_init__(self):
        if self.method not in METHODS:
            raise InvalidArgumentError(f"unknown method {self.method!r}; choose from {METHODS}")
        if self.method in ("lgqv", "gqv") and self.increments is None:
            object.__setattr__(self, "increments", make_difference_sequence(2))
        if not 0.0 < self.gqv_gamma < 1.0:
            raise InvalidArgumentError("gqv_gamma must lie in (0, 1)")
        if not 0.0 < self.osc_alpha < self.osc_beta < 1.0:
            raise InvalidArgumentError("need 0 < osc_alpha < osc_beta < 1")
        lo, hi = self.clip_range
        if not 0.0 < lo < hi < 1.0:
            raise InvalidArgumentError("clip_range must satisfy 0 < lo < hi < 1")
        object.__setattr__(self, "clip_range", (float(lo), float(hi)))

    @classmethod
    def lgqv(cls, q=2, **kw):
        return cls("lgqv", make_difference_sequence(q), **kw)

    @classmethod
    def gqv(cls, q=2, gamma=0.7, **kw):
        return cls("gqv", make_difference_sequence(q), gqv_gamma=gamma, **kw)

    @classmethod
    def oscillation(cls, alpha=0.1, beta=0.3, **kw):
        return cls("oscillation", osc_alpha=alpha, osc_beta=beta, **kw)

    @property
    def label(self):
        if self.method == "lgqv":
            return f"LGQV({self.increments.moments_q})"
        if self.method == "gqv":
            return "GQV"
        return "OSC"

    def to_dict(self):
        return {
            "method": self.method,
            "increments": None if self.increments is None else self.increments.to_dict(),
            "gqv_gamma": self.gqv_gamma, "osc_alpha": self.osc_alpha,
            "osc_beta": self.osc_beta, "clip_range": list(self.clip_range),
        }

    @classmethod
    def from_dict(cls, doc):
        doc = dict(doc)
        inc = doc.pop("increments", None)
        if isinstance(inc, dict):
            inc = IncrementSequence.from_coefficients(inc["coefficients"])
        if "clip_range" in doc:
            doc["clip_range"] = tuple(doc["clip_range"])
        return cls(increments=inc, **doc)


@dataclass
class EstimateSeries:
    t_grid: np.ndarray
    h_hat: np.ndarray
    n_points_used: np.ndarray
    config: EstimatorConfig
    flags: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    def __post_init__(self):
        if not (len(self.t_grid) == len(self.h_hat) == len(self.n_points_used)):
            raise InvalidArgumentError("estimate series columns differ in length")
        if not self.flags:
            self.flags = [""] * len(self.t_grid)

    @property
    def missing(self):
        return np.isnan(self.h_hat)

    def mean(self):
        ok = ~self.missing
        return float(np.mean(self.h_hat[ok])) if ok.any() else float("nan")

    def to_csv(self, target=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "h_hat", "n_points", "flags"])
        for t, h, k, f in zip(self.t_grid, self.h_hat, self.n_points_used, self.flags):
            w.writerow([repr(float(t)), "" if np.isnan(h) else repr(float(h)), int(k), f])
        text = buf.getvalue()
        if target is not None:
            Path(target).write_text(text)
        return text

    def to_json(self, target=None) -> str:
        doc = {
            "config": self.config.to_dict(),
            "t": [float(x) for x in self.t_grid],
            "h_hat": [None if np.isnan(x) else float(x) for x in self.h_hat],
            "n_points": [int(x) for x in self.n_points_used],
            "flags": list(self.flags),
            "warnings": list(self.warnings),
        }
        text = json.dumps(doc, indent=2, sort_keys=True)
        if target is not None:
            Path(target).write_text(text + "\n")
        return text


# ----------------------------------------------------------------------
# radius rule and neighborhoods

def lgqv_gamma(n) -> float:
    return 0.5 + (2.0 / 3.0) * math.log(math.log(n)) / math.log(n)


def lgqv_radius(n: int) -> float:
    """``n ** -gamma(n)`` with ``gamma(n) = 1/2 + (2/3) ln ln n / ln n``."""
    if n < 16:
        raise InvalidArgumentError(f"radius rule needs n >= 16, got {n}")
    return float(n) ** (-lgqv_gamma(n))


def _bounds(t0, n, radius, p, round_count):
    """Inclusive index bounds (lo, hi) of the neighborhood of each t0."""
    c = np.asarray(t0, dtype=float) * n
    if round_count:
        # the m grid indices closest to t0 * n, ties to the lower index
        m = math.floor(2.0 * n * radius + 0.5)
        lo = np.ceil(c - m / 2.0 - _EPS).astype(np.int64)
        hi = lo + m - 1
    else:
        lo = np.ceil(c - n * radius - _EPS).astype(np.int64)
        hi = np.floor(c + n * radius + _EPS).astype(np.int64)
    return np.maximum(lo, 0), np.minimum(hi, n - p - 1)


def neighborhood(t0: float, n: int, radius: float, p: int, round_count: bool = False):
    """Indices ``i`` in ``0..n-p-1`` with ``|i/n - t0| <= radius``.

    With ``round_count`` the interior size is ``round(2 n radius)`` (the
    indices nearest ``t0 * n``) instead of the raw inclusive count.
    """
    if not 0.0 < t0 < 1.0:
        raise InvalidArgumentError(f"t0 must lie in (0, 1), got {t0}")
    if radius < 1.0 / n - _EPS:
        raise InvalidArgumentError(f"radius {radius} is below one grid step 1/{n}")
    lo, hi = _bounds(t0, n, radius, p, round_count)
    lo, hi = int(lo), int(hi)
    if hi < lo:
        raise DegenerateError(f"empty neighborhood at t0={t0}")
    return list(range(lo, hi + 1))


def _resolution(path, stride):
    n, rem = divmod(path.grid_n, stride)
    if rem:
        raise InvalidArgumentError(f"grid_n={path.grid_n} is not a multiple of stride {stride}")
    return n


def _windowed_variation(path, a, t0, radius, stride, round_count=True):
    """V at every t0, with neighborhood sizes.  Vectorized core of the GQV estimators."""
    n = _resolution(path, stride)
    p = a.order_p
    if n - p < 1:
        raise InvalidArgumentError(f"resolution {n} too coarse for a filter of order {p}")
    inc = generalized_increments(path.values[::stride], a, 1)[: n - p]
    csum = np.concatenate([[0.0], np.cumsum(inc * inc)])
    lo, hi = _bounds(t0, n, radius, p, round_count)
    count = np.maximum(hi - lo + 1, 0)
    v = np.where(count > 0, csum[np.clip(hi + 1, 0, n - p)] - csum[np.clip(lo, 0, n - p)], 0.0)
    interior = 2 * n * radius
    return np.maximum(v, 0.0), count, count < math.floor(interior + 0.5)


def quadratic_variation(path: SamplePath, a: IncrementSequence, t0: float, radius: float,
                        stride: int = 1, round_count: bool = True) -> float:
    """Sum of squared generalized increments over the neighborhood of ``t0``

    at resolution ``n = grid_n / stride``.
    """
    n = _resolution(path, stride)
    idx = neighborhood(t0, n, radius, a.order_p, round_count)
    inc = generalized_increments(path.values[::stride], a, 1)
    return float(np.sum(inc[idx] ** 2))


# ----------------------------------------------------------------------
# estimators

def default_t_grid(path):
    return np.arange(1, path.grid_n) / path.grid_n


def _prepare_grid(path, t_grid):
    t = default_t_grid(path) if t_grid is None else np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise InvalidArgumentError("t_grid must be a non-empty 1-d sequence")
    if np.any((t <= 0.0) | (t >= 1.0)):
        raise InvalidArgumentError("every t0 must lie in (0, 1)")
    return t


def _finish(t, raw, counts, config, degenerate, boundary):
    lo, hi = config.clip_range
    h = raw.copy()
    h[degenerate] = np.nan
    clipped = ~degenerate & ((h < lo) | (h > hi))
    h[clipped] = np.clip(h[clipped], lo, hi)
    flags = []
    for d, c, b in zip(degenerate, clipped, boundary):
        f = [name for on, name in ((d, FLAG_DEGENERATE), (c, FLAG_CLIPPED), (b, FLAG_BOUNDARY)) if on]
        flags.append("|".join(f))
    notes = []
    if degenerate.any():
        notes.append(f"{int(degenerate.sum())} point(s) degenerate, left missing")
    if clipped.any():
        notes.append(f"{int(clipped.sum())} point(s) clipped to [{lo}, {hi}]")
    return EstimateSeries(t, h, np.asarray(counts, dtype=np.int64), config, flags, notes)


def lgqv_from_variations(v_n, v_2n, n):
    """``(1 + log2(v(2n)/v(n)) + log2(V_n / V_2n)) / 2`` for variations at resolutions n, 2n."""
    r1, r2 = lgqv_radius(n), lgqv_radius(2 * n)
    with np.errstate(divide="ignore", invalid="ignore"):
        return 0.5 * (1.0 + math.log2(r2 / r1) + np.log2(np.asarray(v_n) / np.asarray(v_2n)))


def estimate_lgqv(path: SamplePath, config: EstimatorConfig | None = None, t_grid=None) -> EstimateSeries:
    """LGQV estimate from a path on ``2n + 1`` points.

    ``H = (1 + log2(v(2n)/v(n)) + log2(V_n / V_2n)) / 2`` where ``V_2n`` uses
    the full path and ``V_n`` its even-index subsample.
    """
    config = config or EstimatorConfig.lgqv()
    if config.method != "lgqv":
        raise InvalidArgumentError("config is not an LGQV config")
    if path.grid_n % 2:
        raise InvalidArgumentError(f"LGQV needs an even grid_n, got {path.grid_n}")
    n = path.grid_n // 2
    if n < 16:
        raise InvalidArgumentError(f"LGQV needs n = grid_n/2 >= 16, got {n}")
    t = _prepare_grid(path, t_grid)
    a = config.increments
    r1, r2 = lgqv_radius(n), lgqv_radius(2 * n)
    vn, _, _ = _windowed_variation(path, a, t, r1, 2)
    v2n, count, short = _windowed_variation(path, a, t, r2, 1)
    degenerate = (vn <= 0.0) | (v2n <= 0.0)
    raw = lgqv_from_variations(vn, v2n, n)
    return _finish(t, raw, count, config, degenerate, short)


def estimate_gqv(path: SamplePath, config: EstimatorConfig | None = None, t_grid=None) -> EstimateSeries:
    """Classic GQV: ``H = (1 - gamma - ln V_n / ln n) / 2`` with radius ``n**-gamma``."""
    config = config or EstimatorConfig.gqv()
    if config.method != "gqv":
        raise InvalidArgumentError("config is not a GQV config")
    n = path.grid_n
    if n < 16:
        raise InvalidArgumentError(f"GQV needs grid_n >= 16, got {n}")
    t = _prepare_grid(path, t_grid)
    g = config.gqv_gamma
    v, count, short = _windowed_variation(path, config.increments, t, float(n) ** (-g), 1)
    degenerate = v <= 0.0
    with np.errstate(divide="ignore"):
        raw = 0.5 * (1.0 - g - np.log(v) / math.log(n))
    return _finish(t, raw, count, config, degenerate, short)


def oscillation_radii(n, alpha=0.1, beta=0.3):
    """Window radii (in samples) from ceil(n**alpha) to floor(n**beta)."""
    lo = math.ceil(n ** alpha - _EPS)
    hi = math.floor(n ** beta + _EPS)
    return list(range(lo, hi + 1))


def estimate_oscillation(path: SamplePath, config: EstimatorConfig | None = None,
                         t_grid=None) -> EstimateSeries:
    """Slope of ``ln osc_r(t0)`` against ``ln(r / n)`` over the radius range."""
    config = config or EstimatorConfig.oscillation()
    if config.method != "oscillation":
        raise InvalidArgumentError("config is not an oscillation config")
    n = path.grid_n
    radii = oscillation_radii(n, config.osc_alpha, config.osc_beta)
    if len(radii) < 2:
        raise InvalidArgumentError(
            f"n={n} too small: need ceil(n^{config.osc_alpha}) < floor(n^{config.osc_beta})")
    t = _prepare_grid(path, t_grid)
    centers = np.floor(t * n + 0.5).astype(np.int64)
    z = path.values
    logosc = np.full((len(radii), t.size), np.nan)
    for k, r in enumerate(radii):
        # edge-replicating filters equal the max/min over the truncated window
        osc = (maximum_filter1d(z, 2 * r + 1, mode="nearest")
               - minimum_filter1d(z, 2 * r + 1, mode="nearest"))[centers]
        with np.errstate(divide="ignore"):
            logosc[k] = np.where(osc > 0.0, np.log(np.where(osc > 0.0, osc, 1.0)), np.nan)
    x = np.log(np.asarray(radii, dtype=float) / n)[:, None]
    ok = ~np.isnan(logosc)
    cnt = ok.sum(axis=0)
    degenerate = cnt < 2
    safe = np.maximum(cnt, 1)
    xm = np.where(ok, x, 0.0).sum(axis=0) / safe
    ym = np.where(ok, logosc, 0.0).sum(axis=0) / safe
    dx = np.where(ok, x - xm, 0.0)
    dy = np.where(ok, logosc - ym, 0.0)
    sxx = (dx * dx).sum(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        raw = (dx * dy).sum(axis=0) / sxx
    degenerate |= ~(sxx > 0.0)
    boundary = (centers - radii[-1] < 0) | (centers + radii[-1] > n)
    return _finish(t, raw, cnt, config, degenerate, boundary)


def estimate(path: SamplePath, config: EstimatorConfig, t_grid=None) -> EstimateSeries:
    """Dispatch on ``config.method``."""
    fn = {"lgqv": estimate_lgqv, "gqv": estimate_gqv, "oscillation": estimate_oscillation}
    return fn[config.method](path, config, t_grid)


def min_grid_n(config: EstimatorConfig) -> int:
    """Smallest grid_n on which ``config`` can run."""
    if config.method == "lgqv":
        return 32
    if config.method == "gqv":
        return 16
    n = 3
    while len(oscillation_radii(n, config.osc_alpha, config.osc_beta)) < 2:
        n += 1
        if n > 10**7:
            raise InvalidArgumentError("oscillation radii never separate")
    return n


# ----------------------------------------------------------------------

@dataclass(frozen=True)
class RadiusDiagnostics:
    n: int
    h: float
    radius: float
    condition_i_terms: tuple
    condition_i: float
    condition_ii: float
    rate_terms: dict


def radius_diagnostics(n: int, h: float, radius: float) -> RadiusDiagnostics:
    """Convergence-condition summands and rate-bound terms at ``(n, h, radius)``."""
    if n < 16:
        raise InvalidArgumentError("n must be >= 16")
    if not 0.0 < h < 1.0:
        raise InvalidArgumentError("h must lie in (0, 1)")
    if not 0.0 < radius <= 1.0:
        raise InvalidArgumentError("radius must lie in (0, 1]")
    ln_n = math.log(n)
    terms = tuple(radius**l * float(n) ** ((l - 2) * h) * ln_n ** (2.0 - l / 2.0) for l in range(5))
    cond_i = sum(terms)
    rate = {
        "sqrt_condition_i": math.sqrt(cond_i),
        "radius_power": radius**h * math.sqrt(abs(math.log(radius))),
        "radius_log_n": radius * ln_n,
        "inverse_count": 1.0 / (n * radius),
    }
    return RadiusDiagnostics(n, h, radius, terms, cond_i, 1.0 / (n * radius) ** 2, rate)

"""Brownian, fractional and multifractional Brownian motion sample paths.

fBm is drawn by exact circulant embedding of the fractional Gaussian noise
covariance (Wood & Chan).  mBm uses the H-field construction: fBm paths on a
grid of Hurst levels share one set of standard normals, and each sample is a
linear interpolation between the two levels bracketing ``H(t)``.

All fBm levels are normalized so that ``Var B_h(1) = 1``.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidArgumentError, SimulationError
from .paths import HolderFunction, SamplePath
from .seeding import rng_from_seed

log = logging.getLogger(__name__)

# fGn is embedded with EMBED_FACTOR * N lags instead of the minimal N.  The
# marginal law is exact either way; the padding refines the frequency grid
# shared by the Hurst levels, which is what fixes cross-level covariances.
EMBED_FACTOR = 8
HURST_STEP = 0.05
MAX_EMBED_DOUBLINGS = 16
NEG_EIG_TOL = 1e-10


class EmbeddingWarning(UserWarning):
    pass


def _check_h(h):
    if not 0.0 < h < 1.0:
        raise InvalidArgumentError(f"Hurst parameter must lie in (0, 1), got {h}")


def _check_grid(grid_n):
    if isinstance(grid_n, bool) or int(grid_n) != grid_n or grid_n < 2:
        raise InvalidArgumentError(f"grid_n must be an integer >= 2, got {grid_n}")
    return int(grid_n)


def fgn_covariance(h: float, lag):
    """Autocovariance of unit-spacing fractional Gaussian noise."""
    _check_h(h)
    k = np.abs(np.asarray(lag, dtype=float))
    out = 0.5 * (np.abs(k + 1) ** (2 * h) - 2 * k ** (2 * h) + np.abs(k - 1) ** (2 * h))
    return float(out) if out.ndim == 0 else out


@lru_cache(maxsize=256)
def _circulant_eigenvalues(h, m):
    """Eigenvalues of the 2m circulant carrying fGn lags 0..m."""
    lags = np.arange(m + 1)
    row = fgn_covariance(h, lags)
    c = np.concatenate([row, row[-2:0:-1]])
    lam = np.fft.fft(c).real
    lam.setflags(write=False)
    return lam


def _embedding_size(h, grid_n, embed_factor):
    """Smallest admissible embedding half-length, doubling on negative eigenvalues."""
    m = max(grid_n, int(embed_factor) * grid_n)
    limit = (2 ** MAX_EMBED_DOUBLINGS) * grid_n
    while True:
        lam = _circulant_eigenvalues(h, m)
        lo, hi = lam.min(), lam.max()
        if lo >= 0.0:
            return m
        if m * 2 > limit:
            if lo >= -NEG_EIG_TOL * hi:
                warnings.warn(
                    f"circulant embedding for h={h}: clipping eigenvalues down to {lo:.3g}",
                    EmbeddingWarning, stacklevel=3)
                return m
            raise SimulationError(
                f"circulant embedding for h={h}, N={grid_n} has eigenvalue {lo:.3g} "
                f"< -{NEG_EIG_TOL:g} * max after growing to {m} lags")
        m *= 2


def _normals(seed, m):
    rng = rng_from_seed(seed)
    z = rng.standard_normal((2, 2 * m))
    return z[0] + 1j * z[1]


def _fbm_from_normals(h, grid_n, m, w):
    lam = np.clip(_circulant_eigenvalues(h, m), 0.0, None)
    noise = np.fft.fft(np.sqrt(lam / (2 * m)) * w).real[:grid_n]
    out = np.empty(grid_n + 1)
    out[0] = 0.0
    np.cumsum(noise, out=out[1:])
    out[1:] *= float(grid_n) ** (-h)
    return out


def simulate_fbm(h: float, grid_n: int, seed: int, embed_factor: int = EMBED_FACTOR) -> SamplePath:
    """One fBm path with Hurst index ``h`` on ``t = u/grid_n``; starts at 0."""
    _check_h(h)
    grid_n = _check_grid(grid_n)
    m = _embedding_size(float(h), grid_n, embed_factor)
    values = _fbm_from_normals(float(h), grid_n, m, _normals(seed, m))
    return SamplePath(values, {"generator": "fbm-circulant", "h": float(h), "seed": int(seed),
                               "grid_n": grid_n, "embed_lags": m})


def hurst_levels(hvals, step=HURST_STEP):
    """Hurst grid covering ``hvals`` on multiples of ``step``."""
    lo, hi = float(np.min(hvals)), float(np.max(hvals))
    if hi - lo < 1e-14:
        return np.array([lo])
    k0 = math.floor(lo / step + 1e-9)
    k1 = math.ceil(hi / step - 1e-9)
    levels = np.round(np.arange(k0, k1 + 1) * step, 12)
    levels[0] = max(levels[0], lo) if levels[0] <= 0.0 else levels[0]
    levels[-1] = min(levels[-1], hi) if levels[-1] >= 1.0 else levels[-1]
    return levels


def simulate_mbm(h: HolderFunction, grid_n: int, seed: int, step: float = HURST_STEP,
                 embed_factor: int = EMBED_FACTOR) -> SamplePath:
    """One mBm path by the H-field method with common random numbers.

    With a constant ``h`` the result is bit-identical to ``simulate_fbm``.
    """
    grid_n = _check_grid(grid_n)
    if not 0.0 < step < 1.0:
        raise InvalidArgumentError("Hurst grid step must lie in (0, 1)")
    hvals = h(np.arange(grid_n + 1) / grid_n)
    levels = hurst_levels(hvals, step)
    m = max(_embedding_size(float(lv), grid_n, embed_factor) for lv in levels)
    w = _normals(seed, m)
    meta = {"generator": "mbm-hfield", "holder": h.to_dict(), "seed": int(seed),
            "grid_n": grid_n, "hurst_step": step, "embed_lags": m}
    if levels.size == 1:
        return SamplePath(_fbm_from_normals(float(levels[0]), grid_n, m, w), meta)
    field = np.stack([_fbm_from_normals(float(lv), grid_n, m, w) for lv in levels])
    j = np.clip(np.searchsorted(levels, hvals, side="right") - 1, 0, levels.size - 2)
    lo, hi = levels[j], levels[j + 1]
    wt = np.clip((hvals - lo) / (hi - lo), 0.0, 1.0)
    u = np.arange(grid_n + 1)
    values = (1.0 - wt) * field[j, u] + wt * field[j + 1, u]
    values[0] = 0.0
    return SamplePath(values, meta)


# ----------------------------------------------------------------------
# transforms of a path

PHI_TAGS = ("identity", "square", "exp", "sin_t_times_x", "sin2_plus_x2",
            "w_times_x", "w2_plus_x2")
AUX_TAGS = ("w_times_x", "w2_plus_x2")
PHI_LABELS = {
    "identity": "X(t)", "square": "X(t)^2", "exp": "exp(X(t))",
    "sin_t_times_x": "sin(t)X(t)", "sin2_plus_x2": "sin(t)^2+X(t)^2",
    "w_times_x": "W(t)X(t)", "w2_plus_x2": "W(t)^2+X(t)^2",
}


@dataclass(frozen=True)
class PhiForm:
    tag: str
    aux_seed: int | None = None

    def __post_init__(self):
        if self.tag not in PHI_TAGS:
            raise InvalidArgumentError(f"unknown transform {self.tag!r}; choose from {PHI_TAGS}")
        needs_aux = self.tag in AUX_TAGS
        if needs_aux and self.aux_seed is None:
            raise InvalidArgumentError(f"transform {self.tag!r} needs aux_seed")
        if not needs_aux and self.aux_seed is not None:
            raise InvalidArgumentError(f"transform {self.tag!r} takes no aux_seed")

    @property
    def needs_aux(self):
        return self.tag in AUX_TAGS


def apply_phi(x: SamplePath, form: PhiForm) -> SamplePath:
    """Apply ``form`` pointwise on the grid of ``x``."""
    t = x.t
    v = x.values
    tag = form.tag
    if tag == "identity":
        return x.with_values(v.copy(), phi=tag)
    if tag == "square":
        out = v * v
    elif tag == "exp":
        out = np.exp(v)
    elif tag == "sin_t_times_x":
        out = np.sin(t) * v
    elif tag == "sin2_plus_x2":
        out = np.sin(t) ** 2 + v * v
    else:
        if x.meta.get("seed") is not None and int(x.meta["seed"]) == int(form.aux_seed):
            raise InvalidArgumentError("aux_seed equals the path seed; W would not be independent")
        w = simulate_fbm(0.5, x.grid_n, form.aux_seed).values
        out = w * v if tag == "w_times_x" else w * w + v * v
    return x.with_values(out, phi=tag, aux_seed=form.aux_seed)

"""Harmonizable mBm covariance by quadrature, and a dense exact sampler.

The covariance of the harmonizable integral

    R(s, t) = int_R (e^{i s x} - 1)(e^{-i t x} - 1) / |x|^{H(s)+H(t)+1} dx

is evaluated on two panels.  On [0, 1] the numerator is factored as
``x**2 * g(x)`` with ``g`` smooth (written through sinc, so no cancellation at
small x), leaving an algebraic weight ``x**(1 - H(s) - H(t))`` that QUADPACK's
QAWS rule handles exactly.  On [1, inf) each cosine term is a Fourier integral
done by QAWF and the constant term is integrated in closed form.

Values are normalized per Hurst level, ``R(s, t) / sqrt(R_{H(s)}(1,1) R_{H(t)}(1,1))``,
which matches the unit-variance fBm levels of :mod:`mfrac.simulate`.
"""

from __future__ import annotations

import math
import warnings
from functools import lru_cache

import numpy as np
from numpy.polynomial import Chebyshev
from scipy import integrate, linalg

from .errors import InvalidArgumentError, NumericalError
from .paths import HolderFunction, SamplePath
from .seeding import rng_from_seed

QUAD_TOL = 1e-6
MAX_EXACT_GRID = 512
JITTER = 1e-10


def _quad(f, a, b, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(f, a, b, epsabs=1e-11, epsrel=1e-11, limit=400, **kw)
    return val, err


def _half_sinc_sq(a, x):
    # 2 sin^2(a x / 2) / x^2, stable as x -> 0
    return 0.5 * a * a * np.sinc(a * x / (2.0 * np.pi)) ** 2


def _cos_tail(a, beta):
    """int_1^inf cos(a x) x^{-beta} dx."""
    if a == 0.0:
        return 1.0 / (beta - 1.0), 0.0
    return _quad(lambda x: x ** (-beta), 1.0, np.inf, weight="cos", wvar=abs(a))


def raw_covariance(s, t, hs, ht):
    """Un-normalized harmonizable covariance and its error estimate."""
    beta = hs + ht + 1.0
    d = s - t
    inner, e1 = _quad(lambda x: _half_sinc_sq(s, x) + _half_sinc_sq(t, x) - _half_sinc_sq(d, x),
                      0.0, 1.0, weight="alg", wvar=(2.0 - beta, 0.0))
    const = 1.0 / (beta - 1.0)
    terms = [_cos_tail(a, beta) for a in (s, t, d)]
    outer = const - terms[0][0] - terms[1][0] + terms[2][0]
    err = e1 + terms[0][1] + terms[1][1] + terms[2][1]
    # symmetric integrand over R: twice the half-line value
    return 2.0 * (inner + outer), 2.0 * err


@lru_cache(maxsize=4096)
def level_variance(h: float) -> float:
    """``Var X(1)`` of the un-normalized harmonizable fBm with index ``h``."""
    val, err = raw_covariance(1.0, 1.0, h, h)
    if err > QUAD_TOL * 1e-2 * max(1.0, abs(val)):
        raise NumericalError(f"normalizing integral for h={h} did not converge", achieved=err)
    return val


def mbm_covariance_exact(h: HolderFunction, s: float, t: float) -> float:
    """Cov(X(s), X(t)) of the normalized harmonizable mBm with exponent ``h``."""
    if not (0.0 <= s <= 1.0 and 0.0 <= t <= 1.0):
        raise InvalidArgumentError("s and t must lie in [0, 1]")
    if s == 0.0 or t == 0.0:
        return 0.0
    # canonical order makes the result exactly symmetric
    s, t = (float(s), float(t)) if s <= t else (float(t), float(s))
    hs, ht = float(h(s)), float(h(t))
    val, err = raw_covariance(s, t, hs, ht)
    norm = math.sqrt(level_variance(hs) * level_variance(ht))
    if err / norm > QUAD_TOL:
        raise NumericalError(f"covariance quadrature at ({s}, {t}) did not converge",
                             achieved=err / norm)
    return val / norm


@lru_cache(maxsize=4096)
def _unit_integral(beta: float) -> float:
    """int_0^inf (1 - cos x) x^{-beta} dx for 1 < beta < 3."""
    inner, e1 = _quad(lambda x: _half_sinc_sq(1.0, x), 0.0, 1.0,
                      weight="alg", wvar=(2.0 - beta, 0.0))
    tail, e2 = _cos_tail(1.0, beta)
    if e1 + e2 > QUAD_TOL * 1e-3:
        raise NumericalError(f"unit integral at beta={beta} did not converge", achieved=e1 + e2)
    return inner + 1.0 / (beta - 1.0) - tail


def _unit_integral_interpolant(beta_lo, beta_hi, deg=40):
    # smooth in beta, so a Chebyshev fit of quadrature values is exact to ~1e-13
    return Chebyshev.interpolate(np.vectorize(_unit_integral), deg, domain=[beta_lo, beta_hi])


def mbm_covariance_matrix(h: HolderFunction, times) -> np.ndarray:
    """Covariance matrix on ``times`` built from the scaling identity

    ``int_0^inf (1 - cos a x) x^{-beta} dx = |a|^{beta-1} U(beta)``,

    with ``U`` from quadrature.  Agrees with :func:`mbm_covariance_exact`.
    """
    times = np.asarray(times, dtype=float)
    hv = h(times)
    mu = hv[:, None] + hv[None, :]
    if h.kind == "constant":
        u_pair = np.full_like(mu, _unit_integral(float(mu[0, 0]) + 1.0))
        u_diag = np.full_like(hv, u_pair[0, 0])
    else:
        lo, hi = float(mu.min()), float(mu.max())
        pad = 1e-6 + 1e-3 * (hi - lo)
        cheb = _unit_integral_interpolant(lo + 1.0 - pad, hi + 1.0 + pad)
        u_pair = cheb(mu + 1.0)
        u_diag = cheb(2.0 * hv + 1.0)
    s, t = times[:, None], times[None, :]
    shape = s ** mu + t ** mu - np.abs(s - t) ** mu
    return u_pair * shape / (2.0 * np.sqrt(u_diag[:, None] * u_diag[None, :]))


@lru_cache(maxsize=16)
def _exact_factor(h: HolderFunction, grid_n: int):
    times = np.arange(1, grid_n + 1) / grid_n
    cov = mbm_covariance_matrix(h, times)
    cov = 0.5 * (cov + cov.T)
    w, v = linalg.eigh(cov)
    scale = max(float(w.max()), 1.0)
    if w.min() < -JITTER * scale:
        raise NumericalError(
            f"mBm covariance on {grid_n} points is not positive semidefinite "
            f"(min eigenvalue {w.min():.3g})", achieved=float(w.min()))
    factor = v * np.sqrt(np.clip(w, 0.0, None))
    factor.setflags(write=False)
    return factor


def simulate_mbm_exact(h: HolderFunction, grid_n: int, seed: int) -> SamplePath:
    """Exact Gaussian mBm sample by symmetric factorization (grid_n <= 512)."""
    if int(grid_n) != grid_n or not 2 <= grid_n <= MAX_EXACT_GRID:
        raise InvalidArgumentError(f"grid_n must lie in 2..{MAX_EXACT_GRID}, got {grid_n}")
    factor = _exact_factor(h, int(grid_n))
    z = rng_from_seed(seed).standard_normal(factor.shape[1])
    values = np.concatenate([[0.0], factor @ z])
    return SamplePath(values, {"generator": "mbm-exact", "holder": h.to_dict(),
                               "seed": int(seed), "grid_n": int(grid_n)})

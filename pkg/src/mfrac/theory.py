"""Variance and covariance oracles for generalized increments of fBm."""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import InvalidArgumentError, NumericalError
from .increments import IncrementSequence

QUAD_TOL = 1e-6


def _check_alpha(alpha):
    if not 0.0 < alpha < 1.0:
        raise InvalidArgumentError(f"alpha must lie in (0, 1), got {alpha}")


def c_tilde_closed(a: IncrementSequence, alpha: float) -> float:
    """``-1/2 sum_{j,k} a_j a_k |j - k|**(2 alpha)``.

    This is ``n**(2 alpha) Var(Delta_a B)`` for a unit-variance fBm B with
    Hurst index ``alpha`` observed on the grid ``1/n``.
    """
    _check_alpha(alpha)
    c = a.array
    j = np.arange(c.size)
    lag = np.abs(j[:, None] - j[None, :]).astype(float)
    return float(-0.5 * np.sum(np.outer(c, c) * lag ** (2.0 * alpha)))


def _quad(f, lo, hi, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        return integrate.quad(f, lo, hi, epsabs=1e-12, epsrel=1e-12, limit=500, **kw)


def _quotient_polynomial(a: IncrementSequence):
    """P with ``sum a_k z^k = (z - 1)**Q * P(z)``, coefficients low order first."""
    q = a.moments_q
    num = a.array[::-1]  # numpy.polydiv wants high order first
    den = np.poly(np.ones(q))
    quot, rem = np.polydiv(num, den)
    if np.max(np.abs(rem), initial=0.0) > 1e-8 * np.max(np.abs(num)):
        raise NumericalError("filter is not divisible by (z - 1)^Q", achieved=float(np.max(np.abs(rem))))
    return quot[::-1]


def _spectral_integral(a: IncrementSequence, alpha):
    """int_R |sum a_k e^{ik x}|^2 / |x|^{2 alpha + 1} dx and its error estimate."""
    beta = 2.0 * alpha + 1.0
    q = a.moments_q
    pcoef = _quotient_polynomial(a)
    k = np.arange(pcoef.size)

    def smooth(x):
        # |A(x)|^2 / x^{2Q} = (sin(x/2)/(x/2))^{2Q} |P(e^{ix})|^2
        p = np.sum(pcoef * np.exp(1j * k * x))
        return np.sinc(x / (2.0 * np.pi)) ** (2 * q) * abs(p) ** 2

    inner, e1 = _quad(smooth, 0.0, 1.0, weight="alg", wvar=(2.0 * q - beta, 0.0))
    # |A(x)|^2 = sum_m r_m cos(m x) with r the filter autocorrelation
    c = a.array
    outer, e2 = float(np.dot(c, c)) / (beta - 1.0), 0.0
    for m in range(1, c.size):
        r = 2.0 * float(np.dot(c[:-m], c[m:]))
        if r == 0.0:
            continue
        val, err = _quad(lambda x: x ** (-beta), 1.0, np.inf, weight="cos", wvar=float(m))
        outer += r * val
        e2 += abs(r) * err
    return 2.0 * (inner + outer), 2.0 * (e1 + e2)


def _first_difference_integral(alpha):
    # int_R |1 - e^{ix}|^2 |x|^{-2 alpha - 1} dx = 4 Gamma(1 - 2a) cos(pi a) / (2a)
    if abs(alpha - 0.5) < 1e-12:
        return 2.0 * math.pi
    return 4.0 * math.gamma(1.0 - 2.0 * alpha) * math.cos(math.pi * alpha) / (2.0 * alpha)


def c_tilde_integral(a: IncrementSequence, alpha: float) -> float:
    """Variance constant from the spectral integral of the filter.

    Ratio of the harmonizable spectral integral of ``a`` to that of the first
    difference, i.e. the variance of ``Delta_a B`` for unit-variance fBm in
    grid units.  Independent of :func:`c_tilde_closed`.
    """
    _check_alpha(alpha)
    val, err = _spectral_integral(a, alpha)
    norm = _first_difference_integral(alpha)
    if err / norm > QUAD_TOL:
        raise NumericalError(f"spectral integral for alpha={alpha} did not converge",
                             achieved=err / norm)
    return val / norm


@dataclass(frozen=True)
class VarianceConstant:
    sequence: IncrementSequence
    alpha: float
    value: float

    @classmethod
    def compute(cls, a: IncrementSequence, alpha: float, check=True):
        value = c_tilde_closed(a, alpha)
        if check:
            other = c_tilde_integral(a, alpha)
            if abs(other - value) > 1e-4 * abs(value):
                raise NumericalError(
                    f"closed form {value} and integral {other} disagree", achieved=abs(other - value))
        if value <= 0.0:
            raise NumericalError("variance constant is not positive", achieved=value)
        return cls(a, float(alpha), value)


def fbm_covariance(h, s, t):
    return 0.5 * (np.abs(s) ** (2 * h) + np.abs(t) ** (2 * h) - np.abs(s - t) ** (2 * h))


def fbm_increment_covariance(a: IncrementSequence, h: float, grid_n: int, k: int, k2: int) -> float:
    """Cov(Delta_a B_k, Delta_a B_k2) for unit-variance fBm on ``u / grid_n``.

    Evaluated as the double sum of point covariances, in extended precision
    because the terms are O(1) while the result is O(n^{-2h}).
    """
    _check_alpha(h)
    p = a.order_p
    for idx in (k, k2):
        if not 0 <= idx <= grid_n - p - 1:
            raise InvalidArgumentError(f"index {idx} outside 0..{grid_n - p - 1}")
    c = np.asarray(a.coefficients, dtype=np.longdouble)
    j = np.arange(p + 1)
    n = np.longdouble(grid_n)
    s = (k + j[:, None]) / n
    t = (k2 + j[None, :]) / n
    two_h = np.longdouble(2 * h)
    cov = 0.5 * (s**two_h + t**two_h - np.abs(s - t) ** two_h)
    return float(np.sum(c[:, None] * c[None, :] * cov))


def c_tilde_table(qs, alphas, with_integral=True) -> str:
    """CSV table of the variance constant over a (Q, alpha) grid."""
    from .increments import make_difference_sequence

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    cols = ["q", "alpha", "c_tilde_closed"] + (["c_tilde_integral", "rel_diff"] if with_integral else [])
    w.writerow(cols)
    for q in qs:
        a = make_difference_sequence(int(q))
        for alpha in alphas:
            closed = c_tilde_closed(a, alpha)
            row = [int(q), repr(float(alpha)), repr(closed)]
            if with_integral:
                integ = c_tilde_integral(a, alpha)
                row += [repr(integ), repr(abs(integ - closed) / abs(closed))]
            w.writerow(row)
    return buf.getvalue()

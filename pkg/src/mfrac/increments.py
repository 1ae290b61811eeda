"""Vanishing-moment filters and generalized increments."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

from .errors import InvalidArgumentError

MOMENT_TOL = 1e-9
MAX_DIFFERENCE_ORDER = 12


def _moment_sums(coefficients, upto):
    # exact rationals: k**l reaches 1e13 for p = 12, far past float headroom
    a = [Fraction(float(c)) for c in coefficients]
    return [sum((k**l * ak for k, ak in enumerate(a)), Fraction(0))
            for l in range(upto + 1)]


def vanishing_moments(coefficients) -> int:
    """Number of leading moments ``sum k**l a_k`` that vanish.

    Returns 0 when the coefficients do not sum to zero.
    """
    a = np.asarray(coefficients, dtype=float)
    if a.ndim != 1 or a.size < 2:
        raise InvalidArgumentError("need at least two coefficients")
    if not np.any(a != 0.0):
        raise InvalidArgumentError("coefficients are all zero")
    # a nonzero sequence of length p+1 cannot kill more than p moments
    sums = _moment_sums(a, a.size)
    q = 0
    for s in sums:
        if abs(s) > MOMENT_TOL:
            break
        q += 1
    return q


@dataclass(frozen=True)
class IncrementSequence:
    """Filter ``a_0..a_p`` with ``moments_q`` vanishing moments."""

    coefficients: tuple
    order_p: int
    moments_q: int

    @classmethod
    def from_coefficients(cls, coefficients) -> "IncrementSequence":
        a = tuple(float(c) for c in coefficients)
        q = vanishing_moments(a)
        if q < 1:
            raise InvalidArgumentError(
                "increment sequence needs at least one vanishing moment")
        return cls(a, len(a) - 1, q)

    def __post_init__(self):
        if self.order_p != len(self.coefficients) - 1:
            raise InvalidArgumentError("order_p must equal len(coefficients) - 1")
        if self.moments_q != vanishing_moments(self.coefficients):
            raise InvalidArgumentError("moments_q does not match the coefficients")

    @property
    def array(self):
        return np.asarray(self.coefficients, dtype=float)

    def to_dict(self):
        return {"coefficients": list(self.coefficients), "order_p": self.order_p,
                "moments_q": self.moments_q}


def make_difference_sequence(q: int) -> IncrementSequence:
    """Binomial difference filter ``(-1)**k * C(q, k)``, k = 0..q."""
    if isinstance(q, bool) or not isinstance(q, (int, np.integer)):
        raise InvalidArgumentError(f"order must be an integer, got {q!r}")
    if not 1 <= q <= MAX_DIFFERENCE_ORDER:
        raise InvalidArgumentError(
            f"difference order must lie in 1..{MAX_DIFFERENCE_ORDER}, got {q}")
    a = tuple(float((-1) ** k * comb(int(q), k)) for k in range(int(q) + 1))
    return IncrementSequence(a, int(q), int(q))


def _values(path):
    values = getattr(path, "values", path)
    return np.asarray(values, dtype=float)


def generalized_increments(path, a: IncrementSequence, stride: int = 1):
    """``sum_k a_k path[i + stride*k]`` for every admissible i.

    ``path`` may be a SamplePath or any 1-d array of samples. The result has
    ``len(path) - stride*p`` entries.
    """
    if stride < 1:
        raise InvalidArgumentError("stride must be >= 1")
    z = _values(path)
    coef = a.array
    p = a.order_p
    m = z.size - stride * p
    if m < 1:
        raise InvalidArgumentError(
            f"path of {z.size} samples too short for order {p} at stride {stride}")
    out = np.zeros(m)
    for k, ak in enumerate(coef):
        if ak != 0.0:
            out += ak * z[stride * k: stride * k + m]
    return out

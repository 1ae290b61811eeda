import numpy as np
import pytest
from hypothesis import given, strategies as st

from mfrac import (IncrementSequence, InvalidArgumentError, SamplePath, generalized_increments,
                   make_difference_sequence, vanishing_moments)


@pytest.mark.parametrize("q, coeffs", [(1, (1, -1)), (2, (1, -2, 1)), (3, (1, -3, 3, -1))])
def test_difference_sequences(q, coeffs):
    a = make_difference_sequence(q)
    assert a.coefficients == coeffs
    assert a.order_p == q and a.moments_q == q


@pytest.mark.parametrize("q", [0, 13, -1])
def test_difference_order_out_of_range(q):
    with pytest.raises(InvalidArgumentError):
        make_difference_sequence(q)


@pytest.mark.parametrize("q", range(1, 13))
def test_difference_sequence_moments_roundtrip(q):
    assert vanishing_moments(make_difference_sequence(q).coefficients) == q


@pytest.mark.parametrize("coeffs, expected", [((1, -2, 1), 2), ((1, 0, -1), 1), ((1, 1), 0)])
def test_vanishing_moments(coeffs, expected):
    assert vanishing_moments(coeffs) == expected


def test_vanishing_moments_errors():
    with pytest.raises(InvalidArgumentError):
        vanishing_moments((0, 0, 0))
    with pytest.raises(InvalidArgumentError):
        vanishing_moments((1,))


def test_custom_sequence_validated():
    a = IncrementSequence.from_coefficients((1, 0, -1))
    assert a.moments_q == 1 and a.order_p == 2
    with pytest.raises(InvalidArgumentError):
        IncrementSequence.from_coefficients((1, 1))
    with pytest.raises(InvalidArgumentError):
        IncrementSequence((1, -2, 1), 2, 3)


@pytest.mark.parametrize("values, stride, expected", [
    ((0, 1, 2, 3), 1, (0, 0)),
    ((0, 1, 4, 9), 1, (2, 2)),
    ((0, 1, 4, 9, 16), 2, (8,)),
])
def test_generalized_increments_examples(values, stride, expected):
    out = generalized_increments(SamplePath(np.array(values, float)), make_difference_sequence(2), stride)
    np.testing.assert_array_equal(out, expected)


def test_generalized_increments_too_short():
    with pytest.raises(InvalidArgumentError):
        generalized_increments(SamplePath(np.zeros(4)), make_difference_sequence(2), 2)


@given(q=st.integers(1, 6), deg=st.integers(0, 5), n=st.integers(8, 60),
       coef=st.lists(st.floats(-3, 3), min_size=6, max_size=6))
def test_polynomials_below_q_annihilated(q, deg, n, coef):
    if deg >= q:
        deg = q - 1
    t = np.arange(n + 1) / n
    z = np.polyval(coef[: deg + 1], t)
    out = generalized_increments(SamplePath(z), make_difference_sequence(q))
    assert np.max(np.abs(out)) < 1e-9


@given(alpha=st.floats(-5, 5), beta=st.floats(-5, 5), seed=st.integers(0, 2**32 - 1),
       stride=st.integers(1, 3))
def test_linearity(alpha, beta, seed, stride):
    r = np.random.default_rng(seed)
    z1, z2 = r.normal(size=40), r.normal(size=40)
    a = make_difference_sequence(3)
    lhs = generalized_increments(alpha * z1 + beta * z2, a, stride)
    rhs = alpha * generalized_increments(z1, a, stride) + beta * generalized_increments(z2, a, stride)
    np.testing.assert_allclose(lhs, rhs, atol=1e-10)

"""Rectangle and trapezoid discretizations of the VIX^2 window integral."""

import math

import numpy as np
import pytest

from roughvix import (
    GaussianSample,
    SchemeKind,
    UsageError,
    compensated_sum,
    rectangle_vix2,
    scheme_vix2,
    trapezoid_vix2,
    vix_from_vix2,
)


def _sample(values):
    arr = np.asarray(values, dtype=float)
    return GaussianSample(values=arr, grid_n=arr.shape[0] - 1)


def test_compensated_sum_matches_fsum_on_adversarial_input():
    values = np.array([1e16, 1.0, -1e16, 1.0, 1e-8, 3.0, -2.0])
    assert compensated_sum(values) == math.fsum(values)


def test_compensated_sum_is_columnwise():
    values = np.array([[1e16, 1.0], [1.0, 2.0], [-1e16, 3.0]])
    out = compensated_sum(values)
    assert out.shape == (2,)
    assert out[0] == math.fsum(values[:, 0])
    assert out[1] == math.fsum(values[:, 1])


def test_rectangle_uses_right_endpoints():
    x = np.log(np.array([9.0, 1.0, 2.0, 3.0]))
    # The left endpoint must not contribute.
    assert rectangle_vix2(_sample(x)) == pytest.approx(2.0, rel=1e-15)


def test_trapezoid_is_mean_of_left_and_right_rectangles():
    rng = np.random.default_rng(42)
    x = rng.normal(size=(9, 7))
    sample = _sample(x)
    e = np.exp(x)
    left = compensated_sum(e[:-1]) / 8
    right = compensated_sum(e[1:]) / 8
    np.testing.assert_allclose(
        trapezoid_vix2(sample), (left + right) / 2.0, rtol=1e-15
    )


def test_constant_exponent_is_reproduced_exactly():
    x = np.full(11, -2.5)
    sample = _sample(x)
    assert rectangle_vix2(sample) == pytest.approx(math.exp(-2.5), rel=1e-15)
    assert trapezoid_vix2(sample) == pytest.approx(math.exp(-2.5), rel=1e-15)


def test_scheme_dispatch():
    x = np.linspace(-1.0, 1.0, 5)
    sample = _sample(x)
    assert scheme_vix2(SchemeKind.RECTANGLE, sample) == rectangle_vix2(sample)
    assert scheme_vix2(SchemeKind.TRAPEZOID, sample) == trapezoid_vix2(sample)


def test_small_case_against_exact_sum():
    x = np.array([0.1, -0.4, 0.25, -1.0])
    expected_rect = math.fsum(math.exp(v) for v in x[1:]) / 3
    expected_trap = (
        math.fsum(math.exp(v) for v in x[1:]) + math.fsum(math.exp(v) for v in x[:-1])
    ) / 6
    assert rectangle_vix2(_sample(x)) == pytest.approx(expected_rect, rel=1e-14)
    assert trapezoid_vix2(_sample(x)) == pytest.approx(expected_trap, rel=1e-14)


def test_batched_values_reduce_per_column():
    x = np.random.default_rng(1).normal(size=(6, 4))
    out = rectangle_vix2(_sample(x))
    assert out.shape == (4,)
    for j in range(4):
        assert out[j] == pytest.approx(
            rectangle_vix2(_sample(x[:, j])), rel=1e-15
        )


def test_vix_is_square_root_with_validation():
    assert vix_from_vix2(0.04) == pytest.approx(0.2, rel=1e-15)
    np.testing.assert_allclose(
        vix_from_vix2(np.array([0.01, 0.09])), [0.1, 0.3], rtol=1e-15
    )
    with pytest.raises(UsageError):
        vix_from_vix2(-1e-9)

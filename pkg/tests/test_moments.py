import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pushwalk.asymptotics import AsymptoticRegime
from pushwalk.errors import DomainError
from pushwalk.exact import enumeration_oracle, y_distribution
from pushwalk.model import NetworkConfig
from pushwalk.moments import (
    coefficients,
    mean_series,
    mean_series_recursive,
    mean_var_y,
    moment_series,
    second_moment_series,
)


def test_fanout_one_coefficients():
    co = coefficients(NetworkConfig(100, 20, 1))
    assert co.a1 == pytest.approx(98 / 99, rel=1e-15)
    assert co.a0 == pytest.approx(80 / 99, rel=1e-15)


def test_fanout_two_coefficients():
    co = coefficients(NetworkConfig(5, 2, 2))
    assert co.a0 == pytest.approx(1.5) and co.a1 == pytest.approx(0.5)


def test_small_second_moment_coefficients():
    co = coefficients(NetworkConfig(4, 2, 1))
    assert (co.b2, co.b1, co.b0) == pytest.approx((1 / 3, 1.0, 2 / 3), rel=1e-15)


@pytest.mark.parametrize("n,k", [(10, 3), (57, 20), (400, 399)])
def test_general_form_reduces_for_unit_fanout(n, k):
    # fanout-one forms: a1 = (n-2)/(n-1), b2 = (n-3)/(n-1), b1 = (n-2)(2(n-k)-1)/((n-1)(n-2)), b0 = (n-k)/(n-1)
    co = coefficients(NetworkConfig(n, k, 1))
    assert co.a1 == pytest.approx((n - 2) / (n - 1), rel=1e-15)
    assert co.b2 == pytest.approx((n - 3) / (n - 1), rel=1e-14)
    assert co.b1 == pytest.approx((2 * (n - k) - 1) / (n - 1), rel=1e-14)
    assert co.b0 == pytest.approx((n - k) / (n - 1), rel=1e-14)


def test_two_node_network():
    with pytest.raises(DomainError):
        coefficients(NetworkConfig(2, 1, 1))
    assert math.isnan(coefficients(NetworkConfig(2, 1, 1), second=False).b0)
    assert mean_series(NetworkConfig(2, 1, 1), 1).tolist() == [0.0, 1.0]


def test_mean_examples():
    assert mean_series(NetworkConfig(3, 1, 1), 1)[1] == pytest.approx(1.0)
    assert mean_series(NetworkConfig(4, 2, 1), 2)[2] == pytest.approx(10 / 9, rel=1e-15)
    assert mean_var_y(NetworkConfig(500, 50, 1))[0] == pytest.approx(450 * (1 - (498 / 499) ** 50), rel=1e-13)


def test_second_moment_examples():
    alpha = second_moment_series(NetworkConfig(4, 2, 1), 2)
    assert alpha == pytest.approx([0.0, 2 / 3, 14 / 9], rel=1e-15)


def test_mean_var_examples():
    assert mean_var_y(NetworkConfig(4, 2, 1)) == pytest.approx((10 / 9, 26 / 81), rel=1e-14)
    assert mean_var_y(NetworkConfig(3, 1, 1)) == pytest.approx((1.0, 0.0), abs=1e-15)


def test_mean_near_fluid_value():
    reg = AsymptoticRegime(0.96, 5)
    mean, _ = mean_var_y(NetworkConfig(5000, 200, 5))
    assert abs(mean / 5000 / reg.gamma(0.04) - 1) < 0.015


def test_full_fanout_closed_form():
    cfg = NetworkConfig(6, 2, 5)
    assert mean_series(cfg, 3).tolist() == [0.0, 4.0, 4.0, 4.0]
    assert mean_series_recursive(cfg, 3) == pytest.approx([0.0, 4.0, 4.0, 4.0])


@given(st.integers(3, 200).flatmap(lambda n: st.tuples(
    st.just(n), st.integers(1, n - 1), st.integers(1, min(7, n - 1)))))
def test_closed_form_matches_recursion(nkc):
    cfg = NetworkConfig(*nkc)
    steps = 3 * cfg.k
    np.testing.assert_allclose(mean_series(cfg, steps), mean_series_recursive(cfg, steps), rtol=1e-11, atol=1e-11)


def test_recursions_match_enumeration():
    worst = 0.0
    for n in range(3, 31, 3):
        for k in (1, n // 3, n - 1):
            for c in range(1, min(3, n - 1) + 1):
                cfg = NetworkConfig(n, k, c)
                ms = moment_series(cfg, 2 * k)
                for l in range(0, 2 * k + 1, max(1, k // 2)):
                    law = enumeration_oracle(cfg, l)
                    for got, want in ((ms.gamma[l], law.mean()), (ms.alpha[l], law.moment(2))):
                        want = float(want)
                        worst = max(worst, abs(got - want) / max(abs(want), 1e-300) if want else abs(got))
    assert worst < 1e-10


@pytest.mark.parametrize("n,k,c", [(100, 20, 1), (60, 5, 3), (31, 30, 2)])
def test_limits(n, k, c):
    cfg = NetworkConfig(n, k, c)
    steps = 200 * (n - 1) // c
    ms = moment_series(cfg, steps)
    assert abs(ms.gamma[-1] - (n - k)) < 1e-6 * (n - k)
    assert ms.alpha[-1] == pytest.approx((n - k) ** 2, rel=1e-6)
    assert np.all(ms.variance >= 0)


def test_variance_hump():
    var = moment_series(NetworkConfig(100, 20, 1), 2000).variance
    peak = int(np.argmax(var))
    assert 0 < peak < 2000 and var[peak] > 1 and var[-1] < 1e-6


def test_matches_exact_law_moments():
    cfg = NetworkConfig(150, 40, 4)
    law = y_distribution(cfg)
    mean, var = mean_var_y(cfg)
    assert mean == pytest.approx(float(law.mean()), rel=1e-11)
    assert var == pytest.approx(float(law.var()), rel=1e-9)

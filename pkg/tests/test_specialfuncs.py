import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hls_lab.errors import DomainError
from hls_lab.specialfuncs import beta_integral, gamma_ratio, gauss_jacobi, gegenbauer, jacobi, ln_gamma


@pytest.mark.parametrize("x", [1, 2, 3, 4, 5, 10, 30])
def test_ln_gamma_integers_are_log_factorials(x):
    assert ln_gamma(x) == pytest.approx(math.log(math.factorial(x - 1)), abs=1e-13)


def test_ln_gamma_half():
    assert ln_gamma(0.5) == pytest.approx(0.5 * math.log(math.pi), rel=1e-14)


@pytest.mark.parametrize("x", [0.0, -1.0, float("nan"), float("inf")])
def test_ln_gamma_domain(x):
    with pytest.raises(DomainError):
        ln_gamma(x)


@given(st.floats(min_value=0.05, max_value=150.0))
def test_ln_gamma_recurrence(x):
    # Gamma(x+1) = x Gamma(x)
    assert ln_gamma(x + 1.0) - ln_gamma(x) == pytest.approx(math.log(x), abs=2e-12 * max(1.0, abs(ln_gamma(x))))


@given(st.floats(min_value=0.05, max_value=170.0))
def test_ln_gamma_matches_math_lgamma(x):
    assert abs(ln_gamma(x) - math.lgamma(x)) <= 1e-13 * max(1.0, abs(math.lgamma(x)))


def test_gamma_ratio():
    assert gamma_ratio(0.5, 2.5) == pytest.approx(4.0 / 3.0, rel=1e-14)


def test_gegenbauer_low_degrees():
    t = np.linspace(-1, 1, 7)
    assert np.allclose(gegenbauer(0, 1.0, t), 1.0)
    assert np.allclose(gegenbauer(1, 1.0, t), 2 * t)
    # alpha = 1 gives Chebyshev polynomials of the second kind.
    assert np.allclose(gegenbauer(2, 1.0, t), 4 * t * t - 1)


def test_gegenbauer_domain():
    with pytest.raises(DomainError):
        gegenbauer(2, 1.0, 1.5)
    with pytest.raises(DomainError):
        gegenbauer(2, -0.6, 0.5)


def test_jacobi_reduces_to_legendre():
    x = np.linspace(-1, 1, 5)
    assert np.allclose(jacobi(2, 0.0, 0.0, x), 1.5 * x * x - 0.5)


@pytest.mark.parametrize("a,b", [(0.0, 0.0), (0.5, 0.5), (-0.5, -0.5), (1.0, 0.5), (-0.3, 0.5)])
@pytest.mark.parametrize("m", [1, 5, 40, 120])
def test_gauss_jacobi_weights_sum_to_beta(m, a, b):
    rule = gauss_jacobi(m, a, b)
    assert rule.weights.sum() == pytest.approx(beta_integral(a, b), rel=1e-12)
    assert np.all(np.diff(rule.nodes) > 0)
    assert np.all(rule.weights > 0)


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=39), st.floats(min_value=-0.9, max_value=3.0))
def test_gauss_jacobi_exact_for_polynomials(k, a):
    rule = gauss_jacobi(20, a, a)
    # Integral of t^k against (1-t^2)^a: zero for odd k, a Beta value for even k.
    got = rule.integrate(rule.nodes**k)
    if k % 2:
        assert abs(got) < 1e-13
    else:
        want = math.exp(ln_gamma((k + 1) / 2) + ln_gamma(a + 1) - ln_gamma(k / 2 + a + 1.5))
        assert got == pytest.approx(want, rel=1e-11)


def test_gauss_jacobi_is_read_only():
    rule = gauss_jacobi(8, 0.5, 0.5)
    with pytest.raises(ValueError):
        rule.nodes[0] = 0.0


def test_gauss_jacobi_bad_inputs():
    with pytest.raises(DomainError):
        gauss_jacobi(0, 0.0, 0.0)
    with pytest.raises(DomainError):
        gauss_jacobi(4, -1.0, 0.0)

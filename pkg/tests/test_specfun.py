"""Special-function kernel against independent references.

The Bessel zeros and Beta values pinned here are the oracle anchors the rest
of the suite builds on: every frozen literal is re-derived by tests in this
module from a second algorithm (series bisection, adaptive quadrature,
mpmath) before other modules are allowed to rely on it.
"""

import math

import numpy as np
import pytest

import oracles
from stokesbesov import (bessel_j, bessel_j_prime, bessel_zero,
                         bessel_zeros_row, beta_function, gauss_legendre)

J01 = 2.404825557695773
J11 = 3.831705970207512


def test_jn_at_zero_argument():
    assert bessel_j(0, 0.0) == 1.0
    assert bessel_j(1, 0.0) == 0.0
    assert bessel_j(7, 0.0) == 0.0


def test_j0_vanishes_at_first_zero():
    # oracle: bisection on the truncated power series of J_0
    root = oracles.bisect_bessel_zero(0, 2.0, 3.0)
    assert abs(root - J01) < 1e-12
    assert abs(bessel_j(0, J01)) < 1e-12


def test_jn_prime_values():
    assert bessel_j_prime(0, 0.0) == 0.0
    assert bessel_j_prime(1, 0.0) == 0.5
    # J_0' = -J_1, with J_1 evaluated by the independent series
    assert abs(bessel_j_prime(0, J01) + oracles.series_jn(1, J01)) < 1e-13


def test_first_zeros_frozen_values():
    # oracle: series bisection on [2, 3] and [3, 4.5]
    assert abs(oracles.bisect_bessel_zero(0, 2.0, 3.0) - J01) < 1e-12
    assert abs(oracles.bisect_bessel_zero(1, 3.0, 4.5) - J11) < 1e-12
    assert abs(bessel_zero(0, 1) - J01) < 1e-12
    assert abs(bessel_zero(1, 1) - J11) < 1e-12


def test_zero_ordering():
    assert bessel_zero(0, 1) < bessel_zero(0, 2)


def test_zeros_against_mpmath_grid():
    for n in (0, 1, 5, 17, 32):
        for k in (1, 2, 16, 32):
            ref = oracles.mp_bessel_zero(n, k)
            assert abs(bessel_zero(n, k) - ref) < 1e-11 * max(1.0, ref)


def test_zeros_row_matches_scipy():
    for n in (0, 3, 32):
        ref = oracles.scipy_jn_zeros(n, 32)
        got = bessel_zeros_row(n, 32)
        assert np.max(np.abs(got - ref)) < 1e-10


def test_zero_interlacing_property():
    # j_{n-1,k} < j_{n,k} < j_{n-1,k+1}, exercised over a seeded sample
    rng = np.random.default_rng(404)
    for n in rng.integers(1, 64, size=20):
        n = int(n)
        upper = bessel_zeros_row(n - 1, 9)
        row = bessel_zeros_row(n, 8)
        assert np.all(upper[:8] < row)
        assert np.all(row < upper[1:9])


def test_bessel_j_random_args_vs_scipy():
    rng = np.random.default_rng(11)
    x = np.exp(rng.uniform(math.log(1e-2), math.log(300.0), size=60))
    for n in (0, 1, 2, 8, 33, 64):
        ref = oracles.scipy_jv(n, x)
        got = bessel_j(n, x)
        assert np.max(np.abs(got - ref)) < 1e-12


def test_bessel_series_miller_crossover():
    # both evaluation regimes around the internal threshold agree with mpmath
    # to the documented 1e-12 absolute budget (series cancellation dominates)
    for x in (11.5, 12.0, 12.5, 13.0):
        for n in (0, 4, 10):
            assert abs(bessel_j(n, x) - oracles.mp_bessel_j(n, x)) < 1e-12


def test_gauss_legendre_midpoint():
    rule = gauss_legendre(1)
    assert rule.nodes.tolist() == [0.5]
    assert rule.weights.tolist() == [1.0]


def test_gauss_legendre_weight_normalization():
    rule = gauss_legendre(16)
    assert abs(rule.weights.sum() - 1.0) < 1e-14


def test_gauss_legendre_quadratic_exact():
    # analytic oracle: integral of x^2 over (0, 1) is 1/3
    rule = gauss_legendre(2)
    assert abs(float(rule.weights @ rule.nodes ** 2) - 1.0 / 3.0) < 1e-15


def test_gauss_legendre_rejects_bad_order():
    with pytest.raises(ValueError):
        gauss_legendre(0)
    with pytest.raises(ValueError):
        gauss_legendre(2.5)


def test_beta_uniform_density():
    assert beta_function(1.0, 1.0) == pytest.approx(1.0, abs=1e-14)


def test_beta_half_half_is_pi():
    # oracle: adaptive quadrature away from the endpoints (substituted)
    assert abs(oracles.quad_beta(0.5, 0.5) - math.pi) < 1e-12
    assert abs(beta_function(0.5, 0.5) - math.pi) < 1e-10


def test_beta_symmetry_property():
    rng = np.random.default_rng(2718)
    for _ in range(25):
        a, b = rng.uniform(0.1, 8.0, size=2)
        assert beta_function(a, b) == pytest.approx(beta_function(b, a), rel=1e-13)


def test_beta_against_quadrature_sample():
    rng = np.random.default_rng(515)
    for _ in range(8):
        a, b = rng.uniform(0.2, 4.0, size=2)
        ref = oracles.quad_beta(a, b)
        assert beta_function(a, b) == pytest.approx(ref, rel=1e-11)

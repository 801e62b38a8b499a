from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import integrate

from lacunary.errors import SlowDecay
from lacunary.testfn import TestFunction, box, smooth_bump, triangle


def test_triangle_values():
    f = triangle(1, 1.0)
    assert f(0.0) == 1.0
    assert f(1.0) == 0.0 and f(-1.0) == 0.0
    assert f(0.5) == 0.5


def test_box_is_closed_indicator():
    f = box(1, 1.0)
    assert f(0.999) == 1.0
    assert f(1.0) == 1.0
    assert f(1.001) == 0.0


def test_bump_vanishes_outside_support():
    f = smooth_bump(2, 0.7)
    rng = np.random.default_rng(3)
    x = rng.uniform(0.7, 5.0, size=(100, 2)) * rng.choice([-1, 1], size=(100, 2))
    assert np.all(f.evaluate(x) == 0.0)


@pytest.mark.parametrize("tf", [triangle(1, 1.0), triangle(2, 0.6), box(1, 2.0),
                                box(2, 1.0, bounds=[(-0.3, 0.9), (-1.0, 0.2)]),
                                smooth_bump(1, 1.0), smooth_bump(2, 1.5)])
def test_support_and_positive_integral(tf):
    rng = np.random.default_rng(11)
    x = rng.uniform(-3 * tf.support, 3 * tf.support, size=(400, tf.dim))
    outside = np.max(np.abs(x), axis=1) > tf.support
    assert np.all(tf.evaluate(x)[outside] == 0.0)
    assert tf.integral > 0


@pytest.mark.parametrize("tf", [triangle(1, 1.0), triangle(1, 2.5), box(1, 1.0),
                                box(1, 1.0, bounds=[(-0.2, 0.7)]), smooth_bump(1, 1.0),
                                smooth_bump(1, 0.4), triangle(2, 1.0)])
def test_fourier_at_zero_is_integral(tf):
    xi = 0.0 if tf.dim == 1 else np.zeros(tf.dim)
    assert abs(tf.fourier(xi) - tf.integral) <= 1e-12


def test_triangle_fourier_closed_form():
    f = triangle(1, 1.0)
    assert f.fourier(0.0) == 1.0
    assert abs(f.fourier(1.0)) < 1e-16
    xi = np.linspace(-7, 7, 301)
    vals = f.fourier(xi)
    assert np.all(vals >= 0) and np.all(vals <= f.fourier(0.0))


@pytest.mark.parametrize("xi", [0.3, 1.7, 4.25])
def test_fourier_matches_direct_quadrature(xi):
    for tf in (triangle(1, 1.3), smooth_bump(1, 0.8), box(1, 1.0, bounds=[(-0.2, 0.7)])):
        re = integrate.quad(lambda x: tf(x) * math.cos(2 * math.pi * x * xi), -tf.support, tf.support,
                            limit=200, points=[0.0])[0]
        im = integrate.quad(lambda x: -tf(x) * math.sin(2 * math.pi * x * xi), -tf.support,
                            tf.support, limit=200, points=[0.0])[0]
        got = complex(tf.fourier(xi))
        assert abs(got - complex(re, im)) < 1e-8


def test_bump_fourier_zero_matches_independent_integral():
    f = smooth_bump(1, 1.0)
    independent = integrate.quad(lambda u: math.exp(1 - 1 / (1 - u * u)) if abs(u) < 1 else 0.0,
                                 -1, 1, epsabs=1e-14)[0]
    assert abs(f.fourier(0.0) - independent) < 1e-10
    assert abs(f.integral - independent) < 1e-10


def test_box_refuses_truncation():
    with pytest.raises(SlowDecay):
        box(1, 1.0).fourier(0.5, for_truncation=True)
    with pytest.raises(SlowDecay):
        box(1, 1.0).tail_sum_bound(10, 10)


def test_tensor_products_multiply():
    f = triangle(2, 1.0)
    assert f.evaluate([0.5, 0.25]) == pytest.approx(0.5 * 0.75)
    assert f.fourier(np.array([0.5, 0.25])) == pytest.approx(
        triangle(1, 1.0).fourier(0.5) * triangle(1, 1.0).fourier(0.25))


def test_scaling_is_linear():
    f = triangle(1, 1.0)
    g = f.scaled(2.0)
    assert g(0.3) == 2 * f(0.3)
    assert g.integral == 2 * f.integral


def test_poisson_self_check_triangle():
    """Periodized hat against its Fourier series truncated at |n| <= 1000."""
    L, T = 1.0, 1000
    f = triangle(1, L)
    n = np.arange(1, T + 1)
    coeff = f.fourier(n.astype(float))
    tail = 2 * sum(L / (L * math.pi * k) ** 2 for k in range(T + 1, 200000)) + 2 * L / (
        L * math.pi) ** 2 / 200000
    for x in (0.0, 0.1, 0.37, 0.5, 0.81):
        lhs = sum(f(x + m) for m in range(-3, 4))
        rhs = f.fourier(0.0) + 2 * float(np.sum(coeff * np.cos(2 * math.pi * n * x)))
        assert abs(lhs - rhs) <= tail


@pytest.mark.parametrize("tf", [triangle(1, 1.0), triangle(1, 0.4), smooth_bump(1, 1.0),
                                smooth_bump(1, 2.0)])
def test_decay_constant_dominates_transform(tf):
    D = tf.decay_constant()
    xi = np.linspace(0.05, 40, 2000)
    assert np.all(np.abs(tf.fourier(xi)) <= D / xi**2 + 1e-15)


def test_tail_sum_bound_dominates_partial_tail():
    tf = triangle(1, 1.0)
    N, T = 50, 200
    n = np.arange(T + 1, 20000, dtype=float)
    partial = 2 * np.sum(np.abs(tf.fourier(n / N)))
    assert partial <= tf.tail_sum_bound(T, N)


def test_validation():
    with pytest.raises(ValueError):
        TestFunction("gauss", 1, 1.0)
    with pytest.raises(ValueError):
        box(1, 1.0, bounds=[(0.5, 0.1)])
    with pytest.raises(ValueError):
        box(1, 1.0, bounds=[(-2.0, 0.1)])

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest

from lacunary.errors import CostGuardExceeded, SlowDecay, SupportTooWide
from lacunary.sequences import LacunarySpec, fractional_parts
from lacunary.statistics import (
    c_k_factor,
    circular_difference,
    correlation_direct,
    correlation_naive,
    correlation_poisson_k2,
    gap_profile,
)
from lacunary.testfn import box, smooth_bump, triangle

from oracles import (
    correlation_loops,
    gaps_sorted,
    hat,
    indicator,
    ks_exponential,
    poisson_k2_mpmath,
)


def _sample(base="3/2", alpha="1.37", N=300):
    return fractional_parts(LacunarySpec.geometric(base), alpha, N)


# -- gaps ---------------------------------------------------------------------


def test_gap_example_three_points():
    g = gap_profile(np.array([0.2, 0.9, 0.5]))
    np.testing.assert_allclose(g.ordered_points, [0.2, 0.5, 0.9])
    np.testing.assert_allclose(g.gaps, [0.9, 1.2, 0.9], atol=1e-12)
    assert g.gaps.sum() == pytest.approx(3.0)
    np.testing.assert_allclose(g.gaps, gaps_sorted([0.2, 0.9, 0.5]), atol=1e-15)


def test_equally_spaced_gaps_and_ks():
    N = 64
    g = gap_profile(np.arange(N) / N)
    np.testing.assert_allclose(g.gaps, 1.0, atol=1e-12)
    assert g.ks_distance == pytest.approx(1 - math.exp(-1), abs=1e-9)
    assert g.ks_distance == pytest.approx(ks_exponential(g.gaps), abs=1e-12)


def test_uniform_points_have_poisson_gaps():
    pts = np.random.default_rng(2024).random(10_000)
    g = gap_profile(pts)
    assert g.ks_distance < 0.05
    assert g.ks_distance == pytest.approx(ks_exponential(g.gaps), abs=1e-12)


def test_gap_measure_and_normalization():
    g = gap_profile(_sample(N=2000))
    assert g.gaps.sum() == pytest.approx(g.N, rel=1e-12)
    assert g.measure(0.0) == 1.0
    assert g.measure(0.0, 1.0) + g.measure(1.0) == pytest.approx(1.0)
    assert g.expected_measure(0.0, 1.0) == pytest.approx(1 - math.exp(-1))
    edges, counts = g.histogram(10, 5.0)
    assert counts.sum() == g.N and len(edges) == 11


def test_gap_needs_two_points():
    with pytest.raises(ValueError):
        gap_profile(np.array([0.3]))


# -- naive reference --------------------------------------------------------------


def test_naive_two_point_box_example():
    est = correlation_naive(np.array([0.0, 0.5]), 2, box(1, 1.2))
    assert est.value == pytest.approx(2.0)
    assert est.value == pytest.approx(correlation_loops([0.0, 0.5], 2, indicator([(-1.2, 1.2)]), 1.2))


def test_direct_refuses_wide_support():
    with pytest.raises(SupportTooWide):
        correlation_direct(np.array([0.0, 0.5]), 2, box(1, 1.2))


def test_naive_three_point_triangle_example():
    pts = np.array([0.0, 0.5, 0.25])
    assert correlation_naive(pts, 2, triangle(1, 1.0)).value == pytest.approx(1 / 3)
    assert correlation_naive(pts, 2, triangle(1, 0.01)).value == 0.0


def test_naive_guards():
    with pytest.raises(CostGuardExceeded):
        correlation_naive(np.random.default_rng(0).random(501), 2, triangle(1, 1.0))
    with pytest.raises(CostGuardExceeded):
        correlation_naive(np.random.default_rng(0).random(81), 4, triangle(3, 1.0))


@pytest.mark.parametrize("k, tf, oracle_f", [
    (2, triangle(1, 1.0), hat(1.0)),
    (2, box(1, 1.5), indicator([(-1.5, 1.5)])),
    (3, triangle(2, 1.2), hat(1.2)),
    (3, box(2, 1.0, bounds=[(-0.5, 1.0), (-1.0, 0.3)]), indicator([(-0.5, 1.0), (-1.0, 0.3)])),
])
def test_naive_and_direct_match_explicit_loops(k, tf, oracle_f):
    pts = np.random.default_rng(k).random(14)
    ref = correlation_loops(list(pts), k, oracle_f, tf.support)
    assert correlation_naive(pts, k, tf).value == pytest.approx(ref, rel=1e-12, abs=1e-14)
    assert correlation_direct(pts, k, tf).value == pytest.approx(ref, rel=1e-12, abs=1e-14)


def test_k4_direct_matches_loops():
    pts = np.random.default_rng(9).random(10)
    ref = correlation_loops(list(pts), 4, hat(1.5), 1.5)
    assert correlation_direct(pts, 4, triangle(3, 1.5)).value == pytest.approx(ref, rel=1e-12, abs=1e-14)


# -- direct ---------------------------------------------------------------------------


def test_direct_matches_naive_k3_lacunary():
    s = _sample(N=300)
    d = correlation_direct(s, 3, triangle(2, 1.0)).value
    n = correlation_naive(s, 3, triangle(2, 1.0)).value
    assert d > 0
    assert abs(d - n) <= 1e-9 * abs(n)


@pytest.mark.parametrize("seed", range(6))
def test_direct_matches_naive_randomized(seed):
    rng = np.random.default_rng(100 + seed)
    N = int(rng.integers(20, 200))
    k = int(rng.integers(2, 4))
    L = float(rng.uniform(0.3, 3.0))
    s = _sample(str(Fraction(int(rng.integers(11, 30)), 10)), str(round(rng.uniform(1, 2), 6)), N)
    for tf in (triangle(k - 1, L), box(k - 1, L)):
        d = correlation_direct(s, k, tf).value
        n = correlation_naive(s, k, tf).value
        assert d >= 0
        assert abs(d - n) <= 1e-9 * max(abs(n), 1e-300)


def test_box_direct_nonnegative_on_fifty():
    s = _sample(N=50)
    for k in (2, 3):
        d = correlation_direct(s, k, box(k - 1, 2.0)).value
        assert d >= 0
        assert d == pytest.approx(correlation_naive(s, k, box(k - 1, 2.0)).value, rel=1e-9)


def test_direct_input_checks():
    s = _sample(N=20)
    with pytest.raises(ValueError):
        correlation_direct(s, 3, triangle(1, 1.0))
    with pytest.raises(ValueError):
        correlation_direct(s, 5, triangle(4, 1.0))
    with pytest.raises(ValueError):
        correlation_direct(s, 1, triangle(1, 1.0))


def test_rotation_invariance():
    pts = np.asarray(_sample(N=400).points)
    rot = np.mod(pts + 0.318309886, 1.0)
    for k in (2, 3):
        a = correlation_direct(pts, k, triangle(k - 1, 1.0)).value
        b = correlation_direct(rot, k, triangle(k - 1, 1.0)).value
        assert abs(a - b) <= 1e-12 * max(1.0, abs(a))
    ga, gb = gap_profile(pts), gap_profile(rot)
    np.testing.assert_allclose(np.sort(ga.gaps), np.sort(gb.gaps), atol=1e-9)


def test_scaling_doubles():
    s = _sample(N=200)
    tf = triangle(1, 1.0)
    for fn in (lambda t: correlation_direct(s, 2, t), lambda t: correlation_naive(s, 2, t)):
        assert fn(tf.scaled(2.0)).value == 2 * fn(tf).value


def test_circular_difference_range():
    d = circular_difference(np.array([0.9, 0.1, 0.5]), np.array([0.1, 0.9, 0.0]))
    np.testing.assert_allclose(d, [-0.2, 0.2, -0.5], atol=1e-15)


# -- Poisson summation --------------------------------------------------------------------


def test_poisson_agrees_with_direct_large_N():
    s = _sample(alpha="1.2345", N=1000)
    tf = triangle(1, 1.0)
    p = correlation_poisson_k2(s, tf, 50 * 1000)
    d = correlation_direct(s, 2, tf)
    assert abs(p.value - d.value) < 1e-3
    assert abs(p.value - d.value) <= p.tail_bound + 1e-6


def test_poisson_matches_mpmath_small():
    base, alpha, N, T = Fraction(3, 2), Fraction(6, 5), 12, 40
    s = fractional_parts(LacunarySpec.geometric("3/2"), "1.2", N)
    exact = [alpha * base**n for n in range(1, N + 1)]
    exact = [x - (x.numerator // x.denominator) for x in exact]
    tf = triangle(1, 1.0)
    ref = poisson_k2_mpmath(exact, lambda xi: float(tf.fourier(xi)), N, T)
    assert correlation_poisson_k2(s, tf, T).value == pytest.approx(ref, abs=1e-12)


def test_poisson_T_zero_is_leading_term():
    s = _sample(N=500)
    tf = triangle(1, 1.0)
    p = correlation_poisson_k2(s, tf, 0)
    assert p.value == pytest.approx(c_k_factor(2, 500) * tf.integral, rel=1e-15)
    d = correlation_direct(s, 2, tf).value
    assert abs(p.value - d) <= p.tail_bound


def test_poisson_bump_within_tail_bound():
    s = _sample(base="sqrt(3)", alpha="pi", N=600)
    tf = smooth_bump(1, 1.0)
    p = correlation_poisson_k2(s, tf, 20 * 600)
    d = correlation_direct(s, 2, tf).value
    assert math.isfinite(p.tail_bound)
    assert abs(p.value - d) <= p.tail_bound + 1e-6


def test_poisson_refuses_box_and_floats():
    s = _sample(N=50)
    with pytest.raises(SlowDecay):
        correlation_poisson_k2(s, box(1, 1.0), 10)
    with pytest.raises(TypeError):
        correlation_poisson_k2(np.asarray(s.points), triangle(1, 1.0), 10)


# -- C_k(N) -------------------------------------------------------------------------------


def test_c_k_factor():
    assert c_k_factor(2, 10) == 0.9
    assert c_k_factor(3, 10) == 0.72
    for k in (2, 3, 4):
        vals = [c_k_factor(k, N) for N in range(k, 200)]
        assert all(a < b for a, b in zip(vals, vals[1:]))
        assert vals[-1] < 1
    with pytest.raises(ValueError):
        c_k_factor(3, 2)

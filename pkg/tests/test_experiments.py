from __future__ import annotations

import math
from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest

from lacunary.errors import BudgetExceeded, DegenerateFit
from lacunary.experiments import (
    AlphaLaw,
    ExperimentConfig,
    draw_alpha,
    gap_summary,
    run_correlation_experiment,
    run_gap_experiment,
    run_variance_ladder,
    spot_check,
    torus_samples,
    variance_estimate,
)
from lacunary.sequences import LacunarySpec, PrecisionBudget
from lacunary.statistics import c_k_factor
from lacunary.testfn import triangle


def _cfg(**kw) -> ExperimentConfig:
    base = dict(sequence=LacunarySpec.geometric("3/2"), N_ladder=(64, 128, 256), samples_per_N=6,
                seed=12345, k_list=(2,))
    base.update(kw)
    return ExperimentConfig(**base)


def test_config_validation():
    with pytest.raises(ValueError):
        _cfg(N_ladder=(128, 64))
    with pytest.raises(ValueError):
        _cfg(samples_per_N=1)
    with pytest.raises(ValueError):
        _cfg(k_list=(5,))
    with pytest.raises(ValueError):
        _cfg(seed=-1)


def test_alpha_draws_are_dyadic_and_inside_window():
    cfg = _cfg(alpha_law=AlphaLaw.uniform("5/4", "7/4"))
    for i in range(20):
        alpha, w = draw_alpha(cfg, 100, i)
        a = alpha.exact
        assert Fraction(5, 4) <= a <= Fraction(7, 4)
        assert a.denominator & (a.denominator - 1) == 0  # power of two
        assert w == 1.0


def test_weighted_law_window():
    law = AlphaLaw.weighted(1, 2, "1/4")
    assert law.support == (Fraction(3, 4), Fraction(9, 4))
    assert law.measure == 1.5
    x = np.linspace(0.75, 2.25, 601)
    rho = law.rho(x)
    inside = (x >= 1) & (x <= 2)
    np.testing.assert_allclose(rho[inside], 1.0, atol=1e-15)
    assert np.all((rho >= 0) & (rho <= 1))
    assert rho[0] == 0.0 and rho[-1] == 0.0
    # smooth: no jumps between neighbouring grid points
    assert np.max(np.abs(np.diff(rho))) < 0.05


def test_fixed_law_cycles():
    cfg = _cfg(alpha_law=AlphaLaw.fixed(["1", "3/2"]))
    assert [draw_alpha(cfg, 10, i)[0].exact for i in range(4)] == [1, Fraction(3, 2), 1, Fraction(3, 2)]


def test_determinism_and_threads():
    cfg = _cfg()
    a = run_correlation_experiment(cfg)
    b = run_correlation_experiment(cfg)
    c = run_correlation_experiment(replace(cfg, threads=3))
    assert [r.as_tuple() for r in a] == [r.as_tuple() for r in b] == [r.as_tuple() for r in c]
    d = run_correlation_experiment(replace(cfg, seed=cfg.seed + 1))
    assert [r.alpha for r in a] != [r.alpha for r in d]


def test_rows_cover_ladder_and_k():
    cfg = _cfg(k_list=(2, 3))
    rows = run_correlation_experiment(cfg)
    assert len(rows) == 3 * 2 * 6
    for r in rows:
        tf = cfg.test_function_for(r.k)
        assert r.deviation == pytest.approx(abs(r.R - c_k_factor(r.k, r.N) * tf.integral), abs=1e-15)


def test_scaling_f_doubles_rows():
    cfg = _cfg()
    one = run_correlation_experiment(cfg)
    two = run_correlation_experiment(replace(cfg, test_function=triangle(1, 1.0, scale=2.0)))
    for a, b in zip(one, two):
        assert b.R == 2 * a.R
        assert b.deviation == pytest.approx(2 * a.deviation, rel=1e-14, abs=1e-15)


def test_variance_constant_statistic_is_zero_and_unfittable():
    cfg = _cfg()
    const = lambda sample, k, tf: c_k_factor(k, sample.N) * tf.integral  # noqa: E731
    lad = run_variance_ladder(cfg, statistic=const, fit=False)
    assert all(e.variance == 0.0 and e.standard_error == 0.0 for e in lad.estimates)
    with pytest.raises(DegenerateFit):
        run_variance_ladder(cfg, statistic=const)


def test_variance_estimate_against_direct_formula():
    rng = np.random.default_rng(5)
    R = rng.normal(1.0, 0.1, 50)
    w = rng.uniform(0, 1, 50)
    est = variance_estimate(2, 100, R, w, 0.99, measure=1.5)
    terms = [wi * (ri - 0.99) ** 2 for ri, wi in zip(R, w)]
    mean = sum(terms) / 50
    sd = math.sqrt(sum((t - mean) ** 2 for t in terms) / 49)
    assert est.variance == pytest.approx(1.5 * mean, rel=1e-12)
    assert est.standard_error == pytest.approx(1.5 * sd / math.sqrt(50), rel=1e-12)


def test_centering_identity():
    # centering at int f instead of C_k(N) int f adds an explicit bias term
    cfg = _cfg(alpha_law=AlphaLaw.weighted(1, 2, "1/4"), N_ladder=(200,), samples_per_N=30)
    rows = run_correlation_experiment(cfg)
    R = [r.R for r in rows]
    w = [r.weight for r in rows]
    I = cfg.test_function.integral
    C = c_k_factor(2, 200)
    S = cfg.alpha_law.measure
    vc = variance_estimate(2, 200, R, w, C * I, S)
    v1 = variance_estimate(2, 200, R, w, I, S)
    rhs = S * (2 * (C - 1) * I * vc.mean_weighted_deviation + (C - 1) ** 2 * I**2 * vc.mean_weight)
    assert v1.variance - vc.variance == pytest.approx(rhs, rel=1e-9, abs=1e-15)


def test_doubling_samples_agrees_within_standard_errors():
    cfg = _cfg(N_ladder=(512,), samples_per_N=40)
    small = run_variance_ladder(cfg, fit=False).estimates[0]
    big = run_variance_ladder(replace(cfg, samples_per_N=80), fit=False).estimates[0]
    assert abs(small.variance - big.variance) <= 3 * (small.standard_error + big.standard_error)


def test_variance_decays_on_small_ladder():
    cfg = _cfg(N_ladder=(128, 256, 512, 1024), samples_per_N=40, seed=99)
    lad = run_variance_ladder(cfg)
    assert lad.slope is not None and lad.slope_stderr is not None
    assert lad.slope < -0.5
    assert lad.slope_limit == pytest.approx(-0.7)


def test_budget_refusal():
    cfg = _cfg(N_ladder=(10_000, 20_000), samples_per_N=50, budget_seconds=0.01)
    with pytest.raises(BudgetExceeded):
        run_correlation_experiment(cfg)
    with pytest.raises(BudgetExceeded):
        run_gap_experiment(cfg)


def test_gap_experiment_flags_degenerate_clustering():
    cfg = ExperimentConfig(LacunarySpec.integer_geometric(2), (50, 100), alpha_law=AlphaLaw.fixed(["1"]),
                           samples_per_N=2)
    rows = run_gap_experiment(cfg)
    assert all(r.degenerate for r in rows)
    assert all(r.ks_distance >= 1 - 1 / r.N - 1e-12 for r in rows)
    summary = gap_summary(rows)
    assert summary["50"]["degenerate"] == 2


def test_gap_experiment_generic_sample():
    cfg = _cfg(N_ladder=(2000,), samples_per_N=3)
    rows = run_gap_experiment(cfg)
    assert not any(r.degenerate for r in rows)
    assert max(r.ks_distance for r in rows) < 0.1
    s = gap_summary(rows)["2000"]
    assert s["median"] <= s["q90"] <= s["max"]


def test_spot_check_within_one_unit():
    cfg = _cfg(N_ladder=(3000,), samples_per_N=2, alpha_law=AlphaLaw.fixed(["pi", "sqrt(2)"]))
    for _, _, _, sample in torus_samples(cfg, 3000):
        chk = spot_check(cfg.sequence, sample, PrecisionBudget(), fraction=0.02, seed=3)
        assert chk.checked == 60
        assert chk.ok and chk.max_units <= 1

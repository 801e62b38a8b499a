"""Seeded Monte Carlo experiments over the dilation parameter alpha.

Every random draw comes from a Philox counter-based generator keyed by
``(seed, N, sample index)``, so each sample is reproducible on its own and the
results do not depend on the order or the number of worker threads.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .counting import FitResult, fit_exponent
from .errors import BudgetExceeded
from .reals import ExactReal, Real, to_real
from .sequences import (
    LacunarySpec,
    PrecisionBudget,
    TorusSample,
    fractional_part_terms,
    fractional_parts,
    materialize,
)
from .statistics import c_k_factor, correlation_direct, gap_profile
from .testfn import TestFunction, triangle

__all__ = [
    "AlphaLaw",
    "ExperimentConfig",
    "CorrelationRow",
    "GapRow",
    "VarianceEstimate",
    "VarianceLadder",
    "sample_stream",
    "draw_alpha",
    "torus_samples",
    "estimate_seconds",
    "run_correlation_experiment",
    "run_gap_experiment",
    "run_variance_ladder",
    "variance_estimate",
    "gap_summary",
    "SpotCheck",
    "spot_check",
]

_ALPHA_BITS = 53


def _psi(t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=np.float64)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def _smooth_step(t: np.ndarray) -> np.ndarray:
    """C-infinity step: 0 for ``t <= 0``, 1 for ``t >= 1``."""
    a = _psi(t)
    return a / (a + _psi(1.0 - np.asarray(t, dtype=np.float64)))


@dataclass(frozen=True)
class AlphaLaw:
    """Distribution of alpha.

    ``uniform``: uniform on ``J = [lo, hi]``.
    ``weighted``: uniform on ``[lo - margin, hi + margin]`` with weights
    ``rho``, a smooth window equal to 1 on ``J``.
    ``fixed``: the listed values, cycled by sample index (weights 1).
    """

    kind: str = "uniform"
    lo: Fraction = Fraction(1)
    hi: Fraction = Fraction(2)
    margin: Fraction = Fraction(0)
    values: tuple = ()

    def __post_init__(self) -> None:
        if self.kind not in ("uniform", "weighted", "fixed"):
            raise ValueError(f"unknown alpha law {self.kind!r}")
        object.__setattr__(self, "lo", Fraction(self.lo))
        object.__setattr__(self, "hi", Fraction(self.hi))
        object.__setattr__(self, "margin", Fraction(self.margin))
        if self.kind == "fixed":
            if not self.values:
                raise ValueError("fixed alpha law needs values")
            object.__setattr__(self, "values", tuple(to_real(v) for v in self.values))
            return
        if not self.lo < self.hi:
            raise ValueError("alpha window needs lo < hi")
        if self.kind == "weighted" and self.margin <= 0:
            raise ValueError("weighted law needs a positive margin")
        if self.support[0] <= 0:
            raise ValueError("alpha window must stay positive")

    @classmethod
    def uniform(cls, lo=1, hi=2) -> "AlphaLaw":
        return cls("uniform", Fraction(lo), Fraction(hi))

    @classmethod
    def weighted(cls, lo=1, hi=2, margin=Fraction(1, 4)) -> "AlphaLaw":
        return cls("weighted", Fraction(lo), Fraction(hi), Fraction(margin))

    @classmethod
    def fixed(cls, values) -> "AlphaLaw":
        return cls("fixed", values=tuple(values))

    @property
    def support(self) -> tuple[Fraction, Fraction]:
        return self.lo - self.margin, self.hi + self.margin

    @property
    def measure(self) -> float:
        """Length of the sampling interval (1 for ``fixed``)."""
        if self.kind == "fixed":
            return 1.0
        a, b = self.support
        return float(b - a)

    def rho(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if self.kind != "weighted":
            return np.ones_like(x)
        m = float(self.margin)
        left = _smooth_step((x - float(self.lo - self.margin)) / m)
        right = _smooth_step((float(self.hi + self.margin) - x) / m)
        return left * right

    def __str__(self) -> str:
        if self.kind == "fixed":
            return "fixed(" + ",".join(str(v) for v in self.values) + ")"
        if self.kind == "uniform":
            return f"uniform[{self.lo},{self.hi}]"
        return f"weighted[{self.lo},{self.hi}]+-{self.margin}"


@dataclass(frozen=True)
class ExperimentConfig:
    sequence: LacunarySpec
    N_ladder: tuple[int, ...]
    k_list: tuple[int, ...] = (2,)
    alpha_law: AlphaLaw = field(default_factory=AlphaLaw)
    samples_per_N: int = 10
    seed: int = 0
    test_function: TestFunction = field(default_factory=triangle)
    eta_slack: float = 0.3
    budget: PrecisionBudget = field(default_factory=PrecisionBudget)
    budget_seconds: float | None = None
    threads: int = 1

    def __post_init__(self) -> None:
        ladder = tuple(int(n) for n in self.N_ladder)
        object.__setattr__(self, "N_ladder", ladder)
        object.__setattr__(self, "k_list", tuple(int(k) for k in self.k_list))
        if not ladder or any(b <= a for a, b in zip(ladder, ladder[1:])):
            raise ValueError("N_ladder must be strictly increasing")
        if self.samples_per_N < 2:
            raise ValueError("samples_per_N must be >= 2")
        if any(k < 2 or k > 4 for k in self.k_list):
            raise ValueError("k must lie in 2..4")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")

    def test_function_for(self, k: int) -> TestFunction:
        tf = self.test_function
        if tf.dim == k - 1:
            return tf
        if tf.family == "box" and tf.bounds and len(set(tf.bounds)) > 1:
            raise ValueError("asymmetric box cannot be extended to another dimension")
        bounds = (tf.bounds[0],) * (k - 1) if tf.bounds else ()
        return TestFunction(tf.family, k - 1, tf.support, tf.scale, bounds)


# -- randomness --------------------------------------------------------------


def sample_stream(seed: int, N: int, index: int) -> np.random.Generator:
    """Philox stream for sample ``index`` at size ``N``."""
    ss = np.random.SeedSequence(seed, spawn_key=(int(N), int(index)))
    return np.random.Generator(np.random.Philox(ss))


def draw_alpha(cfg: ExperimentConfig, N: int, index: int) -> tuple[Real, float]:
    """``(alpha, weight)`` for one sample; alpha is an exact dyadic-grid rational."""
    law = cfg.alpha_law
    if law.kind == "fixed":
        return law.values[index % len(law.values)], 1.0
    rng = sample_stream(cfg.seed, N, index)
    u = int(rng.integers(0, 1 << _ALPHA_BITS, dtype=np.uint64))
    a, b = law.support
    alpha = a + (b - a) * Fraction(u, 1 << _ALPHA_BITS)
    return ExactReal(alpha), float(law.rho(float(alpha)))


def _map(cfg: ExperimentConfig, fn: Callable, items: Sequence) -> list:
    if cfg.threads == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        return list(pool.map(fn, items))  # preserves input order


def torus_samples(cfg: ExperimentConfig, N: int) -> list[tuple[int, Real, float, TorusSample]]:
    """All samples at size ``N`` as ``(index, alpha, weight, sample)``, in index order."""
    # materialize once so every sample (and worker thread) shares the enclosures
    values = materialize(cfg.sequence, N, cfg.budget,
                frac_bits=cfg.budget.target_fraction_bits + cfg.budget.guard_bits
                + _max_alpha_bits(cfg))

    def one(i: int):
        alpha, w = draw_alpha(cfg, N, i)
        return i, alpha, w, fractional_parts(cfg.sequence, alpha, N, cfg.budget, values=values)

    return _map(cfg, one, list(range(cfg.samples_per_N)))


def _max_alpha_bits(cfg: ExperimentConfig) -> int:
    law = cfg.alpha_law
    if law.kind == "fixed":
        return max(v.magnitude_bits() for v in law.values)
    return max(0, math.floor(law.support[1]).bit_length())


# -- budget ----------------------------------------------------------------

# per point and sample: fractional part, sorting, neighbour scan
_SEC_PER_POINT = 6e-6
# per point, sample and k: neighbour-chain evaluation, grows with L^(k-1)
_SEC_PER_POINT_K = 2e-6


def estimate_seconds(cfg: ExperimentConfig, ks: Sequence[int] | None = None) -> float:
    """Rough wall-clock prediction used to refuse oversized runs up front."""
    ks = cfg.k_list if ks is None else ks
    L = cfg.test_function.support
    total = 0.0
    for N in cfg.N_ladder:
        per = _SEC_PER_POINT + sum(_SEC_PER_POINT_K * (2 * L) ** (k - 1) for k in ks)
        total += cfg.samples_per_N * N * per
    N_max = cfg.N_ladder[-1]
    bits = cfg.sequence.log2_upper(N_max)
    total += N_max * max(bits, 1.0) * 2e-9  # one materialization pass
    return total


def _check_budget(cfg: ExperimentConfig, ks: Sequence[int] | None = None) -> float:
    est = estimate_seconds(cfg, ks)
    if cfg.budget_seconds is not None and est > cfg.budget_seconds:
        raise BudgetExceeded(f"predicted {est:.1f}s exceeds budget {cfg.budget_seconds:.1f}s")
    return est


# -- correlations ------------------------------------------------------------


@dataclass(frozen=True)
class CorrelationRow:
    k: int
    N: int
    sample: int
    alpha: float
    weight: float
    R: float
    deviation: float

    COLUMNS = ("k", "N", "sample", "alpha", "weight", "R", "deviation")

    def as_tuple(self) -> tuple:
        return (self.k, self.N, self.sample, self.alpha, self.weight, self.R, self.deviation)


Statistic = Callable[[TorusSample, int, TestFunction], float]


def _direct_statistic(sample: TorusSample, k: int, tf: TestFunction) -> float:
    return correlation_direct(sample, k, tf).value


def run_correlation_experiment(
    cfg: ExperimentConfig,
    statistic: Statistic | None = None,
    samples: dict | None = None,
    hook: Callable[[int, list], None] | None = None,
) -> list[CorrelationRow]:
    """``R_k`` for every ``N`` in the ladder, sample index, and ``k`` in ``k_list``.

    ``samples`` may carry precomputed :func:`torus_samples` output keyed by
    ``N``; ``statistic`` replaces the direct correlation sum (test hook);
    ``hook(N, batch)`` sees each batch of samples once.
    """
    _check_budget(cfg)
    stat = statistic or _direct_statistic
    rows: list[CorrelationRow] = []
    for N in cfg.N_ladder:
        batch = samples[N] if samples and N in samples else torus_samples(cfg, N)
        if hook is not None:
            hook(N, batch)
        for k in cfg.k_list:
            tf = cfg.test_function_for(k)
            target = c_k_factor(k, N) * tf.integral
            values = _map(cfg, lambda item: stat(item[3], k, tf), batch)
            for (i, alpha, w, _), R in zip(batch, values):
                rows.append(CorrelationRow(k, N, i, alpha.approx(), w, float(R), abs(float(R) - target)))
    return rows


# -- variance ----------------------------------------------------------------


@dataclass(frozen=True)
class VarianceEstimate:
    """Monte Carlo estimate of ``int (R_k - center)^2 rho(alpha) d alpha``."""

    k: int
    N: int
    num_samples: int
    mean_Rk: float
    variance: float
    standard_error: float
    center: float
    mean_weighted_deviation: float = 0.0
    mean_weight: float = 1.0
    measure: float = 1.0

    COLUMNS = ("k", "N", "num_samples", "mean_Rk", "variance", "standard_error", "center")

    def as_tuple(self) -> tuple:
        return (self.k, self.N, self.num_samples, self.mean_Rk, self.variance,
                self.standard_error, self.center)


def variance_estimate(
    k: int, N: int, values, weights, center: float, measure: float = 1.0
) -> VarianceEstimate:
    """Importance-free estimate ``|S| mean(rho (R - center)^2)`` with its standard error.

    ``values`` are ``R_k`` at alphas drawn uniformly on a set of length
    ``measure``; ``weights`` are ``rho`` at those alphas.
    """
    R = np.asarray(values, dtype=np.float64)
    w = np.asarray(weights, dtype=np.float64)
    n = R.size
    if n < 2 or w.size != n:
        raise ValueError("need at least two weighted values")
    terms = w * (R - center) ** 2
    var = measure * float(np.mean(terms))
    se = measure * float(np.std(terms, ddof=1)) / math.sqrt(n)
    wsum = float(w.sum())
    mean_R = float(np.dot(w, R) / wsum) if wsum > 0 else float(R.mean())
    return VarianceEstimate(
        k, N, n, mean_R, var, se, center,
        mean_weighted_deviation=float(np.mean(w * (R - center))),
        mean_weight=float(w.mean()),
        measure=measure,
    )


@dataclass(frozen=True)
class VarianceLadder:
    estimates: tuple[VarianceEstimate, ...]
    fit: FitResult | None
    eta_slack: float
    seed: int

    @property
    def slope(self) -> float | None:
        return None if self.fit is None else self.fit.slope

    @property
    def slope_stderr(self) -> float | None:
        return None if self.fit is None else self.fit.slope_stderr

    @property
    def slope_limit(self) -> float:
        """Declared ceiling ``-1 + eta_slack`` for the fitted slope."""
        return -1.0 + self.eta_slack

    def passes(self) -> bool:
        return self.fit is not None and self.fit.slope <= self.slope_limit


def run_variance_ladder(
    cfg: ExperimentConfig,
    k: int | None = None,
    statistic: Statistic | None = None,
    fit: bool = True,
    hook: Callable[[int, list], None] | None = None,
) -> VarianceLadder:
    """Variance of ``R_k`` about ``C_k(N) int f`` across the N ladder, plus a log-log slope.

    With ``fit=True`` a degenerate ladder (fewer than three positive
    variances) raises :class:`~lacunary.errors.DegenerateFit`.
    """
    k = cfg.k_list[0] if k is None else k
    sub = replace(cfg, k_list=(k,))
    rows = run_correlation_experiment(sub, statistic, hook=hook)
    tf = sub.test_function_for(k)
    ests = []
    for N in cfg.N_ladder:
        mine = [r for r in rows if r.N == N]
        center = c_k_factor(k, N) * tf.integral
        ests.append(variance_estimate(k, N, [r.R for r in mine], [r.weight for r in mine],
                                      center, cfg.alpha_law.measure))
    result = None
    if fit:
        pts = [(e.N, e.variance) for e in ests]
        errs = [e.standard_error / e.variance if e.variance > 0 else math.inf for e in ests]
        result = fit_exponent(pts, log_errors=errs)
    return VarianceLadder(tuple(ests), result, cfg.eta_slack, cfg.seed)


# -- gaps --------------------------------------------------------------------


@dataclass(frozen=True)
class GapRow:
    N: int
    sample: int
    alpha: float
    ks_distance: float
    degenerate: bool

    COLUMNS = ("N", "sample", "alpha", "ks_distance", "degenerate")

    def as_tuple(self) -> tuple:
        return (self.N, self.sample, self.alpha, self.ks_distance, int(self.degenerate))


def _is_degenerate(sample: TorusSample) -> bool:
    """Flag samples whose points collapse onto few distinct values."""
    return len(set(sample.numerators)) * 2 <= sample.N


def run_gap_experiment(cfg: ExperimentConfig, samples: dict | None = None) -> list[GapRow]:
    _check_budget(cfg, ks=())
    rows = []
    for N in cfg.N_ladder:
        batch = samples[N] if samples and N in samples else torus_samples(cfg, N)
        profiles = _map(cfg, lambda item: gap_profile(item[3]), batch)
        for (i, alpha, _, s), prof in zip(batch, profiles):
            rows.append(GapRow(N, i, alpha.approx(), prof.ks_distance, _is_degenerate(s)))
    return rows


def gap_summary(rows: Sequence[GapRow]) -> dict:
    """Per-N quantiles of the KS distance."""
    out = {}
    for N in sorted({r.N for r in rows}):
        ks = np.array([r.ks_distance for r in rows if r.N == N])
        out[str(N)] = {
            "mean": float(ks.mean()),
            "median": float(np.median(ks)),
            "q90": float(np.quantile(ks, 0.9)),
            "max": float(ks.max()),
            "degenerate": int(sum(r.degenerate for r in rows if r.N == N)),
        }
    return out


# -- precision spot check ------------------------------------------------------


@dataclass(frozen=True)
class SpotCheck:
    checked: int
    max_units: int
    seconds: float = field(default=0.0, compare=False)

    @property
    def ok(self) -> bool:
        return self.max_units <= 1


def spot_check(
    spec: LacunarySpec,
    sample: TorusSample,
    budget: PrecisionBudget,
    fraction: float = 0.01,
    seed: int = 0,
) -> SpotCheck:
    """Recompute a random ``fraction`` of the points at doubled working precision.

    Returns the largest circular difference in units of ``2**-t``.
    """
    t0 = time.perf_counter()
    t = sample.target_fraction_bits
    count = max(1, int(round(fraction * sample.N)))
    rng = sample_stream(seed, sample.N, 2**32 - 1)
    ns = sorted(int(n) + 1 for n in rng.choice(sample.N, size=count, replace=False))
    fresh = fractional_part_terms(spec, sample.alpha, ns, budget.doubled())
    mod = 1 << t
    worst = 0
    for n, r in zip(ns, fresh):
        d = (sample.numerators[n - 1] - r) % mod
        worst = max(worst, min(d, mod - d))
    return SpotCheck(count, worst, time.perf_counter() - t0)

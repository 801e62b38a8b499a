"""The acceptance suite: ten numbered criteria with full and quick sizes.

Each criterion returns a :class:`CriterionResult` made of named checks
``value <op> threshold``.  Slack constants (``eta_slack`` on the variance
exponent, ``slope_slack`` on counting exponents, the limit thresholds) are
declared here and echoed in every output.
"""

from __future__ import annotations

import filecmp
import math
import tempfile
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable

import numpy as np

from .counting import (
    MainLemmaInstance,
    QuadrupleInstance,
    count_main_lemma,
    count_quadruples,
    fit_exponent,
)
from .experiments import (
    AlphaLaw,
    ExperimentConfig,
    gap_summary,
    run_correlation_experiment,
    run_gap_experiment,
    run_variance_ladder,
    sample_stream,
    spot_check,
    torus_samples,
)
from .sequences import LacunarySpec, PrecisionBudget, fractional_parts, interval_count
from .statistics import correlation_direct, correlation_naive, correlation_poisson_k2
from .tables import Table, write_json
from .testfn import TestFunction, box, triangle

__all__ = ["VerifySettings", "Check", "CriterionResult", "run_verify", "write_outputs", "CRITERIA"]

# stream namespaces so criteria never share random draws
_NS_ORACLE = 1 << 40
_NS_POISSON = 2 << 40
_NS_INTERVALS = 3 << 40


@dataclass(frozen=True)
class VerifySettings:
    quick: bool = False
    seed: int = 20240601
    eta_slack: float = 0.3
    slope_slack: float = 0.5
    threads: int = 1
    budget: PrecisionBudget = field(default_factory=PrecisionBudget)

    def as_dict(self) -> dict:
        return {
            "quick": self.quick,
            "seed": self.seed,
            "eta_slack": self.eta_slack,
            "slope_slack": self.slope_slack,
            "target_fraction_bits": self.budget.target_fraction_bits,
            "guard_bits": self.budget.guard_bits,
        }


@dataclass(frozen=True)
class Check:
    label: str
    value: float
    op: str
    threshold: float

    @property
    def passed(self) -> bool:
        if isinstance(self.value, float) and math.isnan(self.value):
            return False
        return {"<": self.value < self.threshold,
                "<=": self.value <= self.threshold,
                ">=": self.value >= self.threshold,
                "==": self.value == self.threshold}[self.op]


@dataclass
class CriterionResult:
    number: int
    name: str
    checks: list[Check]
    seconds: float = 0.0
    note: str = ""

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        parts = "; ".join(f"{c.label}={c.value:.6g} {c.op} {c.threshold:.6g}" for c in self.checks)
        return f"[{status}] criterion {self.number} ({self.name}): {parts} [{self.seconds:.1f}s]"


class _Context:
    """Shared state: the samples of criteria 3-5 feed the spot check of criterion 9."""

    def __init__(self, settings: VerifySettings):
        self.settings = settings
        self.spot_worst = 0
        self.spot_checked = 0
        self.spot_done: set = set()

    def spot(self, spec: LacunarySpec, tag: str) -> Callable[[int, list], None]:
        s = self.settings

        def hook(N: int, batch: list) -> None:
            for i, _alpha, _w, sample in batch:
                key = (tag, N, i)
                if key in self.spot_done:
                    continue
                self.spot_done.add(key)
                res = spot_check(spec, sample, s.budget, 0.01, seed=s.seed)
                self.spot_checked += res.checked
                self.spot_worst = max(self.spot_worst, res.max_units)

        return hook


# -- 1: direct vs naive -----------------------------------------------------------


def _oracle_instance(seed: int, i: int, n_max: int):
    rng = sample_stream(seed, _NS_ORACLE, i)
    N = int(rng.integers(12, n_max + 1))
    k = int(rng.choice([2, 3]))
    # no sqrt(2): its even powers times a dyadic alpha can be exact integers
    base = ["3/2", "5/4", "sqrt(3)", "7/3"][int(rng.integers(0, 4))]
    alpha = Fraction(int(rng.integers(1 << 52, 1 << 53)), 1 << 52)
    L = float(rng.uniform(0.3, min(4.0, N / 2 - 0.5)))
    if rng.random() < 0.5:
        tf = triangle(k - 1, L)
    else:
        bounds = []
        for _ in range(k - 1):
            a, b = sorted(rng.uniform(-L, L, size=2))
            bounds.append((float(a), float(b)))
        tf = box(k - 1, L, bounds=bounds)
    sample = fractional_parts(LacunarySpec.geometric(base), alpha, N)
    return sample, k, tf


def criterion_1(s: VerifySettings, ctx: _Context) -> CriterionResult:
    count, n_max = (12, 120) if s.quick else (50, 300)
    worst = 0.0
    for i in range(count):
        sample, k, tf = _oracle_instance(s.seed, i, n_max)
        d = correlation_direct(sample, k, tf).value
        n = correlation_naive(sample, k, tf).value
        err = abs(d - n) / abs(n) if n else (0.0 if d == 0 else math.inf)
        worst = max(worst, err)
    return CriterionResult(1, "direct vs naive oracle", [
        Check(f"max relative error over {count} instances", worst, "<=", 1e-9)])


# -- 2: Poisson summation ------------------------------------------------------------


def criterion_2(s: VerifySettings, ctx: _Context) -> CriterionResult:
    count, lo, hi = (4, 100, 400) if s.quick else (20, 200, 2000)
    worst_excess = -math.inf
    worst_diff = 0.0
    for i in range(count):
        rng = sample_stream(s.seed, _NS_POISSON, i)
        N = int(rng.integers(lo, hi + 1))
        L = float(rng.uniform(0.5, 2.0))
        alpha = Fraction(int(rng.integers(1 << 52, 1 << 53)), 1 << 52)
        sample = fractional_parts(LacunarySpec.geometric("3/2"), alpha, N, s.budget)
        tf = triangle(1, L)
        direct = correlation_direct(sample, 2, tf).value
        pois = correlation_poisson_k2(sample, tf, truncation=50 * N)
        diff = abs(pois.value - direct)
        worst_diff = max(worst_diff, diff)
        worst_excess = max(worst_excess, diff - pois.tail_bound)
    return CriterionResult(2, "Poisson summation identity, k=2", [
        Check("max |poisson - direct| - tail_bound", worst_excess, "<=", 1e-6),
    ], note=f"max |poisson - direct| = {worst_diff:.3g}")


# -- 3, 4: limits and spacing ----------------------------------------------------------


def _limit_config(s: VerifySettings) -> tuple[ExperimentConfig, float]:
    N, samples = (5000, 4) if s.quick else (20000, 10)
    cfg = ExperimentConfig(
        LacunarySpec.geometric("3/2"), (N,), (2, 3), AlphaLaw.uniform(1, 2), samples,
        s.seed, triangle(1, 1.0), s.eta_slack, s.budget, None, s.threads,
    )
    # fluctuations scale like N^-1/2; quick thresholds are widened accordingly
    return cfg, math.sqrt(20000 / N)


def _limit_samples(s: VerifySettings, ctx: _Context):
    if not hasattr(ctx, "limit_samples"):
        cfg, widen = _limit_config(s)
        N = cfg.N_ladder[0]
        batch = torus_samples(cfg, N)
        ctx.spot(cfg.sequence, "limits")(N, batch)
        ctx.limit_samples = (cfg, widen, {N: batch})
    return ctx.limit_samples


def criterion_3(s: VerifySettings, ctx: _Context) -> CriterionResult:
    cfg, widen, samples = _limit_samples(s, ctx)
    rows = run_correlation_experiment(cfg, samples=samples)
    checks = []
    for k, limit in ((2, 0.05), (3, 0.1)):
        dev = float(np.mean([r.deviation for r in rows if r.k == k]))
        checks.append(Check(f"mean |R{k} - C{k}(N) int f|", dev, "<", limit * widen))
    return CriterionResult(3, "Poissonian correlations", checks,
                           note=f"N={cfg.N_ladder[0]}, samples={cfg.samples_per_N}, "
                                f"f={cfg.test_function.family}, alpha {cfg.alpha_law}")


def criterion_4(s: VerifySettings, ctx: _Context) -> CriterionResult:
    cfg, widen, samples = _limit_samples(s, ctx)
    summ = gap_summary(run_gap_experiment(cfg, samples=samples))[str(cfg.N_ladder[0])]
    return CriterionResult(4, "spacing law", [
        Check("mean KS distance", summ["mean"], "<", 0.02 * widen),
        Check("max KS distance", summ["max"], "<", 0.05 * widen),
    ])


# -- 5: variance decay ------------------------------------------------------------------


def _variance_config(s: VerifySettings, seed: int) -> ExperimentConfig:
    ladder, samples = ((256, 512, 1024, 2048), 60) if s.quick else ((512, 1024, 2048, 4096), 200)
    return ExperimentConfig(
        LacunarySpec.geometric("3/2"), ladder, (2,), AlphaLaw.uniform(1, 2), samples,
        seed, triangle(1, 1.0), s.eta_slack, s.budget, None, s.threads,
    )


def criterion_5(s: VerifySettings, ctx: _Context) -> CriterionResult:
    fits = []
    for seed in (s.seed, s.seed + 1):
        cfg = _variance_config(s, seed)
        lad = run_variance_ladder(cfg, hook=ctx.spot(cfg.sequence, f"variance-{seed}"))
        fits.append(lad)
    a, b = fits
    combined = math.hypot(a.slope_stderr, b.slope_stderr)
    return CriterionResult(5, "variance decay", [
        Check("fitted slope (seed A)", a.slope, "<=", a.slope_limit),
        Check("fitted slope (seed B)", b.slope, "<=", b.slope_limit),
        Check("|slope A - slope B| / combined SE", abs(a.slope - b.slope) / combined, "<=", 3.0),
    ], note=f"SE A={a.slope_stderr:.4g}, SE B={b.slope_stderr:.4g}, "
            f"f={cfg.test_function.family}, alpha {cfg.alpha_law}")


# -- 6: interval counts ---------------------------------------------------------------------


def criterion_6(s: VerifySettings, ctx: _Context) -> CriterionResult:
    violations = 0
    worst = -math.inf
    n_terms = 60
    per_seq = 250 if s.quick else 500
    for j, base in enumerate(("2", "13/10")):
        spec = LacunarySpec.geometric(base)
        C = spec.interval_constant()
        top = spec.term_exact(n_terms)
        rng = sample_stream(s.seed, _NS_INTERVALS, j)
        for i in range(per_seq):
            if i % 2:
                lo = Fraction(float(np.exp(rng.uniform(np.log(0.5), np.log(float(top))))))
            else:
                lo = spec.term_exact(int(rng.integers(1, n_terms + 1)))  # left end on a term
            length = Fraction(float(np.exp(rng.uniform(np.log(1e-3), np.log(float(top))))))
            cnt = interval_count(spec, n_terms, lo, lo + length)
            bound = C * length + 1
            if cnt > bound:
                violations += 1
            worst = max(worst, float(cnt - bound))
    return CriterionResult(6, "interval count bound", [
        Check("violations of count <= C|I| + 1", violations, "==", 0),
        Check("max (count - C|I| - 1)", worst, "<=", 0.0),
    ])


# -- 7, 8: counting exponents ------------------------------------------------------------------


def criterion_7(s: VerifySettings, ctx: _Context) -> CriterionResult:
    ladder = (4, 8, 16) if s.quick else (4, 8, 16, 32)
    spec = LacunarySpec.geometric(2)
    pts, amb = [], 0
    for M in ladder:
        res = count_main_lemma(MainLemmaInstance(2, M, 2, spec))
        pts.append((M, res.count))
        amb += res.boundary_ambiguous
    fit = fit_exponent(pts)
    return CriterionResult(7, "main lemma exponent", [
        Check("fitted slope", fit.slope, "<=", 1.0 + s.slope_slack),
        Check("boundary ambiguous", amb, "==", 0),
    ], note=f"counts={pts}")


def criterion_8(s: VerifySettings, ctx: _Context) -> CriterionResult:
    ladder = (8, 12, 16) if s.quick else (8, 12, 16, 24)
    spec = LacunarySpec.geometric(2)
    eps = Fraction(1, 10)
    pts, amb = [], 0
    for N in ladder:
        res = count_quadruples(QuadrupleInstance(2, N, eps, spec))
        pts.append((N, res.count))
        amb += res.boundary_ambiguous
    fit = fit_exponent(pts)
    proved = 2 * 2 - 1 + 4 * 2 * float(eps)
    return CriterionResult(8, "quadruple count exponent", [
        Check("fitted slope", fit.slope, "<=", proved + s.slope_slack),
        Check("boundary ambiguous", amb, "==", 0),
    ], note=f"counts={pts}")


# -- 9: precision ----------------------------------------------------------------------------


def criterion_9(s: VerifySettings, ctx: _Context) -> CriterionResult:
    if not ctx.spot_done:
        _limit_samples(s, ctx)
        for seed in (s.seed, s.seed + 1):
            cfg = _variance_config(s, seed)
            hook = ctx.spot(cfg.sequence, f"variance-{seed}")
            for N in cfg.N_ladder:
                hook(N, torus_samples(cfg, N))
    return CriterionResult(9, "precision soundness", [
        Check("max change at doubled precision (units of 2^-t)", ctx.spot_worst, "<=", 1),
        Check("points spot-checked", ctx.spot_checked, ">=", 1),
    ], note=f"{len(ctx.spot_done)} samples")


# -- 10: determinism ---------------------------------------------------------------------------


def criterion_10(s: VerifySettings, ctx: _Context) -> CriterionResult:
    quick = VerifySettings(True, s.seed, s.eta_slack, s.slope_slack, s.threads, s.budget)
    with tempfile.TemporaryDirectory() as tmp:
        dirs = []
        for run in ("a", "b"):
            out = Path(tmp) / run
            results = run_verify(quick, only=range(1, 10))
            write_outputs(results, out, quick, manifest={})
            dirs.append(out)
        names = sorted(p.name for p in dirs[0].iterdir() if p.suffix in (".csv", ".json"))
        _, mismatch, errors = filecmp.cmpfiles(dirs[0], dirs[1], names, shallow=False)
    return CriterionResult(10, "determinism", [
        Check("differing CSV/JSON files", len(mismatch) + len(errors), "==", 0),
    ], note=f"compared {names}")


CRITERIA: dict[int, Callable[[VerifySettings, _Context], CriterionResult]] = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
    6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10,
}


def run_verify(
    settings: VerifySettings,
    only=None,
    report: Callable[[str], None] | None = None,
) -> list[CriterionResult]:
    """Run the selected criteria (all by default; quick mode skips 10)."""
    if only is None:
        only = range(1, 10) if settings.quick else range(1, 11)
    ctx = _Context(settings)
    out = []
    for n in only:
        t0 = time.perf_counter()
        res = CRITERIA[n](settings, ctx)
        res.seconds = time.perf_counter() - t0
        out.append(res)
        if report:
            report(res.line())
    return out


def write_outputs(
    results: list[CriterionResult],
    out_dir: str | Path,
    settings: VerifySettings,
    manifest: dict,
) -> dict:
    """Write ``verify.csv`` and ``summary.json``; wall-clock data goes to ``timings.txt``.

    The CSV/JSON files are a pure function of the settings so that repeated
    runs compare byte for byte.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    table = Table(("criterion", "name", "check", "value", "op", "threshold", "passed"))
    for r in results:
        for c in r.checks:
            table.append((r.number, r.name, c.label, _cell(c.value), c.op, _cell(c.threshold),
                          int(c.passed)))
    table.to_csv(out / "verify.csv")
    summary = {
        "all_passed": all(r.passed for r in results),
        "failed": [r.number for r in results if not r.passed],
        "criteria": [
            {
                "number": r.number,
                "name": r.name,
                "passed": r.passed,
                "note": r.note,
                "checks": [
                    {"label": c.label, "value": c.value, "op": c.op, "threshold": c.threshold,
                     "passed": c.passed}
                    for c in r.checks
                ],
            }
            for r in results
        ],
        "settings": settings.as_dict(),
        "manifest": manifest,
        "outputs": ["verify.csv", "summary.json"],
    }
    write_json(out / "summary.json", summary)
    with open(out / "timings.txt", "w") as fh:
        for r in results:
            fh.write(f"criterion {r.number}: {r.seconds:.3f} s\n")
    return summary


def _cell(x):
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)
    return x

"""Command-line entry point: ``lacunary <subcommand> --config FILE --out DIR``.

Exit codes: 0 success, 1 a computation failed or an assertion did not hold,
2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig, load_config, parse_config
from .counting import (
    MainLemmaInstance,
    QuadrupleInstance,
    RegionInstance,
    count_main_lemma,
    count_quadruples,
    count_region,
    fit_exponent,
)
from .errors import ConfigError, DegenerateFit, LacunaryError
from .experiments import (
    CorrelationRow,
    GapRow,
    VarianceEstimate,
    gap_summary,
    run_correlation_experiment,
    run_gap_experiment,
    run_variance_ladder,
    torus_samples,
)
from .reals import to_real
from .sequences import fractional_parts, materialize
from .statistics import (
    c_k_factor,
    correlation_direct,
    correlation_naive,
    correlation_poisson_k2,
    gap_profile,
)
from .tables import Table, gnuplot_script, plot_projection, write_json
from .verify import VerifySettings, run_verify, write_outputs

SUBCOMMANDS = ("materialize", "fracparts", "gaps", "correlate", "variance", "count", "ladder", "verify")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="lacunary",
        description="Fine-scale statistics of dilated lacunary sequences modulo one.",
    )
    sub = p.add_subparsers(dest="command", metavar="subcommand", required=True)
    helps = {
        "materialize": "enclose a_1..a_N and certify lacunarity",
        "fracparts": "certified fractional parts {alpha a_n}",
        "gaps": "normalized nearest-neighbour gaps and KS distance",
        "correlate": "k-level correlation sum for one alpha",
        "variance": "Monte Carlo variance ladder with fitted slope",
        "count": "exact counts for the admissible-vector families",
        "ladder": "correlations and gaps over an N ladder",
        "verify": "run the acceptance suite",
    }
    for name in SUBCOMMANDS:
        s = sub.add_parser(name, help=helps[name], description=helps[name])
        s.add_argument("--config", type=Path, required=name != "verify", help="INI config file")
        s.add_argument("--out", type=Path, default=Path("out"), help="output directory")
        s.add_argument("--seed", type=int, help="64-bit seed (overrides the config)")
        s.add_argument("--threads", type=int, default=None, help="worker thread cap")
        s.add_argument("--precision-bits", type=int, default=None,
                       help="guaranteed fractional bits of each point")
        s.add_argument("--budget-seconds", type=float, default=None,
                       help="refuse experiments predicted to take longer")
        s.add_argument("--ladder", action="store_true", help="count: run the doubling ladder")
        s.add_argument("--quick", action="store_true", help="verify: reduced sizes")
    return p


# -- helpers --------------------------------------------------------------------


def _manifest(cfg: RunConfig | None, args: argparse.Namespace, params: dict) -> dict:
    overrides = {
        k: v for k, v in (
            ("seed", args.seed), ("threads", args.threads),
            ("precision_bits", args.precision_bits), ("budget_seconds", args.budget_seconds),
        ) if v is not None
    }
    return {
        "tool_version": __version__,
        "subcommand": args.command,
        "config_hash": cfg.hash if cfg else None,
        "config": cfg.raw if cfg else {},
        "seed": params.get("seed", args.seed),
        "overrides": overrides,
        "params": params,
    }


def _finish(out: Path, summary: dict, started: datetime, t0: float) -> None:
    """Write ``summary.json`` (deterministic) and ``timings.txt`` (wall clock)."""
    write_json(out / "summary.json", summary)
    _finish_timings(out, started, t0)


def _finish_timings(out: Path, started: datetime, t0: float) -> None:
    ended = datetime.now(timezone.utc)
    with open(out / "timings.txt", "a") as fh:
        fh.write(f"start: {started.isoformat()}\n")
        fh.write(f"end: {ended.isoformat()}\n")
        fh.write(f"wall_seconds: {time.perf_counter() - t0:.3f}\n")


def _run_params(cfg: RunConfig) -> tuple[int, object]:
    n = cfg.typed("run", "n", int)
    if n is None:
        raise ConfigError("[run] N is required")
    alpha = cfg.get("run", "alpha")
    if alpha is None:
        raise ConfigError("[run] alpha is required")
    try:
        return n, to_real(alpha)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"[run] alpha: {exc}") from None


def _sample(cfg: RunConfig, args):
    N, alpha = _run_params(cfg)
    budget = cfg.budget(args.precision_bits)
    return N, alpha, fractional_parts(cfg.sequence(), alpha, N, budget)


# -- subcommands -----------------------------------------------------------------


def cmd_materialize(cfg: RunConfig, args, out: Path) -> tuple[int, dict]:
    N = cfg.typed("run", "n", int)
    if N is None:
        raise ConfigError("[run] N is required")
    spec = cfg.sequence()
    seq = materialize(spec, N, cfg.budget(args.precision_bits))
    table = Table(("n", "log2_value", "enclosure_width_ulps", "frac_bits"))
    for n in range(1, N + 1):
        lo, hi = seq.enclosure(n)
        table.append((n, _log2_int(lo) - seq.frac_bits, hi - lo, seq.frac_bits))
    table.to_csv(out / "sequence.csv")
    return 0, {"N": N, "sequence": str(spec), "lacunarity_certified": True,
               "interval_constant": str(spec.interval_constant()), "outputs": ["sequence.csv"]}


def _log2_int(x: int) -> float:
    if x <= 0:
        return -math.inf
    shift = max(0, x.bit_length() - 60)
    return math.log2(x >> shift) + shift


def cmd_fracparts(cfg: RunConfig, args, out: Path) -> tuple[int, dict]:
    N, alpha, sample = _sample(cfg, args)
    sample.to_csv(out / "points.csv")
    return 0, {"N": N, "alpha": str(alpha), "target_fraction_bits": sample.target_fraction_bits,
               "outputs": ["points.csv"]}


def cmd_gaps(cfg: RunConfig, args, out: Path) -> tuple[int, dict]:
    N, alpha, sample = _sample(cfg, args)
    prof = gap_profile(sample)
    table = Table(("rank", "point", "gap"))
    for i, (p, g) in enumerate(zip(prof.ordered_points, prof.gaps), start=1):
        table.append((i, float(p), float(g)))
    table.to_csv(out / "gaps.csv")
    bins = cfg.typed("run", "bins", int, 40)
    s_max = cfg.typed("run", "s_max", float, 8.0)
    doc = prof.to_json(bins, s_max)
    doc.update({"alpha": str(alpha), "outputs": ["gaps.csv"]})
    return 0, doc


def cmd_correlate(cfg: RunConfig, args, out: Path) -> tuple[int, dict]:
    N, alpha, sample = _sample(cfg, args)
    k = cfg.typed("run", "k", int, 2)
    tf = cfg.test_function(k)
    method = cfg.get("run", "method", "direct")
    if method == "direct":
        est = correlation_direct(sample, k, tf)
    elif method == "naive":
        est = correlation_naive(sample, k, tf)
    elif method == "poisson":
        if k != 2:
            raise ConfigError("[run] method=poisson needs k = 2")
        T = cfg.typed("run", "truncation", int, 50 * N)
        est = correlation_poisson_k2(sample, tf, T)
    else:
        raise ConfigError(f"[run] method: unknown method {method!r}")
    table = Table(("k", "N", "alpha", "method", "value", "tail_bound", "seconds"))
    table.append((k, N, alpha.approx(), est.method, est.value, est.tail_bound, est.seconds))
    table.to_csv(out / "correlation.csv")
    return 0, {"k": k, "N": N, "alpha": str(alpha), "method": est.method, "value": est.value,
               "reference": c_k_factor(k, N) * tf.integral,
               "deviation": est.deviation(), "test_function": str(tf),
               "outputs": ["correlation.csv"]}


def _experiment(cfg: RunConfig, args):
    return cfg.experiment(seed=args.seed, threads=args.threads,
                          precision_bits=args.precision_bits,
                          budget_seconds=args.budget_seconds)


def cmd_variance(cfg: RunConfig, args, out: Path) -> tuple[int, dict]:
    exp = _experiment(cfg, args)
    lad = run_variance_ladder(exp, fit=False)
    table = Table(VarianceEstimate.COLUMNS, (e.as_tuple() for e in lad.estimates))
    table.to_csv(out / "variance.csv")
    plot_projection(table, "N", "variance", "k").to_csv(out / "plot.csv")
    (out / "plot.gp").write_text(gnuplot_script("plot.csv", "variance of R_k", "N", "V", True))
    doc = {"seed": exp.seed, "eta_slack": exp.eta_slack, "slope_limit": -1.0 + exp.eta_slack,
           "test_function": str(exp.test_function_for(exp.k_list[0])),
           "alpha_law": str(exp.alpha_law), "outputs": ["variance.csv", "plot.csv", "plot.gp"]}
    try:
        pts = [(e.N, e.variance) for e in lad.estimates]
        errs = [e.standard_error / e.variance if e.variance > 0 else math.inf for e in lad.estimates]
        fit = fit_exponent(pts, log_errors=errs)
    except DegenerateFit as exc:
        doc.update({"slope": None, "passed": False, "error": str(exc)})
        return 1, doc
    passed = fit.slope <= -1.0 + exp.eta_slack
    doc.update({"slope": fit.slope, "slope_stderr": fit.slope_stderr, "intercept": fit.intercept,
                "residual": fit.residual, "passed": passed})
    return (0 if passed else 1), doc


def cmd_ladder(cfg: RunConfig, args, out: Path) -> tuple[int, dict]:
    exp = _experiment(cfg, args)
    samples = {N: torus_samples(exp, N) for N in exp.N_ladder}
    rows = run_correlation_experiment(exp, samples=samples)
    corr = Table(CorrelationRow.COLUMNS, (r.as_tuple() for r in rows))
    corr.to_csv(out / "correlation.csv")
    gaps = run_gap_experiment(exp, samples=samples)
    Table(GapRow.COLUMNS, (g.as_tuple() for g in gaps)).to_csv(out / "gaps.csv")
    plot_projection(corr, "N", "deviation", "k").to_csv(out / "plot.csv")
    (out / "plot.gp").write_text(
        gnuplot_script("plot.csv", "|R_k - C_k(N) int f|", "N", "deviation", True))
    means = {}
    for k in exp.k_list:
        for N in exp.N_ladder:
            means[f"k={k},N={N}"] = float(np.mean([r.deviation for r in rows
                                                    if r.k == k and r.N == N]))
    return 0, {"seed": exp.seed, "mean_deviation": means, "gaps": gap_summary(gaps),
               "test_functions": {str(k): str(exp.test_function_for(k)) for k in exp.k_list},
               "alpha_law": str(exp.alpha_law),
               "outputs": ["correlation.csv", "gaps.csv", "plot.csv", "plot.gp"]}


def _count_instance(cfg: RunConfig, family: str, size: int):
    g = lambda key, fn, default=None: cfg.typed("counting", key, fn, default)  # noqa: E731
    if family == "region":
        amps = [to_real(a) for a in cfg.get("counting", "amplitudes", "").split(",") if a.strip()]
        inst = RegionInstance(len(amps), tuple(amps), cfg.get("counting", "b", "0"),
                              cfg.get("counting", "c", "1"), size, g("d", int))
        return inst, count_region, ("region", inst.r, size, str(inst.C)), inst.r - 1
    if family == "main_lemma":
        inst = MainLemmaInstance(g("r", int, 2), size, cfg.get("counting", "k", "1"),
                                 cfg.sequence(), cfg.get("counting", "mode",
                                                         "distinct_z_nonzero_y"))
        return inst, count_main_lemma, ("main_lemma", inst.r, size, str(inst.K)), inst.r - 1
    if family == "quadruples":
        inst = QuadrupleInstance(g("k", int, 2), size, Fraction(cfg.get("counting", "epsilon",
                                                                        "1/10")),
                                 cfg.sequence())
        k, eps = inst.k, float(inst.epsilon)
        return inst, count_quadruples, ("quadruples", k, size, str(inst.epsilon)), 2 * k - 1 + 4 * k * eps
    raise ConfigError(f"[counting] family: unknown family {family!r}")


def cmd_count(cfg: RunConfig, args, out: Path) -> tuple[int, dict]:
    family = cfg.get("counting", "family", "main_lemma")
    size_key = "n" if family == "quadruples" else "m"
    if args.ladder:
        sizes = cfg.typed("counting", "ladder", lambda t: [int(x) for x in t.replace(",", " ").split()])
        if not sizes:
            raise ConfigError("[counting] ladder is required with --ladder")
    else:
        size = cfg.typed("counting", size_key, int)
        if size is None:
            raise ConfigError(f"[counting] {size_key} is required")
        sizes = [size]
    table = Table(("family", "r_or_k", "M_or_N", "K_or_eps", "count", "boundary_ambiguous",
                   "seconds"))
    pts, ambiguous, proved = [], 0, None
    try:
        for size in sizes:
            inst, fn, head, proved = _count_instance(cfg, family, size)
            res = fn(inst)
            table.append((*head, res.count, res.boundary_ambiguous, res.seconds))
            pts.append((size, res.count))
            ambiguous += res.boundary_ambiguous
    except ValueError as exc:
        raise ConfigError(f"[counting] {exc}") from None
    doc = {"family": family, "counts": pts, "boundary_ambiguous": ambiguous,
           "outputs": ["counts.csv"]}
    code = 0 if ambiguous == 0 else 1
    if args.ladder:
        slack = cfg.typed("counting", "slope_slack", float, 0.5)
        try:
            fit = fit_exponent(pts)
        except DegenerateFit as exc:
            doc.update({"slope": None, "passed": False, "error": str(exc)})
            table.to_csv(out / "counts.csv")
            return 1, doc
        table.append((f"{family}_slope", None, None, None, fit.slope, ambiguous, None))
        passed = fit.slope <= proved + slack and ambiguous == 0
        doc.update({"slope": fit.slope, "proved_exponent": proved, "slope_slack": slack,
                    "passed": passed})
        code = 0 if passed else 1
    table.to_csv(out / "counts.csv")
    return code, doc


def cmd_verify(cfg: RunConfig | None, args, out: Path) -> tuple[int, dict]:
    kw = {}
    if cfg is not None:
        for key in ("eta_slack", "slope_slack"):
            v = cfg.typed("verify", key, float)
            if v is not None:
                kw[key] = v
        v = cfg.typed("verify", "seed", int)
        if v is not None:
            kw["seed"] = v
        kw["budget"] = cfg.budget(args.precision_bits)
    if args.seed is not None:
        kw["seed"] = args.seed
    settings = VerifySettings(quick=args.quick, threads=args.threads or 1, **kw)
    results = run_verify(settings, report=print)
    summary = write_outputs(results, out, settings, _manifest(cfg, args, {"seed": settings.seed}))
    with open(out / "timings.txt", "a") as fh:
        fh.write(f"total: {sum(r.seconds for r in results):.3f} s\n")
    return (0 if summary["all_passed"] else 1), summary


COMMANDS = {
    "materialize": cmd_materialize,
    "fracparts": cmd_fracparts,
    "gaps": cmd_gaps,
    "correlate": cmd_correlate,
    "variance": cmd_variance,
    "count": cmd_count,
    "ladder": cmd_ladder,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed usage
        return int(exc.code or 0)
    out: Path = args.out
    started = datetime.now(timezone.utc)
    t0 = time.perf_counter()
    try:
        cfg = load_config(args.config) if args.config else None
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "verify":
            code, _ = cmd_verify(cfg, args, out)
            _finish_timings(out, started, t0)
            return code
        code, doc = COMMANDS[args.command](cfg, args, out)
    except ConfigError as exc:
        print(f"lacunary: configuration error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 2
    except LacunaryError as exc:
        print(f"lacunary: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    doc["manifest"] = _manifest(cfg, args, {"seed": doc.get("seed", args.seed)})
    doc["exit_code"] = code
    (out / "timings.txt").write_text("")
    _finish(out, doc, started, t0)
    return code


def run() -> None:  # console-script entry
    sys.exit(main())


__all__ = ["main", "build_parser", "parse_config", "SUBCOMMANDS"]

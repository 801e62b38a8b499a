"""INI-style run configuration with strict key checking.

Example::

    [sequence]
    kind = geometric
    base = 3/2

    [precision]
    target_fraction_bits = 64

    [test_function]
    family = triangle
    support = 1          ; in units of the mean spacing 1/N

    [experiment]
    N_ladder = 512, 1024, 2048
    samples_per_N = 50
    seed = 7

Unknown sections or keys raise :class:`~lacunary.errors.ConfigError`.
"""

from __future__ import annotations

import configparser
import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .errors import ConfigError
from .experiments import AlphaLaw, ExperimentConfig
from .reals import to_real
from .sequences import LacunarySpec, PrecisionBudget, load_digit_string, load_values
from .testfn import TestFunction

__all__ = ["RunConfig", "load_config", "parse_config", "config_hash", "SCHEMA"]

SCHEMA: dict[str, set[str]] = {
    "sequence": {"kind", "base", "base_digits_file", "scale", "declared_ratio",
                 "perturbations", "values", "values_file"},
    "precision": {"target_fraction_bits", "guard_bits", "hard_cap_bits"},
    "test_function": {"family", "dim", "support", "scale", "bounds"},
    "run": {"n", "alpha", "k", "method", "truncation", "bins", "s_max"},
    "experiment": {"n_ladder", "k_list", "samples_per_n", "seed", "alpha_law", "alpha_lo",
                   "alpha_hi", "alpha_margin", "alpha_values", "eta_slack",
                   "budget_seconds", "threads"},
    "counting": {"family", "r", "m", "k", "n", "epsilon", "mode", "amplitudes", "b", "c",
                 "d", "ladder", "slope_slack"},
    "verify": {"eta_slack", "slope_slack", "seed"},
}


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.replace(",", " ").split())


def _items(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


@dataclass
class RunConfig:
    """Parsed configuration; ``raw`` keeps the normalized text values."""

    raw: dict[str, dict[str, str]]
    base_dir: Path = field(default_factory=Path.cwd)

    def section(self, name: str) -> dict[str, str]:
        return self.raw.get(name, {})

    def get(self, section: str, key: str, default=None):
        return self.section(section).get(key, default)

    def _err(self, section: str, key: str, exc: Exception) -> ConfigError:
        return ConfigError(f"[{section}] {key}: {exc}")

    def typed(self, section: str, key: str, fn, default=None):
        val = self.get(section, key)
        if val is None:
            return default
        try:
            return fn(val)
        except (ValueError, TypeError, ArithmeticError) as exc:
            raise self._err(section, key, exc) from None

    @property
    def hash(self) -> str:
        return config_hash(self.raw)

    # -- typed views ----------------------------------------------------

    def budget(self, precision_bits: int | None = None) -> PrecisionBudget:
        kw = {}
        for key in ("target_fraction_bits", "guard_bits", "hard_cap_bits"):
            v = self.typed("precision", key, int)
            if v is not None:
                kw[key] = v
        if precision_bits is not None:
            kw["target_fraction_bits"] = precision_bits
        try:
            return PrecisionBudget(**kw)
        except ValueError as exc:
            raise ConfigError(f"[precision] {exc}") from None

    def _path(self, text: str) -> Path:
        p = Path(text)
        return p if p.is_absolute() else self.base_dir / p

    def sequence(self) -> LacunarySpec:
        sec = self.section("sequence")
        if not sec:
            raise ConfigError("missing [sequence] section")
        kind = sec.get("kind", "geometric")
        try:
            if kind == "explicit":
                if "values_file" in sec:
                    values = load_values(self._path(sec["values_file"]))
                elif "values" in sec:
                    values = [to_real(v) for v in _items(sec["values"])]
                else:
                    raise ValueError("explicit sequence needs values or values_file")
                if "declared_ratio" not in sec:
                    raise ValueError("explicit sequence needs declared_ratio")
                return LacunarySpec.explicit(values, sec["declared_ratio"])
            if "base_digits_file" in sec:
                base = load_digit_string(self._path(sec["base_digits_file"]))
            elif "base" in sec:
                base = to_real(sec["base"])
            else:
                raise ValueError("missing base")
            scale = sec.get("scale", "1")
            if kind == "geometric":
                return LacunarySpec.geometric(base, scale, sec.get("declared_ratio"))
            if kind == "integer_geometric":
                b = base.exact
                if b is None or b.denominator != 1:
                    raise ValueError("integer_geometric needs an integer base")
                return LacunarySpec.integer_geometric(int(b), scale)
            if kind == "perturbed_geometric":
                pert = [Fraction(p) for p in _items(sec.get("perturbations", ""))]
                return LacunarySpec.perturbed_geometric(
                    base, pert, sec.get("declared_ratio", str(base)), scale
                )
        except ConfigError:
            raise
        except (ValueError, TypeError, OSError, ArithmeticError) as exc:
            raise ConfigError(f"[sequence] {exc}") from None
        raise ConfigError(f"[sequence] kind: unknown kind {kind!r}")

    def test_function(self, k: int | None = None) -> TestFunction:
        sec = self.section("test_function")
        dim = self.typed("test_function", "dim", int, None)
        if dim is None:
            dim = 1 if k is None else k - 1
        bounds = ()
        if "bounds" in sec:
            try:
                bounds = tuple(
                    tuple(float(x) for x in item.split(":")) for item in _items(sec["bounds"])
                )
            except ValueError as exc:
                raise self._err("test_function", "bounds", exc) from None
        try:
            return TestFunction(
                sec.get("family", "triangle"),
                dim,
                self.typed("test_function", "support", float, 1.0),
                self.typed("test_function", "scale", float, 1.0),
                bounds,
            )
        except ValueError as exc:
            raise ConfigError(f"[test_function] {exc}") from None

    def alpha_law(self) -> AlphaLaw:
        kind = self.get("experiment", "alpha_law", "uniform")
        lo = self.typed("experiment", "alpha_lo", Fraction, Fraction(1))
        hi = self.typed("experiment", "alpha_hi", Fraction, Fraction(2))
        try:
            if kind == "uniform":
                return AlphaLaw.uniform(lo, hi)
            if kind == "weighted":
                margin = self.typed("experiment", "alpha_margin", Fraction, Fraction(1, 4))
                return AlphaLaw.weighted(lo, hi, margin)
            if kind == "fixed":
                return AlphaLaw.fixed(_items(self.get("experiment", "alpha_values", "")))
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"[experiment] alpha: {exc}") from None
        raise ConfigError(f"[experiment] alpha_law: unknown law {kind!r}")

    def experiment(
        self,
        *,
        seed: int | None = None,
        threads: int | None = None,
        precision_bits: int | None = None,
        budget_seconds: float | None = None,
    ) -> ExperimentConfig:
        ladder = self.typed("experiment", "n_ladder", _ints)
        if ladder is None:
            n = self.typed("run", "n", int)
            if n is None:
                raise ConfigError("[experiment] N_ladder is required")
            ladder = (n,)
        k_list = self.typed("experiment", "k_list", _ints, (2,))
        tf = self.test_function(k_list[0])
        if seed is None:
            seed = self.typed("experiment", "seed", int, 0)
        try:
            return ExperimentConfig(
                sequence=self.sequence(),
                N_ladder=ladder,
                k_list=k_list,
                alpha_law=self.alpha_law(),
                samples_per_N=self.typed("experiment", "samples_per_n", int, 10),
                seed=seed,
                test_function=tf,
                eta_slack=self.typed("experiment", "eta_slack", float, 0.3),
                budget=self.budget(precision_bits),
                budget_seconds=budget_seconds
                if budget_seconds is not None
                else self.typed("experiment", "budget_seconds", float),
                threads=threads or self.typed("experiment", "threads", int, 1),
            )
        except ValueError as exc:
            raise ConfigError(f"[experiment] {exc}") from None


def config_hash(raw: dict[str, dict[str, str]]) -> str:
    """SHA-256 of the canonical JSON form; independent of key and section order."""
    canon = json.dumps(raw, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def parse_config(text: str, base_dir: str | Path | None = None) -> RunConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"), interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    raw: dict[str, dict[str, str]] = {}
    for name in parser.sections():
        if name not in SCHEMA:
            raise ConfigError(f"unknown section [{name}]")
        sec = {}
        for key, value in parser.items(name):
            if key not in SCHEMA[name]:
                raise ConfigError(f"unknown key {key!r} in [{name}]")
            sec[key] = value.strip()
        raw[name] = sec
    return RunConfig(raw, Path(base_dir) if base_dir else Path.cwd())


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, path.parent)

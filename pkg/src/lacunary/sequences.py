"""Lacunary sequences and certified fractional parts of their dilations.

Values are held as scaled fixed-point integers: a term ``a_n`` at ``F``
fractional bits is the pair ``(lo, lo + width)`` with
``lo <= a_n * 2**F <= lo + width``.  Exactly known inputs take an exact
integer path (``width`` is 0 or 1); anything else goes through interval
binary exponentiation.  The integer part is never discarded before the
final multiplication by alpha.
"""

from __future__ import annotations

import csv
import math
import threading
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import gmpy2
import numpy as np

from .errors import (
    InsufficientDigits,
    LacunarityViolation,
    NearIntegerAmbiguity,
    PrecisionExhausted,
)
from .reals import ApproxReal, ExactReal, Real, from_digit_string, pow_enclosure, to_real

__all__ = [
    "LacunarySpec",
    "PrecisionBudget",
    "MaterializedSequence",
    "TorusSample",
    "materialize",
    "fractional_parts",
    "fractional_part_terms",
    "interval_count",
    "interval_constant",
    "load_values",
    "load_digit_string",
]

GEOMETRIC = "geometric"
INTEGER_GEOMETRIC = "integer_geometric"
PERTURBED_GEOMETRIC = "perturbed_geometric"
EXPLICIT = "explicit"
KINDS = (GEOMETRIC, INTEGER_GEOMETRIC, PERTURBED_GEOMETRIC, EXPLICIT)

_ONE = ExactReal(Fraction(1))


@dataclass(frozen=True)
class LacunarySpec:
    """Generator description of a lacunary sequence ``a_1, a_2, ...``.

    Geometric kinds produce ``a_n = scale * base**n`` (times ``1 + p`` for the
    perturbed kind, with ``p`` cycling through ``perturbations``).  Use the
    classmethod constructors rather than building instances by hand.
    """

    kind: str
    declared_ratio: Real
    base: Real | None = None
    scale: Real = _ONE
    perturbations: tuple[Fraction, ...] = ()
    values: tuple[Real, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown sequence kind {self.kind!r}")
        if self.declared_ratio.lower() <= 1:
            raise ValueError("declared_ratio must be certifiably > 1")
        if self.kind == EXPLICIT:
            if not self.values:
                raise ValueError("explicit sequence needs at least one value")
        else:
            if self.base is None:
                raise ValueError(f"{self.kind} sequence needs a base")
            if self.scale.lower() <= 0:
                raise ValueError("scale must be positive")
        if self.kind == INTEGER_GEOMETRIC:
            b = self.base.exact
            if b is None or b.denominator != 1 or b < 2:
                raise ValueError("integer_geometric base must be an integer >= 2")
        if self.kind == PERTURBED_GEOMETRIC:
            if not self.perturbations:
                raise ValueError("perturbed_geometric needs a perturbation table")
            if any(abs(p) >= 1 for p in self.perturbations):
                raise ValueError("perturbations must satisfy |p| < 1")
        if self.first_element_lower() <= 0:
            raise ValueError("first element must be positive")

    # -- constructors -----------------------------------------------------

    @classmethod
    def geometric(cls, base, scale=1, declared_ratio=None) -> "LacunarySpec":
        base = to_real(base)
        ratio = base if declared_ratio is None else to_real(declared_ratio)
        return cls(GEOMETRIC, ratio, base=base, scale=to_real(scale))

    @classmethod
    def integer_geometric(cls, base: int, scale=1) -> "LacunarySpec":
        b = to_real(base)
        return cls(INTEGER_GEOMETRIC, b, base=b, scale=to_real(scale))

    @classmethod
    def perturbed_geometric(cls, base, perturbations, declared_ratio, scale=1) -> "LacunarySpec":
        pert = tuple(Fraction(str(p)) if isinstance(p, float) else Fraction(p) for p in perturbations)
        return cls(
            PERTURBED_GEOMETRIC,
            to_real(declared_ratio),
            base=to_real(base),
            scale=to_real(scale),
            perturbations=pert,
        )

    @classmethod
    def explicit(cls, values, declared_ratio) -> "LacunarySpec":
        return cls(EXPLICIT, to_real(declared_ratio), values=tuple(to_real(v) for v in values))

    # -- term access ------------------------------------------------------

    @property
    def is_exact(self) -> bool:
        if self.kind == EXPLICIT:
            return all(v.exact is not None for v in self.values)
        return self.base.exact is not None and self.scale.exact is not None

    def max_terms(self) -> int | None:
        return len(self.values) if self.kind == EXPLICIT else None

    def _perturbation(self, n: int) -> Fraction:
        return self.perturbations[(n - 1) % len(self.perturbations)]

    def term_exact(self, n: int) -> Fraction | None:
        """Exact value of ``a_n`` (1-based) when all inputs are rational."""
        if not self.is_exact:
            return None
        if self.kind == EXPLICIT:
            return self.values[n - 1].exact
        value = self.scale.exact * self.base.exact**n
        if self.kind == PERTURBED_GEOMETRIC:
            value *= 1 + self._perturbation(n)
        return value

    def first_element_lower(self) -> Fraction:
        if self.kind == EXPLICIT:
            return self.values[0].lower()
        value = self.scale.lower() * self.base.lower()
        if self.kind == PERTURBED_GEOMETRIC:
            value *= 1 + self._perturbation(1)
        return value

    def log2_upper(self, n: int) -> float:
        """Upper bound for ``log2 a_n``; non-decreasing in ``n``."""
        if self.kind == EXPLICIT:
            top = max(v.upper() for v in self.values[:n])
            return math.log2(top) if top > 0 else 0.0
        extra = 0.0
        if self.kind == PERTURBED_GEOMETRIC:
            extra = math.log2(1 + max(self.perturbations))
        return n * math.log2(self.base.upper()) + math.log2(self.scale.upper()) + extra

    def enclose_term(self, n: int, bits: int) -> tuple[int, int]:
        """Enclosure of ``a_n * 2**bits``, computed afresh for this ``n``.

        Geometric powers go through binary exponentiation at enough extra
        bits to absorb the relative error growth of ``n`` multiplications.
        """
        if n < 1:
            raise ValueError("terms are 1-based")
        exact = self.term_exact(n)
        if exact is not None:
            num = exact.numerator << bits
            lo = num // exact.denominator
            return lo, lo + (lo * exact.denominator != num)
        if self.kind == EXPLICIT:
            return self.values[n - 1].enclose(bits)
        extra = max(0, math.ceil(self.log2_upper(n))) + n.bit_length() + 16
        wide = bits + extra
        plo, phi = pow_enclosure(self.base, n, wide)
        slo, shi = self.scale.enclose(wide)
        lo, hi = plo * slo, phi * shi
        scale_bits = 2 * wide
        if self.kind == PERTURBED_GEOMETRIC:
            p = 1 + self._perturbation(n)
            lo, hi = lo * p.numerator, hi * p.numerator
            lo, hi = lo // p.denominator, -((-hi) // p.denominator)
        shift = scale_bits - bits
        return lo >> shift, -((-hi) >> shift)

    # -- lacunarity ------------------------------------------------------

    def interval_constant(self) -> Fraction:
        """``C = (a_1 (1 - 1/c))**-1``, rounded up when inputs are inexact."""
        a1 = self.first_element_lower()
        c = self.declared_ratio.exact
        if c is None:
            c = self.declared_ratio.lower()
        return 1 / (a1 * (1 - 1 / c))

    def __str__(self) -> str:
        if self.kind == EXPLICIT:
            return f"explicit[{len(self.values)}]"
        return f"{self.kind}(base={self.base}, scale={self.scale})"


def interval_constant(spec: LacunarySpec) -> Fraction:
    return spec.interval_constant()


@dataclass(frozen=True)
class PrecisionBudget:
    """Bit budget for fixed-point evaluation of ``alpha * a_n``."""

    target_fraction_bits: int = 64
    guard_bits: int = 32
    hard_cap_bits: int = 1 << 22

    def __post_init__(self) -> None:
        if self.target_fraction_bits < 1 or self.guard_bits < 4:
            raise ValueError("target_fraction_bits >= 1 and guard_bits >= 4 required")

    def working_bits(self, n: int, spec: LacunarySpec, alpha_upper: float = 1.0) -> int:
        alpha_bits = math.ceil(math.log2(alpha_upper)) if alpha_upper > 1 else 0
        mag = max(0, math.ceil(spec.log2_upper(n)))
        return mag + alpha_bits + self.target_fraction_bits + self.guard_bits

    def doubled(self) -> "PrecisionBudget":
        """Budget whose fractional working bits are twice the current ones."""
        frac = self.target_fraction_bits + self.guard_bits
        return replace(self, guard_bits=self.guard_bits + frac)

    @property
    def width_allowance(self) -> int:
        """Largest tolerated enclosure width, in units of the last working bit."""
        return 1 << (self.guard_bits // 2)


@dataclass(frozen=True)
class MaterializedSequence:
    """Enclosures ``lo[i] <= a_{i+1} * 2**frac_bits <= lo[i] + width[i]``."""

    spec: LacunarySpec
    frac_bits: int
    lo: tuple
    width: tuple

    @property
    def N(self) -> int:
        return len(self.lo)

    def __len__(self) -> int:
        return len(self.lo)

    def enclosure(self, n: int) -> tuple[int, int]:
        lo = self.lo[n - 1]
        return int(lo), int(lo + self.width[n - 1])

    def value(self, n: int) -> Fraction:
        """Midpoint of the enclosure of ``a_n``."""
        lo, hi = self.enclosure(n)
        return Fraction(lo + hi, 2 << self.frac_bits)

    def prefix(self, N: int) -> "MaterializedSequence":
        if N > self.N:
            raise ValueError("prefix longer than materialized sequence")
        if N == self.N:
            return self
        return replace(self, lo=self.lo[:N], width=self.width[:N])

    def as_floats(self) -> np.ndarray:
        return np.array([float(self.value(n)) for n in range(1, self.N + 1)])

    def significant_bits(self, n: int) -> int:
        return int(self.lo[n - 1]).bit_length()


_cache: dict[tuple, MaterializedSequence] = {}
_cache_lock = threading.Lock()
_CACHE_SLOTS = 8


def _materialize_exact_geometric(spec: LacunarySpec, N: int, F: int) -> tuple[list, list]:
    c, A = spec.base.exact, spec.scale.exact
    p, q = gmpy2.mpz(c.numerator), gmpy2.mpz(c.denominator)
    s, t = gmpy2.mpz(A.numerator), gmpy2.mpz(A.denominator)
    P, Q = gmpy2.mpz(1), gmpy2.mpz(1)
    lo, width = [], []
    for n in range(1, N + 1):
        P *= p
        Q *= q
        num = (s * P) << F
        den = t * Q
        if spec.kind == PERTURBED_GEOMETRIC:
            pert = 1 + spec._perturbation(n)
            num *= pert.numerator
            den *= pert.denominator
        quo, rem = gmpy2.f_divmod(num, den)
        lo.append(quo)
        width.append(0 if rem == 0 else 1)
    return lo, width


def _materialize_terms(spec: LacunarySpec, N: int, F: int, budget: PrecisionBudget) -> tuple[list, list]:
    lo, width = [], []
    allowance = budget.width_allowance
    for n in range(1, N + 1):
        a, b = spec.enclose_term(n, F)
        if b - a > allowance:
            inexact = [r for r in (spec.base, spec.scale, *spec.values) if isinstance(r, ApproxReal)]
            err = InsufficientDigits if inexact else PrecisionExhausted
            raise err(
                f"a_{n} is only known to {b - a} units of 2^-{F}; "
                f"the supplied digits do not support N={N}"
            )
        lo.append(gmpy2.mpz(a))
        width.append(int(b - a))
    return lo, width


def _certify_lacunarity(spec: LacunarySpec, seq: MaterializedSequence) -> None:
    d = spec.declared_ratio
    if spec.kind in (GEOMETRIC, INTEGER_GEOMETRIC):
        # a_{n+1} = base * a_n holds by construction; only base >= d needs a check
        if d is spec.base or d == spec.base:
            return
        if spec.base.lower() >= d.upper():
            return
        if spec.base.upper() < d.lower():
            raise LacunarityViolation(f"base {spec.base} is below the declared ratio {d}")
        raise LacunarityViolation(f"cannot certify base {spec.base} >= declared ratio {d}")
    if spec.kind == PERTURBED_GEOMETRIC:
        N = min(seq.N, len(spec.perturbations) + 1)
        for n in range(1, N):
            factor = (1 + spec._perturbation(n + 1)) / (1 + spec._perturbation(n))
            if spec.base.exact is not None and d.exact is not None:
                if spec.base.exact * factor < d.exact:
                    raise LacunarityViolation(f"a_{n + 1}/a_{n} < {d}")
                continue
            if spec.base.lower() * factor >= d.upper():
                continue
            if spec.base.upper() * factor < d.lower():
                raise LacunarityViolation(f"a_{n + 1}/a_{n} < {d}")
            raise LacunarityViolation(f"cannot certify a_{n + 1}/a_{n} >= {d}")
        return
    # explicit values
    for n in range(1, seq.N):
        x, y = spec.term_exact(n), spec.term_exact(n + 1)
        if x is not None and y is not None and d.exact is not None:
            if y < d.exact * x:
                raise LacunarityViolation(
                    f"a_{n + 1}/a_{n} = {float(y / x):.6g} < declared ratio {float(d.exact):.6g}"
                )
            continue
        xlo, xhi = seq.enclosure(n)
        ylo, yhi = seq.enclosure(n + 1)
        if Fraction(ylo) >= d.upper() * xhi:
            continue
        if Fraction(yhi) < d.lower() * xlo:
            raise LacunarityViolation(f"a_{n + 1}/a_{n} below declared ratio {d}")
        raise LacunarityViolation(f"cannot certify a_{n + 1}/a_{n} >= {d}")


def materialize(
    spec: LacunarySpec,
    N: int,
    budget: PrecisionBudget | None = None,
    frac_bits: int | None = None,
) -> MaterializedSequence:
    """Enclose ``a_1 .. a_N`` at ``frac_bits`` fractional bits and certify lacunarity.

    ``frac_bits`` defaults to ``target_fraction_bits + guard_bits``.  Results
    are cached per ``(spec, frac_bits)``; shorter requests reuse a prefix.
    """
    budget = budget or PrecisionBudget()
    if N < 1:
        raise ValueError("N must be >= 1")
    cap = spec.max_terms()
    if cap is not None and N > cap:
        raise ValueError(f"explicit sequence has only {cap} terms, {N} requested")
    F = budget.target_fraction_bits + budget.guard_bits if frac_bits is None else frac_bits
    needed = max(0, math.ceil(spec.log2_upper(N))) + F
    if needed > budget.hard_cap_bits:
        raise PrecisionExhausted(
            f"a_{N} needs about {needed} bits, hard cap is {budget.hard_cap_bits}"
        )
    key = (spec, F, budget.guard_bits)
    with _cache_lock:
        hit = _cache.get(key)
    if hit is not None and hit.N >= N:
        return hit.prefix(N)

    if spec.is_exact and spec.kind != EXPLICIT:
        lo, width = _materialize_exact_geometric(spec, N, F)
    else:
        lo, width = _materialize_terms(spec, N, F, budget)
    seq = MaterializedSequence(spec, F, tuple(lo), tuple(width))
    _certify_lacunarity(spec, seq)
    with _cache_lock:
        if len(_cache) >= _CACHE_SLOTS:
            _cache.pop(next(iter(_cache)))
        _cache[key] = seq
    return seq


@dataclass(frozen=True)
class TorusSample:
    """Fractional parts ``{alpha a_n}``, ``n = 1..N``, as ``numerators / 2**bits``.

    Numerators are rounded to nearest on the circle, so a value within half a
    unit below 1 is stored as 0.
    """

    alpha: Real
    numerators: tuple[int, ...]
    target_fraction_bits: int = 64
    spec: LacunarySpec | None = None
    _points: np.ndarray = field(init=False, repr=False, compare=False)
    _phases: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        t = self.target_fraction_bits
        if t >= 64:
            phases = np.array([x >> (t - 64) for x in self.numerators], dtype=np.uint64)
        else:
            phases = np.array([x << (64 - t) for x in self.numerators], dtype=np.uint64)
        pts = phases.astype(np.float64) * 2.0**-64
        # uint64 -> float64 can round up to exactly 1.0
        pts[pts >= 1.0] = 0.0
        pts.setflags(write=False)
        phases.setflags(write=False)
        object.__setattr__(self, "_points", pts)
        object.__setattr__(self, "_phases", phases)

    @property
    def N(self) -> int:
        return len(self.numerators)

    @property
    def points(self) -> np.ndarray:
        """Points in ``[0, 1)`` as double precision."""
        return self._points

    @property
    def phases64(self) -> np.ndarray:
        """Top 64 fractional bits as ``uint64``; integer multiples reduce mod 1 exactly."""
        return self._phases

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "point"])
            for n, p in enumerate(self.points, start=1):
                w.writerow([n, repr(float(p))])


def _alpha_enclosure(alpha: Real, bits_needed: int) -> tuple[int, int, int]:
    if isinstance(alpha, ExactReal):
        e = alpha.dyadic_bits()
        if e is not None:
            m = alpha.value.numerator
            return m, m, e
    lo, hi = alpha.enclose(bits_needed)
    return lo, hi, bits_needed


def _round_fraction(L: int, H: int, S: int, t: int) -> int | None:
    """Nearest ``t``-bit numerator of the fractional part; None if the floor is undecided."""
    if (L >> S) != (H >> S):
        return None
    frac = ((L + H) >> 1) & ((1 << S) - 1)
    r = (frac + (1 << (S - t - 1))) >> (S - t)
    return 0 if r == 1 << t else r


def _term_fraction(spec: LacunarySpec, alpha: Real, n: int, budget: PrecisionBudget) -> int | None:
    t = budget.target_fraction_bits
    alpha_bits = alpha.magnitude_bits()
    F = t + budget.guard_bits + alpha_bits
    a_lo, a_hi = spec.enclose_term(n, F)
    mag = max(0, math.ceil(spec.log2_upper(n))) + 1
    al, ah, Fa = _alpha_enclosure(alpha, mag + t + budget.guard_bits + 1)
    return _round_fraction(al * a_lo, ah * a_hi, F + Fa, t)


def fractional_part_terms(
    spec: LacunarySpec, alpha, ns: Iterable[int], budget: PrecisionBudget | None = None
) -> list[int]:
    """Numerators of ``{alpha a_n}`` for selected ``n``, each term computed independently."""
    budget = budget or PrecisionBudget()
    alpha = to_real(alpha)
    out = []
    for n in ns:
        r = _term_fraction(spec, alpha, n, budget)
        if r is None:
            r = _term_fraction(spec, alpha, n, budget.doubled())
        if r is None:
            raise NearIntegerAmbiguity(f"alpha*a_{n} is too close to an integer to decide")
        out.append(r)
    return out


def fractional_parts(
    spec: LacunarySpec,
    alpha,
    N: int,
    budget: PrecisionBudget | None = None,
    *,
    values: MaterializedSequence | None = None,
) -> TorusSample:
    """Certified fractional parts ``{alpha a_n}`` for ``n = 1..N``.

    Each returned point is within ``2**-target_fraction_bits`` of the true
    fractional part (distance on the circle).  ``values`` may pass a
    pre-materialized sequence with enough fractional bits.
    """
    budget = budget or PrecisionBudget()
    alpha = to_real(alpha)
    if alpha.lower() <= 0:
        raise ValueError("alpha must be positive")
    if N < 1:
        raise ValueError("N must be >= 1")
    t = budget.target_fraction_bits
    F_needed = t + budget.guard_bits + alpha.magnitude_bits()
    if values is None or values.frac_bits < F_needed or values.N < N:
        values = materialize(spec, N, budget, frac_bits=F_needed)
    working = budget.working_bits(N, spec, float(alpha.upper()))
    if working > budget.hard_cap_bits:
        raise PrecisionExhausted(f"working precision {working} exceeds hard cap")
    F = values.frac_bits
    mag = max(0, math.ceil(spec.log2_upper(N))) + 1
    al, ah, Fa = _alpha_enclosure(alpha, mag + t + budget.guard_bits + 1)
    S = F + Fa
    max_width = 1 << (S - t - budget.guard_bits // 2 + 1)
    al, ah = gmpy2.mpz(al), gmpy2.mpz(ah)
    lo_list, width_list = values.lo, values.width
    numerators = []
    for i in range(N):
        lo = lo_list[i]
        L = al * lo
        H = ah * (lo + width_list[i])
        if H - L > max_width:
            raise PrecisionExhausted(f"enclosure of alpha*a_{i + 1} too wide")
        r = _round_fraction(L, H, S, t)
        if r is None:
            r = _term_fraction(spec, alpha, i + 1, budget.doubled())
            if r is None:
                raise NearIntegerAmbiguity(
                    f"alpha*a_{i + 1} is within 2^-{t} of an integer even at doubled precision"
                )
        numerators.append(int(r))
    return TorusSample(alpha, tuple(numerators), t, spec)


def interval_count(spec: LacunarySpec, N: int, lo, hi, budget: PrecisionBudget | None = None) -> int:
    """``#{1 <= n <= N : a_n in [lo, hi]}``, decided exactly or by enclosures."""
    lo_r, hi_r = to_real(lo), to_real(hi)
    if lo_r.lower() <= 0 or hi_r.upper() < lo_r.lower():
        raise ValueError("interval must satisfy 0 < lo <= hi")
    if spec.is_exact and lo_r.exact is not None and hi_r.exact is not None:
        a, b = lo_r.exact, hi_r.exact
        materialize(spec, N, budget)  # certifies lacunarity
        return sum(1 for n in range(1, N + 1) if a <= spec.term_exact(n) <= b)
    seq = materialize(spec, N, budget)
    F = seq.frac_bits
    llo, lhi = lo_r.enclose(F)
    hlo, hhi = hi_r.enclose(F)
    count = 0
    for n in range(1, N + 1):
        x, y = seq.enclosure(n)
        if x >= lhi and y <= hlo:
            count += 1
        elif y < llo or x > hhi:
            continue
        else:
            raise PrecisionExhausted(f"a_{n} too close to an interval endpoint to decide")
    return count


def load_values(path: str | Path) -> list[ExactReal]:
    """Decimal values, one per line; blank lines and ``#`` comments are skipped."""
    out = []
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            out.append(ExactReal(Fraction(line)))
    return out


def load_digit_string(path: str | Path) -> ApproxReal:
    """First value in a digit-string file, uncertain in its last printed place."""
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            return from_digit_string(line, label=Path(path).name)
    raise ValueError(f"{path}: no digits found")


def as_points(sample: TorusSample | Sequence[float] | np.ndarray) -> np.ndarray:
    """Double-precision points of a sample or a plain array (taken mod 1)."""
    if isinstance(sample, TorusSample):
        return sample.points
    pts = np.asarray(sample, dtype=np.float64)
    if pts.ndim != 1:
        raise ValueError("points must be one-dimensional")
    return np.mod(pts, 1.0)

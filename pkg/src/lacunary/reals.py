"""Real numbers with exact or certified-enclosure access.

Every quantity that enters a certified computation (the base of a geometric
sequence, the dilation alpha, amplitudes of a counting region) is wrapped in
a :class:`Real`.  A real is queried through :meth:`Real.enclose`, which
returns integers ``lo <= x * 2**bits <= hi``.  Exactly known rationals also
expose :attr:`Real.exact`, which lets callers switch to exact integer
arithmetic.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction

import gmpy2
import mpmath

__all__ = [
    "Real",
    "ExactReal",
    "ApproxReal",
    "SqrtReal",
    "ConstantReal",
    "to_real",
    "from_digit_string",
    "mul_enclosures",
    "pow_enclosure",
]


def _enclose_fraction(q: Fraction, bits: int) -> tuple[int, int]:
    num = q.numerator << bits if bits >= 0 else q.numerator
    den = q.denominator if bits >= 0 else q.denominator << (-bits)
    lo = num // den
    hi = lo if lo * den == num else lo + 1
    return lo, hi


class Real:
    """Abstract real number.  Subclasses implement :meth:`enclose`."""

    #: exact rational value when known, else ``None``
    exact: Fraction | None = None

    def enclose(self, bits: int) -> tuple[int, int]:
        raise NotImplementedError

    @property
    def available_bits(self) -> int | None:
        """Fractional bits beyond which enclosures stop tightening (None: unlimited)."""
        return None

    def lower(self) -> Fraction:
        lo, _ = self.enclose(64)
        return Fraction(lo, 1 << 64)

    def upper(self) -> Fraction:
        _, hi = self.enclose(64)
        return Fraction(hi, 1 << 64)

    def magnitude_bits(self) -> int:
        """Smallest ``e >= 0`` with ``|x| < 2**e``."""
        up = max(abs(self.upper()), abs(self.lower()))
        return max(0, math.floor(up).bit_length())

    def approx(self) -> float:
        lo, hi = self.enclose(80)
        return float(Fraction(lo + hi, 2 << 80))

    def __float__(self) -> float:
        return self.approx()


@dataclass(frozen=True)
class ExactReal(Real):
    value: Fraction

    @property
    def exact(self) -> Fraction:  # type: ignore[override]
        return self.value

    def enclose(self, bits: int) -> tuple[int, int]:
        return _enclose_fraction(self.value, bits)

    def lower(self) -> Fraction:
        return self.value

    def upper(self) -> Fraction:
        return self.value

    def dyadic_bits(self) -> int | None:
        """Number of fractional bits needed to represent the value exactly, if dyadic."""
        den = self.value.denominator
        if den & (den - 1):
            return None
        return den.bit_length() - 1

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True)
class ApproxReal(Real):
    """A real known only to lie in ``[center - radius, center + radius]``.

    This is how digit strings of irrational constants are represented: the
    digits are the center, and the last printed decimal place sets the radius.
    """

    center: Fraction
    radius: Fraction
    label: str = ""

    @property
    def available_bits(self) -> int | None:
        if self.radius == 0:
            return None
        return max(0, -math.ceil(math.log2(self.radius)))

    def enclose(self, bits: int) -> tuple[int, int]:
        lo, _ = _enclose_fraction(self.center - self.radius, bits)
        _, hi = _enclose_fraction(self.center + self.radius, bits)
        return lo, hi

    def lower(self) -> Fraction:
        return self.center - self.radius

    def upper(self) -> Fraction:
        return self.center + self.radius

    def __str__(self) -> str:
        return self.label or f"{float(self.center)}+-{float(self.radius)}"


@dataclass(frozen=True)
class SqrtReal(Real):
    radicand: Fraction

    def __post_init__(self) -> None:
        if self.radicand < 0:
            raise ValueError("negative radicand")

    def enclose(self, bits: int) -> tuple[int, int]:
        qlo, qhi = _enclose_fraction(self.radicand, 2 * bits)
        lo = int(gmpy2.isqrt(qlo))
        r = int(gmpy2.isqrt(qhi))
        hi = r if r * r == qhi else r + 1
        return lo, hi

    def __str__(self) -> str:
        return f"sqrt({self.radicand})"


_CONSTANTS = {"pi": lambda: mpmath.mp.pi, "e": lambda: mpmath.mp.e}


@dataclass(frozen=True)
class ConstantReal(Real):
    name: str

    def __post_init__(self) -> None:
        if self.name not in _CONSTANTS:
            raise ValueError(f"unknown constant {self.name!r}")

    def enclose(self, bits: int) -> tuple[int, int]:
        with mpmath.workprec(bits + 32):
            m = int(mpmath.floor(_CONSTANTS[self.name]() * mpmath.mpf(2) ** bits))
        # mpmath constants are correctly rounded; one unit on each side is ample
        return m - 1, m + 2

    def __str__(self) -> str:
        return self.name


_APPROX_PREFIX = "approx:"
_SQRT_RE = re.compile(r"^sqrt\((.+)\)$")


def from_digit_string(text: str, label: str | None = None) -> ApproxReal:
    """Digit string of an irrational constant, uncertain in its last place.

    ``"1.41421356"`` becomes the interval ``1.41421356 +- 1e-8``.
    """
    text = text.strip()
    d = Decimal(text)
    exponent = d.as_tuple().exponent
    if not isinstance(exponent, int):
        raise ValueError(f"not a finite decimal: {text!r}")
    radius = Fraction(1, 10 ** (-exponent)) if exponent < 0 else Fraction(10**exponent)
    return ApproxReal(Fraction(d), radius, label or text)


def to_real(value: object) -> Real:
    """Coerce numbers and literals to :class:`Real`.

    Accepted: ``Real``, ``int``, ``Fraction``, ``Decimal``, ``float`` (taken at
    its exact binary value), and strings ``"3/2"``, ``"1.5"``, ``"2e-3"``,
    ``"sqrt(2)"``, ``"pi"``, ``"e"``, ``"approx:1.41421356"``.
    """
    if isinstance(value, Real):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a real number")
    if isinstance(value, (int, Fraction)):
        return ExactReal(Fraction(value))
    if isinstance(value, (float, Decimal)):
        if not math.isfinite(value):
            raise ValueError(f"non-finite value {value!r}")
        return ExactReal(Fraction(value))
    if isinstance(value, str):
        s = value.strip()
        if s in _CONSTANTS:
            return ConstantReal(s)
        if s.startswith(_APPROX_PREFIX):
            return from_digit_string(s[len(_APPROX_PREFIX):])
        m = _SQRT_RE.match(s)
        if m:
            return SqrtReal(Fraction(m.group(1).strip()))
        try:
            return ExactReal(Fraction(s))
        except ValueError:
            raise ValueError(f"cannot parse real literal {value!r}") from None
    raise TypeError(f"cannot interpret {type(value).__name__} as a real number")


def mul_enclosures(a: tuple[int, int], b: tuple[int, int], bits: int) -> tuple[int, int]:
    """Product of two nonnegative enclosures at the same scale ``2**bits``."""
    if a[0] < 0 or b[0] < 0:
        raise ValueError("mul_enclosures expects nonnegative enclosures")
    lo = (a[0] * b[0]) >> bits
    hi = -((-(a[1] * b[1])) >> bits)
    return lo, hi


def pow_enclosure(x: Real, n: int, bits: int) -> tuple[int, int]:
    """Enclosure of ``x**n`` at scale ``2**bits`` by binary exponentiation.

    ``x`` must be positive.  Intermediate products carry ``bits`` fractional
    bits; the outward rounding of each step is absorbed by the caller's guard.
    """
    if n < 0:
        raise ValueError("negative exponent")
    if x.exact is not None:
        q = x.exact**n
        return _enclose_fraction(q, bits)
    base = x.enclose(bits)
    one = 1 << bits
    result = (one, one)
    while n:
        if n & 1:
            result = mul_enclosures(result, base, bits)
        n >>= 1
        if n:
            base = mul_enclosures(base, base, bits)
    return result

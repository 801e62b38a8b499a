"""Exact enumeration of the admissible-vector families behind the spacing bounds.

All inequalities are decided on integer enclosures at a common scale ``D``:
a real ``x`` becomes ``(lo, hi)`` with ``lo <= x * D <= hi``.  When every input
is rational, ``D`` is a common denominator and the enclosures are exact
points, so boundary cases such as ``|a_1 - a_2| = K`` are decided exactly.
Otherwise ``D = 2**F`` and any decision the enclosures cannot settle is
tallied in ``boundary_ambiguous`` rather than guessed.
"""

from __future__ import annotations

import bisect
import itertools
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

import gmpy2
import numpy as np

from .errors import BoundaryAmbiguous, CostGuardExceeded, DegenerateFit
from .reals import Real, to_real
from .sequences import LacunarySpec, materialize

__all__ = [
    "RegionInstance",
    "MainLemmaInstance",
    "QuadrupleInstance",
    "CountResult",
    "FitResult",
    "count_region",
    "count_main_lemma",
    "count_quadruples",
    "iter_main_lemma",
    "iter_quadruples",
    "fit_exponent",
    "is_degenerate",
    "quadruple_to_vector",
    "degeneracy_pairing_holds",
]

REGION_COST_GUARD = 10**9
MAIN_LEMMA_COST_GUARD = 10**9
QUADRUPLE_MAX_N = 32
_FIXED_BITS = 160
_MAX_DENOMINATOR_BITS = 4096


@dataclass(frozen=True)
class CountResult:
    count: int
    boundary_ambiguous: int
    params: dict = field(default_factory=dict)
    degenerate: int | None = None
    seconds: float = field(default=0.0, compare=False)

    def require_certified(self) -> "CountResult":
        if self.boundary_ambiguous:
            raise BoundaryAmbiguous(f"{self.boundary_ambiguous} undecided boundary cases")
        return self


# -- common scale ------------------------------------------------------------


class _Scale:
    """Enclosures of a family of reals at one integer scale ``D``."""

    def __init__(self, reals: Sequence[Real] = (), fixed: bool = False):
        exact = [r.exact for r in reals]
        self.exact = not fixed and all(q is not None for q in exact)
        D = 1
        if self.exact:
            for q in exact:
                D = math.lcm(D, q.denominator)
            if D.bit_length() > _MAX_DENOMINATOR_BITS:
                self.exact = False
        if self.exact:
            self.D = D
            self.bits = None
        else:
            self.bits = _FIXED_BITS
            self.D = 1 << _FIXED_BITS

    def enclose(self, x: Real) -> tuple[int, int]:
        if self.exact and x.exact is not None:
            v = x.exact * self.D
            if v.denominator == 1:
                return int(v), int(v)
            lo = math.floor(v)
            return lo, lo + 1
        if self.bits is not None:
            return x.enclose(self.bits)
        v = x.exact * self.D  # pragma: no cover - exact scale with inexact input
        return math.floor(v), math.ceil(v)

    def enclose_product(self, x: Real, y: Real) -> tuple[int, int]:
        """Enclosure of ``x * y`` for positive ``x, y``."""
        if x.exact is not None and y.exact is not None and self.exact:
            return self.enclose(to_real(x.exact * y.exact))
        xl, xh = x.enclose(_FIXED_BITS)
        yl, yh = y.enclose(_FIXED_BITS)
        D = self.D
        lo = (xl * yl * D) >> (2 * _FIXED_BITS)
        hi = -((-(xh * yh * D)) >> (2 * _FIXED_BITS))
        return lo, hi


def _scale_terms(spec: LacunarySpec, count: int, extra: Sequence[Real]) -> tuple[_Scale, list]:
    """Enclosures of ``a_1..a_count`` (index 0 unused) at a common scale."""
    if spec.is_exact:
        terms = [to_real(spec.term_exact(n)) for n in range(1, count + 1)]
        scale = _Scale(terms + list(extra))
        if scale.exact:
            materialize(spec, count)  # certifies lacunarity
            return scale, [None] + [scale.enclose(t) for t in terms]
    seq = materialize(spec, count, frac_bits=_FIXED_BITS)
    scale = _Scale(fixed=True)
    encl = [None] + [seq.enclosure(n) for n in range(1, count + 1)]
    return scale, encl


def _scaled_term(y: int, enc: tuple[int, int]) -> tuple[int, int]:
    lo, hi = enc
    return (y * lo, y * hi) if y >= 0 else (y * hi, y * lo)


def _decide_abs_le(vlo: int, vhi: int, tlo: int, thi: int) -> bool | None:
    """Is ``|v| <= t``?  ``None`` when the enclosures do not decide it."""
    if max(-vlo, vhi) <= tlo:
        return True
    if vlo > thi or vhi < -thi:
        return False
    return None


# -- linear-form regions ------------------------------------------------------


@dataclass(frozen=True)
class RegionInstance:
    """Integer ``y`` with ``|y_i| <= M`` and ``|sum y_i A_i + b| <= C A_1``."""

    r: int
    amplitudes: tuple
    b: object = 0
    C: object = 1
    M: int = 1
    d: int | None = None

    def __post_init__(self) -> None:
        amps = tuple(to_real(a) for a in self.amplitudes)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "b", to_real(self.b))
        object.__setattr__(self, "C", to_real(self.C))
        if self.r < 1 or len(amps) != self.r:
            raise ValueError("need r >= 1 amplitudes")
        if amps[-1].lower() <= 0:
            raise ValueError("amplitudes must be positive")
        for a, b in zip(amps, amps[1:]):
            if not a.lower() > b.upper():
                raise ValueError("amplitudes must be strictly decreasing")
        if self.C.lower() < 1:
            raise ValueError("C must be >= 1")
        if self.M < 1:
            raise ValueError("M must be >= 1")

    def params(self) -> dict:
        return {
            "r": self.r,
            "M": self.M,
            "C": str(self.C),
            "b": str(self.b),
            "d": self.d,
            "amplitudes": [str(a) for a in self.amplitudes],
        }


def count_region(inst: RegionInstance) -> CountResult:
    """Exact count of region vectors.

    ``y_2..y_r`` are enumerated; ``y_1`` then ranges over the ``O(C)``
    integers of an interval (or is fixed by the linear constraint ``d``).
    """
    t0 = time.perf_counter()
    r, M = inst.r, inst.M
    if r > 6 or M**r > REGION_COST_GUARD:
        raise CostGuardExceeded(f"region count refused for r={r}, M={M}")
    A = inst.amplitudes
    scale = _Scale(list(A) + [inst.b, inst.C, to_real(inst.C.exact * A[0].exact)]
                   if inst.C.exact is not None and A[0].exact is not None
                   else list(A) + [inst.b, inst.C])
    enc = [scale.enclose(a) for a in A]
    blo, bhi = scale.enclose(inst.b)
    tlo, thi = scale.enclose_product(inst.C, A[0])
    a1lo, a1hi = enc[0]
    a1 = (a1lo + a1hi) / 2
    count = ambiguous = 0
    for rest in itertools.product(range(-M, M + 1), repeat=r - 1):
        slo, shi = blo, bhi
        for y, e in zip(rest, enc[1:]):
            lo, hi = _scaled_term(y, e)
            slo += lo
            shi += hi
        if inst.d is not None:
            candidates = [inst.d - sum(rest)]
        else:
            mid = (slo + shi) / 2
            half = thi / a1
            lo_y = max(-M, math.floor((-mid) / a1 - half) - 2)
            hi_y = min(M, math.ceil((-mid) / a1 + half) + 2)
            candidates = range(lo_y, hi_y + 1)
        for y1 in candidates:
            if abs(y1) > M:
                continue
            lo, hi = _scaled_term(y1, enc[0])
            ok = _decide_abs_le(slo + lo, shi + hi, tlo, thi)
            if ok is None:
                ambiguous += 1
            elif ok:
                count += 1
    return CountResult(count, ambiguous, inst.params(), seconds=time.perf_counter() - t0)


# -- sum-zero vectors over sequence terms ----------------------------------------

DISTINCT = "distinct_z_nonzero_y"
NONDEGENERATE = "nondegenerate"
DEGENERATE = "degenerate"
ALL = "all"
MODES = (DISTINCT, NONDEGENERATE, DEGENERATE, ALL)


@dataclass(frozen=True)
class MainLemmaInstance:
    """Vectors ``(y, z)``: ``|y_i| <= M``, ``1 <= z_i <= M``, ``sum y = 0``, ``|sum y_i a_{z_i}| <= K``.

    ``mode`` selects the family: distinct ``z`` with ``y != 0``, or arbitrary
    ``z`` restricted to non-degenerate / degenerate vectors, or all of them.
    """

    r: int
    M: int
    K: object
    sequence: LacunarySpec
    mode: str = DISTINCT

    def __post_init__(self) -> None:
        object.__setattr__(self, "K", to_real(self.K))
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.r < 1 or self.M < 1:
            raise ValueError("need r >= 1 and M >= 1")
        if self.K.lower() < 1:
            raise ValueError("K must be >= 1")

    def params(self) -> dict:
        return {"r": self.r, "M": self.M, "K": str(self.K), "mode": self.mode,
                "sequence": str(self.sequence)}


def is_degenerate(y: Sequence[int], z: Sequence[int]) -> bool:
    """True when ``y`` sums to zero on every class of equal ``z`` entries."""
    sums: dict[int, int] = {}
    for yi, zi in zip(y, z):
        sums[zi] = sums.get(zi, 0) + yi
    return all(s == 0 for s in sums.values())


def _z_tuples(r: int, M: int, distinct: bool) -> Iterator[tuple[int, ...]]:
    rng = range(1, M + 1)
    return itertools.permutations(rng, r) if distinct else itertools.product(rng, repeat=r)


def iter_main_lemma(inst: MainLemmaInstance) -> Iterator[tuple[tuple[int, ...], tuple[int, ...], bool | None]]:
    """Yield ``(y, z, decided)`` for every candidate that is admissible or undecided.

    ``decided`` is True for certified witnesses and None for boundary cases.
    The last coordinate is fixed by ``sum y = 0``; partial sums prune the
    search whenever the remaining terms cannot bring the form back to ``[-K, K]``.
    """
    r, M = inst.r, inst.M
    if (2 * M + 1) ** r * M**r > MAIN_LEMMA_COST_GUARD:
        raise CostGuardExceeded(f"main-lemma count refused for r={r}, M={M}")
    scale, terms = _scale_terms(inst.sequence, M, [inst.K])
    Klo, Khi = scale.enclose(inst.K)
    distinct = inst.mode == DISTINCT

    for z in _z_tuples(r, M, distinct):
        enc = [terms[zi] for zi in z]
        # max |a_{z_j}| over the tail j > i, times M
        tail = [0] * (r + 1)
        for i in range(r - 1, -1, -1):
            tail[i] = tail[i + 1] + M * enc[i][1]
        y = [0] * r

        def rec(i: int, ysum: int, slo: int, shi: int):
            if i == r - 1:
                yr = -ysum
                if abs(yr) > M:
                    return
                lo, hi = _scaled_term(yr, enc[i])
                ok = _decide_abs_le(slo + lo, shi + hi, Klo, Khi)
                if ok is False:
                    return
                y[i] = yr
                yield tuple(y), z, (True if ok else None)
                return
            remaining = r - 1 - i
            for yi in range(-M, M + 1):
                s = ysum + yi
                if abs(s) > remaining * M:
                    continue
                lo, hi = _scaled_term(yi, enc[i])
                nlo, nhi = slo + lo, shi + hi
                reach = tail[i + 1]
                if nlo - reach > Khi or nhi + reach < -Khi:
                    continue
                y[i] = yi
                yield from rec(i + 1, s, nlo, nhi)

        for yy, zz, ok in rec(0, 0, 0, 0):
            if distinct:
                if any(yy):
                    yield yy, zz, ok
                continue
            if inst.mode == ALL:
                yield yy, zz, ok
            elif is_degenerate(yy, zz) == (inst.mode == DEGENERATE):
                yield yy, zz, ok


def count_main_lemma(inst: MainLemmaInstance) -> CountResult:
    t0 = time.perf_counter()
    count = ambiguous = degenerate = 0
    for y, z, ok in iter_main_lemma(inst):
        if ok is None:
            ambiguous += 1
            continue
        count += 1
        if is_degenerate(y, z):
            degenerate += 1
    return CountResult(count, ambiguous, inst.params(), degenerate=degenerate,
                       seconds=time.perf_counter() - t0)


# -- quadruple count ---------------------------------------------------------------


def _as_fraction(eps) -> Fraction:
    if isinstance(eps, float):
        return Fraction(repr(eps))
    return Fraction(eps)


@dataclass(frozen=True)
class QuadrupleInstance:
    """``(n, m, w, w')`` with ``1 <= |n|, |m| <= N^(1+eps)`` and ``|n.Delta(w) - m.Delta(w')| <= N^eps``."""

    k: int
    N: int
    epsilon: object
    sequence: LacunarySpec

    def __post_init__(self) -> None:
        eps = _as_fraction(self.epsilon)
        if eps <= 0:
            raise ValueError("epsilon must be positive")
        object.__setattr__(self, "epsilon", eps)
        if self.k < 2 or self.N < self.k:
            raise ValueError("need k >= 2 and N >= k")

    @property
    def n_max(self) -> int:
        """``floor(N^(1+eps))`` computed exactly from the rational exponent."""
        p, q = self.epsilon.numerator, self.epsilon.denominator
        return int(gmpy2.iroot(gmpy2.mpz(self.N) ** (q + p), q)[0])

    def params(self) -> dict:
        return {"k": self.k, "N": self.N, "epsilon": str(self.epsilon),
                "sequence": str(self.sequence)}


def _threshold_floor(inst: QuadrupleInstance, D: int) -> int:
    """``floor(N^eps * D)``."""
    p, q = inst.epsilon.numerator, inst.epsilon.denominator
    return int(gmpy2.iroot(gmpy2.mpz(inst.N) ** p * gmpy2.mpz(D) ** q, q)[0])


def _quadruple_values(inst: QuadrupleInstance):
    scale, terms = _scale_terms(inst.sequence, inst.N, [])
    nmax = inst.n_max
    vals = []  # (lo, hi, n, w1, w2)
    for w1 in range(1, inst.N + 1):
        for w2 in range(1, inst.N + 1):
            if w1 == w2:
                continue
            dlo = terms[w1][0] - terms[w2][1]
            dhi = terms[w1][1] - terms[w2][0]
            for n in range(-nmax, nmax + 1):
                if n == 0:
                    continue
                lo, hi = (n * dlo, n * dhi) if n > 0 else (n * dhi, n * dlo)
                vals.append((lo, hi, n, w1, w2))
    return scale, vals


def _check_quadruple_scope(inst: QuadrupleInstance) -> None:
    if inst.k != 2:
        raise CostGuardExceeded("brute-force quadruple count is limited to k = 2")
    if inst.N > QUADRUPLE_MAX_N:
        raise CostGuardExceeded(f"N={inst.N} exceeds {QUADRUPLE_MAX_N}")


def count_quadruples(inst: QuadrupleInstance) -> CountResult:
    """Count pairs of values ``X = n Delta(w)``, ``Y = m Delta(w')`` with ``|X - Y| <= N^eps``.

    All ``2 n_max N (N-1)`` values are sorted once; for each ``X`` the window
    ``[X - t, X + t]`` is located by bisection, and only entries inside the
    enclosure uncertainty band are examined individually.
    """
    t0 = time.perf_counter()
    _check_quadruple_scope(inst)
    scale, vals = _quadruple_values(inst)
    tF = _threshold_floor(inst, scale.D)
    # |Z| <= t D  <=>  |Z| <= floor(t D) for integer Z
    mids = sorted((lo + hi) // 2 for lo, hi, *_ in vals)
    rad = max((hi - lo) for lo, hi, *_ in vals) + 1 if not scale.exact else 0
    count = ambiguous = 0
    inner = tF - 2 * rad
    outer = tF + 2 * rad
    for lo, hi, *_ in vals:
        x = (lo + hi) // 2
        if inner >= 0:
            count += bisect.bisect_right(mids, x + inner) - bisect.bisect_left(mids, x - inner)
        if rad:
            band = (mids[bisect.bisect_left(mids, x - outer): bisect.bisect_left(mids, x - inner)]
                    + mids[bisect.bisect_right(mids, x + inner): bisect.bisect_right(mids, x + outer)])
            ambiguous += len(band)
    if rad and ambiguous:
        # resolve the band with full enclosures
        count, ambiguous = _count_quadruples_banded(vals, tF, rad)
    return CountResult(count, ambiguous, inst.params(), seconds=time.perf_counter() - t0)


def _count_quadruples_banded(vals, tF: int, rad: int) -> tuple[int, int]:
    order = sorted(range(len(vals)), key=lambda i: vals[i][0])
    los = [vals[i][0] for i in order]
    count = ambiguous = 0
    for lo, hi, *_ in vals:
        start = bisect.bisect_left(los, lo - tF - 2 * rad)
        stop = bisect.bisect_right(los, hi + tF)
        for j in order[start:stop]:
            ylo, yhi = vals[j][0], vals[j][1]
            dlo, dhi = lo - yhi, hi - ylo
            if max(-dlo, dhi) <= tF:
                count += 1
            elif dlo > tF or dhi < -tF:
                continue
            else:
                ambiguous += 1
    return count, ambiguous


def iter_quadruples(inst: QuadrupleInstance):
    """Brute-force enumeration of witnesses ``(n, m, w, w')`` (reference oracle, small N)."""
    _check_quadruple_scope(inst)
    if inst.N > 8:
        raise CostGuardExceeded("witness enumeration is limited to N <= 8")
    scale, vals = _quadruple_values(inst)
    tF = _threshold_floor(inst, scale.D)
    for xlo, xhi, n, w1, w2 in vals:
        for ylo, yhi, m, v1, v2 in vals:
            ok = _decide_abs_le(xlo - yhi, xhi - ylo, tF, tF)
            if ok is None:
                raise BoundaryAmbiguous("undecided quadruple")
            if ok:
                yield (n,), (m,), (w1, w2), (v1, v2)


def quadruple_to_vector(n: Sequence[int], m: Sequence[int], w: Sequence[int], wp: Sequence[int]):
    """Map ``(n, m, w, w')`` to ``(y, z)`` in ``Z^{2k}`` so that ``sum y_i a_{z_i} = n.Delta(w) - m.Delta(w')``."""
    k = len(w)
    if len(wp) != k or len(n) != k - 1 or len(m) != k - 1:
        raise ValueError("inconsistent lengths")
    nn = [0, *n, 0]
    mm = [0, *m, 0]
    y1 = [nn[i + 1] - nn[i] for i in range(k)]
    y2 = [-(mm[i + 1] - mm[i]) for i in range(k)]
    return tuple(y1 + y2), tuple(w) + tuple(wp)


def degeneracy_pairing_holds(y: Sequence[int], z: Sequence[int], k: int) -> bool:
    """Check ``y_i + y_{k+i'} = 0`` on matched indices and ``y_j = 0`` elsewhere.

    The matching pairs ``i <= k`` with the ``k < j <= 2k`` having ``z_j = z_i``
    (entries within each half are distinct, so the matching is unique).
    """
    first = {z[i]: i for i in range(k)}
    second = {z[j]: j for j in range(k, 2 * k)}
    for zi, i in first.items():
        j = second.get(zi)
        if j is None:
            if y[i] != 0:
                return False
        elif y[i] + y[j] != 0:
            return False
    return all(y[j] == 0 for zj, j in second.items() if zj not in first)


# -- exponent fits -----------------------------------------------------------------


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    residual: float
    points_used: int
    slope_stderr: float | None = None


def fit_exponent(points, log_errors=None) -> FitResult:
    """Least-squares line through ``(log scale, log count)``.

    Points with a zero count are dropped.  ``log_errors`` (standard errors of
    ``log count``) give a propagated standard error for the slope.
    """
    pts = [(float(s), float(c)) for s, c in points]
    errs = None if log_errors is None else [float(e) for e in log_errors]
    if len(pts) < 3:
        raise DegenerateFit("need at least three points")
    scales = [s for s, _ in pts]
    if any(b <= a for a, b in zip(scales, scales[1:])):
        raise ValueError("scales must be strictly increasing")
    keep = [i for i, (s, c) in enumerate(pts) if c > 0 and s > 0]
    if len(keep) < 3:
        raise DegenerateFit(f"only {len(keep)} points with positive count")
    x = np.log([pts[i][0] for i in keep])
    y = np.log([pts[i][1] for i in keep])
    xc = x - x.mean()
    sxx = float(xc @ xc)
    slope = float(xc @ (y - y.mean())) / sxx
    intercept = float(y.mean() - slope * x.mean())
    resid = float(np.linalg.norm(y - (intercept + slope * x)))
    se = None
    if errs is not None:
        e = np.array([errs[i] for i in keep])
        se = float(np.sqrt(np.sum((xc / sxx) ** 2 * e**2)))
    return FitResult(slope, intercept, resid, len(keep), se)

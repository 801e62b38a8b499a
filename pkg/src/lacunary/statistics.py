"""Fine-scale statistics of points on the circle: gaps and k-level correlations.

Three routes to the correlation sum ``R_k``:

* :func:`correlation_direct` sorts the points and chains circular neighbour
  windows of radius ``L/N``; cost is linear in the number of close tuples.
* :func:`correlation_naive` enumerates every distinct tuple and every lattice
  shift in a box; it is the reference oracle for small ``N``.
* :func:`correlation_poisson_k2` evaluates the Fourier side of Poisson
  summation for pairs through exponential sums ``|S(n alpha)|^2 - N``.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import stats as sps

from .errors import CostGuardExceeded, SlowDecay, SupportTooWide
from .sequences import TorusSample, as_points
from .testfn import TestFunction

__all__ = [
    "GapProfile",
    "CorrelationEstimate",
    "gap_profile",
    "correlation_direct",
    "correlation_naive",
    "correlation_poisson_k2",
    "c_k_factor",
    "circular_difference",
]

DIRECT = "direct_windowed"
NAIVE = "naive_reference"
POISSON = "poisson_summation"


def circular_difference(u, v):
    """Signed difference ``u - v`` reduced to ``[-1/2, 1/2)``."""
    return np.mod(np.asarray(u) - np.asarray(v) + 0.5, 1.0) - 0.5


def c_k_factor(k: int, N: int) -> float:
    """``(1 - 1/N)(1 - 2/N)...(1 - (k-1)/N)``, formed exactly and then rounded once."""
    if k < 1 or N < k:
        raise ValueError("need 1 <= k <= N")
    prod = Fraction(1)
    for j in range(1, k):
        prod *= Fraction(N - j, N)
    return float(prod)


# -- gaps ------------------------------------------------------------------


@dataclass(frozen=True)
class GapProfile:
    N: int
    ordered_points: np.ndarray
    gaps: np.ndarray
    ks_distance: float

    def measure(self, lo: float, hi: float = math.inf) -> float:
        """Fraction of normalized gaps in ``[lo, hi)``."""
        g = self.gaps
        return float(np.count_nonzero((g >= lo) & (g < hi))) / self.N

    def expected_measure(self, lo: float, hi: float = math.inf) -> float:
        """Poisson prediction ``int_lo^hi exp(-s) ds``."""
        return math.exp(-lo) - (0.0 if math.isinf(hi) else math.exp(-hi))

    def histogram(self, bins: int = 40, s_max: float = 8.0) -> tuple[np.ndarray, np.ndarray]:
        edges = np.linspace(0.0, s_max, bins + 1)
        counts, _ = np.histogram(np.minimum(self.gaps, np.nextafter(s_max, 0)), bins=edges)
        return edges, counts

    def to_json(self, bins: int = 40, s_max: float = 8.0) -> dict:
        edges, counts = self.histogram(bins, s_max)
        return {
            "N": self.N,
            "ks_distance": self.ks_distance,
            "bin_edges": [float(e) for e in edges],
            "counts": [int(c) for c in counts],
            "gap_sum": float(self.gaps.sum()),
        }


def gap_profile(sample) -> GapProfile:
    """Normalized nearest-neighbour gaps with the wrap-around gap included."""
    pts = np.sort(as_points(sample))
    N = pts.size
    if N < 2:
        raise ValueError("need at least two points")
    nxt = np.empty_like(pts)
    nxt[:-1] = pts[1:]
    nxt[-1] = 1.0 + pts[0]
    gaps = N * (nxt - pts)
    ks = float(sps.kstest(gaps, "expon").statistic)
    pts.setflags(write=False)
    gaps.setflags(write=False)
    return GapProfile(N, pts, gaps, ks)


# -- correlations ------------------------------------------------------------


@dataclass(frozen=True)
class CorrelationEstimate:
    k: int
    N: int
    value: float
    method: str
    test_function: TestFunction
    truncation: int | None = None
    tail_bound: float | None = None
    seconds: float = field(default=0.0, compare=False)

    def deviation(self) -> float:
        """``|R_k - C_k(N) int f|``."""
        return abs(self.value - c_k_factor(self.k, self.N) * self.test_function.integral)


def _check_args(k: int, tf: TestFunction, N: int) -> None:
    if k < 2:
        raise ValueError("k must be >= 2")
    if tf.dim != k - 1:
        raise ValueError(f"test function dim {tf.dim} does not match k - 1 = {k - 1}")
    if N < k:
        raise ValueError("need at least k points")


def _neighbour_edges(pts: np.ndarray, radius: float):
    """Directed pairs ``(u, v)`` of sorted positions with circular ``|p_u - p_v| <= radius``.

    Returns ``src, dst, diff`` with ``diff = p_src - p_dst`` reduced to the
    circle.  Each unordered pair is found once by a forward scan from its
    lower endpoint and then emitted in both directions.
    """
    N = pts.size
    idx = np.arange(N)
    src, dst, dif = [], [], []
    for j in range(1, N):
        v = idx + j
        wrap = v >= N
        v = np.where(wrap, v - N, v)
        g = pts[v] - pts + wrap
        hit = g <= radius
        if not hit.any():
            break
        u_h, v_h, g_h = idx[hit], v[hit], g[hit]
        src.append(v_h)
        dst.append(u_h)
        dif.append(g_h)
        src.append(u_h)
        dst.append(v_h)
        dif.append(-g_h)
    if not src:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty, np.zeros(0)
    return np.concatenate(src), np.concatenate(dst), np.concatenate(dif)


def correlation_direct(sample, k: int, tf: TestFunction) -> CorrelationEstimate:
    """``R_k`` by chaining circular neighbour windows of radius ``L/N``.

    Requires ``N > 2L`` so that at most one shift ``m`` per coordinate can
    contribute.  Ordered tuples are enumerated; distinctness is on indices.
    """
    t0 = time.perf_counter()
    pts = np.sort(as_points(sample))
    N = pts.size
    _check_args(k, tf, N)
    if k > 4:
        raise ValueError("direct method supports 2 <= k <= 4")
    L = tf.support
    if not N > 2 * L:
        raise SupportTooWide(f"N={N} <= 2L={2 * L}")
    src, dst, dif = _neighbour_edges(pts, L / N)

    order = np.argsort(src, kind="stable")
    src, dst, dif = src[order], dst[order], dif[order]
    starts = np.searchsorted(src, np.arange(N + 1))

    # partial tuples: vertex columns and coordinate columns
    verts = [src, dst]
    coords = [dif]
    for _ in range(k - 2):
        last = verts[-1]
        counts = starts[last + 1] - starts[last]
        rows = np.repeat(np.arange(last.size), counts)
        offs = np.arange(rows.size) - np.repeat(np.cumsum(counts) - counts, counts)
        e = np.repeat(starts[last], counts) + offs
        new_v = dst[e]
        keep = np.ones(rows.size, dtype=bool)
        for col in verts[:-1]:
            keep &= col[rows] != new_v
        rows, e, new_v = rows[keep], e[keep], new_v[keep]
        verts = [col[rows] for col in verts] + [new_v]
        coords = [c[rows] for c in coords] + [dif[e]]

    if coords[0].size == 0:
        value = 0.0
    else:
        x = np.stack(coords, axis=-1) * N
        value = float(np.sum(tf.evaluate(x))) / N
    return CorrelationEstimate(k, N, value, DIRECT, tf, seconds=time.perf_counter() - t0)


NAIVE_MAX_N = 500
NAIVE_MAX_N_K4 = 80


def correlation_naive(sample, k: int, tf: TestFunction) -> CorrelationEstimate:
    """Reference ``R_k`` over all distinct tuples and all shifts with ``|m|_inf <= 1 + ceil(L/N)``.

    The shift sum of a tensor-product function factorizes per coordinate,
    ``sum_m prod_j g_j(N(d_j - m_j)) = prod_j sum_{m_j} g_j(N(d_j - m_j))``,
    so each coordinate gets an ``N x N`` periodized kernel.  Tuples are then
    enumerated in full.
    """
    t0 = time.perf_counter()
    pts = as_points(sample)
    N = pts.size
    _check_args(k, tf, N)
    if N > NAIVE_MAX_N or (k >= 4 and N > NAIVE_MAX_N_K4) or k > 4:
        raise CostGuardExceeded(f"naive enumeration refused for k={k}, N={N}")
    mmax = 1 + math.ceil(tf.support / N)
    shifts = np.arange(-mmax, mmax + 1, dtype=np.float64)
    raw = pts[:, None] - pts[None, :]
    kernels = []
    for j in range(k - 1):
        P = np.zeros((N, N))
        for m in shifts:
            P += tf.factor(j, N * (raw - m))
        np.fill_diagonal(P, 0.0)  # consecutive indices must differ
        kernels.append(P)

    if k == 2:
        total = kernels[0].sum()
    else:
        total = 0.0
        head = k - 2
        for prefix in itertools.permutations(range(N), head):
            w = 1.0
            for j in range(head - 1):
                w *= kernels[j][prefix[j], prefix[j + 1]]
            if w == 0.0:
                continue
            row = kernels[head - 1][prefix[-1]].copy()
            Q = kernels[head].copy()
            excl = list(prefix)
            row[excl] = 0.0
            Q[:, excl] = 0.0
            total += w * float(row @ Q.sum(axis=1))
    value = tf.scale * float(total) / N
    return CorrelationEstimate(k, N, value, NAIVE, tf, seconds=time.perf_counter() - t0)


def _phases(sample) -> np.ndarray:
    if isinstance(sample, TorusSample):
        return sample.phases64
    arr = np.asarray(sample)
    if arr.dtype == np.uint64:
        return arr
    raise TypeError("Poisson-summation route needs a TorusSample (or uint64 phases)")


def correlation_poisson_k2(sample, tf: TestFunction, truncation: int, block: int = 0) -> CorrelationEstimate:
    """Pair correlation from the Fourier side, truncated at ``|n| <= truncation``.

    ``R_2 = C_2(N) fhat(0) + N^-2 sum_{0<|n|<=T} fhat(n/N) (|S(n)|^2 - N)``
    with ``S(n) = sum_x e(n alpha a_x)``.  Phases ``n {alpha a_x}`` are formed
    in ``uint64`` arithmetic modulo ``2**64``, i.e. reduced mod 1 exactly
    before any floating-point rounding.  The reported tail bound is
    ``sum_{|n|>T} |fhat(n/N)|``, which dominates the discarded terms because
    ``||S|^2 - N| <= N^2``.
    """
    t0 = time.perf_counter()
    if tf.dim != 1:
        raise ValueError("pair correlation needs a one-dimensional test function")
    if tf.family == "box":
        raise SlowDecay("box family has no usable spectral tail bound")
    if truncation < 0:
        raise ValueError("truncation must be >= 0")
    ph = _phases(sample)
    N = ph.size
    if N < 2:
        raise ValueError("need at least two points")
    T = int(truncation)
    value = c_k_factor(2, N) * tf.fourier(0.0)
    if T:
        block = block or max(1, 4_000_000 // N)
        acc = 0.0
        two_pi = 2.0 * np.pi * 2.0**-64
        for start in range(1, T + 1, block):
            n = np.arange(start, min(T, start + block - 1) + 1, dtype=np.uint64)
            theta = (n[:, None] * ph[None, :]).astype(np.float64) * two_pi
            c = np.cos(theta).sum(axis=1)
            s = np.sin(theta).sum(axis=1)
            weights = np.real(tf.fourier(n.astype(np.float64) / N))
            acc += float(np.sum(weights * (c * c + s * s - N)))
        # f real => fhat(-xi) = conj(fhat(xi)) and |S(-n)| = |S(n)|
        value += 2.0 * acc / (N * N)
    tail = tf.tail_sum_bound(T, N)
    return CorrelationEstimate(
        2, N, float(value), POISSON, tf, truncation=T, tail_bound=tail,
        seconds=time.perf_counter() - t0,
    )

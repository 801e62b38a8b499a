"""Compactly supported tensor-product test functions and their Fourier transforms.

Convention: ``fhat(xi) = integral f(x) exp(-2 pi i x.xi) dx``, so that Poisson
summation reads ``sum_m f(x + m) = sum_n fhat(n) e(n x)`` with
``e(z) = exp(2 pi i z)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import mpmath
import numpy as np
from scipy import integrate

from .errors import SlowDecay

__all__ = ["TestFunction", "box", "triangle", "smooth_bump", "FAMILIES"]

FAMILIES = ("box", "triangle", "smooth_bump")


def _bump(u: np.ndarray) -> np.ndarray:
    """``exp(1 - 1/(1 - u^2))`` on ``|u| < 1``, zero outside; peak value 1."""
    u = np.asarray(u, dtype=np.float64)
    out = np.zeros_like(u)
    inside = np.abs(u) < 1
    v = u[inside]
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - v * v))
    return out


def _bump_scalar(u: float) -> float:
    if abs(u) >= 1:
        return 0.0
    return float(np.exp(1.0 - 1.0 / (1.0 - u * u)))


@lru_cache(maxsize=None)
def _bump_integral() -> float:
    # tanh-sinh handles the flat endpoints; kept independent of the Fourier route
    with mpmath.workdps(30):
        val = mpmath.quad(lambda u: mpmath.exp(1 - 1 / (1 - u * u)), [-1, 0, 1])
    return float(val)


@lru_cache(maxsize=None)
def _bump_second_derivative_l1() -> float:
    def d2(u: float) -> float:
        if abs(u) >= 1:
            return 0.0
        w = 1.0 - u * u
        phi = np.exp(1.0 - 1.0 / w)
        # phi' = -2u/w^2 phi ; phi'' = phi * ((2u/w^2)^2 - (2/w^2 + 8u^2/w^3))
        g = -2.0 * u / (w * w)
        dg = -2.0 / (w * w) - 8.0 * u * u / (w**3)
        return abs(phi * (g * g + dg))

    pts = np.linspace(-1, 1, 41)
    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        total += integrate.quad(d2, a, b, limit=200, epsabs=1e-13)[0]
    return total


def _bump_fourier(xi: float, epsabs: float = 1e-13) -> float:
    """Fourier transform of the unit bump at frequency ``xi`` (real, even)."""
    xi = abs(float(xi))
    if xi == 0:
        val, _ = integrate.quad(_bump_scalar, -1, 1, epsabs=epsabs, epsrel=1e-13, limit=200)
        return val
    # even integrand: 2 * int_0^1 phi(u) cos(2 pi xi u) du, oscillatory weight
    val, _ = integrate.quad(
        _bump_scalar, 0, 1, weight="cos", wvar=2 * np.pi * xi, epsabs=epsabs / 2, limit=400
    )
    return 2.0 * val


@dataclass(frozen=True)
class TestFunction:
    """Tensor product ``f(x) = scale * prod_i g_i(x_i)`` supported in ``[-L, L]^dim``.

    ``box`` uses per-coordinate ``bounds`` (closed intervals, possibly
    asymmetric).  ``triangle`` is the hat ``max(0, 1 - |x|/L)`` and
    ``smooth_bump`` is ``exp(1 - 1/(1 - (x/L)^2))``; both peak at 1.
    """

    __test__ = False  # keep pytest from collecting this class

    family: str
    dim: int
    support: float
    scale: float = 1.0
    bounds: tuple[tuple[float, float], ...] = field(default=())

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if not self.support > 0:
            raise ValueError("support radius must be positive")
        if self.family == "box":
            bounds = self.bounds or tuple((-self.support, self.support) for _ in range(self.dim))
            if len(bounds) != self.dim:
                raise ValueError("box needs one (lo, hi) pair per dimension")
            for lo, hi in bounds:
                if not lo < hi:
                    raise ValueError("box bounds must satisfy lo < hi")
                if max(abs(lo), abs(hi)) > self.support:
                    raise ValueError("box bounds exceed the support radius")
            object.__setattr__(self, "bounds", tuple((float(a), float(b)) for a, b in bounds))

    @property
    def L(self) -> float:
        return self.support

    def scaled(self, factor: float) -> "TestFunction":
        return TestFunction(self.family, self.dim, self.support, self.scale * factor, self.bounds)

    # -- one-dimensional factors ---------------------------------------

    def factor(self, i: int, t: np.ndarray) -> np.ndarray:
        """Value of the ``i``-th coordinate factor (without ``scale``)."""
        t = np.asarray(t, dtype=np.float64)
        L = self.support
        if self.family == "triangle":
            return np.maximum(0.0, 1.0 - np.abs(t) / L)
        if self.family == "box":
            lo, hi = self.bounds[i]
            return ((t >= lo) & (t <= hi)).astype(np.float64)
        return _bump(t / L)

    def factor_integral(self, i: int) -> float:
        L = self.support
        if self.family == "triangle":
            return L
        if self.family == "box":
            lo, hi = self.bounds[i]
            return hi - lo
        return L * _bump_integral()

    def factor_fourier(self, i: int, xi):
        """Fourier transform of the ``i``-th factor; complex only for asymmetric boxes."""
        xi = np.asarray(xi, dtype=np.float64)
        L = self.support
        if self.family == "triangle":
            return L * np.sinc(L * xi) ** 2
        if self.family == "box":
            lo, hi = self.bounds[i]
            width = hi - lo
            val = width * np.sinc(width * xi)
            if lo == -hi:
                return val
            return val * np.exp(-1j * np.pi * (hi + lo) * xi)
        flat = np.atleast_1d(xi)
        out = np.array([L * _bump_fourier(L * x) for x in flat.ravel()]).reshape(flat.shape)
        return out if xi.ndim else float(out[0])

    # -- full function -------------------------------------------------

    def evaluate(self, x) -> np.ndarray | float:
        """``f(x)`` for ``x`` of shape ``(..., dim)`` (a scalar is allowed when dim=1)."""
        x = np.asarray(x, dtype=np.float64)
        scalar = x.ndim == 0
        if scalar:
            if self.dim != 1:
                raise ValueError("scalar argument needs dim == 1")
            x = x.reshape(1, 1)
        elif self.dim == 1 and x.shape[-1] != 1:
            x = x[..., None]
        if x.shape[-1] != self.dim:
            raise ValueError(f"expected last axis of length {self.dim}")
        out = np.full(x.shape[:-1], self.scale, dtype=np.float64)
        for i in range(self.dim):
            out = out * self.factor(i, x[..., i])
        return float(out.reshape(-1)[0]) if scalar else out

    def __call__(self, x):
        return self.evaluate(x)

    def fourier(self, xi, *, for_truncation: bool = False):
        """``fhat(xi)`` under the ``exp(-2 pi i x.xi)`` convention.

        ``for_truncation=True`` declares that the caller relies on a spectral
        tail bound, which the box family cannot supply.
        """
        if for_truncation and self.family == "box":
            raise SlowDecay("box transforms decay like 1/|xi|; no truncation bound")
        xi = np.asarray(xi, dtype=np.float64)
        scalar = xi.ndim == 0
        if scalar:
            if self.dim != 1:
                raise ValueError("scalar argument needs dim == 1")
            xi = xi.reshape(1, 1)
        elif self.dim == 1 and xi.shape[-1] != 1:
            xi = xi[..., None]
        out = np.full(xi.shape[:-1], self.scale, dtype=np.complex128)
        for i in range(self.dim):
            out = out * self.factor_fourier(i, xi[..., i])
        if not np.iscomplexobj(out) or np.all(out.imag == 0):
            out = out.real
        return out.reshape(-1)[0].item() if scalar else out

    @property
    def integral(self) -> float:
        val = self.scale
        for i in range(self.dim):
            val *= self.factor_integral(i)
        return float(val)

    # -- spectral tails (dim 1 only) ------------------------------------

    def decay_constant(self) -> float:
        """``D`` with ``|fhat(xi)| <= D / xi^2`` for all ``xi != 0`` (dim 1).

        Triangle: ``1/(pi^2 L)`` from the sinc envelope.  Bump: the
        integration-by-parts bound ``L ||phi''||_1 / (2 pi L)^2``.
        """
        if self.dim != 1:
            raise ValueError("decay constant is defined for dim == 1")
        L = self.support
        if self.family == "box":
            raise SlowDecay("box transforms decay like 1/|xi|; no truncation bound")
        if self.family == "triangle":
            return abs(self.scale) / (np.pi**2 * L)
        return abs(self.scale) * L * _bump_second_derivative_l1() / (2 * np.pi * L) ** 2

    def tail_sum_bound(self, T: int, N: int) -> float:
        """Upper bound for ``sum_{|n| > T} |fhat(n/N)|``."""
        D = self.decay_constant()
        peak = abs(self.scale) * self.factor_integral(0)  # |fhat| <= int |f| = fhat(0)
        # |fhat(n/N)| <= min(peak, D N^2 / n^2); switch-over at n0
        n0 = int(np.floor(N * np.sqrt(D / peak)))
        m = max(T, n0, 1)
        flat = peak * max(0, n0 - T)
        # sum_{n > m} 1/n^2 < 1/m
        return 2.0 * (flat + D * N * N / m)

    def __str__(self) -> str:
        return f"{self.family}(dim={self.dim}, L={self.support}, scale={self.scale})"


def box(dim: int = 1, support: float = 1.0, scale: float = 1.0, bounds=()) -> TestFunction:
    return TestFunction("box", dim, support, scale, tuple(bounds))


def triangle(dim: int = 1, support: float = 1.0, scale: float = 1.0) -> TestFunction:
    return TestFunction("triangle", dim, support, scale)


def smooth_bump(dim: int = 1, support: float = 1.0, scale: float = 1.0) -> TestFunction:
    return TestFunction("smooth_bump", dim, support, scale)

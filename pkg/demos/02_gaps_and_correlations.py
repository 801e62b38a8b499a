"""
Poissonian gaps and correlations
================================

For almost every alpha the points {alpha a_n} of a lacunary sequence look
like independent uniform points at the scale 1/N: nearest-neighbour gaps
follow exp(-s) and the k-level correlation sums tend to the integral of f.
We compare three point sets of the same size.
"""

import numpy as np

from lacunary import LacunarySpec, fractional_parts
from lacunary.statistics import c_k_factor, correlation_direct, gap_profile
from lacunary.testfn import triangle

N = 20_000
samples = {
    "{sqrt(2) (3/2)^n}": fractional_parts(LacunarySpec.geometric("3/2"), "sqrt(2)", N).points,
    "uniform random": np.random.default_rng(1).random(N),
    "{sqrt(2) n}": np.mod(np.sqrt(2) * np.arange(1, N + 1), 1.0),
}

# %%
# Gap statistics.  The rotation {sqrt(2) n} has only three distinct gaps,
# so its KS distance from exp(-s) is large.
print(f"{'points':22s} {'KS':>8s} {'P(gap<1/2)':>11s}   (exp law: {1 - np.exp(-0.5):.4f})")
for name, pts in samples.items():
    g = gap_profile(pts)
    print(f"{name:22s} {g.ks_distance:8.4f} {g.measure(0, 0.5):11.4f}")

# %%
# Correlation sums with a triangle window of half-width 1 (in units of
# 1/N).  The Poissonian value is C_k(N) times the integral of f.
print(f"\n{'points':22s} {'R2':>8s} {'R3':>8s}")
for name, pts in samples.items():
    r2 = correlation_direct(pts, 2, triangle(1)).value
    r3 = correlation_direct(pts, 3, triangle(2)).value
    print(f"{name:22s} {r2:8.4f} {r3:8.4f}")
print(f"{'Poissonian value':22s} {c_k_factor(2, N):8.4f} {c_k_factor(3, N):8.4f}")

# %%
# A histogram of the lacunary gaps next to the exponential density.  The
# last bin collects every gap beyond 3.5.
g = gap_profile(samples["{sqrt(2) (3/2)^n}"])
edges, counts = g.histogram(bins=8, s_max=4.0)
for a, b, c in zip(edges, edges[1:], counts):
    last = b == edges[-1]
    expected = N * (np.exp(-a) - (0.0 if last else np.exp(-b)))
    label = f"[{a:3.1f}, inf)" if last else f"[{a:3.1f},{b:3.1f}) "
    print(f"{label}  {c:6d}  expected {expected:8.1f}  " + "#" * int(c / 400))

"""
Pair correlation from the Fourier side
======================================

Poisson summation turns the pair correlation into a sum over frequencies,

    R_2 = C_2(N) fhat(0) + N^-2 sum_{0<|n|<=T} fhat(n/N) (|S(n)|^2 - N),

with S(n) the exponential sum of the phases n {alpha a_x}.  Truncating at T
leaves an explicit tail bound.  Phases are reduced mod 1 in exact integer
arithmetic first, since n reaches 5*10^4 and a double would lose them.

The tail bound uses only |S(n)|^2 <= N^2, so it is valid but far from
sharp: the actual truncation error is many orders of magnitude smaller.
"""

from lacunary import LacunarySpec, fractional_parts
from lacunary.statistics import correlation_direct, correlation_poisson_k2
from lacunary.testfn import smooth_bump, triangle

N = 1000
sample = fractional_parts(LacunarySpec.geometric("3/2"), "1.2345", N)

for tf in (triangle(1), smooth_bump(1)):
    direct = correlation_direct(sample, 2, tf).value
    print(f"\n{tf.family}: direct R2 = {direct:.8f}")
    print(f"{'T':>8s} {'Fourier side':>14s} {'|difference|':>13s} {'tail bound':>11s}")
    for T in (0, N, 5 * N, 20 * N, 50 * N):
        est = correlation_poisson_k2(sample, tf, T)
        print(f"{T:8d} {est.value:14.8f} {abs(est.value - direct):13.2e} {est.tail_bound:11.2e}")

"""
Counting admissible vectors
===========================

The variance bound rests on counting integer vectors for which a linear
form in the sequence stays small.  Every count below is exact: the
inequalities are decided with integer enclosures, and anything the
enclosures cannot decide is reported instead of guessed.
"""

from lacunary import LacunarySpec
from lacunary.counting import (
    ALL,
    DEGENERATE,
    MainLemmaInstance,
    QuadrupleInstance,
    RegionInstance,
    count_main_lemma,
    count_quadruples,
    count_region,
    fit_exponent,
    iter_main_lemma,
)

g2 = LacunarySpec.geometric(2)

# %%
# Region counts |y1 A1 + ... + yr Ar + b| <= C A1 grow like C M^(r-1).
pts = []
for M in (5, 10, 20, 40):
    res = count_region(RegionInstance(3, ("5", "2", "1"), b="1/3", C=2, M=M))
    pts.append((M, res.count))
    print(f"region r=3 M={M:3d}: {res.count:6d}   count / M^2 = {res.count / M**2:.3f}")
print(f"slope {fit_exponent(pts).slope:.3f} (proved exponent 2)")

# %%
# Sum-zero vectors with distinct indices: for a_n = 2^n and K = 2 only
# y = +-(1, -1) on z = (1, 2) or (2, 1) qualifies, whatever M is.
inst = MainLemmaInstance(2, 8, 2, g2)
print("\nwitnesses:", [(y, z) for y, z, ok in iter_main_lemma(inst) if ok])
for M in (4, 8, 16, 32):
    print(f"M={M:3d}: {count_main_lemma(MainLemmaInstance(2, M, 2, g2)).count}")

# %%
# With repeated indices allowed, a large share of the admissible vectors
# is degenerate: y sums to zero on every class of equal z.
spec = LacunarySpec.geometric("3/2")
for M in (3, 4, 5):
    every = count_main_lemma(MainLemmaInstance(3, M, 2, spec, ALL))
    deg = count_main_lemma(MainLemmaInstance(3, M, 2, spec, DEGENERATE))
    print(f"r=3 M={M}: {every.count:5d} admissible, {deg.count:5d} degenerate")

# %%
# Quadruples (n, m, w, w') with |n (a_w1 - a_w2) - m (a_w'1 - a_w'2)| <= N^eps.
pts = []
for N in (8, 12, 16, 24):
    res = count_quadruples(QuadrupleInstance(2, N, "1/10", g2))
    pts.append((N, res.count))
    print(f"quadruples N={N:3d}: {res.count:8d}  ambiguous={res.boundary_ambiguous}")
print(f"slope {fit_exponent(pts).slope:.3f} (proved exponent 3.8)")

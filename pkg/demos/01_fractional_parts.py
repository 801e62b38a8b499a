"""
Certified fractional parts of a growing sequence
================================================

The points {alpha * a_n} sit behind a huge integer part: (3/2)^2000 has
about 350 decimal digits before the point.  Double precision keeps 16 of
them, so a float recurrence drifts within a few dozen terms, returns only
zeros once 1.5^n passes 2^53 (n = 91), and overflows near n = 1750.  The
library carries the whole integer part and certifies every fractional bit.
"""

from fractions import Fraction

import numpy as np

from lacunary import LacunarySpec, fractional_parts, materialize
from lacunary.errors import NearIntegerAmbiguity

spec = LacunarySpec.geometric("3/2")
N = 2000

# %%
# A naive float recurrence, for contrast.
x, naive = 1.0, []
for n in range(1, N + 1):
    x *= 1.5
    naive.append(x % 1.0)

# %%
# Certified points.  alpha = 1 keeps everything rational, so the exact
# value is available as a check.
sample = fractional_parts(spec, 1, N)
for n in (10, 50, 90, 100, 500, 2000):
    exact = Fraction(3, 2) ** n
    exact = float(exact - exact.numerator // exact.denominator)
    print(f"n={n:5d}  certified={sample.points[n - 1]:.15f}  exact={exact:.15f}  "
          f"float recurrence={naive[n - 1]:.15f}")

# %%
# Irrational inputs are handled through enclosures.  The materialized
# sequence stores integer bounds lo <= a_n 2^bits <= hi.
seq = materialize(LacunarySpec.geometric("sqrt(3)"), 400)
lo, hi = seq.enclosure(400)
print(f"\nsqrt(3)^400 enclosed with {seq.frac_bits} fractional bits, width {hi - lo} units")
pts = fractional_parts(LacunarySpec.geometric("sqrt(3)"), "pi", 400).points
print("first points of {pi sqrt(3)^n}:", np.round(pts[:6], 6))

# %%
# When a point is an exact integer no enclosure can pin down its floor:
# sqrt(2)^2 = 2.  The library refuses rather than guessing.
try:
    fractional_parts(LacunarySpec.geometric("sqrt(2)"), 1, 2)
except NearIntegerAmbiguity as exc:
    print("\nrefused:", exc)

"""
Exact concentration of weighted Rademacher sums
===============================================

With equal weights the sum of n signs is a shifted binomial and its largest
atom carries C(n, n/2) / 2^n. Spreading the weights out (an arithmetic
progression) makes the sum much less concentrated.
"""
import math

import numpy as np

from anticonc import DiscreteDist1D, WeightMatrix, q_exact, weighted_sum_dist
from anticonc.verify import FamilySpec, generate_family

rademacher = DiscreteDist1D([-1.0, 1.0], [0.5, 0.5])

print(" n   Q(ones, 0)   C(n,n/2)/2^n   Q(arith, 0)")
for n in (4, 8, 12, 16):
    ones = weighted_sum_dist(WeightMatrix(np.ones(n)), rademacher)
    arith = weighted_sum_dist(generate_family(FamilySpec("arithmetic", n)), rademacher)
    print(f"{n:2d}   {q_exact(ones, 0.0):.6f}     {math.comb(n, n // 2) / 2 ** n:.6f}"
          f"       {q_exact(arith, 0.0):.6f}")

# a wider window collects neighbouring atoms; atoms of the all-ones sum sit 2 apart
law = weighted_sum_dist(WeightMatrix(np.ones(10)), rademacher)
for lam in (0.0, 1.99, 2.0, 4.0):
    print(f"Q(ones(10), {lam}) = {q_exact(law, lam):.6f}")

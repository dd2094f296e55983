"""
Concentration in the plane
==========================

In d = 2 the concentration function is the largest mass a closed disk of
diameter lambda can hold. The exact sweep is compared with a sampled estimate.
"""
from anticonc import DiscreteDist1D, WeightMatrix, q_exact, q_monte_carlo, weighted_sum_dist
from anticonc.exact import sample_weighted_sum

rademacher = DiscreteDist1D([-1.0, 1.0], [0.5, 0.5])
a = WeightMatrix([[1, 0], [0, 1], [1, 1], [1, -1], [0.5, 2]])
law = weighted_sum_dist(a, rademacher)
print(f"{len(law)} atoms in the law of the sum")

batch = sample_weighted_sum(a, rademacher, 200_000, seed=0)
for lam in (0.5, 1.0, 2.0, 3.0):
    est, se = q_monte_carlo(batch, lam)
    print(f"lambda={lam:3.1f}  exact {q_exact(law, lam):.4f}  sampled {est:.4f} +- {se:.4f}")

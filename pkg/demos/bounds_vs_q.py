"""
Bounds against the exact concentration
======================================

For a few weight families the exact Q(F_a, tau) is printed next to the
characteristic-function bound and the compound Poisson bounds. Ratios
bound / Q above 1 mean the bound holds with constant 1.
"""
from anticonc import DiscreteDist1D, Scenario, build_report
from anticonc.verify import FamilySpec, generate_family

law = DiscreteDist1D([-1.0, 0.0, 1.0], [0.3, 0.4, 0.3])
cols = ("esseen", "thm1_tail", "thm1_floor", "cor1", "cor2")
print(f"{'family':12s} {'tau':>5s} {'Q':>8s} " + " ".join(f"{c:>10s}" for c in cols))
for kind in ("all_ones", "arithmetic", "geometric"):
    a = generate_family(FamilySpec(kind, 10, ratio=1.5))
    for tau in (0.5, 1.0, 2.0):
        rep = build_report(Scenario(a, law, tau, 1.0))
        vals = " ".join(f"{rep.bound(c):10.4f}" if rep.bound(c) is not None else f"{'-':>10s}"
                        for c in cols)
        print(f"{kind:12s} {tau:5.2f} {rep.q_exact:8.4f} {vals}")

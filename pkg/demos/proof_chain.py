"""
Numerical checks of the intermediate inequalities
=================================================

Each suite evaluates both sides of one step of the argument on seeded random
instances with a shared quadrature rule and reports how many hold.
"""
from anticonc.verify import run_cf, run_holder, run_jensen

for name, recs in (("holder", run_holder(seed=0, count=40)),
                   ("jensen", run_jensen(seed=0, count=20)),
                   ("cf", run_cf(seed=0, scenarios=20, grid=500))):
    passed = sum(r.passed for r in recs)
    print(f"{name:7s} {passed}/{len(recs)} instances hold")
    for r in recs[:2]:
        print("   ", {k: v for k, v in r.detail.items() if not isinstance(v, (list, dict))})

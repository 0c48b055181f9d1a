"""Online policies against the offline optimum on the bundled synthetic year.

Prints the annual cost reduction of each policy relative to buying all
electricity and heat externally, then a per-season breakdown and the effect
of the look-ahead window on the tracking policy.
"""

import numpy as np

from mgsched.experiment import bundled_path, cost_reduction
from mgsched.model import Trace, baseline_cost, reference_params, total_cost
from mgsched.offline import ofa_multi
from mgsched.online import Policy, run_policy
from mgsched.traces import load_trace

gen, ext, n = reference_params("P1")
year = load_trace(bundled_path("synthetic_year.csv"), ext)
base = baseline_cost(year, ext)
print(f"{len(year)} hourly slots, {n} units of {gen.capacity_L:.0f} kW, baseline ${base:,.0f}")

off = total_cost(ofa_multi(year, gen, ext, n), year, gen, ext).total
print(f"offline        {cost_reduction(base, off):6.2%}")
for pol in (Policy("chase", 3), Policy("rhc", 3)):
    _, cost = run_policy(pol, year, gen, ext, n)
    print(f"{pol.label:14s} {cost_reduction(base, cost.total):6.2%}  ratio {cost.total / off:.3f}")

print("\nby season (offline / CHASE(3)):")
months = np.array([int(s[5:7]) for s in year.timestamps])
seasons = {"winter": (12, 1, 2), "spring": (3, 4, 5), "summer": (6, 7, 8), "autumn": (9, 10, 11)}
for name, ms in seasons.items():
    idx = np.flatnonzero(np.isin(months, ms))
    part = Trace(a=year.a[idx], h=year.h[idx], p=year.p[idx])
    b = baseline_cost(part, ext)
    o = total_cost(ofa_multi(part, gen, ext, n), part, gen, ext).total
    c = run_policy(Policy("chase", 3), part, gen, ext, n)[1].total
    print(f"  {name:7s} {cost_reduction(b, o):6.2%} / {cost_reduction(b, c):6.2%}")

print("\nCHASE reduction by look-ahead (hours):")
for w in (0, 1, 3, 6, 12, 20):
    c = run_policy(Policy("chase", w), year, gen, ext, n)[1].total
    print(f"  w={w:2d}  {cost_reduction(base, c):6.2%}")

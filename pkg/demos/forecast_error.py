"""How noisy wind and heat forecasts erode the look-ahead advantage.

Runs CHASE and RHC with a 3-hour window over one summer month while the
forecast of each future slot carries Gaussian error of growing size. The
present slot is always known exactly. Each point averages three seeds.
"""

import numpy as np

from mgsched.experiment import bundled_path, cost_reduction
from mgsched.model import Trace, baseline_cost, reference_params, total_cost
from mgsched.offline import ofa_multi
from mgsched.online import Policy, run_policy
from mgsched.traces import NoisyForecast, load_trace

gen, ext, n = reference_params("P1")
year = load_trace(bundled_path("synthetic_year.csv"), ext)
month = slice(181 * 24, 212 * 24)  # July
trace = Trace(a=year.a[month], h=year.h[month], p=year.p[month], elec=year.elec[month], wind=year.wind[month])
base = baseline_cost(trace, ext)
off = total_cost(ofa_multi(trace, gen, ext, n), trace, gen, ext).total
print(f"July: offline reduction {cost_reduction(base, off):.2%}")

print("\nerror std (fraction)  CHASE(3)  RHC(3)   [wind error]")
for std in (0.0, 0.2, 0.4, 0.8, 1.2):
    cells = []
    for pol in (Policy("chase", 3), Policy("rhc", 3)):
        vals = []
        for seed in range(3):
            fc = NoisyForecast(std, 0.0, float(trace.wind.max()), float(trace.h.max()), seed)
            vals.append(cost_reduction(base, run_policy(pol, trace, gen, ext, n, fc)[1].total))
        cells.append(np.mean(vals))
    print(f"{std:20.1f}  {cells[0]:7.2%}  {cells[1]:7.2%}")

"""How the offline optimum is put together on a small hand-made trace.

Runs the clamped cumulative cost difference over a burst of demand, prints
the critical segments it produces, and shows that switching on over the
rising segments costs the same as the shortest-path DP and brute force.
"""

from dataclasses import replace

import numpy as np

from mgsched.analysis import exhaustive_offline
from mgsched.model import Trace, reference_params, total_cost
from mgsched.offline import critical_segments, delta_process, delta_values, dp_offline, ofa

gen, ext, _ = reference_params("S0")
gen = replace(gen, idle_cm=0.5)  # dearer idling so a lull soon pays for a restart
# quiet, a busy spell with a short dip, a lull with one lone burst
a = np.zeros(20)
a[2:6] = 1.0
a[7] = 0.3
a[8:11] = 1.0
a[16] = 1.0
trace = Trace(a=a, h=a.copy(), p=np.full(len(a), 2.0))

print("per-slot advantage of running:", np.round(delta_values(trace, gen, ext), 3))
d = delta_process(trace, gen, ext)
print("clamped cumulative difference:", np.round(d.values, 3))
for seg in critical_segments(d):
    print(f"  slots {seg.start:2d}-{seg.end:2d}  {seg.kind.value}")

y_ofa = ofa(trace, gen, ext).y[:, 0]
y_dp = dp_offline(trace, gen, ext).y[:, 0]
brute, brute_cost = exhaustive_offline(trace, gen, ext)
np.set_printoptions(linewidth=120)
print("segment rule :", y_ofa)
print("shortest path:", y_dp)
print("brute force  :", brute.y[:, 0])
print("costs:", total_cost(ofa(trace, gen, ext), trace, gen, ext).total, brute_cost)
# the dip at slots 7-8 is bridged (idling is cheaper than a restart), while
# the lone burst at slot 17 never earns back the startup cost

"""The worst-case input, built live against the tracking policy.

The adversary offers a full unit of demand at the top price exactly when the
policy was off in the previous slot, so the policy always pays the startup
just as demand vanishes. As the startup cost grows relative to one slot of
savings the measured ratio climbs towards the proven worst case. Look-ahead
takes the sting out, since the policy now sees each burst coming.
"""

from dataclasses import replace

from mgsched.analysis import adversarial_trace, alpha, cr_bound, empirical_cr
from mgsched.model import reference_params, total_cost
from mgsched.offline import ofa
from mgsched.online import Policy, chase_s_step, run_policy

gen0, ext, _ = reference_params("S0")
a = alpha(gen0, ext)
print(f"alpha = {a:.3f}; tracking bound 3-2*alpha = {3 - 2 * a:.3f}")

print("\nstartup cost   ratio (no look-ahead)")
for beta in (1, 5, 20, 75, 200):
    gen = replace(gen0, startup_beta=float(beta))
    trace = adversarial_trace(chase_s_step, gen, ext, 10_000)
    off = total_cost(ofa(trace, gen, ext), trace, gen, ext).total
    on = run_policy(Policy("chase_s"), trace, gen, ext)[1].total
    print(f"{beta:12.0f}   {empirical_cr(on, off):.4f}")

gen = replace(gen0, startup_beta=75.0)
trace = adversarial_trace(chase_s_step, gen, ext, 10_000)
off = total_cost(ofa(trace, gen, ext), trace, gen, ext).total
print("\nsame input, policy now sees w slots ahead:")
for w in (0, 5, 20, 60, 200):
    on = run_policy(Policy("chase_s", w), trace, gen, ext)[1].total
    print(f"  w={w:3d}  ratio {empirical_cr(on, off):.4f}  bound {cr_bound('chase_lk', gen, ext, w).bound:.4f}")

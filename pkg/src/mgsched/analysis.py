"""Ratio measurement, the adversarial input generator and brute-force oracles.

The oracles here share no code path with the solvers they check beyond the
per-slot cost model: the exhaustive search enumerates commitments, the
count DP works on the aggregate on-count, the dispatch oracle scans a grid.
"""

from __future__ import annotations

import math

import numpy as np

from .bounds import BOUND_KINDS, CrBound, alpha, cr_bound, g_lookahead, slow_factors
from .constrained import constrained_dp
from .errors import ConfigError
from .model import (
    ExternalSupplySpec,
    GeneratorSpec,
    Schedule,
    SlotInput,
    Trace,
    check_assumptions,
    dispatch_arrays,
)
from .offline import schedule_from_commitment, slot_costs
from .online import OnlineState

__all__ = [
    "BOUND_KINDS",
    "CrBound",
    "alpha",
    "g_lookahead",
    "cr_bound",
    "slow_factors",
    "adversarial_trace",
    "empirical_cr",
    "dispatch_oracle",
    "exhaustive_offline",
    "count_dp_offline",
    "constrained_offline",
    "random_instance",
]

EXHAUSTIVE_MAX_T = 20
COUNT_DP_MAX_N = 8
COUNT_DP_MAX_T = 100
CONSTRAINED_MAX_T = 60
CONSTRAINED_MAX_GRID = 101


def empirical_cr(policy_cost: float, offline_cost: float) -> float:
    """Per-instance ratio; ``inf`` when only the offline cost is zero, 1 when both are."""
    if offline_cost < 0 or policy_cost < 0:
        raise ValueError("costs must be non-negative")
    if offline_cost == 0:
        return 1.0 if policy_cost == 0 else math.inf
    return policy_cost / offline_cost


def _closed_loop(step, gen, ext, horizon: int, slot_len: float):
    L, eta, pmax = gen.capacity_L, ext.heat_recovery_eta, ext.price_max_Pmax
    state = OnlineState.initial(gen)
    a = np.empty(horizon)
    ys = np.empty(horizon, dtype=np.int8)
    y_prev = 0
    for t in range(horizon):
        at = L * (1 - y_prev)
        a[t] = at
        window = Trace(a=[at], h=[eta * at], p=[pmax], slot_len=slot_len)
        y_prev, _, _, _, state = step(state, window, gen, ext)
        ys[t] = y_prev
    return a, ys


def adversarial_trace(step, gen, ext, horizon: int, slot_len: float = 1.0) -> Trace:
    """Worst-case input built against ``step`` in closed loop.

    Every slot is priced at ``Pmax``; demand is a full unit ``L`` (with its
    matching heat) exactly when the algorithm was off in the previous slot
    and zero otherwise. ``step`` is called with one-slot windows. The loop is
    run twice and a policy that decides differently is rejected.
    """
    if horizon < 1:
        raise ConfigError(f"horizon must be >= 1, got {horizon}")
    check_assumptions(gen, ext)
    a, ys = _closed_loop(step, gen, ext, horizon, slot_len)
    a2, ys2 = _closed_loop(step, gen, ext, horizon, slot_len)
    if not (np.array_equal(ys, ys2) and np.array_equal(a, a2)):
        raise ConfigError("policy is not deterministic; the adversary needs a deterministic policy")
    return Trace(a=a, h=ext.heat_recovery_eta * a, p=np.full(horizon, ext.price_max_Pmax), slot_len=slot_len)


def dispatch_oracle(gen, ext, sigma: SlotInput, y: int, grid_points: int, slot_len: float = 1.0):
    """Best ``(u, v, s)`` with ``u`` restricted to an even grid on ``[0, L*y]``."""
    if grid_points < 2:
        raise ConfigError("grid_points must be >= 2")
    a, h, p = sigma.net_power_a, sigma.heat_h, sigma.grid_price_p
    u = np.linspace(0.0, gen.capacity_L, int(grid_points)) * y
    v = np.maximum(a - u, 0.0)
    s = np.maximum(h - ext.heat_recovery_eta * u, 0.0)
    cost = gen.incremental_co * u + p * v + ext.gas_heat_price_cg * s
    k = int(np.argmin(cost))
    return float(u[k]), float(v[k]), float(s[k])


def exhaustive_offline(trace: Trace, gen, ext):
    """Cheapest commitment by enumerating all ``2**T`` sequences.

    Costs are accumulated slot by slot with the same per-slot weights as the
    shortest-path solver. Ties go to fewer on-slots, then to the
    lexicographically smallest sequence. Returns ``(Schedule, cost)``.
    """
    T = len(trace)
    if T > EXHAUSTIVE_MAX_T:
        raise ConfigError(f"exhaustive search limited to T <= {EXHAUSTIVE_MAX_T}, got {T}")
    psi0, psi1 = slot_costs(trace, gen, ext)
    beta = float(gen.startup_beta)
    n = 1 << T
    codes = np.arange(n, dtype=np.int64)
    # bit T-1-t of the code is y(t), so code order is lexicographic order
    total = np.zeros(n)
    prev = np.zeros(n, dtype=bool)
    on_count = np.zeros(n, dtype=np.int64)
    for t in range(T):
        cur = ((codes >> (T - 1 - t)) & 1).astype(bool)
        w = np.where(cur, np.where(prev, psi1[t] + 0.0, psi1[t] + beta), psi0[t])
        total = total + w
        on_count += cur
        prev = cur
    best = total.min()
    cands = np.flatnonzero(total == best)
    pick = cands[np.lexsort((cands, on_count[cands]))[0]]
    y = np.array([(pick >> (T - 1 - t)) & 1 for t in range(T)], dtype=np.int8)
    return schedule_from_commitment(trace, gen, ext, y), float(best)


def count_dp_offline(trace: Trace, gen, ext, n_gens: int) -> float:
    """Optimum for ``n_gens`` identical units by DP over how many are on."""
    T = len(trace)
    if n_gens < 1 or n_gens > COUNT_DP_MAX_N:
        raise ConfigError(f"count DP needs 1 <= n_gens <= {COUNT_DP_MAX_N}, got {n_gens}")
    if T > COUNT_DP_MAX_T:
        raise ConfigError(f"count DP limited to T <= {COUNT_DP_MAX_T}, got {T}")
    check_assumptions(gen, ext)
    ell, beta, L = trace.slot_len, float(gen.startup_beta), gen.capacity_L
    ks = np.arange(n_gens + 1)
    # slot cost for every (t, k)
    slot = np.empty((T, n_gens + 1))
    for k in ks:
        u, v, s = dispatch_arrays(gen, ext, trace.a, trace.h, trace.p, None, capacity=k * L)
        slot[:, k] = (gen.incremental_co * u + trace.p * v + ext.gas_heat_price_cg * s + k * gen.idle_cm) * ell
    switch = beta * np.maximum(ks[None, :] - ks[:, None], 0)  # [from, to]
    cost = np.full(n_gens + 1, math.inf)
    cost[0] = 0.0
    for t in range(T):
        cost = (cost[:, None] + switch).min(axis=0) + slot[t]
    return float(cost.min())


def constrained_offline(trace: Trace, gen, ext, u_grid: int = 101) -> float:
    """Grid optimum for one unit with dwell-time and ramp limits."""
    T = len(trace)
    if T > CONSTRAINED_MAX_T:
        raise ConfigError(f"constrained oracle limited to T <= {CONSTRAINED_MAX_T}, got {T}")
    if not 2 <= u_grid <= CONSTRAINED_MAX_GRID:
        raise ConfigError(f"u_grid must lie in [2, {CONSTRAINED_MAX_GRID}], got {u_grid}")
    check_assumptions(gen, ext)
    return constrained_dp(trace.a, trace.h, trace.p, trace.slot_len, gen, ext, u_grid=u_grid).cost


def random_params(rng: np.random.Generator, slow: bool = False):
    """Random ``(gen, ext)`` around the desk-scale set that satisfy both assumptions."""
    L = float(rng.uniform(0.5, 2.0))
    co = float(rng.uniform(0.3, 1.5))
    eta = float(rng.choice([0.0, rng.uniform(0.2, 2.0)]))
    cg = float(rng.uniform(0.0, co / eta)) if eta > 0 else float(rng.uniform(0.0, 1.0))
    cm = float(rng.uniform(0.01, 0.5))
    target = float(rng.uniform(0.15, 0.95))
    pmax = max((co + cm / L) / target - eta * cg, 1e-3)
    while not co + cm / L < pmax + eta * cg:
        pmax *= 1.5
    pmin = float(rng.uniform(0.0, 0.6)) * pmax
    beta = float(rng.uniform(0.2, 6.0))
    kw = {}
    if slow:
        kw = dict(
            min_on_Ton=int(rng.integers(0, 5)),
            min_off_Toff=int(rng.integers(0, 5)),
        )
        ramp = rng.choice([math.inf, float(rng.uniform(0.2, 1.2)) * L])
        kw["ramp_up_Rup"] = kw["ramp_down_Rdw"] = float(ramp)
    gen = GeneratorSpec(capacity_L=L, startup_beta=beta, idle_cm=cm, incremental_co=co, **kw)
    ext = ExternalSupplySpec(gas_heat_price_cg=cg, heat_recovery_eta=eta, price_min_Pmin=pmin, price_max_Pmax=pmax)
    return gen, ext


def random_trace(rng: np.random.Generator, gen, ext, T: int, n_gens: int = 1, slot_len: float = 1.0) -> Trace:
    """Bursty demand with runs of high and low load and prices hugging the extremes."""
    L = gen.capacity_L
    level = np.empty(T)
    t = 0
    while t < T:
        run = int(rng.integers(1, 9))
        level[t : t + run] = rng.uniform(0.0, 1.3 * n_gens) if rng.random() < 0.6 else 0.0
        t += run
    a = L * np.clip(level + rng.normal(0, 0.1, T), 0, None)
    a[rng.random(T) < 0.1] = 0.0
    h = ext.heat_recovery_eta * L * np.clip(level * rng.uniform(0.3, 1.4, T), 0, None)
    if ext.heat_recovery_eta == 0:
        h = L * rng.uniform(0, n_gens, T)
    p = rng.uniform(ext.price_min_Pmin, ext.price_max_Pmax, T)
    extreme = rng.random(T)
    p[extreme < 0.25] = ext.price_max_Pmax
    p[(extreme >= 0.25) & (extreme < 0.35)] = ext.price_min_Pmin
    return Trace(a=a, h=h, p=p, slot_len=slot_len)


def random_instance(rng: np.random.Generator, T: int = 50, n_gens: int = 1, slow: bool = False):
    """``(gen, ext, trace)`` with random parameters and a bursty trace."""
    gen, ext = random_params(rng, slow=slow)
    return gen, ext, random_trace(rng, gen, ext, T, n_gens)


def schedule_money(schedule: Schedule, trace: Trace, gen, ext) -> float:
    """Horizon cost straight from the decision series (no feasibility check)."""
    y = np.asarray(schedule.y).reshape(len(trace), -1).astype(int)
    prev = np.vstack([np.zeros((1, y.shape[1]), dtype=int), y[:-1]])
    ell = trace.slot_len
    per_slot = (
        trace.p * schedule.v
        + ext.gas_heat_price_cg * schedule.s
        + gen.incremental_co * schedule.u.sum(axis=1)
        + gen.idle_cm * y.sum(axis=1)
    ) * ell
    return float(per_slot.sum() + gen.startup_beta * np.maximum(y - prev, 0).sum())

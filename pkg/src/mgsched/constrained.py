"""Grid dynamic program for a single unit with dwell-time and ramp limits.

State is ``(on/off, streak, output level)``: the streak counts consecutive
slots in the current on/off state, capped at the longest dwell time, and the
output is restricted to an evenly spaced grid on ``[0, L]``. The optimum is
exact on the grid, so it upper-bounds the continuous optimum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["GridPath", "constrained_dp"]

_INF = float("inf")


@dataclass(frozen=True)
class GridPath:
    cost: float
    y: np.ndarray
    u: np.ndarray


def _slot_cost(gen, ext, a, h, p, u, on, ell):
    v = max(a - u, 0.0) if np.ndim(u) == 0 else np.maximum(a - u, 0.0)
    s = np.maximum(h - ext.heat_recovery_eta * u, 0.0)
    return (gen.incremental_co * u + p * v + ext.gas_heat_price_cg * s + gen.idle_cm * on) * ell


def constrained_dp(a, h, p, slot_len, gen, ext, u_grid: int = 101, y0: int = 0, streak0: int | None = None, u0: float = 0.0) -> GridPath:
    """Cheapest path through the constrained state space.

    ``y0``, ``streak0`` and ``u0`` describe the unit just before the first
    slot; by default it has been off for longer than any dwell time.
    Terminal state is free.
    """
    a = np.asarray(a, dtype=float)
    h = np.asarray(h, dtype=float)
    p = np.asarray(p, dtype=float)
    T = len(a)
    L, beta = gen.capacity_L, float(gen.startup_beta)
    t_on, t_off = gen.min_on_Ton, gen.min_off_Toff
    D = max(t_on, t_off, 1)
    G = int(u_grid)
    grid = np.linspace(0.0, L, G)
    tol = 1e-12 * max(1.0, L)
    r_up, r_dw = gen.ramp_up_Rup, gen.ramp_down_Rdw
    if streak0 is None:
        streak0 = D
    d0 = min(max(int(streak0), 1), D)

    # off states: index d-1; on states: D + (d-1)*G + g
    n_states = D + D * G
    cost = np.full(n_states, _INF)
    prev_u = np.zeros(n_states)
    if y0 == 0:
        cost[d0 - 1] = 0.0
    else:
        idx = D + (d0 - 1) * G
        cost[idx] = 0.0
        prev_u[idx] = u0
    prev_u[D:] = np.tile(grid, D)
    if y0 == 1:
        prev_u[D + (d0 - 1) * G] = u0

    backs = np.zeros((T, n_states), dtype=np.int64)
    up_ok_from_zero = grid <= r_up + tol
    for t in range(T):
        c_off = float(_slot_cost(gen, ext, a[t], h[t], p[t], 0.0, 0, slot_len))
        c_on = _slot_cost(gen, ext, a[t], h[t], p[t], grid, 1, slot_len)
        new = np.full(n_states, _INF)
        back = np.zeros(n_states, dtype=np.int64)

        def offer(target, value, src):
            # value/src may be arrays aligned with target
            better = value < new[target]
            new[target] = np.where(better, value, new[target])
            back[target] = np.where(better, src, back[target])

        off_cost = cost[:D]
        on_cost = cost[D:].reshape(D, G)
        on_u = prev_u[D:].reshape(D, G)

        # stay off
        for d in range(1, D + 1):
            if off_cost[d - 1] < _INF:
                nd = min(d + 1, D)
                offer(np.array([nd - 1]), np.array([off_cost[d - 1]]), np.array([d - 1]))
        # switch off: on-streak long enough and output can ramp to zero
        for d in range(max(t_on, 1), D + 1):
            row = on_cost[d - 1]
            ok = on_u[d - 1] <= r_dw + tol
            if np.any(ok & (row < _INF)):
                cand = np.where(ok, row, _INF)
                g = int(np.argmin(cand))
                offer(np.array([0]), np.array([cand[g]]), np.array([D + (d - 1) * G + g]))
        # switch on from off with a long enough off-streak
        for d in range(max(t_off, 1), D + 1):
            if off_cost[d - 1] < _INF:
                val = np.where(up_ok_from_zero, off_cost[d - 1] + beta, _INF)
                tgt = D + np.arange(G)
                offer(tgt, val, np.full(G, d - 1))
        # stay on, respecting ramps
        for d in range(1, D + 1):
            row = on_cost[d - 1]
            live = row < _INF
            if not np.any(live):
                continue
            src_u = on_u[d - 1][live]
            src_c = row[live]
            src_idx = (D + (d - 1) * G + np.arange(G))[live]
            diff = grid[None, :] - src_u[:, None]
            ok = (diff <= r_up + tol) & (-diff <= r_dw + tol)
            cand = np.where(ok, src_c[:, None], _INF)
            best = np.argmin(cand, axis=0)
            val = cand[best, np.arange(G)]
            nd = min(d + 1, D)
            offer(D + (nd - 1) * G + np.arange(G), val, src_idx[best])

        new[:D] += c_off
        new[D:] += np.tile(c_on, D)
        cost = new
        backs[t] = back
        prev_u = np.zeros(n_states)
        prev_u[D:] = np.tile(grid, D)

    end = int(np.argmin(cost))
    total = float(cost[end])
    y = np.zeros(T, dtype=np.int8)
    u = np.zeros(T)
    state = end
    for t in range(T - 1, -1, -1):
        if state >= D:
            y[t] = 1
            u[t] = grid[(state - D) % G]
        state = int(backs[t][state])
    return GridPath(cost=total, y=y, u=u)


"""Online scheduling: the CHASE step functions, the slow-unit wrapper, RHC.

Every step function has the shape ``step(state, window, gen, ext) ->
(y, u, v, s, new_state)`` where ``window`` is a :class:`~mgsched.model.Trace`
holding the present slot followed by whatever look-ahead is available. A
policy instance is driven one slot at a time by :func:`run_policy`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .bounds import plus_goes_external
from .constrained import constrained_dp
from .errors import ConfigError, DataError, UnsupportedSettingError
from .layering import LayeredTraces, slice_demands
from .model import (
    Schedule,
    SlotInput,
    Trace,
    check_assumptions,
    dispatch,
    dispatch_arrays,
    total_cost,
)
from .offline import clamp_step, delta, dp_path, slot_costs

__all__ = [
    "OnlineState",
    "Policy",
    "POLICY_NAMES",
    "ExactForecast",
    "chase_s_step",
    "chase_s_plus_step",
    "chase_s_lk_step",
    "chase_gen_step",
    "rhc_step",
    "certainty_decisions",
    "chase_multi_run",
    "run_policy",
    "slice_demands",
    "LayeredTraces",
]

# off-streak before the first slot; any minimum off time is already served
_LONG_AGO = 10**9


@dataclass(frozen=True)
class OnlineState:
    """What a policy carries from slot ``t-1`` into slot ``t``."""

    y_prev: int
    delta_prev: float
    u_prev: float = 0.0
    on_streak: int = 0
    off_streak: int = _LONG_AGO

    @classmethod
    def initial(cls, gen) -> "OnlineState":
        return cls(y_prev=0, delta_prev=-float(gen.startup_beta))

    def advance(self, y: int, u: float, delta_now: float) -> "OnlineState":
        if y:
            on, off = (self.on_streak + 1 if self.y_prev else 1), 0
        else:
            on, off = 0, (min(self.off_streak + 1, _LONG_AGO) if not self.y_prev else 1)
        return OnlineState(y_prev=int(y), delta_prev=delta_now, u_prev=float(u), on_streak=on, off_streak=off)


def _as_window(window, slot_len: float) -> Trace:
    if isinstance(window, Trace):
        return window
    if isinstance(window, SlotInput):
        return Trace.from_slots([window], slot_len)
    window = list(window)
    if not window:
        raise ValueError("empty look-ahead window")
    return Trace.from_slots(window, slot_len)


def _certain(state: OnlineState, window: Trace, gen, ext):
    """Δ at the present slot and the first certainty event inside the window."""
    beta = float(gen.startup_beta)
    cur = state.delta_prev
    first = None
    now = None
    for k, sigma in enumerate(window):
        cur = clamp_step(cur, delta(gen, ext, sigma, window.slot_len), beta)
        if k == 0:
            now = cur
        if cur == -beta:
            first = 0
            break
        if cur == 0.0:
            first = 1
            break
    return now, first


def chase_s_step(state: OnlineState, sigma: SlotInput, gen, ext, slot_len: float = 1.0):
    """Track the offline optimum: switch only once Δ pins the decision."""
    if isinstance(sigma, Trace):
        sigma, slot_len = sigma[0], sigma.slot_len
    beta = float(gen.startup_beta)
    now = clamp_step(state.delta_prev, delta(gen, ext, sigma, slot_len), beta)
    if now == -beta:
        y = 0
    elif now == 0.0:
        y = 1
    else:
        y = state.y_prev
    u, v, s = dispatch(gen, ext, sigma, y, slot_len)
    return y, u, v, s, state.advance(y, u, now)


def chase_s_lk_step(state: OnlineState, window, gen, ext, slot_len: float = 1.0):
    """Like :func:`chase_s_step` but acts on the earliest certainty event in the window."""
    window = _as_window(window, slot_len)
    if len(window) == 0:
        raise ValueError("empty look-ahead window")
    now, first = _certain(state, window, gen, ext)
    y = state.y_prev if first is None else first
    sigma = window[0]
    u, v, s = dispatch(gen, ext, sigma, y, window.slot_len)
    return y, u, v, s, state.advance(y, u, now)


def chase_s_plus_step(state: OnlineState, window, gen, ext, slot_len: float = 1.0, omega: int = 0):
    """Serve everything externally when that has the better worst case, else track.

    ``omega`` is the nominal look-ahead the guard is evaluated for; it does not
    shrink when the window is truncated at the end of the horizon.
    """
    window = _as_window(window, slot_len)
    if plus_goes_external(gen, ext, omega, window.slot_len):
        sigma = window[0]
        now = clamp_step(state.delta_prev, delta(gen, ext, sigma, window.slot_len), float(gen.startup_beta))
        return 0, 0.0, sigma.net_power_a, sigma.heat_h, state.advance(0, 0.0, now)
    return chase_s_lk_step(state, window, gen, ext)


def _gen_adjust(state: OnlineState, y_ref: int, u_ref: float, gen):
    """Bend a reference decision into one that respects dwell times and ramps."""
    y_prev, u_prev = state.y_prev, state.u_prev
    if y_ref > y_prev:
        allowed = state.off_streak >= gen.min_off_Toff
    elif y_ref < y_prev:
        # output must also be able to reach zero in one slot
        allowed = state.on_streak >= gen.min_on_Ton and u_prev <= gen.ramp_down_Rdw
    else:
        allowed = True
    y = y_ref if allowed else y_prev
    if y == 0:
        return 0, 0.0
    target = u_ref if y_ref else 0.0
    if target > u_prev:
        gap = target - u_prev
        u = target if gap <= gen.ramp_up_Rup else u_prev + gen.ramp_up_Rup
    else:
        gap = u_prev - target
        u = target if gap <= gen.ramp_down_Rdw else u_prev - gen.ramp_down_Rdw
    return 1, min(u, gen.capacity_L)


def chase_gen_step(state: OnlineState, window, gen, ext, slot_len: float = 1.0):
    """Follow the look-ahead tracker's decision as far as dwell times and ramps allow."""
    window = _as_window(window, slot_len)
    y_ref, u_ref, _, _, ref_state = chase_s_lk_step(state, window, gen, ext)
    y, u = _gen_adjust(state, y_ref, u_ref, gen)
    sigma = window[0]
    v = max(sigma.net_power_a - u, 0.0)
    s = max(sigma.heat_h - ext.heat_recovery_eta * u, 0.0)
    return y, u, v, s, state.advance(y, u, ref_state.delta_prev)


def rhc_step(state: OnlineState, window, gen, ext, slot_len: float = 1.0, u_grid: int = 101):
    """Solve the window exactly from the current state and keep only its first slot."""
    window = _as_window(window, slot_len)
    check_assumptions(gen, ext)
    sigma = window[0]
    now = clamp_step(state.delta_prev, delta(gen, ext, sigma, window.slot_len), float(gen.startup_beta))
    if gen.fast_responding:
        psi0, psi1 = slot_costs(window, gen, ext)
        path, _ = dp_path(psi0, psi1, float(gen.startup_beta), y0=state.y_prev)
        y = int(path[0])
        u, v, s = dispatch(gen, ext, sigma, y, window.slot_len)
        return y, u, v, s, state.advance(y, u, now)
    streak = state.on_streak if state.y_prev else state.off_streak
    path = constrained_dp(
        window.a, window.h, window.p, window.slot_len, gen, ext,
        u_grid=u_grid, y0=state.y_prev, streak0=streak, u0=state.u_prev,
    )
    y, u = int(path.y[0]), float(path.u[0])
    v = max(sigma.net_power_a - u, 0.0)
    s = max(sigma.heat_h - ext.heat_recovery_eta * u, 0.0)
    return y, u, v, s, state.advance(y, u, now)


# --------------------------------------------------------------------------
# drivers


POLICY_NAMES = ("chase_s", "chase_s_plus", "chase", "chase_gen", "rhc")


@dataclass(frozen=True)
class Policy:
    """An online policy and its look-ahead in slots.

    ``chase_s`` tracks Δ (with look-ahead when ``lookahead > 0``),
    ``chase_s_plus``/``chase`` add the all-external guard, ``chase_gen`` adds
    dwell-time and ramp handling, ``rhc`` is receding-horizon control.
    """

    name: str
    lookahead: int = 0

    def __post_init__(self):
        if self.name not in POLICY_NAMES:
            raise ConfigError(f"unknown policy {self.name!r}; expected one of {POLICY_NAMES}")
        if int(self.lookahead) != self.lookahead or self.lookahead < 0:
            raise ConfigError(f"lookahead must be a non-negative integer, got {self.lookahead}")
        object.__setattr__(self, "lookahead", int(self.lookahead))

    @property
    def label(self) -> str:
        return f"{self.name}(w={self.lookahead})"


class ExactForecast:
    """Look-ahead from the true future, truncated at the end of the horizon."""

    exact = True

    def window(self, trace: Trace, t: int, omega: int) -> Trace:
        return trace.window(t, omega)


def certainty_decisions(delta_values: np.ndarray, beta: float, omega: int) -> np.ndarray:
    """Per slot, the commitment implied by the first extreme of Δ within ``omega`` slots.

    ``delta_values`` is ``Δ(0..T)``. Entries are 1, 0, or -1 when the window
    holds no certainty event.
    """
    vals = np.asarray(delta_values)
    T = len(vals) - 1
    out = np.full(T, -1, dtype=np.int8)
    nxt = T + 1  # index of the next extreme at or after tau
    nxt_val = -1
    for tau in range(T, 0, -1):
        v = vals[tau]
        if v == -beta:
            nxt, nxt_val = tau, 0
        elif v == 0.0:
            nxt, nxt_val = tau, 1
        if nxt <= tau + omega:
            out[tau - 1] = nxt_val
    return out


def _delta_series(deltas, beta):
    out = np.empty(len(deltas) + 1)
    cur = -beta
    out[0] = cur
    for t, d in enumerate(deltas.tolist(), start=1):
        cur = clamp_step(cur, d, beta)
        out[t] = cur
    return out


def _layer_fast(policy: Policy, layer: Trace, gen, ext):
    """Exact-forecast run of one policy on one layer; returns y, u arrays."""
    beta = float(gen.startup_beta)
    T = len(layer)
    omega = policy.lookahead
    psi0, psi1 = slot_costs(layer, gen, ext)
    if policy.name in ("chase_s_plus", "chase") and plus_goes_external(gen, ext, omega, layer.slot_len):
        return np.zeros(T, dtype=np.int8), np.zeros(T)

    if policy.name == "rhc":
        y = np.zeros(T, dtype=np.int8)
        prev = 0
        for t in range(T):
            path, _ = dp_path(psi0[t : t + omega + 1], psi1[t : t + omega + 1], beta, y0=prev)
            prev = int(path[0])
            y[t] = prev
        u, _, _ = dispatch_arrays(gen, ext, layer.a, layer.h, layer.p, y)
        return y, u

    cert = certainty_decisions(_delta_series(psi0 - psi1, beta), beta, omega)
    if policy.name != "chase_gen":
        y = np.zeros(T, dtype=np.int8)
        prev = 0
        for t, c in enumerate(cert.tolist()):
            prev = prev if c < 0 else c
            y[t] = prev
        u, _, _ = dispatch_arrays(gen, ext, layer.a, layer.h, layer.p, y)
        return y, u

    u_on, _, _ = dispatch_arrays(gen, ext, layer.a, layer.h, layer.p, 1)
    y = np.zeros(T, dtype=np.int8)
    u = np.zeros(T)
    state = OnlineState.initial(gen)
    for t, c in enumerate(cert.tolist()):
        y_ref = state.y_prev if c < 0 else c
        u_ref = float(u_on[t]) if y_ref else 0.0
        yt, ut = _gen_adjust(state, y_ref, u_ref, gen)
        y[t], u[t] = yt, ut
        state = state.advance(yt, ut, 0.0)
    return y, u


_STEPS = {
    "chase_s": chase_s_lk_step,
    "chase_gen": chase_gen_step,
    "rhc": rhc_step,
}


def _check_setting(policy: Policy, gen):
    if not gen.fast_responding and policy.name in ("chase_s", "chase_s_plus", "chase"):
        raise UnsupportedSettingError(
            f"{policy.name} ignores dwell times and ramps; use chase_gen for a slow-responding unit"
        )


def run_policy(policy: Policy, trace: Trace, gen, ext, n_gens: int = 1, forecast=None, fast: bool | None = None):
    """Drive ``policy`` over ``trace`` for ``n_gens`` identical units.

    Demand is sliced into per-unit layers and every unit runs its own copy of
    the policy; the residual above the top layer goes to external supply.
    ``forecast`` supplies the look-ahead windows (true future by default).
    With the true future a vectorised path is used unless ``fast=False``.
    Returns ``(Schedule, CostBreakdown)``.
    """
    if isinstance(policy, str):
        policy = Policy(policy)
    check_assumptions(gen, ext)
    _check_setting(policy, gen)
    forecast = ExactForecast() if forecast is None else forecast
    exact = getattr(forecast, "exact", False)
    if fast is None:
        fast = exact
    if fast and not exact:
        raise ConfigError("the vectorised path needs the true future as forecast")
    sliced = slice_demands(trace, gen, ext, n_gens)
    T = len(trace)
    if fast:
        ys, us = zip(*(_layer_fast(policy, layer, gen, ext) for layer in sliced.layers))
        y = np.stack(ys, axis=1)
        u = np.stack(us, axis=1)
    else:
        y, u = _run_steps(policy, trace, gen, ext, n_gens, forecast)
    v = sliced.a_top.copy()
    s = sliced.h_top.copy()
    eta = ext.heat_recovery_eta
    for n, layer in enumerate(sliced.layers):
        v = v + np.maximum(layer.a - u[:, n], 0.0)
        s = s + np.maximum(layer.h - eta * u[:, n], 0.0)
    sched = Schedule(y=y, u=u, v=v, s=s)
    if len(sched) != T:
        raise DataError("internal length mismatch")
    return sched, total_cost(sched, trace, gen, ext)


def _run_steps(policy: Policy, trace: Trace, gen, ext, n_gens: int, forecast):
    T = len(trace)
    omega = policy.lookahead
    y = np.zeros((T, n_gens), dtype=np.int8)
    u = np.zeros((T, n_gens))
    states = [OnlineState.initial(gen) for _ in range(n_gens)]
    plus = policy.name in ("chase_s_plus", "chase")
    step = _STEPS.get(policy.name, chase_s_lk_step)
    for t in range(T):
        window = forecast.window(trace, t, omega)
        if len(window) == 0 or len(window) > omega + 1:
            raise ConfigError(f"forecast returned {len(window)} slots for look-ahead {omega}")
        layers = slice_demands(window, gen, ext, n_gens).layers
        for n, layer in enumerate(layers):
            if plus:
                yt, ut, _, _, states[n] = chase_s_plus_step(states[n], layer, gen, ext, omega=omega)
            else:
                yt, ut, _, _, states[n] = step(states[n], layer, gen, ext)
            y[t, n], u[t, n] = yt, ut
    return y, u


def chase_multi_run(trace: Trace, gen, ext, n_gens: int, omega: int = 0, plus: bool = True, forecast=None) -> Schedule:
    """Independent per-layer CHASE with look-ahead ``omega`` for ``n_gens`` units."""
    policy = Policy("chase_s_plus" if plus else "chase_s", omega)
    return run_policy(policy, trace, gen, ext, n_gens, forecast)[0]


def layer_schedules(schedule: Schedule, trace: Trace, gen, ext) -> Sequence[Schedule]:
    """Split a layered multi-unit schedule back into per-layer single-unit schedules."""
    sliced = slice_demands(trace, gen, ext, schedule.n_gens)
    out = []
    for n, layer in enumerate(sliced.layers):
        un = schedule.u[:, n]
        out.append(
            Schedule(
                y=schedule.y[:, n],
                u=un,
                v=np.maximum(layer.a - un, 0.0),
                s=np.maximum(layer.h - ext.heat_recovery_eta * un, 0.0),
            )
        )
    return out


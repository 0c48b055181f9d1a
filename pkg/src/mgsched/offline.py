"""Offline optimum for fast-responding units.

The cumulative cost-difference process, its critical segments, the
segment-based optimum (on over rising segments, off elsewhere), the
two-state shortest-path solver and the layered multi-unit optimum.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DataError, UnsupportedSettingError
from .layering import slice_demands
from .model import Schedule, Trace, check_assumptions, dispatch_arrays, psi, psi_arrays

__all__ = [
    "DeltaSeries",
    "SegmentKind",
    "CriticalSegment",
    "delta",
    "delta_values",
    "slot_costs",
    "delta_process",
    "clamp_step",
    "critical_segments",
    "ofa",
    "ofa_multi",
    "dp_offline",
    "dp_path",
    "ofa_commitment",
    "commitment_cost",
    "schedule_from_commitment",
]


@dataclass(frozen=True, eq=False)
class DeltaSeries:
    """``values[0..T]`` of the clamped cumulative cost difference."""

    values: np.ndarray
    beta: float

    def __len__(self):
        return len(self.values)


class SegmentKind(str, enum.Enum):
    START = "start"
    TYPE1 = "type1"
    TYPE2 = "type2"
    END = "end"


@dataclass(frozen=True)
class CriticalSegment:
    start: int  # 1-based, inclusive
    end: int
    kind: SegmentKind
    tilde: int | None = None


def delta(gen, ext, sigma, slot_len: float = 1.0) -> float:
    """One-slot saving of running the unit versus leaving it off."""
    return psi(gen, ext, sigma, 0, slot_len) - psi(gen, ext, sigma, 1, slot_len)


def slot_costs(trace: Trace, gen, ext):
    """Per-slot costs with the unit off and on, as two arrays."""
    check_assumptions(gen, ext)
    psi0 = psi_arrays(gen, ext, trace.a, trace.h, trace.p, 0, trace.slot_len)
    psi1 = psi_arrays(gen, ext, trace.a, trace.h, trace.p, 1, trace.slot_len)
    return psi0, psi1


def delta_values(trace: Trace, gen, ext) -> np.ndarray:
    psi0, psi1 = slot_costs(trace, gen, ext)
    return psi0 - psi1


def clamp_step(prev: float, d: float, beta: float) -> float:
    # min/max return one of their operands, so the caps are hit bit-exactly
    return min(0.0, max(-beta, prev + d))


def delta_process(trace: Trace, gen, ext, deltas=None) -> DeltaSeries:
    beta = float(gen.startup_beta)
    if deltas is None:
        deltas = delta_values(trace, gen, ext)
    out = np.empty(len(deltas) + 1)
    cur = -beta
    out[0] = cur
    for t, d in enumerate(deltas.tolist(), start=1):
        cur = clamp_step(cur, d, beta)
        out[t] = cur
    return DeltaSeries(values=out, beta=beta)


def critical_segments(d: DeltaSeries) -> list:
    """Typed partition of ``[1, T]`` induced by the extreme hits of the process.

    Hits of the same extreme are grouped into runs. A segment runs from just
    after the last hit of one run to the last hit of the next run; rising runs
    (``-beta`` to ``0``) give type-1 segments and falling runs give type-2.
    Whatever precedes the first crossing is the start segment and whatever
    follows the last hit is the end segment. Empty start/end segments are
    dropped.
    """
    vals = np.asarray(d.values, dtype=float)
    beta = d.beta
    if beta <= 0:
        raise DataError("critical segments need a positive startup cost")
    if len(vals) < 2 or vals[0] != -beta:
        raise DataError("series must start at -beta and cover at least one slot")
    if np.any(vals < -beta) or np.any(vals > 0):
        raise DataError("series leaves [-beta, 0]")
    T = len(vals) - 1

    # runs of same-extreme hits: [value, first_hit, last_hit]
    runs = []
    for tau in range(T + 1):
        v = vals[tau]
        if v == 0.0 or v == -beta:
            if runs and runs[-1][0] == v:
                runs[-1][2] = tau
            else:
                runs.append([v, tau, tau])

    segs = []
    if runs[0][2] >= 1:
        segs.append(CriticalSegment(1, runs[0][2], SegmentKind.START))
    for prev, nxt in zip(runs, runs[1:]):
        kind = SegmentKind.TYPE1 if prev[0] == -beta else SegmentKind.TYPE2
        segs.append(CriticalSegment(prev[2] + 1, nxt[2], kind, tilde=nxt[1]))
    if runs[-1][2] < T:
        segs.append(CriticalSegment(runs[-1][2] + 1, T, SegmentKind.END))
    return segs


def schedule_from_commitment(trace: Trace, gen, ext, y) -> Schedule:
    y = np.asarray(y, dtype=np.int8)
    u, v, s = dispatch_arrays(gen, ext, trace.a, trace.h, trace.p, y)
    return Schedule(y=y, u=u, v=v, s=s)


def _require_fast(gen):
    if not gen.fast_responding:
        raise UnsupportedSettingError(
            "offline optimum covers fast-responding units only; use gen.relaxed() or the constrained oracle"
        )


def ofa_commitment(trace: Trace, gen, ext, deltas=None) -> np.ndarray:
    _require_fast(gen)
    if deltas is None:
        deltas = delta_values(trace, gen, ext)
    y = np.zeros(len(trace), dtype=np.int8)
    if gen.startup_beta == 0:
        # no switching cost: the slot-wise choice is optimal
        y[deltas > 0] = 1
        return y
    for seg in critical_segments(delta_process(trace, gen, ext, deltas)):
        if seg.kind is SegmentKind.TYPE1:
            y[seg.start - 1 : seg.end] = 1
    return y


def ofa(trace: Trace, gen, ext) -> Schedule:
    """Segment-based optimum for one fast-responding unit."""
    return schedule_from_commitment(trace, gen, ext, ofa_commitment(trace, gen, ext))


def commitment_cost(psi0, psi1, y, beta: float) -> float:
    """Sum of per-slot edge weights along ``y``, accumulated in slot order.

    Uses the same float operations as :func:`dp_offline`, so the value along
    the DP path equals the DP optimum bit for bit.
    """
    total = 0.0
    prev = 0
    for p0, p1, cur in zip(np.asarray(psi0).tolist(), np.asarray(psi1).tolist(), np.asarray(y).tolist()):
        w = (p1 + beta if prev == 0 else p1 + 0.0) if cur else p0
        total = total + w
        prev = cur
    return total


def dp_path(psi0, psi1, beta: float, y0: int = 0):
    """Two-state shortest path with startup cost; ties prefer the off state.

    Returns ``(y, cost)``; the path starts from commitment ``y0`` before the
    first slot and has a free terminal state.
    """
    inf = float("inf")
    c0, c1 = (0.0, inf) if y0 == 0 else (inf, 0.0)
    T = len(psi0)
    back0 = np.zeros(T, dtype=np.int8)
    back1 = np.zeros(T, dtype=np.int8)
    for t, (p0, p1) in enumerate(zip(np.asarray(psi0).tolist(), np.asarray(psi1).tolist())):
        a0, a1 = c0 + p0, c1 + p0
        if a0 <= a1:
            n0 = a0
        else:
            n0, back0[t] = a1, 1
        b0, b1 = c0 + (p1 + beta), c1 + (p1 + 0.0)
        if b0 <= b1:
            n1 = b0
        else:
            n1, back1[t] = b1, 1
        c0, c1 = n0, n1
    y = np.zeros(T, dtype=np.int8)
    state = 0 if c0 <= c1 else 1
    cost = c0 if state == 0 else c1
    for t in range(T - 1, -1, -1):
        y[t] = state
        state = int(back1[t] if state else back0[t])
    return y, cost


def dp_offline(trace: Trace, gen, ext) -> Schedule:
    """Shortest path over the on/off lattice (edge weight: slot cost + startup)."""
    _require_fast(gen)
    psi0, psi1 = slot_costs(trace, gen, ext)
    y, _ = dp_path(psi0, psi1, float(gen.startup_beta))
    return schedule_from_commitment(trace, gen, ext, y)


def ofa_multi(trace: Trace, gen, ext, n_gens: int) -> Schedule:
    """Layered optimum for ``n_gens`` identical fast-responding units."""
    _require_fast(gen)
    check_assumptions(gen, ext)
    sliced = slice_demands(trace, gen, ext, n_gens)
    ys, us = [], []
    v = sliced.a_top.copy()
    s = sliced.h_top.copy()
    for layer in sliced.layers:
        sched = ofa(layer, gen, ext)
        ys.append(sched.y[:, 0])
        us.append(sched.u[:, 0])
        v = v + sched.v
        s = s + sched.s
    return Schedule(y=np.stack(ys, axis=1), u=np.stack(us, axis=1), v=v, s=s)

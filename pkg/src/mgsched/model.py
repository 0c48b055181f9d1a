"""Domain types, the per-slot economic dispatch rule and cost accounting.

Units are kW, hours, $/kWh and $/h. A trace carries its slot length ``slot_len``
in hours and every per-hour rate is multiplied by it when a slot is costed.
The startup cost is a lump sum and is never scaled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterator, Sequence

import numpy as np

from .errors import ConfigError, DataError, ValidationError

__all__ = [
    "GeneratorSpec",
    "ExternalSupplySpec",
    "SlotInput",
    "Trace",
    "SlotDecision",
    "Schedule",
    "CostBreakdown",
    "Violation",
    "check_assumptions",
    "dispatch",
    "psi",
    "dispatch_arrays",
    "psi_arrays",
    "total_cost",
    "validate_schedule",
    "baseline_cost",
    "net_demand",
    "all_off_schedule",
    "reference_params",
]


@dataclass(frozen=True)
class GeneratorSpec:
    """One local CHP unit.

    Ramp rates are kW per slot and the minimum on/off times are counted in
    slots. ``math.inf`` ramps and zero dwell times describe a fast-responding
    unit.
    """

    capacity_L: float
    startup_beta: float
    idle_cm: float
    incremental_co: float
    min_on_Ton: int = 0
    min_off_Toff: int = 0
    ramp_up_Rup: float = math.inf
    ramp_down_Rdw: float = math.inf

    def __post_init__(self):
        if not self.capacity_L > 0:
            raise ConfigError(f"capacity_L must be > 0, got {self.capacity_L}")
        for name in ("startup_beta", "idle_cm", "incremental_co"):
            if not getattr(self, name) >= 0:
                raise ConfigError(f"{name} must be >= 0, got {getattr(self, name)}")
        for name in ("min_on_Ton", "min_off_Toff"):
            value = getattr(self, name)
            if int(value) != value or value < 0:
                raise ConfigError(f"{name} must be a non-negative integer, got {value}")
            object.__setattr__(self, name, int(value))
        for name in ("ramp_up_Rup", "ramp_down_Rdw"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be > 0, got {getattr(self, name)}")

    @property
    def fast_responding(self) -> bool:
        # dwell of one slot and ramps of a full capacity per slot never bind
        return (
            self.min_on_Ton <= 1
            and self.min_off_Toff <= 1
            and self.ramp_up_Rup >= self.capacity_L
            and self.ramp_down_Rdw >= self.capacity_L
        )

    def relaxed(self) -> "GeneratorSpec":
        """Same unit with min on/off times and ramp limits removed."""
        return replace(
            self, min_on_Ton=0, min_off_Toff=0, ramp_up_Rup=math.inf, ramp_down_Rdw=math.inf
        )


@dataclass(frozen=True)
class ExternalSupplySpec:
    gas_heat_price_cg: float
    heat_recovery_eta: float
    price_min_Pmin: float
    price_max_Pmax: float

    def __post_init__(self):
        if not 0 <= self.price_min_Pmin <= self.price_max_Pmax:
            raise ConfigError(
                f"need 0 <= Pmin <= Pmax, got {self.price_min_Pmin}, {self.price_max_Pmax}"
            )
        if not self.heat_recovery_eta >= 0:
            raise ConfigError(f"heat_recovery_eta must be >= 0, got {self.heat_recovery_eta}")
        if not self.gas_heat_price_cg >= 0:
            raise ConfigError(f"gas_heat_price_cg must be >= 0, got {self.gas_heat_price_cg}")


def check_assumptions(gen: GeneratorSpec, ext: ExternalSupplySpec) -> None:
    """Raise ConfigError unless both model assumptions hold.

    Gas heat must be no dearer than generating heat alone
    (``c_o >= eta * c_g``) and the cheapest co-generated energy must beat the
    most expensive external energy (``c_o + c_m/L < Pmax + eta * c_g``).
    """
    eta_cg = ext.heat_recovery_eta * ext.gas_heat_price_cg
    if gen.incremental_co < eta_cg:
        raise ConfigError(
            f"assumption c_o >= eta*c_g violated: {gen.incremental_co} < {eta_cg}"
        )
    lhs = gen.incremental_co + gen.idle_cm / gen.capacity_L
    if not lhs < ext.price_max_Pmax + eta_cg:
        raise ConfigError(
            f"assumption c_o + c_m/L < Pmax + eta*c_g violated: {lhs} >= {ext.price_max_Pmax + eta_cg}"
        )


@dataclass(frozen=True)
class SlotInput:
    net_power_a: float
    heat_h: float
    grid_price_p: float

    def __post_init__(self):
        if not self.net_power_a >= 0:
            raise DataError(f"net_power_a must be >= 0, got {self.net_power_a}")
        if not self.heat_h >= 0:
            raise DataError(f"heat_h must be >= 0, got {self.heat_h}")
        if not self.grid_price_p >= 0:
            raise DataError(f"grid_price_p must be >= 0, got {self.grid_price_p}")


def _frozen(x, dtype=float) -> np.ndarray:
    arr = np.array(x, dtype=dtype)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class Trace:
    """A horizon of per-slot inputs stored column-wise.

    ``elec`` and ``wind`` are the raw demand and wind columns when the trace
    came from a file or generator; forecast-error injection perturbs wind and
    re-derives the net demand from them. ``timestamps`` is informational.
    """

    a: np.ndarray
    h: np.ndarray
    p: np.ndarray
    slot_len: float = 1.0
    elec: np.ndarray | None = None
    wind: np.ndarray | None = None
    timestamps: tuple | None = None

    def __post_init__(self):
        a, h, p = (_frozen(np.atleast_1d(x)) for x in (self.a, self.h, self.p))
        if not (a.ndim == h.ndim == p.ndim == 1 and len(a) == len(h) == len(p)):
            raise DataError("a, h, p must be 1-D arrays of equal length")
        if len(a) == 0:
            raise DataError("no slots")
        if not self.slot_len > 0:
            raise DataError(f"slot_len must be > 0, got {self.slot_len}")
        if np.any(~np.isfinite(a)) or np.any(~np.isfinite(h)) or np.any(~np.isfinite(p)):
            raise DataError("non-finite value in trace")
        if np.any(a < 0) or np.any(h < 0):
            raise DataError("demands must be >= 0")
        if np.any(p < 0):
            raise DataError("prices must be >= 0")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "p", p)
        for name in ("elec", "wind"):
            col = getattr(self, name)
            if col is not None:
                col = _frozen(col)
                if col.shape != a.shape:
                    raise DataError(f"{name} column length mismatch")
                object.__setattr__(self, name, col)
        if self.timestamps is not None:
            object.__setattr__(self, "timestamps", tuple(self.timestamps))

    @classmethod
    def from_slots(cls, slots: Sequence[SlotInput], slot_len: float = 1.0) -> "Trace":
        slots = list(slots)
        return cls(
            a=[s.net_power_a for s in slots],
            h=[s.heat_h for s in slots],
            p=[s.grid_price_p for s in slots],
            slot_len=slot_len,
        )

    def __len__(self) -> int:
        return len(self.a)

    @property
    def T(self) -> int:
        return len(self.a)

    def __getitem__(self, idx):
        if isinstance(idx, slice):
            start, stop, step = idx.indices(len(self))
            if step != 1:
                raise ValueError("trace slices must be contiguous")
            return Trace(
                a=self.a[start:stop],
                h=self.h[start:stop],
                p=self.p[start:stop],
                slot_len=self.slot_len,
                elec=None if self.elec is None else self.elec[start:stop],
                wind=None if self.wind is None else self.wind[start:stop],
                timestamps=None if self.timestamps is None else self.timestamps[start:stop],
            )
        return SlotInput(float(self.a[idx]), float(self.h[idx]), float(self.p[idx]))

    def __iter__(self) -> Iterator[SlotInput]:
        for t in range(len(self)):
            yield self[t]

    def window(self, t: int, omega: int) -> "Trace":
        """Slots ``t .. t+omega`` (0-based), truncated at the end of the horizon."""
        return self[t : t + omega + 1]

    def with_columns(self, **kw) -> "Trace":
        return replace(self, **kw)

    def price_violations(self, ext: ExternalSupplySpec) -> list[int]:
        """0-based slots whose price falls outside [Pmin, Pmax]."""
        bad = (self.p < ext.price_min_Pmin) | (self.p > ext.price_max_Pmax)
        return [int(i) for i in np.flatnonzero(bad)]

    def check_prices(self, ext: ExternalSupplySpec) -> None:
        bad = self.price_violations(ext)
        if bad:
            raise ValidationError(
                f"{len(bad)} slot(s) with price outside [{ext.price_min_Pmin}, {ext.price_max_Pmax}],"
                f" first at slot {bad[0] + 1}",
                bad,
            )


@dataclass(frozen=True)
class SlotDecision:
    on_y: tuple
    gen_u: tuple
    grid_v: float
    gas_s: float


@dataclass(frozen=True, eq=False)
class Schedule:
    """Commitment and dispatch over a horizon.

    ``y`` and ``u`` have shape ``(T, N)``; ``v`` and ``s`` have shape ``(T,)``.
    The initial commitment and output before slot 1 are zero.
    """

    y: np.ndarray
    u: np.ndarray
    v: np.ndarray
    s: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.y)
        u = np.asarray(self.u, dtype=float)
        if y.ndim == 1:
            y = y[:, None]
        if u.ndim == 1:
            u = u[:, None]
        y = _frozen(y, dtype=np.int8)
        u = _frozen(u)
        v = _frozen(self.v)
        s = _frozen(self.s)
        if y.shape != u.shape or v.shape != (y.shape[0],) or s.shape != v.shape:
            raise DataError(
                f"inconsistent schedule shapes y{y.shape} u{u.shape} v{v.shape} s{s.shape}"
            )
        if np.any((y != 0) & (y != 1)):
            raise DataError("commitments must be 0/1")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "s", s)

    def __len__(self) -> int:
        return self.y.shape[0]

    @property
    def n_gens(self) -> int:
        return self.y.shape[1]

    def decision(self, t: int) -> SlotDecision:
        return SlotDecision(
            tuple(int(x) for x in self.y[t]),
            tuple(float(x) for x in self.u[t]),
            float(self.v[t]),
            float(self.s[t]),
        )


@dataclass(frozen=True)
class CostBreakdown:
    grid_cost: float
    gas_cost: float
    gen_fuel_cost: float
    gen_idle_cost: float
    startup_cost: float
    total: float = field(default=float("nan"))

    def __post_init__(self):
        parts = (
            self.grid_cost,
            self.gas_cost,
            self.gen_fuel_cost,
            self.gen_idle_cost,
            self.startup_cost,
        )
        object.__setattr__(self, "total", float(sum(parts)))

    def as_dict(self) -> dict:
        return {
            "grid_cost": self.grid_cost,
            "gas_cost": self.gas_cost,
            "gen_fuel_cost": self.gen_fuel_cost,
            "gen_idle_cost": self.gen_idle_cost,
            "startup_cost": self.startup_cost,
            "total": self.total,
        }


# --------------------------------------------------------------------------
# per-slot dispatch


def dispatch(gen, ext, sigma: SlotInput, y: int, slot_len: float = 1.0):
    """Cost-minimising ``(u, v, s)`` for one slot given the commitment ``y``.

    Local output is zero when ``p + eta*c_g <= c_o``, follows the heat demand
    when ``p < c_o < p + eta*c_g`` and follows the electricity demand when
    ``c_o <= p``. At ``p + eta*c_g == c_o`` both the first two choices cost the
    same; the first (zero output) is returned.
    """
    check_assumptions(gen, ext)
    if y not in (0, 1):
        raise ConfigError(f"commitment must be 0 or 1, got {y}")
    a, h, p = sigma.net_power_a, sigma.heat_h, sigma.grid_price_p
    if not ext.price_min_Pmin <= p <= ext.price_max_Pmax:
        raise ConfigError(f"price {p} outside [{ext.price_min_Pmin}, {ext.price_max_Pmax}]")
    eta, cg, co = ext.heat_recovery_eta, ext.gas_heat_price_cg, gen.incremental_co
    cap = gen.capacity_L * y
    if p + eta * cg <= co:
        u = 0.0
    elif p < co:  # and co < p + eta*cg, which forces eta > 0
        u = min(h / eta, a, cap)
    else:
        u = min(a, cap)
    u = float(u)
    return u, max(a - u, 0.0), max(h - eta * u, 0.0)


def psi(gen, ext, sigma: SlotInput, y: int, slot_len: float = 1.0) -> float:
    """Money spent in one slot under the optimal dispatch for commitment ``y``."""
    u, v, s = dispatch(gen, ext, sigma, y, slot_len)
    return (
        gen.incremental_co * u
        + sigma.grid_price_p * v
        + ext.gas_heat_price_cg * s
        + gen.idle_cm * y
    ) * slot_len


def dispatch_arrays(gen, ext, a, h, p, y, capacity=None):
    """Vectorised :func:`dispatch` over arrays of slots.

    ``capacity`` overrides ``L * y`` (used when several units share a slot).
    Assumptions are not re-checked here.
    """
    a = np.asarray(a, dtype=float)
    h = np.asarray(h, dtype=float)
    p = np.asarray(p, dtype=float)
    eta, cg, co = ext.heat_recovery_eta, ext.gas_heat_price_cg, gen.incremental_co
    cap = gen.capacity_L * np.asarray(y, dtype=float) if capacity is None else np.asarray(capacity, dtype=float)
    cap = np.broadcast_to(cap, a.shape)
    low = p + eta * cg <= co
    high = ~low & (co <= p)
    if eta > 0:
        heat_follow = np.minimum(np.minimum(h / eta, a), cap)
    else:
        heat_follow = np.zeros_like(a)
    u = np.where(low, 0.0, np.where(high, np.minimum(a, cap), heat_follow))
    v = np.maximum(a - u, 0.0)
    s = np.maximum(h - eta * u, 0.0)
    return u, v, s


def psi_arrays(gen, ext, a, h, p, y, slot_len: float = 1.0):
    u, v, s = dispatch_arrays(gen, ext, a, h, p, y)
    y = np.asarray(y, dtype=float)
    return (gen.incremental_co * u + np.asarray(p) * v + ext.gas_heat_price_cg * s + gen.idle_cm * y) * slot_len


def net_demand(elec_demand, wind):
    """Electricity demand left after wind; surplus wind is curtailed."""
    elec = np.asarray(elec_demand, dtype=float)
    w = np.asarray(wind, dtype=float)
    if np.any(elec < 0) or np.any(w < 0):
        raise DataError("demand and wind must be >= 0")
    out = np.maximum(elec - w, 0.0)
    return float(out) if out.ndim == 0 else out


# --------------------------------------------------------------------------
# schedules and cost


def all_off_schedule(trace: Trace, n_gens: int = 1) -> Schedule:
    T = len(trace)
    return Schedule(
        y=np.zeros((T, n_gens), dtype=np.int8),
        u=np.zeros((T, n_gens)),
        v=trace.a.copy(),
        s=trace.h.copy(),
    )


def _startups(y: np.ndarray) -> np.ndarray:
    prev = np.vstack([np.zeros((1, y.shape[1]), dtype=y.dtype), y[:-1]])
    return np.maximum(y.astype(int) - prev.astype(int), 0)


def total_cost(schedule: Schedule, trace: Trace, gen, ext, n_gens: int | None = None) -> CostBreakdown:
    """Horizon cost of a feasible schedule, broken down by source."""
    if len(schedule) != len(trace):
        raise DataError(f"schedule length {len(schedule)} != trace length {len(trace)}")
    if n_gens is not None and n_gens != schedule.n_gens:
        raise DataError(f"schedule has {schedule.n_gens} generators, expected {n_gens}")
    problems = validate_schedule(schedule, trace, gen, ext, constraints_active=False)
    if problems:
        raise ValidationError(f"infeasible schedule: {problems[0]}", problems)
    ell = trace.slot_len
    return CostBreakdown(
        grid_cost=float(np.sum(trace.p * schedule.v) * ell),
        gas_cost=float(ext.gas_heat_price_cg * np.sum(schedule.s) * ell),
        gen_fuel_cost=float(gen.incremental_co * np.sum(schedule.u) * ell),
        gen_idle_cost=float(gen.idle_cm * np.sum(schedule.y) * ell),
        startup_cost=float(gen.startup_beta * np.sum(_startups(schedule.y))),
    )


def baseline_cost(trace: Trace, ext) -> float:
    """Cost of serving everything from the grid and gas heating."""
    # same operations as total_cost on the all-off schedule, so the two agree bit for bit
    grid = float(np.sum(trace.p * trace.a) * trace.slot_len)
    gas = float(ext.gas_heat_price_cg * np.sum(trace.h) * trace.slot_len)
    return float(sum((grid, gas, 0.0, 0.0, 0.0)))


@dataclass(frozen=True)
class Violation:
    constraint: str
    slot: int  # 1-based
    generator: int | None
    slack: float  # how far the constraint is broken (> 0)

    def __str__(self):
        who = "" if self.generator is None else f" generator {self.generator}"
        return f"{self.constraint} violated at slot {self.slot}{who} by {self.slack:.6g}"


def _tol(scale) -> float:
    return 1e-9 * max(1.0, float(scale))


def validate_schedule(schedule: Schedule, trace: Trace, gen, ext, constraints_active=True) -> list:
    """All constraint violations of ``schedule``; empty when feasible.

    Output cap and the two balance constraints are always checked. With
    ``constraints_active`` the ramp limits and minimum on/off times of ``gen``
    are checked too, skipping any that cannot bind.
    """
    if len(schedule) != len(trace):
        raise DataError(f"schedule length {len(schedule)} != trace length {len(trace)}")
    out: list[Violation] = []
    y, u, v, s = schedule.y, schedule.u, schedule.v, schedule.s
    L, eta = gen.capacity_L, ext.heat_recovery_eta
    T, N = y.shape
    tol = _tol(max(L, float(np.max(trace.a)), float(np.max(trace.h))))

    for t, n in zip(*np.nonzero(u < -tol)):
        out.append(Violation("output_cap", int(t) + 1, int(n), float(-u[t, n])))
    over = u - L * y
    for t, n in zip(*np.nonzero(over > tol)):
        out.append(Violation("output_cap", int(t) + 1, int(n), float(over[t, n])))
    for name, col in (("grid_nonneg", v), ("gas_nonneg", s)):
        for t in np.flatnonzero(col < -tol):
            out.append(Violation(name, int(t) + 1, None, float(-col[t])))
    short_e = trace.a - (u.sum(axis=1) + v)
    for t in np.flatnonzero(short_e > tol):
        out.append(Violation("electricity_balance", int(t) + 1, None, float(short_e[t])))
    short_h = trace.h - (eta * u.sum(axis=1) + s)
    for t in np.flatnonzero(short_h > tol):
        out.append(Violation("heat_balance", int(t) + 1, None, float(short_h[t])))

    if constraints_active:
        u_prev = np.vstack([np.zeros((1, N)), u[:-1]])
        if math.isfinite(gen.ramp_up_Rup):
            up = (u - u_prev) - gen.ramp_up_Rup
            for t, n in zip(*np.nonzero(up > tol)):
                out.append(Violation("ramp_up", int(t) + 1, int(n), float(up[t, n])))
        if math.isfinite(gen.ramp_down_Rdw):
            dw = (u_prev - u) - gen.ramp_down_Rdw
            for t, n in zip(*np.nonzero(dw > tol)):
                out.append(Violation("ramp_down", int(t) + 1, int(n), float(dw[t, n])))
        for n in range(N):
            out.extend(_dwell_violations(y[:, n], gen.min_on_Ton, gen.min_off_Toff, n))
    out.sort(key=lambda v_: (v_.slot, v_.constraint, -1 if v_.generator is None else v_.generator))
    return out


def _dwell_violations(col, t_on: int, t_off: int, n: int) -> list:
    out = []
    T = len(col)
    prev = 0
    for t in range(T):
        cur = int(col[t])
        if cur > prev and t_on > 1:
            for tau in range(t + 1, min(t + t_on, T)):
                if col[tau] != 1:
                    out.append(Violation("min_on", tau + 1, n, 1.0))
        elif cur < prev and t_off > 1:
            for tau in range(t + 1, min(t + t_off, T)):
                if col[tau] != 0:
                    out.append(Violation("min_off", tau + 1, n, 1.0))
        prev = cur
    return out


# --------------------------------------------------------------------------
# reference parameter sets


def reference_params(name: str, constrained: bool = False):
    """``(GeneratorSpec, ExternalSupplySpec, n_gens)`` for a named parameter set.

    ``"S0"`` is a desk-scale set with unit capacity. ``"P1"`` is the
    full-scale campus microgrid: 3 MW units, a utility tariff price range and ten
    units. ``constrained`` switches on P1's 3 h dwell times and 1 MW/h ramps.
    """
    if name == "S0":
        gen = GeneratorSpec(capacity_L=1.0, startup_beta=2.0, idle_cm=0.1, incremental_co=1.0)
        ext = ExternalSupplySpec(
            gas_heat_price_cg=0.5, heat_recovery_eta=1.0, price_min_Pmin=0.01, price_max_Pmax=2.0
        )
        return gen, ext, 1
    if name == "P1":
        gen = GeneratorSpec(
            capacity_L=3000.0,
            startup_beta=1400.0,
            idle_cm=110.0,
            incremental_co=0.051,
            min_on_Ton=3 if constrained else 0,
            min_off_Toff=3 if constrained else 0,
            ramp_up_Rup=1000.0 if constrained else math.inf,
            ramp_down_Rdw=1000.0 if constrained else math.inf,
        )
        ext = ExternalSupplySpec(
            gas_heat_price_cg=0.0179, heat_recovery_eta=1.8, price_min_Pmin=0.056, price_max_Pmax=0.232
        )
        return gen, ext, 10
    raise ConfigError(f"unknown parameter set {name!r}")

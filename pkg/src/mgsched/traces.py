"""Trace files, the seasonal synthetic generator and forecast-error injection.

CSV layout, one row per slot in time order::

    timestamp,elec_demand_kw,heat_demand_kw,wind_kw,price_usd_per_kwh
    2002-01-01T00:00,16000.0,21000.0,3500.0,0.072

Timestamps are ISO 8601 and evenly spaced; the spacing sets the slot length
in hours.
"""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, fields
from datetime import datetime, timedelta
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError
from .model import Trace, net_demand

__all__ = [
    "CSV_HEADER",
    "load_trace",
    "write_trace",
    "SynthSpec",
    "synth_trace",
    "tou_price",
    "inject_forecast_error",
    "NoisyForecast",
]

CSV_HEADER = ("timestamp", "elec_demand_kw", "heat_demand_kw", "wind_kw", "price_usd_per_kwh")


def load_trace(path, ext=None) -> Trace:
    """Read a trace CSV; with ``ext`` given, prices are checked against its bounds."""
    path = Path(path)
    try:
        fh = path.open(newline="")
    except OSError as exc:
        raise DataError(f"cannot read trace {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != CSV_HEADER:
            raise DataError(f"{path}: header must be {','.join(CSV_HEADER)}, got {header}")
        stamps, cols = [], []
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(CSV_HEADER):
                raise DataError(f"{path}: row {line} has {len(row)} fields, expected {len(CSV_HEADER)}")
            try:
                stamp = datetime.fromisoformat(row[0].strip())
                values = [float(c) for c in row[1:]]
            except ValueError as exc:
                raise DataError(f"{path}: row {line} is malformed: {exc}") from exc
            if not all(math.isfinite(x) and x >= 0 for x in values):
                raise DataError(f"{path}: row {line} has a negative or non-finite value")
            stamps.append(stamp)
            cols.append(values)
    if not cols:
        raise DataError(f"{path}: no slots")
    data = np.array(cols)
    slot_len = 1.0
    if len(stamps) > 1:
        steps = {b - a for a, b in zip(stamps, stamps[1:])}
        if len(steps) != 1:
            raise DataError(f"{path}: timestamps are not evenly spaced")
        step = steps.pop()
        if step <= timedelta(0):
            raise DataError(f"{path}: timestamps must increase")
        slot_len = step.total_seconds() / 3600.0
    elec, heat, wind, price = data.T
    trace = Trace(
        a=net_demand(elec, wind),
        h=heat,
        p=price,
        slot_len=slot_len,
        elec=elec,
        wind=wind,
        timestamps=tuple(s.isoformat(timespec="minutes") for s in stamps),
    )
    if ext is not None:
        trace.check_prices(ext)
    return trace


def write_trace(trace: Trace, path, start: str = "2002-01-01T00:00") -> None:
    """Write a trace in the CSV layout; wind defaults to zero when unknown."""
    T = len(trace)
    elec = trace.elec if trace.elec is not None else trace.a
    wind = trace.wind if trace.wind is not None else np.zeros(T)
    if trace.timestamps is not None:
        stamps = trace.timestamps
    else:
        t0 = datetime.fromisoformat(start)
        step = timedelta(hours=trace.slot_len)
        stamps = [(t0 + k * step).isoformat(timespec="minutes") for k in range(T)]
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for k in range(T):
            w.writerow([stamps[k], repr(float(elec[k])), repr(float(trace.h[k])), repr(float(wind[k])), repr(float(trace.p[k]))])


# --------------------------------------------------------------------------
# synthetic traces


@dataclass(frozen=True)
class SynthSpec:
    """Shape of a synthetic hourly trace. Powers in kW.

    Demand is a base level plus a daytime bump (scaled down on weekends), a
    seasonal term and Gaussian noise. Heat peaks in winter. Wind is a mean
    fraction of installed capacity driven by a seeded AR(1) process.
    """

    year: int = 2002
    days: int = 365
    elec_base_kw: float = 12500.0
    elec_daily_kw: float = 11000.0
    elec_summer_kw: float = 2500.0
    elec_noise_kw: float = 700.0
    weekend_factor: float = 0.45
    heat_base_kw: float = 11000.0
    heat_winter_kw: float = 9000.0
    heat_daily_kw: float = 5000.0
    heat_noise_kw: float = 800.0
    wind_installed_kw: float = 12000.0
    wind_mean_frac: float = 0.3
    wind_persistence: float = 0.85
    wind_volatility: float = 0.12

    def __post_init__(self):
        if self.days < 1:
            raise ConfigError("days must be >= 1")
        if not 0 <= self.weekend_factor <= 1:
            raise ConfigError("weekend_factor must lie in [0, 1]")
        if not 0 <= self.wind_persistence < 1:
            raise ConfigError("wind_persistence must lie in [0, 1)")
        if not 0 <= self.wind_mean_frac <= 1:
            raise ConfigError("wind_mean_frac must lie in [0, 1]")
        for f in fields(self):
            if f.name not in ("year", "days") and getattr(self, f.name) < 0:
                raise ConfigError(f"{f.name} must be >= 0")

    @classmethod
    def from_dict(cls, d: dict) -> "SynthSpec":
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown synthetic-trace fields: {sorted(extra)}")
        return cls(**d)

    def as_dict(self) -> dict:
        return asdict(self)


def _is_summer(month: int) -> bool:
    return 5 <= month <= 10


def tou_price(stamp: datetime) -> float:
    """Time-of-use grid price ($/kWh) for the hour starting at ``stamp``."""
    weekday = stamp.weekday() < 5
    hr = stamp.hour
    if _is_summer(stamp.month):
        if weekday and 12 <= hr < 18:
            return 0.232
        if weekday and 8 <= hr < 12:
            return 0.103
        return 0.056
    if weekday and 8 <= hr < 22:
        return 0.116
    return 0.072


def synth_trace(spec: SynthSpec, seed: int) -> Trace:
    """Deterministic hourly trace for ``spec`` and ``seed``."""
    rng = np.random.default_rng(seed)
    T = spec.days * 24
    t0 = datetime(spec.year, 1, 1)
    stamps = [t0 + timedelta(hours=k) for k in range(T)]
    hours = np.array([s.hour for s in stamps], dtype=float)
    weekday = np.array([s.weekday() < 5 for s in stamps])
    doy = np.array([s.timetuple().tm_yday for s in stamps], dtype=float)

    # daytime bump peaking mid-afternoon, zero at night
    daily = np.clip(np.sin(np.pi * (hours - 7.0) / 14.0), 0.0, None)
    week = np.where(weekday, 1.0, spec.weekend_factor)
    summer = 0.5 * (1 - np.cos(2 * np.pi * (doy - 15.0) / 365.0))  # 0 mid-Jan, 1 mid-July
    winter = 1.0 - summer

    elec = (
        spec.elec_base_kw
        + spec.elec_daily_kw * daily * week
        + spec.elec_summer_kw * summer
        + spec.elec_noise_kw * rng.standard_normal(T)
    )
    heat = (
        spec.heat_base_kw
        + spec.heat_winter_kw * winter
        + spec.heat_daily_kw * daily * week
        + spec.heat_noise_kw * rng.standard_normal(T)
    )
    z = np.empty(T)
    phi = spec.wind_persistence
    noise = rng.standard_normal(T) * spec.wind_volatility
    prev = 0.0
    for k in range(T):
        prev = phi * prev + noise[k]
        z[k] = prev
    wind = spec.wind_installed_kw * np.clip(spec.wind_mean_frac + z, 0.0, 1.0)
    elec = np.clip(elec, 0.0, None)
    heat = np.clip(heat, 0.0, None)
    price = np.array([tou_price(s) for s in stamps])
    return Trace(
        a=net_demand(elec, wind),
        h=heat,
        p=price,
        slot_len=1.0,
        elec=elec,
        wind=wind,
        timestamps=tuple(s.isoformat(timespec="minutes") for s in stamps),
    )


# --------------------------------------------------------------------------
# forecast errors


def inject_forecast_error(
    true_window: Trace,
    wind_std_frac: float,
    heat_std_frac: float,
    installed_wind_kw: float,
    peak_heat_kw: float,
    seed,
) -> Trace:
    """Perturb every slot of the window after the first with Gaussian errors.

    Wind gets noise of std ``wind_std_frac * installed_wind_kw`` and heat of
    std ``heat_std_frac * peak_heat_kw``; both are clamped at zero and net
    demand is recomputed from the noisy wind. ``seed`` may be an int or a
    sequence of ints.
    """
    for name, frac in (("wind_std_frac", wind_std_frac), ("heat_std_frac", heat_std_frac)):
        if not 0 <= frac <= 1.2:
            raise ConfigError(f"{name} must lie in [0, 1.2], got {frac}")
    n = len(true_window)
    if n <= 1 or (wind_std_frac == 0 and heat_std_frac == 0):
        return true_window
    rng = np.random.default_rng(seed)
    wind_noise = rng.standard_normal(n - 1) * (wind_std_frac * installed_wind_kw)
    heat_noise = rng.standard_normal(n - 1) * (heat_std_frac * peak_heat_kw)
    h = np.array(true_window.h)
    h[1:] = np.maximum(h[1:] + heat_noise, 0.0)
    if true_window.wind is None or true_window.elec is None:
        # without the split, treat the noise as an error in net demand
        a = np.array(true_window.a)
        a[1:] = np.maximum(a[1:] - wind_noise, 0.0)
        return Trace(a=a, h=h, p=true_window.p, slot_len=true_window.slot_len)
    wind = np.array(true_window.wind)
    wind[1:] = np.maximum(wind[1:] + wind_noise, 0.0)
    a = net_demand(true_window.elec, wind)
    a[0] = true_window.a[0]
    return Trace(
        a=a,
        h=h,
        p=true_window.p,
        slot_len=true_window.slot_len,
        elec=true_window.elec,
        wind=wind,
    )


class NoisyForecast:
    """Look-ahead windows with Gaussian errors on wind and heat.

    The draw for the window issued at slot ``t`` is seeded by ``(seed, t)``,
    so a run is reproducible and independent of which policy asks.
    """

    exact = False

    def __init__(self, wind_std_frac, heat_std_frac, installed_wind_kw, peak_heat_kw, seed: int):
        self.wind_std_frac = float(wind_std_frac)
        self.heat_std_frac = float(heat_std_frac)
        self.installed_wind_kw = float(installed_wind_kw)
        self.peak_heat_kw = float(peak_heat_kw)
        self.seed = int(seed)

    def window(self, trace: Trace, t: int, omega: int) -> Trace:
        true = trace.window(t, omega)
        return inject_forecast_error(
            true,
            self.wind_std_frac,
            self.heat_std_frac,
            self.installed_wind_kw,
            self.peak_heat_kw,
            [self.seed, t],
        )
